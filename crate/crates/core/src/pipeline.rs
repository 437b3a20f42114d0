//! The whole inference for one compilation unit: constraints, unification,
//! least typings, generated generics and the rendered outputs.
//!
//! Classes are inferred one at a time, callees first, so that a class
//! calling into another sees that class's inferred signatures in the table.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;

use crate::constraints::{flatten, generate_class, ClassConstraints, Owner, SlotKind};
use crate::emit::{
    assemble_intersection, canonical_names, descriptor, display_descriptor, format_signature, format_typing,
    generic_params, to_ann, to_vars, typing_key,
};
use crate::error::{Error, Result};
use crate::funtype::{collect_used, hierarchy, manifest};
use crate::generics::{generate_generics, Bound, Generics};
use crate::syntax::{
    parse, print_program, walk_stmts, ClassDecl, Expr, ExprKind, LambdaBody, NodeId, Program, Stmt, TypeSlot,
};
use crate::table::{build_class_table_with, Builtins, ClassTable, MethodSig, Variance};
use crate::types::{alpha_index, simple_name, NameSupply, Tph, Type};
use crate::unify::{dump, select_least, unify_with, Failure, Solution, UnifyOptions, UnifyOutcome};

#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Report at most this many typings per class.
    pub max_solutions: Option<usize>,
    /// Stop unifying a candidate at its first solution without remaining
    /// constraints. Used when checking already typed programs.
    pub first_closed: bool,
}

/// Result for one class.
#[derive(Debug, Clone)]
pub struct ClassResult {
    pub name: String,
    pub index: usize,
    pub constraints: ClassConstraints,
    /// Number of constraint sets after expanding or-groups.
    pub candidates: usize,
    /// All unifiers of all candidates, in candidate order.
    pub solutions: Vec<Solution>,
    /// Indices of the least typings in `solutions`.
    pub least: Vec<usize>,
    /// Generics per least typing, parallel to `least`.
    pub generics: Vec<Generics>,
    /// Position in `least` of the typing shown in the typed source.
    pub chosen: usize,
    /// Display names per least typing, parallel to `least`.
    pub names: Vec<BTreeMap<Tph, String>>,
    /// Per method: its intersection of typings in report order.
    pub signatures: Vec<Vec<MethodSig>>,
    /// The class with every omitted declaration type filled in.
    pub typed: ClassDecl,
    /// Function types of all least typings.
    pub used_funs: BTreeSet<Type>,
    pub truncated: bool,
}

impl ClassResult {
    pub fn chosen_solution(&self) -> &Solution {
        &self.solutions[self.least[self.chosen]]
    }

    pub fn chosen_generics(&self) -> &Generics {
        &self.generics[self.chosen]
    }
}

#[derive(Debug, Clone)]
pub struct Inference {
    pub program: Program,
    /// The table after all classes were inferred.
    pub table: ClassTable,
    /// Per class, in source order.
    pub classes: Vec<ClassResult>,
    pub typed: Program,
}

pub fn infer_source(src: &str, builtins: &Builtins, opts: &Options) -> Result<Inference> {
    let program = parse(src)?;
    infer_program(program, builtins, opts)
}

pub fn infer_program(program: Program, builtins: &Builtins, opts: &Options) -> Result<Inference> {
    let mut table = build_class_table_with(&program, builtins)?;
    let mut supply = NameSupply::new();
    let mut results: Vec<Option<ClassResult>> = vec![None; program.classes.len()];
    let reserved: HashSet<String> = table
        .entries()
        .iter()
        .map(|e| simple_name(&e.name).to_string())
        .chain(program.classes.iter().map(|c| c.name.clone()))
        .collect();
    for index in class_order(&program) {
        let r = infer_class(&program, index, &table, &mut supply, &reserved, opts)?;
        update_table(&mut table, &program.classes[index], &r);
        results[index] = Some(r);
    }
    let classes: Vec<ClassResult> = results.into_iter().map(|r| r.expect("every class inferred")).collect();
    let typed = Program { imports: program.imports.clone(), classes: classes.iter().map(|c| c.typed.clone()).collect() };
    Ok(Inference { program, table, classes, typed })
}

/// Callees first; classes in a reference cycle in source order.
fn class_order(program: &Program) -> Vec<usize> {
    let mut g: DiGraph<usize, ()> = DiGraph::new();
    let nodes: Vec<_> = (0..program.classes.len()).map(|i| g.add_node(i)).collect();
    for (i, c) in program.classes.iter().enumerate() {
        let used = referenced_members(c);
        for (j, d) in program.classes.iter().enumerate() {
            if i == j {
                continue;
            }
            let member = d.methods.iter().any(|m| used.contains(&m.name)) || d.fields.iter().any(|f| used.contains(&f.name));
            if member || used.contains(&d.name) {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .flat_map(|scc| {
            let mut v: Vec<usize> = scc.into_iter().map(|n| g[n]).collect();
            v.sort();
            v
        })
        .collect()
}

/// Names a class uses from elsewhere: classes it instantiates and members
/// it accesses through a receiver.
fn referenced_members(c: &ClassDecl) -> HashSet<String> {
    let mut out = HashSet::new();
    let mut visit = |e: &Expr| match &e.kind {
        ExprKind::New { class, .. } => {
            out.insert(class.clone());
        }
        ExprKind::Call { receiver: Some(_), name, .. } | ExprKind::Field { name, .. } => {
            out.insert(name.clone());
        }
        _ => {}
    };
    for f in &c.fields {
        if let Some(e) = &f.init {
            crate::syntax::walk_expr(e, &mut visit);
        }
    }
    for m in &c.methods {
        walk_stmts(&m.body, &mut visit);
    }
    out
}

fn infer_class(
    program: &Program,
    index: usize,
    table: &ClassTable,
    supply: &mut NameSupply,
    reserved: &HashSet<String>,
    opts: &Options,
) -> Result<ClassResult> {
    let decl = &program.classes[index];
    let cc = generate_class(program, index, table, supply)?;
    let solving = cc.solving_table(table);
    let table = &solving;
    let sets = flatten(&cc.set, table);
    if sets.is_empty() {
        let origin = cc.set.groups.first().map_or(decl.pos, |g| g.origin);
        return Err(Error::Untypable { pos: origin, msg: format!("no typing for class `{}`: every alternative contradicts", decl.name) });
    }
    let uopts = UnifyOptions { stop_at_closed: opts.first_closed, ..UnifyOptions::default() };
    let outcomes: Vec<UnifyOutcome> = sets.par_iter().map(|s| unify_with(s, table, cc.supply.clone(), &uopts)).collect();
    let truncated = outcomes.iter().any(|o| o.truncated);
    let solutions: Vec<Solution> = outcomes.iter().flat_map(|o| o.solutions.iter().cloned()).collect();
    if solutions.is_empty() {
        return Err(untypable(decl, &outcomes));
    }
    // Later classes draw fresh names after everything used here.
    let used = solutions
        .iter()
        .flat_map(|s| s.remaining.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).chain(s.sigma.values().flat_map(|t| t.tphs())))
        .filter_map(|t| alpha_index(t.name()))
        .max()
        .map_or(0, |i| i + 1);
    if used > supply.position() {
        *supply = NameSupply::starting_at(used);
    }

    let slot_types: Vec<Type> = cc.slots.iter().map(|s| s.ty.clone()).collect();
    let mut least = select_least(&solutions, &slot_types, table);
    let generics: Vec<Generics> = least.iter().map(|&i| generate_generics(&cc, &solutions[i])).collect();
    let names: Vec<BTreeMap<Tph, String>> =
        least.iter().zip(&generics).map(|(&i, g)| display_names(&cc, &solutions[i], g, reserved)).collect();
    let per_solution: Vec<Vec<MethodSig>> = least
        .iter()
        .zip(&generics)
        .zip(&names)
        .map(|((&i, g), n)| method_typings(decl, &cc, &solutions[i], g, n))
        .collect();

    // The shown typing: smallest in report order.
    let mut order: Vec<usize> = (0..least.len()).collect();
    order.sort_by_key(|&k| per_solution[k].iter().map(typing_key).collect::<Vec<_>>());
    let mut keep = order.clone();
    let mut truncated = truncated;
    if let Some(max) = opts.max_solutions {
        if keep.len() > max {
            keep.truncate(max.max(1));
            truncated = true;
        }
    }
    keep.sort();
    let chosen = keep.iter().position(|&k| k == order[0]).unwrap_or(0);
    let generics: Vec<Generics> = keep.iter().map(|&k| generics[k].clone()).collect();
    let names: Vec<BTreeMap<Tph, String>> = keep.iter().map(|&k| names[k].clone()).collect();
    let per_solution: Vec<Vec<MethodSig>> = keep.iter().map(|&k| per_solution[k].clone()).collect();
    least = keep.iter().map(|&k| least[k]).collect();

    let signatures: Vec<Vec<MethodSig>> = (0..decl.methods.len())
        .map(|m| assemble_intersection(per_solution.iter().map(|typings| typings[m].clone())))
        .collect();

    let mut used_funs = BTreeSet::new();
    for ((&i, g), n) in least.iter().zip(&generics).zip(&names) {
        let finals: Vec<Type> = cc.slots.iter().map(|s| to_vars(&g.apply(&solutions[i], &s.ty), n)).collect();
        used_funs.extend(collect_used(finals.iter()));
    }

    let typed = typed_class(decl, &cc, &solutions[least[chosen]], &generics[chosen], &names[chosen], &signatures);
    for (m, typings) in signatures.iter().enumerate() {
        let mut seen = BTreeMap::new();
        for t in typings {
            let d = descriptor(t);
            if let Some(prev) = seen.insert(d.clone(), t) {
                if prev != t {
                    return Err(Error::DescriptorCollision { method: format!("{}.{}", decl.name, decl.methods[m].name), descriptor: d });
                }
            }
        }
    }
    Ok(ClassResult {
        name: decl.name.clone(),
        index,
        constraints: cc,
        candidates: sets.len(),
        solutions,
        least,
        generics,
        chosen,
        names,
        signatures,
        typed,
        used_funs,
        truncated,
    })
}

fn untypable(decl: &ClassDecl, outcomes: &[UnifyOutcome]) -> Error {
    let best: Option<&Failure> = outcomes.iter().filter_map(|o| o.failure.as_ref()).min_by_key(|f| f.unresolved);
    match best {
        Some(f) => Error::Untypable {
            pos: f.constraint.origin,
            msg: format!(
                "no typing for class `{}`: cannot satisfy `{}` (reported from the branch that got furthest)",
                decl.name, f.constraint
            ),
        },
        None => Error::Untypable { pos: decl.pos, msg: format!("no typing for class `{}`", decl.name) },
    }
}

/// Display names for the placeholders of one typing, in order of first use
/// in the declarations.
fn display_names(cc: &ClassConstraints, sol: &Solution, g: &Generics, reserved: &HashSet<String>) -> BTreeMap<Tph, String> {
    // A parameter is followed by the parameters in its bounds.
    fn push(t: Tph, g: &Generics, order: &mut Vec<Tph>) {
        if order.contains(&t) {
            return;
        }
        order.push(t.clone());
        if let Some(owner) = g.family.owner_of(&t) {
            for b in g.family.member(owner).get(&t).into_iter().flatten() {
                if let Bound::Tph(u) = b {
                    push(u.clone(), g, order);
                }
            }
        }
    }
    let mut order: Vec<Tph> = Vec::new();
    for s in &cc.slots {
        for t in g.apply(sol, &s.ty).tphs() {
            push(t, g, &mut order);
        }
    }
    for o in g.family.owners() {
        for t in g.family.member(o).keys() {
            if !order.contains(t) {
                order.push(t.clone());
            }
        }
    }
    canonical_names(order.iter(), reserved)
}

/// Member parameters in display order.
fn member_params(g: &Generics, owner: Owner, names: &BTreeMap<Tph, String>) -> Vec<(Tph, Vec<Bound>)> {
    let mut ps: Vec<(Tph, Vec<Bound>)> =
        g.family.member(owner).iter().map(|(t, bs)| (t.clone(), bs.iter().cloned().collect())).collect();
    ps.sort_by_key(|(t, _)| names.get(t).map(|n| (n.len(), n.clone())));
    ps
}

fn method_typings(decl: &ClassDecl, cc: &ClassConstraints, sol: &Solution, g: &Generics, names: &BTreeMap<Tph, String>) -> Vec<MethodSig> {
    cc.signatures
        .iter()
        .enumerate()
        .map(|(i, (params, ret))| {
            let fin = |t: &Type| to_vars(&g.apply(sol, t), names);
            let generics = member_params(g, Owner::Method(i), names)
                .into_iter()
                .map(|(t, bs)| {
                    let bounds = bs
                        .into_iter()
                        .filter_map(|b| match b {
                            Bound::Object => None,
                            Bound::Tph(u) => Some(fin(&Type::Tph(u))),
                        })
                        .collect();
                    (names[&t].clone(), bounds)
                })
                .collect();
            MethodSig { name: decl.methods[i].name.clone(), generics, params: params.iter().map(fin).collect(), ret: fin(ret) }
        })
        .collect()
}

/// The class with all omitted declaration types filled in. Lambda
/// parameters stay unannotated; their type follows from the context.
fn typed_class(
    decl: &ClassDecl,
    cc: &ClassConstraints,
    sol: &Solution,
    g: &Generics,
    names: &BTreeMap<Tph, String>,
    signatures: &[Vec<MethodSig>],
) -> ClassDecl {
    let types: BTreeMap<NodeId, Type> = cc
        .slots
        .iter()
        .filter(|s| s.kind != SlotKind::LambdaParam)
        .map(|s| (s.node, to_vars(&g.apply(sol, &s.ty), names)))
        .collect();
    let fill = |slot: &mut TypeSlot, node: NodeId| {
        if slot.is_infer() {
            if let Some(t) = types.get(&node) {
                *slot = TypeSlot::Annotated(to_ann(t));
            }
        }
    };
    let mut out = decl.clone();
    out.generics.extend(generic_params(&member_params(g, Owner::Class, names), names));
    for f in &mut out.fields {
        fill(&mut f.ty, f.id);
    }
    for (i, m) in out.methods.iter_mut().enumerate() {
        fill(&mut m.ret, m.id);
        for p in &mut m.params {
            fill(&mut p.ty, p.id);
        }
        fill_locals(&mut m.body, &fill);
        m.generics.extend(generic_params(&member_params(g, Owner::Method(i), names), names));
        let typings = &signatures[i];
        if typings.len() > 1 {
            m.doc = typings
                .iter()
                .enumerate()
                .map(|(k, t)| if k == 0 { format!("{} : {}", m.name, format_typing(t)) } else { format!("  & {}", format_typing(t)) })
                .collect();
        }
    }
    out
}

fn fill_locals(stmts: &mut [Stmt], fill: &impl Fn(&mut TypeSlot, NodeId)) {
    for s in stmts {
        match s {
            Stmt::Local { id, ty, init, .. } => {
                fill(ty, *id);
                if let Some(e) = init {
                    fill_expr(e, fill);
                }
            }
            Stmt::While { cond, body, .. } => {
                fill_expr(cond, fill);
                fill_locals(body, fill);
            }
            Stmt::Return { value: Some(e), .. } | Stmt::Expr(e) => fill_expr(e, fill),
            Stmt::Return { value: None, .. } => {}
            Stmt::Block(b) => fill_locals(b, fill),
        }
    }
}

/// Locals inside block-bodied lambdas.
fn fill_expr(e: &mut Expr, fill: &impl Fn(&mut TypeSlot, NodeId)) {
    match &mut e.kind {
        ExprKind::Lambda { body: LambdaBody::Block(b), .. } => fill_locals(b, fill),
        ExprKind::Lambda { body: LambdaBody::Expr(x), .. } => fill_expr(x, fill),
        ExprKind::Assign { target, value } => {
            fill_expr(target, fill);
            fill_expr(value, fill);
        }
        ExprKind::PostInc(x) => fill_expr(x, fill),
        ExprKind::Binary { lhs, rhs, .. } => {
            fill_expr(lhs, fill);
            fill_expr(rhs, fill);
        }
        ExprKind::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                fill_expr(r, fill);
            }
            args.iter_mut().for_each(|a| fill_expr(a, fill));
        }
        ExprKind::Field { receiver, .. } => fill_expr(receiver, fill),
        ExprKind::New { args, .. } => args.iter_mut().for_each(|a| fill_expr(a, fill)),
        ExprKind::Lit(_) | ExprKind::Var(_) | ExprKind::This => {}
    }
}

/// Publish the inferred class to the table for the classes inferred after
/// it. Method generics get a `'` suffix so they cannot clash with class
/// parameters.
fn update_table(table: &mut ClassTable, decl: &ClassDecl, r: &ClassResult) {
    let names = &r.names[r.chosen];
    let g = r.chosen_generics();
    let sol = r.chosen_solution();
    let params: Vec<String> = decl
        .generics
        .iter()
        .map(|p| p.name.clone())
        .chain(member_params(g, Owner::Class, names).into_iter().map(|(t, _)| names[&t].clone()))
        .collect();
    let fields: Vec<(String, Type)> = decl
        .fields
        .iter()
        .zip(&r.constraints.field_types)
        .map(|(f, t)| (f.name.clone(), to_vars(&g.apply(sol, t), names)))
        .collect();
    let methods: Vec<MethodSig> = r
        .signatures
        .iter()
        .flatten()
        .map(|sig| {
            let local: HashSet<&str> = sig.generics.iter().map(|(n, _)| n.as_str()).collect();
            let ren = |t: &Type| t.subst_vars(&|v| local.contains(v).then(|| Type::Var(format!("{v}'"))));
            MethodSig {
                name: sig.name.clone(),
                generics: sig.generics.iter().map(|(n, bs)| (format!("{n}'"), bs.iter().map(ren).collect())).collect(),
                params: sig.params.iter().map(ren).collect(),
                ret: ren(&sig.ret),
            }
        })
        .collect();
    if let Some(entry) = table.get_mut(&decl.name) {
        entry.variance = vec![Variance::Invariant; params.len()];
        entry.params = params;
        entry.fields = fields;
        entry.methods = methods;
    }
}

impl Inference {
    pub fn typed_source(&self) -> String {
        print_program(&self.typed)
    }

    /// `Class.m : T -> R & ...`, one line per method declaration.
    pub fn signatures_text(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            let decl = &self.program.classes[c.index];
            for (m, typings) in c.signatures.iter().enumerate() {
                let _ = writeln!(out, "{}", format_signature(&c.name, &decl.methods[m].name, typings));
            }
        }
        out
    }

    /// One descriptor per typing, strict form first and the display form
    /// after `#`.
    pub fn descriptors_text(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            let decl = &self.program.classes[c.index];
            for (m, typings) in c.signatures.iter().enumerate() {
                for t in typings {
                    let _ = writeln!(out, "{}.{} {}  # {}", c.name, decl.methods[m].name, descriptor(t), display_descriptor(t));
                }
            }
        }
        out
    }

    pub fn used_fun_types(&self) -> BTreeSet<Type> {
        self.classes.iter().flat_map(|c| c.used_funs.iter().cloned()).collect()
    }

    pub fn funifaces_text(&self) -> String {
        manifest(&hierarchy(&self.used_fun_types(), &self.table))
    }

    pub fn constraints_dump(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            let _ = writeln!(out, "class {}:", c.name);
            out.push_str(&c.constraints.set.to_string());
        }
        out
    }

    pub fn unifiers_dump(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            let _ = writeln!(out, "class {}:", c.name);
            let outcome = UnifyOutcome { solutions: c.least.iter().map(|&i| c.solutions[i].clone()).collect(), ..Default::default() };
            out.push_str(&dump(&outcome));
        }
        out
    }

    pub fn generics_dump(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            let ids = self.program.classes[c.index].method_ids();
            let g = c.chosen_generics();
            out.push_str("FGG\n");
            out.push_str(&g.fgg.dump(&c.name, &ids));
            out.push_str("CFGG\n");
            out.push_str(&g.cfgg.dump(&c.name, &ids));
            out.push_str("conform\n");
            out.push_str(&g.family.dump(&c.name, &ids));
        }
        out
    }
}

/// Outcome of feeding a typed program back through inference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recheck {
    /// Classes without a typing free of remaining constraints.
    pub open: Vec<String>,
}

impl Recheck {
    pub fn ok(&self) -> bool {
        self.open.is_empty()
    }
}

/// Infer `src` again and report the classes that do not type-check with
/// empty remaining constraints.
pub fn recheck(src: &str, builtins: &Builtins) -> Result<Recheck> {
    let opts = Options { first_closed: true, ..Options::default() };
    let inf = infer_source(src, builtins, &opts)?;
    let open = inf
        .classes
        .iter()
        .filter(|c| !c.solutions.iter().any(|s| s.remaining.is_empty()))
        .map(|c| c.name.clone())
        .collect();
    Ok(Recheck { open })
}
