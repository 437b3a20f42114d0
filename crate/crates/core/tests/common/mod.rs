//! Oracles shared by the acceptance harness and the property tests. None of
//! them call back into the code under test except through its public
//! results.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use tx_infer::constraints::{Constraint, Kind, Owner};
use tx_infer::funtype::{decode, mangle};
use tx_infer::generics::{enforce_java_conformance, Bound, GenericsFamily, Member};
use tx_infer::pipeline::{infer_source, ClassResult, Inference, Options};
use tx_infer::syntax::{parse, ClassDecl, Stmt};
use tx_infer::table::{build_class_table, Builtins, ClassTable};
use tx_infer::types::{Tph, Type, BOOLEAN, DOUBLE, INTEGER, NUMBER, OBJECT, STRING};
use tx_infer::unify::{unify, Solution};

pub fn data_dir(kind: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(kind)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(data_dir("fixtures").join(format!("{name}.jtx"))).unwrap()
}

pub fn golden(file: &str) -> String {
    std::fs::read_to_string(data_dir("golden").join(file)).unwrap()
}

pub fn infer(name: &str) -> Inference {
    infer_source(&fixture(name), Builtins::bundled(), &Options::default()).unwrap()
}

pub fn alpha_eq(a: &str, b: &str) -> bool {
    tx_infer::syntax::alpha_equivalent(&parse(a).unwrap(), &parse(b).unwrap())
}

/// The six ground types of the property suites.
pub fn grounds() -> Vec<Type> {
    [OBJECT, NUMBER, INTEGER, DOUBLE, BOOLEAN, STRING].iter().map(|n| Type::class(*n)).collect()
}

pub fn ground_table() -> ClassTable {
    let src = "import java.lang.Number; import java.lang.Integer; import java.lang.Double; \
               import java.lang.String; import java.lang.Boolean; class P {}";
    build_class_table(&parse(src).unwrap()).unwrap()
}

/// Placeholder of each declaration after projection, labelled `field`,
/// `method.param`, `method.local` or `method.return`.
pub fn slot_labels(decl: &ClassDecl, c: &ClassResult) -> BTreeMap<String, Type> {
    let sol = c.chosen_solution();
    let proj = &c.chosen_generics().projection;
    let mut names = BTreeMap::new();
    for f in &decl.fields {
        names.insert(f.id, f.name.clone());
    }
    for m in &decl.methods {
        names.insert(m.id, format!("{}.return", m.name));
        for p in &m.params {
            names.insert(p.id, format!("{}.{}", m.name, p.name));
        }
        let mut stack: Vec<&Stmt> = m.body.iter().collect();
        while let Some(s) = stack.pop() {
            match s {
                Stmt::Local { id, name, .. } => {
                    names.insert(*id, format!("{}.{}", m.name, name));
                }
                Stmt::While { body, .. } | Stmt::Block(body) => stack.extend(body),
                _ => {}
            }
        }
    }
    c.constraints
        .slots
        .iter()
        .filter_map(|s| names.get(&s.node).map(|n| (n.clone(), proj.apply(sol, &s.ty))))
        .collect()
}

/// A fact over symbols: constants must match literally, variables are
/// renamed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sym {
    C(String),
    V(String),
}

pub fn v(s: &str) -> Sym {
    Sym::V(s.to_string())
}

pub fn c(s: &str) -> Sym {
    Sym::C(s.to_string())
}

/// Search a bijection from the variables of `expected` onto the strings of
/// `actual` that extends `fixed` and maps the expected facts exactly onto
/// the actual facts. Strings in `actual` that appear as constants in
/// `expected` are never targets of variables.
pub fn find_renaming(
    expected: &[Vec<Sym>],
    actual: &BTreeSet<Vec<String>>,
    fixed: &BTreeMap<String, String>,
) -> Option<BTreeMap<String, String>> {
    if expected.iter().collect::<BTreeSet<_>>().len() != actual.len() {
        return None;
    }
    let mut vars: Vec<String> = Vec::new();
    for f in expected {
        for s in f {
            if let Sym::V(x) = s {
                if !vars.contains(x) && !fixed.contains_key(x) {
                    vars.push(x.clone());
                }
            }
        }
    }
    let consts: BTreeSet<&String> = expected.iter().flatten().filter_map(|s| if let Sym::C(x) = s { Some(x) } else { None }).collect();
    let targets: BTreeSet<String> = actual.iter().flatten().filter(|s| !consts.contains(s)).cloned().collect();
    let mut map = fixed.clone();
    if search(expected, actual, &vars, &targets, &mut map) {
        Some(map)
    } else {
        None
    }
}

fn image(f: &[Sym], map: &BTreeMap<String, String>) -> Option<Vec<String>> {
    f.iter()
        .map(|s| match s {
            Sym::C(x) => Some(x.clone()),
            Sym::V(x) => map.get(x).cloned(),
        })
        .collect()
}

fn search(
    expected: &[Vec<Sym>],
    actual: &BTreeSet<Vec<String>>,
    vars: &[String],
    targets: &BTreeSet<String>,
    map: &mut BTreeMap<String, String>,
) -> bool {
    // Every fully mapped fact must exist.
    for f in expected {
        if let Some(img) = image(f, map) {
            if !actual.contains(&img) {
                return false;
            }
        }
    }
    let Some(next) = vars.iter().find(|x| !map.contains_key(*x)) else {
        return true;
    };
    let used: BTreeSet<String> = map.values().cloned().collect();
    for t in targets.iter().filter(|t| !used.contains(*t)) {
        map.insert(next.clone(), t.clone());
        if search(expected, actual, vars, targets, map) {
            return true;
        }
        map.remove(next);
    }
    false
}

/// Facts `[owner, param, bound]` of a family; `owners` names the members.
pub fn family_facts(fam: &GenericsFamily, owners: &[&str]) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    for (k, o) in fam.owners().enumerate() {
        for (t, bs) in fam.member(o) {
            for b in bs {
                out.insert(vec![owners[k].to_string(), t.0.clone(), b.to_string()]);
            }
        }
    }
    out
}

/// Expected member facts from `(param, bound)` strings; `Object` is a
/// constant, everything else a variable.
pub fn member_facts(owner: &str, pairs: &[(&str, &str)]) -> Vec<Vec<Sym>> {
    pairs
        .iter()
        .map(|(t, b)| vec![c(owner), v(t), if *b == "Object" { c("Object") } else { v(b) }])
        .collect()
}

pub fn closure(pairs: impl IntoIterator<Item = (Tph, Tph)>) -> BTreeSet<(Tph, Tph)> {
    let mut set: BTreeSet<(Tph, Tph)> = pairs.into_iter().collect();
    loop {
        let mut add = Vec::new();
        for (a, b) in &set {
            for (c, d) in &set {
                if b == c && !set.contains(&(a.clone(), d.clone())) {
                    add.push((a.clone(), d.clone()));
                }
            }
        }
        if add.is_empty() {
            return set;
        }
        set.extend(add);
    }
}

// ---------------------------------------------------------------------
// Unification soundness and completeness against brute force.

pub const PROP_TPHS: [&str; 3] = ["A", "B", "C"];

/// Side of a random constraint: a placeholder index or a ground index.
#[derive(Debug, Clone, Copy)]
pub enum Side {
    Tph(usize),
    Ground(usize),
}

pub fn side_type(s: Side) -> Type {
    match s {
        Side::Tph(i) => Type::tph(PROP_TPHS[i]),
        Side::Ground(i) => grounds()[i].clone(),
    }
}

pub fn build_constraints(raw: &[(Side, bool, Side)]) -> Vec<Constraint> {
    raw.iter()
        .map(|&(l, eq, r)| if eq { Constraint::eq(side_type(l), side_type(r)) } else { Constraint::lt(side_type(l), side_type(r)) })
        .collect()
}

fn subst_ground(t: &Type, a: &BTreeMap<Tph, Type>) -> Type {
    t.map_tphs(&mut |x| a.get(x).cloned().unwrap_or_else(|| Type::Tph(x.clone())))
}

fn holds(c: &Constraint, a: &BTreeMap<Tph, Type>, table: &ClassTable) -> bool {
    let l = subst_ground(&c.lhs, a);
    let r = subst_ground(&c.rhs, a);
    match c.kind {
        Kind::Lt => table.subtype(&l, &r),
        Kind::Eq => l == r,
    }
}

/// All maps from `vars` into the ground types.
fn assignments(vars: &[Tph]) -> Vec<BTreeMap<Tph, Type>> {
    let g = grounds();
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|m| {
                g.iter().map(move |t| {
                    let mut m = m.clone();
                    m.insert(v.clone(), t.clone());
                    m
                })
            })
            .collect();
    }
    out
}

/// Ground instances of a solution over the six types: the composed
/// assignment of the input placeholders for every choice of its free
/// placeholders that satisfies its remaining pairs.
fn instances(sol: &Solution, inputs: &[Tph], table: &ClassTable) -> Vec<BTreeMap<Tph, Type>> {
    let mut free: BTreeSet<Tph> = BTreeSet::new();
    for (a, b) in &sol.remaining {
        free.insert(a.clone());
        free.insert(b.clone());
    }
    for x in inputs {
        free.extend(sol.apply(&Type::Tph(x.clone())).tphs());
    }
    let free: Vec<Tph> = free.into_iter().collect();
    assignments(&free)
        .into_iter()
        .filter(|th| sol.remaining.iter().all(|(a, b)| table.subtype(&th[a], &th[b])))
        .map(|th| inputs.iter().map(|x| (x.clone(), subst_ground(&sol.apply(&Type::Tph(x.clone())), &th))).collect())
        .collect()
}

/// Check one random constraint set. `Err` describes the first violation.
pub fn check_unify(cs: &[Constraint], table: &ClassTable) -> Result<(), String> {
    let mut inputs: Vec<Tph> = cs.iter().flat_map(|c| c.tphs()).collect();
    inputs.sort();
    inputs.dedup();
    let out = unify(cs, table);
    if out.truncated {
        return Err(format!("search truncated on {cs:?}"));
    }
    let mut covered: BTreeSet<Vec<Type>> = BTreeSet::new();
    for sol in &out.solutions {
        for inst in instances(sol, &inputs, table) {
            if !cs.iter().all(|c| holds(c, &inst, table)) {
                return Err(format!("unsound: instance {inst:?} of a solution violates {cs:?}"));
            }
            covered.insert(inputs.iter().map(|x| inst[x].clone()).collect());
        }
    }
    for a in assignments(&inputs) {
        if cs.iter().all(|c| holds(c, &a, table)) {
            let key: Vec<Type> = inputs.iter().map(|x| a[x].clone()).collect();
            if !covered.contains(&key) {
                return Err(format!("incomplete: {a:?} satisfies {cs:?} but is no instance"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Collapse of cycles and infima on one member.

pub fn graph_member(n: usize, edges: &[(usize, usize)]) -> Member {
    let name = |i: usize| Tph::new(format!("N{i}"));
    let mut m = Member::new();
    for i in 0..n {
        m.insert(name(i), BTreeSet::new());
    }
    for &(a, b) in edges {
        if a != b && a < n && b < n {
            m.get_mut(&name(a)).unwrap().insert(Bound::Tph(name(b)));
        }
    }
    for bs in m.values_mut() {
        if bs.is_empty() {
            bs.insert(Bound::Object);
        }
    }
    m
}

pub fn check_collapse(member: &Member) -> Result<(), String> {
    let mut fam = GenericsFamily::new(0);
    fam.class = member.clone();
    let (out, h) = enforce_java_conformance(&fam);
    let hm = |t: &Tph| h.get(t).cloned().unwrap_or_else(|| t.clone());
    let le = |cl: &BTreeSet<(Tph, Tph)>, a: &Tph, b: &Tph| a == b || cl.contains(&(a.clone(), b.clone()));
    let before = closure(tx_infer::generics::member_pairs(member));
    let after = closure(tx_infer::generics::member_pairs(&out.class));
    for (a, b) in &before {
        if !le(&after, &hm(a), &hm(b)) {
            return Err(format!("{a} <= {b} but h({a}) = {} not below h({b}) = {}", hm(a), hm(b)));
        }
    }
    for (a, b) in &after {
        if a != b && after.contains(&(b.clone(), a.clone())) {
            return Err(format!("not antisymmetric: {a} and {b}"));
        }
    }
    for (t, bs) in &out.class {
        let tph_bounds = bs.iter().filter(|b| matches!(b, Bound::Tph(_))).count();
        if tph_bounds > 1 || (tph_bounds == 1 && bs.len() > 1) {
            return Err(format!("{t} keeps several bounds {bs:?}"));
        }
    }
    let image: BTreeSet<Tph> = member.keys().map(hm).collect();
    let params: BTreeSet<Tph> = out.class.keys().cloned().collect();
    if image != params {
        return Err(format!("h is not onto the parameters: image {image:?}, params {params:?}"));
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Mangling.

/// Every `Fun1$$` and `Fun2$$` instance over the six ground types.
pub fn fun_instances() -> Vec<Type> {
    let g = grounds();
    let mut out = Vec::new();
    for a in &g {
        for r in &g {
            out.push(Type::fun(vec![a.clone()], r.clone()));
        }
    }
    for a in &g {
        for b in &g {
            for r in &g {
                out.push(Type::fun(vec![a.clone(), b.clone()], r.clone()));
            }
        }
    }
    out
}

pub fn check_mangling() -> Result<usize, String> {
    let table = ground_table();
    let all = fun_instances();
    let mut seen: BTreeMap<String, &Type> = BTreeMap::new();
    for t in &all {
        let m = mangle(t);
        if let Some(prev) = seen.insert(m.clone(), t) {
            return Err(format!("{prev} and {t} both mangle to {m}"));
        }
        if decode(&m, &table).as_ref() != Some(t) {
            return Err(format!("decode({m}) does not give back {t}"));
        }
    }
    Ok(all.len())
}

pub fn owner_index(fam: &GenericsFamily, o: Owner) -> usize {
    fam.owners().position(|x| x == o).unwrap()
}

// ---------------------------------------------------------------------
// Completion of the generated generics.

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A bound added by completion is justified by a call: `T` flows into a
/// parameter of the callee that reaches one of its return placeholders,
/// and from there the call result reaches `R`.
pub fn justified(c: &ClassResult, method: usize, t: &Tph, r: &Tph) -> bool {
    let g = c.chosen_generics();
    let sol = c.chosen_solution();
    let cs = closure(g.projection.full.iter().cloned());
    let le = |a: &Tph, b: &Tph| a == b || cs.contains(&(a.clone(), b.clone()));
    let apply = |x: &Type| g.projection.apply(sol, x);
    c.constraints.calls.iter().filter(|k| k.caller == Owner::Method(method)).any(|call| {
        let result = apply(&call.result).tphs();
        call.callees.iter().any(|&callee| {
            let (params, ret) = &c.constraints.signatures[callee];
            let callee_cl = closure(g.cfgg.pairs(Owner::Method(callee)));
            let ret = apply(ret).tphs();
            call.args.iter().zip(params).any(|(arg, param)| {
                let reaches_arg = apply(arg).tphs().iter().any(|a| le(t, a));
                reaches_arg
                    && apply(param).tphs().iter().filter(|p| le(t, p)).any(|p| {
                        ret.iter().any(|rr| {
                            (p == rr || callee_cl.contains(&(p.clone(), rr.clone())))
                                && le(rr, r)
                                && result.iter().any(|x| le(x, r))
                        })
                    })
            })
        })
    })
}

pub fn cfgg_oracle(c: &ClassResult) -> Result<(), String> {
    let g = c.chosen_generics();
    let cs = closure(g.projection.full.iter().cloned());
    for (i, (before, after)) in g.fgg.methods.iter().zip(&g.cfgg.methods).enumerate() {
        check(before.keys().eq(after.keys()), || format!("member {i} changed its parameters"))?;
        for (t, bs) in after {
            let was_object = before[t] == BTreeSet::from([Bound::Object]);
            let candidates: Vec<&Tph> = after.keys().filter(|r| *r != t && justified(c, i, t, r)).collect();
            if &before[t] == bs {
                check(!was_object || candidates.is_empty(), || format!("{t} in member {i} should be bounded by one of {candidates:?}"))?;
                continue;
            }
            check(was_object, || format!("{t} in member {i} had a placeholder bound that changed"))?;
            let [Bound::Tph(r)] = bs.iter().collect::<Vec<_>>()[..] else {
                return Err(format!("{t} in member {i} got bounds {bs:?}"));
            };
            check(cs.contains(&(t.clone(), r.clone())), || format!("{t} < {r} is not implied by the remaining constraints"))?;
            check(candidates.contains(&r), || format!("{t} < {r} in member {i} is not justified by a call"))?;
            let least = candidates.iter().all(|o| r == *o || cs.contains(&(r.clone(), (*o).clone())));
            check(least, || format!("{t} < {r} is not the least justified bound among {candidates:?}"))?;
        }
    }
    Ok(())
}

