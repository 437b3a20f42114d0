//! Constraint generation: assign a type to every declaration and expression
//! of a class and collect the subtype conditions between them.
//!
//! Omitted annotations get fresh placeholders. Fields are numbered first,
//! then each method's return type and parameters, then the bodies in
//! declaration order. Overloaded operators and method calls with several
//! candidate declarations produce or-groups, one alternative per typing.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Pos, Result};
use crate::syntax::{
    BinOp, ClassDecl, Expr, ExprKind, LambdaBody, Literal, MethodDecl, NodeId, Program, Stmt, TypeSlot,
};
use crate::table::{ClassEntry, ClassTable, MethodSig};
use crate::types::{NameSupply, Tph, Type, BOOLEAN, DOUBLE, INTEGER, NUMBER, STRING};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    /// `⋖`: the left side must become a subtype of the right side.
    Lt,
    /// `≐`: both sides must become equal.
    Eq,
}

/// One constraint. The origin position is carried for diagnostics only and
/// is ignored by equality and ordering.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub kind: Kind,
    pub lhs: Type,
    pub rhs: Type,
    pub origin: Pos,
}

impl Constraint {
    pub fn lt(lhs: Type, rhs: Type) -> Self {
        Constraint { kind: Kind::Lt, lhs, rhs, origin: Pos::default() }
    }

    pub fn eq(lhs: Type, rhs: Type) -> Self {
        Constraint { kind: Kind::Eq, lhs, rhs, origin: Pos::default() }
    }

    pub fn at(mut self, pos: Pos) -> Self {
        self.origin = pos;
        self
    }

    fn key(&self) -> (Kind, &Type, &Type) {
        (self.kind, &self.lhs, &self.rhs)
    }

    /// Both sides are free of placeholders.
    pub fn is_ground(&self) -> bool {
        self.lhs.is_ground() && self.rhs.is_ground()
    }

    pub fn tphs(&self) -> Vec<Tph> {
        let mut out = self.lhs.tphs();
        self.rhs.collect_tphs(&mut out);
        out
    }
}

impl PartialEq for Constraint {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Constraint {}

impl PartialOrd for Constraint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Constraint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl std::hash::Hash for Constraint {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.kind {
            Kind::Lt => "<",
            Kind::Eq => "=",
        };
        write!(f, "{} {} {}", self.lhs, op, self.rhs)
    }
}

/// A set of alternative conjunctions; exactly one must hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrGroup {
    pub alternatives: Vec<Vec<Constraint>>,
    /// What the group stands for, e.g. "operator `+`" or "call of `m`".
    pub what: String,
    pub origin: Pos,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrConstraintSet {
    pub base: Vec<Constraint>,
    pub groups: Vec<OrGroup>,
}

impl OrConstraintSet {
    fn push(&mut self, c: Constraint) {
        if !self.base.contains(&c) {
            self.base.push(c);
        }
    }

    /// Placeholders in order of first mention.
    pub fn tphs(&self) -> Vec<Tph> {
        let mut out = Vec::new();
        let all = self.base.iter().chain(self.groups.iter().flat_map(|g| g.alternatives.iter().flatten()));
        for c in all {
            c.lhs.collect_tphs(&mut out);
            c.rhs.collect_tphs(&mut out);
        }
        out
    }

    /// Number of plain sets [`flatten`] expands to before pruning.
    pub fn combinations(&self) -> usize {
        self.groups.iter().map(|g| g.alternatives.len()).product()
    }
}

impl fmt::Display for OrConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.base {
            writeln!(f, "{c}")?;
        }
        for g in &self.groups {
            writeln!(f, "or {} at {}:", g.what, g.origin)?;
            for (i, alt) in g.alternatives.iter().enumerate() {
                let parts: Vec<String> = alt.iter().map(|c| c.to_string()).collect();
                writeln!(f, "  {}: {}", i + 1, parts.join(", "))?;
            }
        }
        Ok(())
    }
}

/// Who a declared type belongs to: the class (fields and their
/// initialisers) or one of its methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Class,
    Method(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Field,
    Return,
    Param,
    Local,
    LambdaParam,
}

/// A declaration whose type appears in the typed output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub owner: Owner,
    pub kind: SlotKind,
    pub node: NodeId,
    pub ty: Type,
}

/// An unqualified call of a method of the same class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    pub caller: Owner,
    /// Indices of the candidate declarations.
    pub callees: Vec<usize>,
    pub args: Vec<Type>,
    pub result: Type,
    pub pos: Pos,
}

/// The outcome of constraint generation for one class.
#[derive(Debug, Clone)]
pub struct ClassConstraints {
    pub class: String,
    pub set: OrConstraintSet,
    /// Declared slots in numbering order.
    pub slots: Vec<Slot>,
    /// Type of every expression node.
    pub node_types: BTreeMap<NodeId, Type>,
    /// Expression node being typed when each placeholder was drawn. Covers
    /// helpers that annotate no node, such as generic instantiations and
    /// the implicit operand of `x++`.
    pub origins: BTreeMap<Tph, NodeId>,
    pub calls: Vec<CallSite>,
    /// Per method: parameter types and return type.
    pub signatures: Vec<(Vec<Type>, Type)>,
    pub field_types: Vec<Type>,
    /// Declared type variables of the class and its methods with their
    /// bounds. Solving needs them in the table.
    pub vars: Vec<(String, Vec<Type>)>,
    /// Position of the name supply after generation; unification continues
    /// from here.
    pub supply: NameSupply,
}

impl ClassConstraints {
    pub fn slot(&self, node: NodeId) -> Option<&Slot> {
        self.slots.iter().find(|s| s.node == node)
    }

    /// `table` extended by the declared type variables of this class.
    pub fn solving_table(&self, table: &ClassTable) -> ClassTable {
        table.with_type_vars(self.vars.iter().cloned())
    }
}

/// Generate constraints for every class of `program`, sharing one name
/// supply.
pub fn generate_constraints(program: &Program, table: &ClassTable) -> Result<Vec<ClassConstraints>> {
    let mut supply = NameSupply::new();
    let mut out = Vec::new();
    for i in 0..program.classes.len() {
        let cc = generate_class(program, i, table, &mut supply)?;
        out.push(cc);
    }
    Ok(out)
}

/// Generate constraints for the class at `index`. Methods of other classes
/// are taken from `table`, so classes this one calls into must have been
/// inferred first.
pub fn generate_class(
    program: &Program,
    index: usize,
    table: &ClassTable,
    supply: &mut NameSupply,
) -> Result<ClassConstraints> {
    let class = &program.classes[index];
    let mut vars: Vec<(String, Vec<Type>)> = Vec::new();
    let class_scope: HashSet<String> = class.generics.iter().map(|g| g.name.clone()).collect();
    for g in &class.generics {
        vars.push((g.name.clone(), Vec::new()));
    }
    for m in &class.methods {
        for g in &m.generics {
            vars.push((g.name.clone(), Vec::new()));
        }
    }
    // Bounds may mention any of the variables, so resolve them against a
    // table that knows all names first.
    let names_table = table.with_type_vars(vars.clone());
    let mut resolved_vars = Vec::new();
    for g in &class.generics {
        let bounds = g
            .bounds
            .iter()
            .map(|b| names_table.resolve(b, &|n| class_scope.contains(n)))
            .collect::<Result<Vec<_>>>()?;
        resolved_vars.push((g.name.clone(), bounds));
    }
    let mut method_generics = Vec::new();
    for m in &class.methods {
        let scope: HashSet<String> = class_scope.iter().cloned().chain(m.generics.iter().map(|g| g.name.clone())).collect();
        let mut gs = Vec::new();
        for g in &m.generics {
            let bounds = g
                .bounds
                .iter()
                .map(|b| names_table.resolve(b, &|n| scope.contains(n)))
                .collect::<Result<Vec<_>>>()?;
            resolved_vars.push((g.name.clone(), bounds.clone()));
            gs.push((g.name.clone(), bounds));
        }
        method_generics.push(gs);
    }
    let table = table.with_type_vars(resolved_vars.clone());

    let mut gen = Gen {
        class,
        table: &table,
        supply,
        set: OrConstraintSet::default(),
        slots: Vec::new(),
        node_types: BTreeMap::new(),
        origins: BTreeMap::new(),
        current: Vec::new(),
        calls: Vec::new(),
        scopes: Vec::new(),
        owner: Owner::Class,
        returns: Vec::new(),
        class_scope,
        method_generics,
        field_types: Vec::new(),
        signatures: Vec::new(),
    };
    gen.run()?;
    Ok(ClassConstraints {
        class: class.name.clone(),
        set: gen.set,
        slots: gen.slots,
        node_types: gen.node_types,
        origins: gen.origins,
        calls: gen.calls,
        signatures: gen.signatures,
        field_types: gen.field_types,
        vars: resolved_vars,
        supply: gen.supply.clone(),
    })
}

/// Expand or-groups into plain constraint sets: one per choice of an
/// alternative from every group, in group order times alternative order.
/// Combinations with a contradictory placeholder-free constraint are
/// dropped.
pub fn flatten(set: &OrConstraintSet, table: &ClassTable) -> Vec<Vec<Constraint>> {
    let mut acc: Vec<Vec<Constraint>> = vec![set.base.clone()];
    if acc[0].iter().any(|c| contradictory(c, table)) {
        return Vec::new();
    }
    for g in &set.groups {
        let mut next = Vec::new();
        for partial in &acc {
            for alt in &g.alternatives {
                if alt.iter().any(|c| contradictory(c, table)) {
                    continue;
                }
                let mut combo = partial.clone();
                for c in alt {
                    if !combo.contains(c) {
                        combo.push(c.clone());
                    }
                }
                next.push(combo);
            }
        }
        acc = next;
    }
    acc
}

fn contradictory(c: &Constraint, table: &ClassTable) -> bool {
    c.is_ground()
        && match c.kind {
            Kind::Lt => !table.subtype(&c.lhs, &c.rhs),
            Kind::Eq => c.lhs != c.rhs,
        }
}

/// Where a `return` in the current context sends its value.
enum ReturnTarget {
    Method(Type),
    Lambda { ty: Type, used: bool },
}

struct Gen<'a> {
    class: &'a ClassDecl,
    table: &'a ClassTable,
    supply: &'a mut NameSupply,
    set: OrConstraintSet,
    slots: Vec<Slot>,
    node_types: BTreeMap<NodeId, Type>,
    origins: BTreeMap<Tph, NodeId>,
    /// Expression nodes being typed, innermost last.
    current: Vec<NodeId>,
    calls: Vec<CallSite>,
    scopes: Vec<Vec<(String, Type)>>,
    owner: Owner,
    returns: Vec<ReturnTarget>,
    class_scope: HashSet<String>,
    method_generics: Vec<Vec<(String, Vec<Type>)>>,
    field_types: Vec<Type>,
    signatures: Vec<(Vec<Type>, Type)>,
}

fn has_value_return(stmts: &[Stmt]) -> bool {
    stmts.iter().any(|s| match s {
        Stmt::Return { value: Some(_), .. } => true,
        Stmt::While { body, .. } | Stmt::Block(body) => has_value_return(body),
        _ => false,
    })
}

impl Gen<'_> {
    fn fresh(&mut self) -> Type {
        let t = self.supply.fresh_type();
        if let (Type::Tph(x), Some(&node)) = (&t, self.current.last()) {
            self.origins.insert(x.clone(), node);
        }
        t
    }

    fn in_scope(&self, name: &str) -> bool {
        self.class_scope.contains(name)
            || match self.owner {
                Owner::Method(i) => self.method_generics[i].iter().any(|(g, _)| g == name),
                Owner::Class => false,
            }
    }

    fn slot_type(&mut self, slot: &TypeSlot) -> Result<Type> {
        match slot {
            TypeSlot::Infer => Ok(self.fresh()),
            TypeSlot::Annotated(a) => {
                let t = self.table.resolve(a, &|n| self.in_scope(n))?;
                if t == Type::Void {
                    return Err(Error::Syntax { pos: a.pos(), msg: "`void` is only allowed as a return type".into() });
                }
                Ok(t)
            }
        }
    }

    fn declare(&mut self, kind: SlotKind, node: NodeId, ty: Type) {
        self.slots.push(Slot { owner: self.owner, kind, node, ty });
    }

    fn run(&mut self) -> Result<()> {
        let class = self.class;
        let mut seen = HashSet::new();
        for f in &class.fields {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::DuplicateName { pos: f.pos, name: f.name.clone() });
            }
            let t = self.slot_type(&f.ty)?;
            self.declare(SlotKind::Field, f.id, t.clone());
            self.field_types.push(t);
        }
        for (i, m) in class.methods.iter().enumerate() {
            self.owner = Owner::Method(i);
            let ret = match &m.ret {
                TypeSlot::Infer if has_value_return(&m.body) => self.fresh(),
                TypeSlot::Infer => Type::Void,
                TypeSlot::Annotated(a) => self.table.resolve(a, &|n| self.in_scope(n))?,
            };
            self.declare(SlotKind::Return, m.id, ret.clone());
            let mut names = HashSet::new();
            let mut params = Vec::new();
            for p in &m.params {
                if !names.insert(p.name.as_str()) {
                    return Err(Error::DuplicateName { pos: p.pos, name: p.name.clone() });
                }
                let t = self.slot_type(&p.ty)?;
                self.declare(SlotKind::Param, p.id, t.clone());
                params.push(t);
            }
            self.signatures.push((params, ret));
        }
        self.owner = Owner::Class;
        for (i, f) in class.fields.iter().enumerate() {
            if let Some(init) = &f.init {
                let t = self.expr(init, true)?;
                let target = self.field_types[i].clone();
                self.lt(t, target, init.pos);
            }
        }
        for (i, m) in class.methods.iter().enumerate() {
            self.method_body(i, m)?;
        }
        Ok(())
    }

    fn method_body(&mut self, i: usize, m: &MethodDecl) -> Result<()> {
        self.owner = Owner::Method(i);
        let (params, ret) = self.signatures[i].clone();
        self.scopes = vec![m.params.iter().map(|p| p.name.clone()).zip(params).collect()];
        self.returns = vec![ReturnTarget::Method(ret)];
        self.stmts(&m.body)?;
        self.scopes.clear();
        self.returns.clear();
        self.owner = Owner::Class;
        Ok(())
    }

    fn lt(&mut self, a: Type, b: Type, pos: Pos) {
        if a != b {
            self.set.push(Constraint::lt(a, b).at(pos));
        }
    }

    fn eq(&mut self, a: Type, b: Type, pos: Pos) {
        if a != b {
            self.set.push(Constraint::eq(a, b).at(pos));
        }
    }

    /// Add an or-group, folding it into the base when only one alternative
    /// is left.
    fn group(&mut self, mut alternatives: Vec<Vec<Constraint>>, what: String, pos: Pos) -> Result<()> {
        alternatives.dedup();
        match alternatives.len() {
            0 => Err(Error::Untypable { pos, msg: format!("no typing of {what} is available in this universe") }),
            1 => {
                for c in alternatives.pop().unwrap() {
                    self.set.push(c);
                }
                Ok(())
            }
            _ => {
                self.set.groups.push(OrGroup { alternatives, what, origin: pos });
                Ok(())
            }
        }
    }

    fn lookup(&self, name: &str) -> Option<Type> {
        for scope in self.scopes.iter().rev() {
            if let Some((_, t)) = scope.iter().rev().find(|(n, _)| n == name) {
                return Some(t.clone());
            }
        }
        let idx = self.class.fields.iter().position(|f| f.name == name)?;
        self.field_types.get(idx).cloned()
    }

    fn bind_local(&mut self, name: &str, t: Type, pos: Pos) -> Result<()> {
        if self.scopes.iter().any(|s| s.iter().any(|(n, _)| n == name)) {
            return Err(Error::DuplicateName { pos, name: name.to_string() });
        }
        self.scopes.last_mut().expect("inside a scope").push((name.to_string(), t));
        Ok(())
    }

    fn stmts(&mut self, stmts: &[Stmt]) -> Result<()> {
        for s in stmts {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<()> {
        self.scopes.push(Vec::new());
        let r = self.stmts(stmts);
        self.scopes.pop();
        r
    }

    fn stmt(&mut self, s: &Stmt) -> Result<()> {
        match s {
            Stmt::Local { id, name, ty, init, pos } => {
                let t = self.slot_type(ty)?;
                let kind = SlotKind::Local;
                self.declare(kind, *id, t.clone());
                if let Some(e) = init {
                    let it = self.expr(e, true)?;
                    self.lt(it, t.clone(), e.pos);
                }
                self.bind_local(name, t, *pos)
            }
            Stmt::While { cond, body, .. } => {
                let ct = self.expr(cond, true)?;
                self.eq(ct, Type::class(BOOLEAN), cond.pos);
                self.block(body)
            }
            Stmt::Return { value, pos } => {
                let Some(e) = value else { return Ok(()) };
                let t = self.expr(e, true)?;
                match self.returns.last_mut() {
                    Some(ReturnTarget::Method(r)) => {
                        let r = r.clone();
                        if r == Type::Void {
                            return Err(Error::Untypable { pos: *pos, msg: "returning a value from a void method".into() });
                        }
                        self.lt(t, r, e.pos);
                    }
                    Some(ReturnTarget::Lambda { ty, used }) => {
                        *used = true;
                        let r = ty.clone();
                        self.lt(t, r, e.pos);
                    }
                    None => unreachable!("return outside a body"),
                }
                Ok(())
            }
            Stmt::Block(b) => self.block(b),
            Stmt::Expr(e) => self.expr(e, false).map(|_| ()),
        }
    }

    fn record(&mut self, e: &Expr, t: Type) -> Type {
        self.node_types.insert(e.id, t.clone());
        t
    }

    /// Type of `e`. `value` says whether the result is used, which rules
    /// out void callees.
    fn expr(&mut self, e: &Expr, value: bool) -> Result<Type> {
        self.current.push(e.id);
        let t = self.expr_kind(e, value);
        self.current.pop();
        Ok(self.record(e, t?))
    }

    fn expr_kind(&mut self, e: &Expr, value: bool) -> Result<Type> {
        let t = match &e.kind {
            ExprKind::Lit(lit) => {
                let class = match lit {
                    Literal::Int(_) => INTEGER,
                    Literal::Bool(_) => BOOLEAN,
                    Literal::Str(_) => STRING,
                };
                let t = self.fresh();
                self.eq(t.clone(), Type::class(class), e.pos);
                t
            }
            ExprKind::Var(name) => self
                .lookup(name)
                .ok_or_else(|| Error::UnknownIdentifier { pos: e.pos, name: name.clone() })?,
            ExprKind::This => self.this_type(),
            ExprKind::Assign { target, value } => {
                self.check_assignable(target)?;
                let tt = self.expr(target, true)?;
                let vt = self.expr(value, true)?;
                self.lt(vt, tt.clone(), value.pos);
                tt
            }
            ExprKind::PostInc(target) => {
                self.check_assignable(target)?;
                let tt = self.expr(target, true)?;
                let one = self.fresh();
                self.eq(one.clone(), Type::class(INTEGER), e.pos);
                let sum = self.binary(BinOp::Add, tt.clone(), one, e.pos)?;
                self.lt(sum, tt.clone(), e.pos);
                tt
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs, true)?;
                let r = self.expr(rhs, true)?;
                self.binary(*op, l, r, e.pos)?
            }
            ExprKind::Call { receiver, name, args } => match receiver.as_deref() {
                None => self.own_call(name, args, value, e.pos)?,
                Some(Expr { kind: ExprKind::This, .. }) => {
                    let rcv = receiver.as_deref().unwrap();
                    let rt = self.this_type();
                    self.record(rcv, rt);
                    self.own_call(name, args, value, e.pos)?
                }
                Some(rcv) => {
                    let rt = self.expr(rcv, true)?;
                    self.receiver_call(rt, name, args, value, e.pos)?
                }
            },
            ExprKind::Field { receiver, name } => {
                let rt = self.expr(receiver, true)?;
                if matches!(receiver.kind, ExprKind::This) {
                    let idx = self.class.fields.iter().position(|f| &f.name == name).ok_or_else(|| {
                        Error::UnknownMember { pos: e.pos, name: name.clone(), arity: 0 }
                    })?;
                    self.field_types[idx].clone()
                } else {
                    self.field_access(rt, name, e.pos)?
                }
            }
            ExprKind::New { class, type_args, args } => self.new_object(class, type_args.as_deref(), args, e.pos)?,
            ExprKind::Lambda { params, body } => self.lambda(params, body)?,
        };
        Ok(t)
    }

    fn this_type(&self) -> Type {
        Type::generic(self.class.name.clone(), self.class.generics.iter().map(|g| Type::Var(g.name.clone())).collect())
    }

    fn check_assignable(&self, target: &Expr) -> Result<()> {
        match target.kind {
            ExprKind::Var(_) | ExprKind::Field { .. } => Ok(()),
            _ => Err(Error::Syntax { pos: target.pos, msg: "left-hand side is not assignable".into() }),
        }
    }

    fn binary(&mut self, op: BinOp, l: Type, r: Type, pos: Pos) -> Result<Type> {
        let result = self.fresh();
        let what = format!("operator `{}`", op.symbol());
        match op {
            BinOp::Add | BinOp::Mul => {
                let classes: &[&str] = if op == BinOp::Add { &[INTEGER, DOUBLE, STRING] } else { &[INTEGER, DOUBLE] };
                let alternatives = classes
                    .iter()
                    .filter(|c| self.table.contains(c))
                    .map(|c| {
                        let t = Type::class(*c);
                        vec![
                            Constraint::lt(l.clone(), t.clone()).at(pos),
                            Constraint::lt(r.clone(), t.clone()).at(pos),
                            Constraint::eq(result.clone(), t).at(pos),
                        ]
                    })
                    .collect();
                self.group(alternatives, what, pos)?;
            }
            BinOp::Le => {
                let num = Type::class(NUMBER);
                self.lt(l, num.clone(), pos);
                self.lt(r, num, pos);
                self.eq(result.clone(), Type::class(BOOLEAN), pos);
            }
            BinOp::Or => {
                let b = Type::class(BOOLEAN);
                self.lt(l, b.clone(), pos);
                self.lt(r, b.clone(), pos);
                self.eq(result.clone(), b, pos);
            }
        }
        Ok(result)
    }

    fn args(&mut self, args: &[Expr]) -> Result<Vec<Type>> {
        args.iter().map(|a| self.expr(a, true)).collect()
    }

    /// Fresh placeholders for declared generics plus their bound constraints.
    fn instantiate_generics(
        &mut self,
        generics: &[(String, Vec<Type>)],
        map: &mut HashMap<String, Type>,
        out: &mut Vec<Constraint>,
        pos: Pos,
    ) {
        for (g, _) in generics {
            let t = self.fresh();
            map.insert(g.clone(), t);
        }
        for (g, bounds) in generics {
            for b in bounds {
                let b = b.subst_vars(&|v| map.get(v).cloned());
                out.push(Constraint::lt(map[g].clone(), b).at(pos));
            }
        }
    }

    /// Unqualified call of a method of this class.
    fn own_call(&mut self, name: &str, args: &[Expr], value: bool, pos: Pos) -> Result<Type> {
        let arg_types = self.args(args)?;
        let named: Vec<usize> = (0..self.class.methods.len()).filter(|&j| self.class.methods[j].name == name).collect();
        if named.is_empty() {
            return Err(Error::UnknownMember { pos, name: name.to_string(), arity: args.len() });
        }
        let callees: Vec<usize> = named.iter().copied().filter(|&j| self.class.methods[j].params.len() == args.len()).collect();
        if callees.is_empty() {
            let expected = self.class.methods[named[0]].params.len();
            return Err(Error::ArityMismatch { pos, name: name.to_string(), expected, found: args.len() });
        }
        let result = if value { self.fresh() } else { Type::Void };
        let mut alternatives = Vec::new();
        for &j in &callees {
            let (params, ret) = self.signatures[j].clone();
            if value && ret == Type::Void {
                continue;
            }
            let mut alt = Vec::new();
            let mut map = HashMap::new();
            let generics = self.method_generics[j].clone();
            self.instantiate_generics(&generics, &mut map, &mut alt, pos);
            let inst = |t: &Type| t.subst_vars(&|v| map.get(v).cloned());
            for (a, p) in arg_types.iter().zip(&params) {
                alt.push(Constraint::lt(a.clone(), inst(p)).at(pos));
            }
            if value {
                alt.push(Constraint::lt(inst(&ret), result.clone()).at(pos));
            }
            alt.retain(|c| c.lhs != c.rhs);
            alternatives.push(alt);
        }
        if alternatives.is_empty() {
            return Err(Error::Untypable { pos, msg: format!("`{name}` returns no value") });
        }
        self.group(alternatives, format!("call of `{name}`"), pos)?;
        self.calls.push(CallSite { caller: self.owner, callees, args: arg_types, result: result.clone(), pos });
        Ok(result)
    }

    /// Call on a receiver expression: one alternative per typing of every
    /// class in the universe offering a method of that name and arity,
    /// plus the `apply` method of the function types.
    fn receiver_call(&mut self, rt: Type, name: &str, args: &[Expr], value: bool, pos: Pos) -> Result<Type> {
        let arg_types = self.args(args)?;
        let n = args.len();
        let result = if value { self.fresh() } else { Type::Void };
        let mut alternatives = Vec::new();

        let entries: Vec<ClassEntry> = self.table.classes_with_method(name, n).into_iter().cloned().collect();
        for entry in &entries {
            if entry.name == self.class.name {
                continue;
            }
            for sig in entry.methods.iter().filter(|m| m.name == name && m.params.len() == n) {
                if let Some(alt) = self.member_alternative(&rt, entry, sig, &arg_types, &result, value, pos) {
                    alternatives.push(alt);
                }
            }
        }
        // Methods of the class being inferred, through a receiver of its type.
        for j in 0..self.class.methods.len() {
            let m = &self.class.methods[j];
            if m.name != name || m.params.len() != n {
                continue;
            }
            let (params, ret) = self.signatures[j].clone();
            if value && ret == Type::Void {
                continue;
            }
            let mut alt = vec![Constraint::lt(rt.clone(), self.this_type()).at(pos)];
            let mut map = HashMap::new();
            let generics = self.method_generics[j].clone();
            self.instantiate_generics(&generics, &mut map, &mut alt, pos);
            let inst = |t: &Type| t.subst_vars(&|v| map.get(v).cloned());
            for (a, p) in arg_types.iter().zip(&params) {
                alt.push(Constraint::lt(a.clone(), inst(p)).at(pos));
            }
            if value {
                alt.push(Constraint::lt(inst(&ret), result.clone()).at(pos));
            }
            alternatives.push(alt);
        }
        if name == "apply" && n <= self.table.max_fun_arity() {
            let ps: Vec<Type> = (0..n).map(|_| self.fresh()).collect();
            let mut alt = Vec::new();
            if value {
                let r = self.fresh();
                alt.push(Constraint::lt(rt.clone(), Type::fun(ps.clone(), r.clone())).at(pos));
                alt.push(Constraint::lt(r, result.clone()).at(pos));
            } else {
                alt.push(Constraint::lt(rt.clone(), Type::fun_void(ps.clone())).at(pos));
            }
            for (a, p) in arg_types.iter().zip(&ps) {
                alt.push(Constraint::lt(a.clone(), p.clone()).at(pos));
            }
            alternatives.push(alt);
        }
        if alternatives.is_empty() {
            return Err(Error::UnknownMember { pos, name: name.to_string(), arity: n });
        }
        for alt in &mut alternatives {
            alt.retain(|c| c.lhs != c.rhs);
        }
        self.group(alternatives, format!("call of `{name}`"), pos)?;
        Ok(result)
    }

    #[allow(clippy::too_many_arguments)]
    fn member_alternative(
        &mut self,
        rt: &Type,
        entry: &ClassEntry,
        sig: &MethodSig,
        args: &[Type],
        result: &Type,
        value: bool,
        pos: Pos,
    ) -> Option<Vec<Constraint>> {
        if value && sig.ret == Type::Void {
            return None;
        }
        let mut alt = Vec::new();
        let mut map: HashMap<String, Type> = HashMap::new();
        let class_args: Vec<Type> = entry.params.iter().map(|_| self.fresh()).collect();
        for (p, a) in entry.params.iter().zip(&class_args) {
            map.insert(p.clone(), a.clone());
        }
        alt.push(Constraint::lt(rt.clone(), Type::generic(entry.name.clone(), class_args)).at(pos));
        self.instantiate_generics(&sig.generics, &mut map, &mut alt, pos);
        let inst = |t: &Type| t.subst_vars(&|v| map.get(v).cloned());
        for (a, p) in args.iter().zip(&sig.params) {
            alt.push(Constraint::lt(a.clone(), inst(p)).at(pos));
        }
        if value {
            alt.push(Constraint::lt(inst(&sig.ret), result.clone()).at(pos));
        }
        Some(alt)
    }

    fn field_access(&mut self, rt: Type, name: &str, pos: Pos) -> Result<Type> {
        let result = self.fresh();
        let mut alternatives = Vec::new();
        let entries: Vec<ClassEntry> = self.table.classes_with_field(name).into_iter().cloned().collect();
        for entry in entries.iter().filter(|e| e.name != self.class.name) {
            let class_args: Vec<Type> = entry.params.iter().map(|_| self.fresh()).collect();
            let (_, ft) = entry.fields.iter().find(|(f, _)| f == name).unwrap();
            let ft = entry.instantiate(ft, &class_args);
            alternatives.push(vec![
                Constraint::lt(rt.clone(), Type::generic(entry.name.clone(), class_args)).at(pos),
                Constraint::eq(result.clone(), ft).at(pos),
            ]);
        }
        if let Some(idx) = self.class.fields.iter().position(|f| f.name == name) {
            alternatives.push(vec![
                Constraint::lt(rt.clone(), self.this_type()).at(pos),
                Constraint::eq(result.clone(), self.field_types[idx].clone()).at(pos),
            ]);
        }
        if alternatives.is_empty() {
            return Err(Error::UnknownMember { pos, name: name.to_string(), arity: 0 });
        }
        self.group(alternatives, format!("field `{name}`"), pos)?;
        Ok(result)
    }

    fn new_object(
        &mut self,
        class: &str,
        type_args: Option<&[crate::syntax::TypeAnn]>,
        args: &[Expr],
        pos: Pos,
    ) -> Result<Type> {
        let arg_types = self.args(args)?;
        let entry = self
            .table
            .get(class)
            .cloned()
            .ok_or_else(|| Error::UnknownType { pos, name: class.to_string() })?;
        let class_args: Vec<Type> = match type_args {
            Some(ts) if !ts.is_empty() => {
                if ts.len() != entry.params.len() {
                    return Err(Error::ArityMismatch {
                        pos,
                        name: class.to_string(),
                        expected: entry.params.len(),
                        found: ts.len(),
                    });
                }
                ts.iter().map(|t| self.slot_type(&TypeSlot::Annotated(t.clone()))).collect::<Result<_>>()?
            }
            _ => entry.params.iter().map(|_| self.fresh()).collect(),
        };
        let ctor = entry
            .constructor
            .clone()
            .ok_or_else(|| Error::UnknownMember { pos, name: format!("new {class}"), arity: args.len() })?;
        if ctor.len() != args.len() {
            return Err(Error::ArityMismatch { pos, name: class.to_string(), expected: ctor.len(), found: args.len() });
        }
        for (a, p) in arg_types.into_iter().zip(&ctor) {
            let p = entry.instantiate(p, &class_args);
            self.lt(a, p, pos);
        }
        Ok(Type::generic(entry.name.clone(), class_args))
    }

    fn lambda(&mut self, params: &[crate::syntax::Param], body: &LambdaBody) -> Result<Type> {
        let mut scope = Vec::new();
        let mut types = Vec::new();
        for p in params {
            if scope.iter().any(|(n, _): &(String, Type)| n == &p.name) {
                return Err(Error::DuplicateName { pos: p.pos, name: p.name.clone() });
            }
            let t = self.slot_type(&p.ty)?;
            self.declare(SlotKind::LambdaParam, p.id, t.clone());
            types.push(t.clone());
            scope.push((p.name.clone(), t));
        }
        if params.len() > self.table.max_fun_arity() {
            return Err(Error::Untypable {
                pos: params[0].pos,
                msg: format!("lambda with {} parameters exceeds the function type families", params.len()),
            });
        }
        for (n, _) in &scope {
            if self.scopes.iter().any(|s| s.iter().any(|(m, _)| m == n)) {
                let p = params.iter().find(|p| &p.name == n).unwrap();
                return Err(Error::DuplicateName { pos: p.pos, name: n.clone() });
            }
        }
        self.scopes.push(scope);
        let result = match body {
            LambdaBody::Expr(e) => {
                let bt = self.expr(e, true)?;
                Ok(Type::fun(types, bt))
            }
            LambdaBody::Block(stmts) => {
                let rho = self.fresh();
                self.returns.push(ReturnTarget::Lambda { ty: rho.clone(), used: false });
                let r = self.block(stmts);
                let Some(ReturnTarget::Lambda { used, .. }) = self.returns.pop() else { unreachable!() };
                r.map(|_| if used { Type::fun(types, rho) } else { Type::fun_void(types) })
            }
        };
        self.scopes.pop();
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::table::build_class_table;

    fn gen(src: &str) -> Vec<ClassConstraints> {
        let p = parse(src).unwrap();
        let t = build_class_table(&p).unwrap();
        generate_constraints(&p, &t).unwrap()
    }

    #[test]
    fn identity_method() {
        let cc = &gen("class A { m(x) { return x; } }")[0];
        assert_eq!(cc.set.base, vec![Constraint::lt(Type::tph("B"), Type::tph("A"))]);
        assert!(cc.set.groups.is_empty());
        assert_eq!(cc.signatures[0], (vec![Type::tph("B")], Type::tph("A")));
    }

    #[test]
    fn deterministic() {
        let src = "import java.lang.Integer; import java.lang.Double; class A { m(x) { return x + x * 2; } }";
        let a = gen(src);
        let b = gen(src);
        assert_eq!(a[0].set, b[0].set);
        assert_eq!(a[0].set.groups.len(), 2);
    }

    #[test]
    fn flatten_cartesian_product() {
        let p = parse("class A {}").unwrap();
        let t = build_class_table(&p).unwrap();
        let c = |a: &str, b: &str| Constraint::lt(Type::tph(a), Type::tph(b));
        let set = OrConstraintSet {
            base: vec![c("A", "B")],
            groups: vec![OrGroup {
                alternatives: vec![vec![c("B", "C")], vec![c("C", "D")]],
                what: "test".into(),
                origin: Pos::default(),
            }],
        };
        assert_eq!(flatten(&set, &t), vec![vec![c("A", "B"), c("B", "C")], vec![c("A", "B"), c("C", "D")]]);
        let plain = OrConstraintSet { base: vec![c("A", "B")], groups: vec![] };
        assert_eq!(flatten(&plain, &t), vec![vec![c("A", "B")]]);
    }

    #[test]
    fn flatten_prunes_ground_contradictions() {
        let p = parse("import java.lang.String; import java.lang.Integer; class A {}").unwrap();
        let t = build_class_table(&p).unwrap();
        let set = OrConstraintSet {
            base: vec![],
            groups: vec![OrGroup {
                alternatives: vec![
                    vec![Constraint::lt(Type::class(STRING), Type::class(INTEGER))],
                    vec![Constraint::lt(Type::class(INTEGER), Type::class(NUMBER))],
                ],
                what: "test".into(),
                origin: Pos::default(),
            }],
        };
        assert_eq!(flatten(&set, &t).len(), 1);
    }

    #[test]
    fn unknown_names() {
        let p = parse("class A { m() { return y; } }").unwrap();
        let t = build_class_table(&p).unwrap();
        assert!(matches!(generate_constraints(&p, &t), Err(Error::UnknownIdentifier { .. })));
        let p = parse("class A { m(x) { return x.foo(); } }").unwrap();
        assert!(matches!(generate_constraints(&p, &t), Err(Error::UnknownMember { .. })));
        let p = parse("class A { m(x) { return m(x, x); } }").unwrap();
        assert!(matches!(generate_constraints(&p, &t), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn lambda_gets_function_type() {
        let cc = &gen("class A { id = x -> x; }")[0];
        // field A, lambda parameter B
        assert_eq!(cc.set.base, vec![Constraint::lt(Type::fun(vec![Type::tph("B")], Type::tph("B")), Type::tph("A"))]);
    }
}
