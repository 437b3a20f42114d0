//! Structural comparison of annotated programs modulo renaming of type
//! variables.
//!
//! A name in a type annotation counts as a type variable unless it names a
//! class: a built-in, an imported class or a class declared in the program.
//! Generic parameter lists are compared as sets, so `<A, B extends A>` and
//! `<B extends A, A>` agree.

use std::collections::{HashMap, HashSet};

use super::ast::*;

const BUILTIN_SIMPLE: &[&str] = &["Object", "Number", "Integer", "Double", "Boolean", "String", "Pair"];

pub fn alpha_equivalent(a: &Program, b: &Program) -> bool {
    if a.imports.len() != b.imports.len()
        || a.imports.iter().zip(&b.imports).any(|(x, y)| x.name != y.name)
        || a.classes.len() != b.classes.len()
    {
        return false;
    }
    let mut known: HashSet<String> = BUILTIN_SIMPLE.iter().map(|s| s.to_string()).collect();
    for p in [a, b] {
        for i in &p.imports {
            known.insert(i.name.clone());
            known.insert(i.name.rsplit('.').next().unwrap_or(&i.name).to_string());
        }
        for c in &p.classes {
            known.insert(c.name.clone());
        }
    }
    a.classes.iter().zip(&b.classes).all(|(x, y)| {
        let mut cmp = Alpha { known: &known, fwd: HashMap::new(), bwd: HashMap::new() };
        cmp.class(x, y)
    })
}

struct Alpha<'k> {
    known: &'k HashSet<String>,
    fwd: HashMap<String, String>,
    bwd: HashMap<String, String>,
}

fn is_known(known: &HashSet<String>, name: &str) -> bool {
    known.contains(name)
        || name.contains('.')
        || (name.starts_with("Fun") && name.ends_with("$$"))
}

impl Alpha<'_> {
    fn name(&mut self, a: &str, b: &str) -> bool {
        if is_known(self.known, a) || is_known(self.known, b) {
            return a == b;
        }
        match (self.fwd.get(a), self.bwd.get(b)) {
            (Some(x), _) if x != b => false,
            (_, Some(y)) if y != a => false,
            _ => {
                self.fwd.insert(a.to_string(), b.to_string());
                self.bwd.insert(b.to_string(), a.to_string());
                true
            }
        }
    }

    fn ty(&mut self, a: &TypeAnn, b: &TypeAnn) -> bool {
        match (a, b) {
            (TypeAnn::Void { .. }, TypeAnn::Void { .. }) => true,
            (TypeAnn::Named { name: n1, args: a1, .. }, TypeAnn::Named { name: n2, args: a2, .. }) => {
                a1.len() == a2.len() && self.name(n1, n2) && a1.iter().zip(a2).all(|(x, y)| self.ty(x, y))
            }
            _ => false,
        }
    }

    fn slot(&mut self, a: &TypeSlot, b: &TypeSlot) -> bool {
        match (a, b) {
            (TypeSlot::Infer, TypeSlot::Infer) => true,
            (TypeSlot::Annotated(x), TypeSlot::Annotated(y)) => self.ty(x, y),
            _ => false,
        }
    }

    /// Compare generic clauses as sets, pairing parameters not yet fixed by
    /// their uses in declaration order.
    fn generics(&mut self, a: &[GenericParam], b: &[GenericParam]) -> bool {
        if a.len() != b.len() {
            return false;
        }
        let unmatched_a: Vec<&GenericParam> = a.iter().filter(|g| !self.fwd.contains_key(&g.name)).collect();
        let unmatched_b: Vec<&GenericParam> = b.iter().filter(|g| !self.bwd.contains_key(&g.name)).collect();
        if unmatched_a.len() != unmatched_b.len() {
            return false;
        }
        for (x, y) in unmatched_a.iter().zip(&unmatched_b) {
            if !self.name(&x.name, &y.name) {
                return false;
            }
        }
        a.iter().all(|ga| {
            let Some(target) = self.fwd.get(&ga.name).cloned() else { return false };
            let Some(gb) = b.iter().find(|g| g.name == target) else { return false };
            ga.bounds.len() == gb.bounds.len()
                && ga.bounds.iter().zip(&gb.bounds).all(|(x, y)| self.ty(x, y))
        })
    }

    fn class(&mut self, a: &ClassDecl, b: &ClassDecl) -> bool {
        if a.name != b.name || a.fields.len() != b.fields.len() || a.methods.len() != b.methods.len() || a.order != b.order {
            return false;
        }
        for (x, y) in a.fields.iter().zip(&b.fields) {
            if x.name != y.name || !self.slot(&x.ty, &y.ty) || !self.opt_expr(&x.init, &y.init) {
                return false;
            }
        }
        let class_generics_a: HashSet<&str> = a.generics.iter().map(|g| g.name.as_str()).collect();
        for (x, y) in a.methods.iter().zip(&b.methods) {
            if !self.method(x, y, &class_generics_a) {
                return false;
            }
        }
        self.generics(&a.generics, &b.generics)
    }

    fn method(&mut self, a: &MethodDecl, b: &MethodDecl, class_generics: &HashSet<&str>) -> bool {
        if a.name != b.name || a.params.len() != b.params.len() {
            return false;
        }
        // Method generics are scoped to the method: compare them with a
        // nested map and fold back only the class-level entries.
        let local_a: HashSet<&str> = a.generics.iter().map(|g| g.name.as_str()).collect();
        let local_b: HashSet<&str> = b.generics.iter().map(|g| g.name.as_str()).collect();
        let saved_fwd = self.fwd.clone();
        let saved_bwd = self.bwd.clone();
        self.fwd.retain(|k, v| !local_a.contains(k.as_str()) && !local_b.contains(v.as_str()));
        self.bwd.retain(|k, v| !local_b.contains(k.as_str()) && !local_a.contains(v.as_str()));
        let ok = a.params.iter().zip(&b.params).all(|(x, y)| x.name == y.name && self.slot(&x.ty, &y.ty))
            && self.slot(&a.ret, &b.ret)
            && self.stmts(&a.body, &b.body)
            && self.generics(&a.generics, &b.generics);
        let local_fwd = std::mem::replace(&mut self.fwd, saved_fwd);
        self.bwd = saved_bwd;
        if !ok {
            return false;
        }
        for (k, v) in local_fwd {
            if !local_a.contains(k.as_str()) && (class_generics.contains(k.as_str()) || !self.fwd.contains_key(&k))
                && !self.name(&k, &v) {
                    return false;
                }
        }
        true
    }

    fn stmts(&mut self, a: &[Stmt], b: &[Stmt]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| self.stmt(x, y))
    }

    fn stmt(&mut self, a: &Stmt, b: &Stmt) -> bool {
        match (a, b) {
            (
                Stmt::Local { name: n1, ty: t1, init: i1, .. },
                Stmt::Local { name: n2, ty: t2, init: i2, .. },
            ) => n1 == n2 && self.slot(t1, t2) && self.opt_expr(i1, i2),
            (Stmt::While { cond: c1, body: b1, .. }, Stmt::While { cond: c2, body: b2, .. }) => {
                self.expr(c1, c2) && self.stmts(b1, b2)
            }
            (Stmt::Return { value: v1, .. }, Stmt::Return { value: v2, .. }) => self.opt_expr(v1, v2),
            (Stmt::Block(x), Stmt::Block(y)) => self.stmts(x, y),
            (Stmt::Expr(x), Stmt::Expr(y)) => self.expr(x, y),
            _ => false,
        }
    }

    fn opt_expr(&mut self, a: &Option<Expr>, b: &Option<Expr>) -> bool {
        match (a, b) {
            (None, None) => true,
            (Some(x), Some(y)) => self.expr(x, y),
            _ => false,
        }
    }

    fn exprs(&mut self, a: &[Expr], b: &[Expr]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| self.expr(x, y))
    }

    fn expr(&mut self, a: &Expr, b: &Expr) -> bool {
        if !self.slot(&a.slot, &b.slot) {
            return false;
        }
        match (&a.kind, &b.kind) {
            (ExprKind::Lit(x), ExprKind::Lit(y)) => x == y,
            (ExprKind::Var(x), ExprKind::Var(y)) => x == y,
            (ExprKind::This, ExprKind::This) => true,
            (ExprKind::Assign { target: t1, value: v1 }, ExprKind::Assign { target: t2, value: v2 }) => {
                self.expr(t1, t2) && self.expr(v1, v2)
            }
            (ExprKind::PostInc(x), ExprKind::PostInc(y)) => self.expr(x, y),
            (
                ExprKind::Binary { op: o1, lhs: l1, rhs: r1 },
                ExprKind::Binary { op: o2, lhs: l2, rhs: r2 },
            ) => o1 == o2 && self.expr(l1, l2) && self.expr(r1, r2),
            (
                ExprKind::Call { receiver: r1, name: n1, args: a1 },
                ExprKind::Call { receiver: r2, name: n2, args: a2 },
            ) => {
                n1 == n2
                    && match (r1, r2) {
                        (None, None) => true,
                        (Some(x), Some(y)) => self.expr(x, y),
                        _ => false,
                    }
                    && self.exprs(a1, a2)
            }
            (ExprKind::Field { receiver: r1, name: n1 }, ExprKind::Field { receiver: r2, name: n2 }) => {
                n1 == n2 && self.expr(r1, r2)
            }
            (
                ExprKind::New { class: c1, type_args: t1, args: a1 },
                ExprKind::New { class: c2, type_args: t2, args: a2 },
            ) => {
                c1 == c2
                    && match (t1, t2) {
                        (None, None) => true,
                        (Some(x), Some(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| self.ty(p, q)),
                        _ => false,
                    }
                    && self.exprs(a1, a2)
            }
            (ExprKind::Lambda { params: p1, body: b1 }, ExprKind::Lambda { params: p2, body: b2 }) => {
                p1.len() == p2.len()
                    && p1.iter().zip(p2).all(|(x, y)| x.name == y.name && self.slot(&x.ty, &y.ty))
                    && match (b1, b2) {
                        (LambdaBody::Expr(x), LambdaBody::Expr(y)) => self.expr(x, y),
                        (LambdaBody::Block(x), LambdaBody::Block(y)) => self.stmts(x, y),
                        _ => false,
                    }
            }
            _ => false,
        }
    }
}
