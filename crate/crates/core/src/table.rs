//! The finite type universe of one compilation unit and the declared
//! subtype relation over it.
//!
//! Built-in classes come from a JSON table (bundled by default, see
//! `data/builtins.json`). A program sees `Object`, the built-ins reachable
//! from its imports, the built-ins its operators and literals produce, and
//! its own classes. The `FunN$$`/`FunVoidN$$` families are always available
//! and are handled structurally rather than through entries.
//!
//! Table file schema:
//!
//! ```json
//! { "classes": [ { "name": "tx.util.Pair", "params": ["A", "B"],
//!                  "variance": ["invariant", "invariant"],
//!                  "super": "java.lang.Object", "constructor": ["A", "B"],
//!                  "methods": [ { "name": "fst", "params": [], "ret": "A" } ] } ],
//!   "fun_families": { "max_arity": 8 } }
//! ```
//!
//! `params`, `variance`, `constructor` and `methods` are optional.
//! Supertype and member types may mention the class's own parameters.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Pos, Result};
use crate::syntax::{self, BinOp, ExprKind, Literal, Program, Stmt, TypeAnn};
use crate::types::{Type, BOOLEAN, INTEGER, NUMBER, OBJECT, STRING};

const BUNDLED: &str = include_str!("../data/builtins.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Invariant,
    Covariant,
    Contravariant,
}

#[derive(Debug, Deserialize)]
struct TableFile {
    classes: Vec<ClassSpec>,
    fun_families: FunFamilies,
}

#[derive(Debug, Deserialize)]
struct FunFamilies {
    max_arity: usize,
}

#[derive(Debug, Deserialize)]
struct ClassSpec {
    name: String,
    #[serde(default)]
    params: Vec<String>,
    #[serde(default)]
    variance: Vec<Variance>,
    #[serde(rename = "super")]
    sup: Option<String>,
    constructor: Option<Vec<String>>,
    #[serde(default)]
    methods: Vec<MethodSpec>,
}

#[derive(Debug, Deserialize)]
struct MethodSpec {
    name: String,
    params: Vec<String>,
    ret: String,
}

/// A member method signature. Declared generics are listed with their
/// bounds; an empty bound list means `Object`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSig {
    pub name: String,
    pub generics: Vec<(String, Vec<Type>)>,
    pub params: Vec<Type>,
    pub ret: Type,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntry {
    pub name: String,
    pub params: Vec<String>,
    pub variance: Vec<Variance>,
    /// Direct supertype in terms of `Type::Var(param)`; `None` only for
    /// `Object`.
    pub supertype: Option<Type>,
    pub constructor: Option<Vec<Type>>,
    pub fields: Vec<(String, Type)>,
    /// One entry per typing; overloaded members appear several times.
    pub methods: Vec<MethodSig>,
    pub user: bool,
}

impl ClassEntry {
    /// The entry's type applied to its own parameters.
    pub fn self_type(&self) -> Type {
        Type::generic(self.name.clone(), self.params.iter().map(|p| Type::Var(p.clone())).collect())
    }

    /// Substitute the class parameters by `args` in `t`.
    pub fn instantiate(&self, t: &Type, args: &[Type]) -> Type {
        t.subst_vars(&|v| self.params.iter().position(|p| p == v).map(|i| args[i].clone()))
    }
}

/// The parsed built-in table, shared by every program of a run.
#[derive(Debug, Clone)]
pub struct Builtins {
    classes: Vec<ClassEntry>,
    max_fun_arity: usize,
}

impl Builtins {
    pub fn bundled() -> &'static Builtins {
        static CELL: OnceLock<Builtins> = OnceLock::new();
        CELL.get_or_init(|| Builtins::from_json(BUNDLED).expect("bundled class table is valid"))
    }

    pub fn load(path: &Path) -> Result<Builtins> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Table(format!("cannot read {}: {e}", path.display())))?;
        Builtins::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Builtins> {
        let file: TableFile = serde_json::from_str(text).map_err(|e| Error::Table(e.to_string()))?;
        let names: HashSet<&str> = file.classes.iter().map(|c| c.name.as_str()).collect();
        if !names.contains(OBJECT) {
            return Err(Error::Table(format!("`{OBJECT}` is missing")));
        }
        let mut classes = Vec::new();
        for spec in &file.classes {
            let params = spec.params.clone();
            let variance = if spec.variance.is_empty() {
                vec![Variance::Invariant; params.len()]
            } else if spec.variance.len() == params.len() {
                spec.variance.clone()
            } else {
                return Err(Error::Table(format!("`{}`: variance list does not match parameters", spec.name)));
            };
            let ty = |s: &str| parse_type_string(s, &params, &names).map_err(|m| Error::Table(format!("`{}`: {m}", spec.name)));
            let supertype = match &spec.sup {
                Some(s) => Some(ty(s)?),
                None if spec.name == OBJECT => None,
                None => Some(Type::object()),
            };
            let constructor = spec.constructor.as_ref().map(|ps| ps.iter().map(|p| ty(p)).collect()).transpose()?;
            let methods = spec
                .methods
                .iter()
                .map(|m| {
                    Ok(MethodSig {
                        name: m.name.clone(),
                        generics: Vec::new(),
                        params: m.params.iter().map(|p| ty(p)).collect::<Result<_>>()?,
                        ret: ty(&m.ret)?,
                    })
                })
                .collect::<Result<_>>()?;
            classes.push(ClassEntry {
                name: spec.name.clone(),
                params,
                variance,
                supertype,
                constructor,
                fields: Vec::new(),
                methods,
                user: false,
            });
        }
        let builtins = Builtins { classes, max_fun_arity: file.fun_families.max_arity };
        builtins.check_acyclic()?;
        Ok(builtins)
    }

    fn check_acyclic(&self) -> Result<()> {
        for c in &self.classes {
            let mut seen = HashSet::new();
            let mut cur = Some(c);
            while let Some(e) = cur {
                if !seen.insert(e.name.as_str()) {
                    return Err(Error::Table(format!("cyclic supertype chain through `{}`", e.name)));
                }
                cur = match &e.supertype {
                    Some(Type::Class { name, .. }) => self.classes.iter().find(|x| &x.name == name),
                    _ => None,
                };
            }
        }
        Ok(())
    }

    fn get(&self, name: &str) -> Option<&ClassEntry> {
        self.classes
            .iter()
            .find(|c| c.name == name)
            .or_else(|| self.classes.iter().find(|c| crate::types::simple_name(&c.name) == name))
    }
}

/// Parse `a.b.C<T, D<U>>` from the table file.
fn parse_type_string(s: &str, params: &[String], names: &HashSet<&str>) -> std::result::Result<Type, String> {
    fn go(s: &str, params: &[String], names: &HashSet<&str>) -> std::result::Result<(Type, usize), String> {
        let end = s.find(['<', '>', ',']).unwrap_or(s.len());
        let head = s[..end].trim();
        if head.is_empty() {
            return Err(format!("malformed type `{s}`"));
        }
        if params.iter().any(|p| p == head) {
            return Ok((Type::Var(head.to_string()), end));
        }
        if !names.contains(head) {
            return Err(format!("unknown class `{head}`"));
        }
        let mut args = Vec::new();
        let mut at = end;
        if s[at..].starts_with('<') {
            at += 1;
            loop {
                let (t, used) = go(&s[at..], params, names)?;
                args.push(t);
                at += used;
                let rest = s[at..].trim_start();
                at = s.len() - rest.len();
                if rest.starts_with(',') {
                    at += 1;
                } else if rest.starts_with('>') {
                    at += 1;
                    break;
                } else {
                    return Err(format!("malformed type `{s}`"));
                }
            }
        }
        Ok((Type::generic(head, args), at))
    }
    let (t, used) = go(s.trim(), params, names)?;
    if used != s.trim().len() {
        return Err(format!("trailing input in type `{s}`"));
    }
    Ok(t)
}

/// Class table of one program: built-ins in table order, then user classes
/// in declaration order.
#[derive(Debug, Clone)]
pub struct ClassTable {
    entries: Vec<ClassEntry>,
    index: HashMap<String, usize>,
    /// Rigid type variables in scope with their bounds.
    vars: BTreeMap<String, Vec<Type>>,
    max_fun_arity: usize,
}

/// Build the table for `program` against the bundled built-ins.
pub fn build_class_table(program: &Program) -> Result<ClassTable> {
    build_class_table_with(program, Builtins::bundled())
}

pub fn build_class_table_with(program: &Program, builtins: &Builtins) -> Result<ClassTable> {
    let mut wanted: Vec<String> = vec![OBJECT.to_string()];
    for imp in &program.imports {
        match builtins.classes.iter().find(|c| c.name == imp.name) {
            Some(c) => wanted.push(c.name.clone()),
            None => return Err(Error::UnknownImport { pos: imp.pos, name: imp.name.clone() }),
        }
    }
    let usage = scan_usage(program);
    if usage.int_literals {
        wanted.push(INTEGER.into());
    }
    if usage.comparisons {
        wanted.push(NUMBER.into());
    }
    if usage.booleans {
        wanted.push(BOOLEAN.into());
    }
    if usage.strings {
        wanted.push(STRING.into());
    }
    // Built-ins named in annotations are visible without an import, like
    // java.lang in Java.
    for name in &usage.annotated {
        if let Some(c) = builtins.get(name) {
            wanted.push(c.name.clone());
        }
    }
    // Close under supertypes and types mentioned by members.
    let mut included: HashSet<String> = HashSet::new();
    while let Some(n) = wanted.pop() {
        if !included.insert(n.clone()) {
            continue;
        }
        let Some(c) = builtins.classes.iter().find(|c| c.name == n) else { continue };
        let mut mentioned = Vec::new();
        let sigs = c.methods.iter().flat_map(|m| m.params.iter().chain(std::iter::once(&m.ret)));
        for t in c.supertype.iter().chain(c.constructor.iter().flatten()).chain(sigs) {
            class_names(t, &mut mentioned);
        }
        wanted.extend(mentioned);
    }

    let mut table = ClassTable {
        entries: Vec::new(),
        index: HashMap::new(),
        vars: BTreeMap::new(),
        max_fun_arity: builtins.max_fun_arity,
    };
    for c in &builtins.classes {
        if included.contains(&c.name) {
            table.push(c.clone());
        }
    }
    for cls in &program.classes {
        if table.entries.iter().any(|e| e.name == cls.name || crate::types::simple_name(&e.name) == cls.name) {
            return Err(Error::DuplicateClass { pos: cls.pos, name: cls.name.clone() });
        }
        let params: Vec<String> = cls.generics.iter().map(|g| g.name.clone()).collect();
        table.push(ClassEntry {
            name: cls.name.clone(),
            variance: vec![Variance::Invariant; params.len()],
            params,
            supertype: Some(Type::object()),
            constructor: Some(Vec::new()),
            fields: Vec::new(),
            methods: Vec::new(),
            user: true,
        });
    }
    Ok(table)
}

fn class_names(t: &Type, out: &mut Vec<String>) {
    match t {
        Type::Class { name, args } => {
            out.push(name.clone());
            args.iter().for_each(|a| class_names(a, out));
        }
        Type::Fun { args, ret } => {
            args.iter().chain(ret.as_deref()).for_each(|a| class_names(a, out));
        }
        _ => {}
    }
}

#[derive(Default)]
struct Usage {
    int_literals: bool,
    comparisons: bool,
    booleans: bool,
    strings: bool,
    annotated: Vec<String>,
}

fn scan_usage(p: &Program) -> Usage {
    let mut u = Usage::default();
    syntax::walk_program(p, &mut |e| match &e.kind {
        ExprKind::Lit(Literal::Int(_)) | ExprKind::PostInc(_) => u.int_literals = true,
        ExprKind::Lit(Literal::Bool(_)) => u.booleans = true,
        ExprKind::Lit(Literal::Str(_)) => u.strings = true,
        ExprKind::Binary { op: BinOp::Le, .. } => {
            u.comparisons = true;
            u.booleans = true;
        }
        ExprKind::Binary { op: BinOp::Or, .. } => u.booleans = true,
        _ => {}
    });
    fn stmts_have_while(s: &[Stmt]) -> bool {
        s.iter().any(|s| match s {
            Stmt::While { .. } => true,
            Stmt::Block(b) => stmts_have_while(b),
            _ => false,
        })
    }
    if p.classes.iter().flat_map(|c| &c.methods).any(|m| stmts_have_while(&m.body)) {
        u.booleans = true;
    }
    let mut anns: Vec<&TypeAnn> = Vec::new();
    for c in &p.classes {
        anns.extend(c.generics.iter().flat_map(|g| &g.bounds));
        anns.extend(c.fields.iter().filter_map(|f| f.ty.annotation()));
        for m in &c.methods {
            anns.extend(m.generics.iter().flat_map(|g| &g.bounds));
            anns.extend(m.params.iter().filter_map(|p| p.ty.annotation()));
            anns.extend(m.ret.annotation());
            collect_local_annotations(&m.body, &mut anns);
        }
    }
    fn names(a: &TypeAnn, out: &mut Vec<String>) {
        if let TypeAnn::Named { name, args, .. } = a {
            out.push(name.clone());
            args.iter().for_each(|x| names(x, out));
        }
    }
    for a in anns {
        names(a, &mut u.annotated);
    }
    u
}

fn collect_local_annotations<'a>(stmts: &'a [Stmt], out: &mut Vec<&'a TypeAnn>) {
    for s in stmts {
        match s {
            Stmt::Local { ty, .. } => out.extend(ty.annotation()),
            Stmt::While { body, .. } | Stmt::Block(body) => collect_local_annotations(body, out),
            _ => {}
        }
    }
    syntax::walk_stmts(stmts, &mut |e| {
        if let ExprKind::Lambda { params, .. } = &e.kind {
            out.extend(params.iter().filter_map(|p| p.ty.annotation()));
        }
    });
}

impl ClassTable {
    fn push(&mut self, entry: ClassEntry) {
        let i = self.entries.len();
        self.index.insert(entry.name.clone(), i);
        self.index.entry(crate::types::simple_name(&entry.name).to_string()).or_insert(i);
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }

    /// Qualified names of every class in the universe, in table order.
    pub fn universe(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Look a class up by qualified or simple name.
    pub fn get(&self, name: &str) -> Option<&ClassEntry> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut ClassEntry> {
        self.index.get(name).map(|&i| &mut self.entries[i])
    }

    pub fn max_fun_arity(&self) -> usize {
        self.max_fun_arity
    }

    /// A copy of the table with rigid type variables in scope.
    pub fn with_type_vars(&self, vars: impl IntoIterator<Item = (String, Vec<Type>)>) -> ClassTable {
        let mut t = self.clone();
        t.vars.extend(vars);
        t
    }

    pub fn type_vars(&self) -> &BTreeMap<String, Vec<Type>> {
        &self.vars
    }

    pub fn is_var(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    /// Resolve a source annotation. `scope` lists the type variables visible
    /// at the annotation site.
    pub fn resolve(&self, ann: &TypeAnn, scope: &dyn Fn(&str) -> bool) -> Result<Type> {
        let (name, args, pos) = match ann {
            TypeAnn::Void { .. } => return Ok(Type::Void),
            TypeAnn::Named { name, args, pos } => (name, args, *pos),
        };
        let resolved: Vec<Type> = args.iter().map(|a| self.resolve(a, scope)).collect::<Result<_>>()?;
        if let Some((arity, void)) = fun_family(name) {
            let expected = if void { arity } else { arity + 1 };
            if resolved.len() != expected {
                return Err(Error::ArityMismatch { pos, name: name.clone(), expected, found: resolved.len() });
            }
            if arity > self.max_fun_arity {
                return Err(Error::UnknownType { pos, name: name.clone() });
            }
            if resolved.contains(&Type::Void) {
                return Err(Error::Syntax { pos, msg: "`void` is not a type argument".into() });
            }
            let mut resolved = resolved;
            return Ok(if void {
                Type::fun_void(resolved)
            } else {
                let ret = resolved.pop().unwrap();
                Type::fun(resolved, ret)
            });
        }
        if scope(name) {
            if !resolved.is_empty() {
                return Err(Error::ArityMismatch { pos, name: name.clone(), expected: 0, found: resolved.len() });
            }
            return Ok(Type::Var(name.clone()));
        }
        let entry = self.get(name).ok_or_else(|| Error::UnknownType { pos, name: name.clone() })?;
        if entry.params.len() != resolved.len() {
            return Err(Error::ArityMismatch {
                pos,
                name: name.clone(),
                expected: entry.params.len(),
                found: resolved.len(),
            });
        }
        Ok(Type::generic(entry.name.clone(), resolved))
    }

    /// Check that every class type in `t` exists with the right arity.
    pub fn check_well_formed(&self, t: &Type) -> Result<()> {
        match t {
            Type::Class { name, args } => {
                let entry = self.get(name).ok_or_else(|| Error::UnknownType { pos: Pos::default(), name: name.clone() })?;
                if entry.params.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        pos: Pos::default(),
                        name: name.clone(),
                        expected: entry.params.len(),
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| self.check_well_formed(a))
            }
            Type::Fun { args, ret } => args.iter().chain(ret.as_deref()).try_for_each(|a| self.check_well_formed(a)),
            _ => Ok(()),
        }
    }

    /// Declared subtyping `a ⊑ b` on placeholder-free types.
    pub fn is_subtype(&self, a: &Type, b: &Type) -> Result<bool> {
        self.check_well_formed(a)?;
        self.check_well_formed(b)?;
        Ok(self.subtype(a, b))
    }

    /// [`ClassTable::is_subtype`] without the well-formedness check.
    pub fn subtype(&self, a: &Type, b: &Type) -> bool {
        if a == b {
            return true;
        }
        match (a, b) {
            (Type::Void, _) | (_, Type::Void) => false,
            (_, b) if b.is_object() => true,
            (Type::Fun { args: a1, ret: r1 }, Type::Fun { args: a2, ret: r2 }) => {
                a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|(x, y)| self.subtype(y, x))
                    && match (r1, r2) {
                        (Some(x), Some(y)) => self.subtype(x, y),
                        (None, None) => true,
                        _ => false,
                    }
            }
            (Type::Class { .. }, Type::Class { name, args }) => match self.find_super(a, name) {
                Some(Type::Class { args: found, .. }) => {
                    let variance = self.get(name).map(|e| e.variance.clone()).unwrap_or_default();
                    found.iter().zip(args).enumerate().all(|(i, (x, y))| match variance.get(i) {
                        Some(Variance::Covariant) => self.subtype(x, y),
                        Some(Variance::Contravariant) => self.subtype(y, x),
                        _ => x == y,
                    })
                }
                _ => false,
            },
            (Type::Var(_), _) => self.direct_supertypes(a).iter().any(|s| self.subtype(s, b)),
            _ => false,
        }
    }

    /// Immediate supertypes: the instantiated superclass, the bounds of a
    /// type variable, or `Object` for function types.
    pub fn direct_supertypes(&self, t: &Type) -> Vec<Type> {
        match t {
            Type::Class { name, args } => match self.get(name) {
                Some(e) => e.supertype.iter().map(|s| e.instantiate(s, args)).collect(),
                None => Vec::new(),
            },
            Type::Var(v) => match self.vars.get(v) {
                Some(bounds) if !bounds.is_empty() => bounds.clone(),
                _ => vec![Type::object()],
            },
            Type::Fun { .. } => vec![Type::object()],
            _ => Vec::new(),
        }
    }

    /// `t` followed by all its proper supertypes, nearest first.
    pub fn ancestors(&self, t: &Type) -> Vec<Type> {
        let mut out = vec![t.clone()];
        let mut i = 0;
        while i < out.len() {
            for s in self.direct_supertypes(&out[i]) {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
            i += 1;
        }
        out
    }

    /// The instantiation of class `head` among the supertypes of `t`.
    pub fn find_super(&self, t: &Type, head: &str) -> Option<Type> {
        self.ancestors(t)
            .into_iter()
            .find(|s| matches!(s, Type::Class { name, .. } if name == head))
    }

    /// Classes whose declared supertype chain reaches `head` (including
    /// `head` itself), in table order.
    pub fn subclasses(&self, head: &str) -> Vec<&ClassEntry> {
        self.entries
            .iter()
            .filter(|e| {
                let mut cur = Some(*e);
                while let Some(c) = cur {
                    if c.name == head {
                        return true;
                    }
                    cur = match &c.supertype {
                        Some(Type::Class { name, .. }) => self.get(name),
                        _ => None,
                    };
                }
                false
            })
            .collect()
    }

    /// Rigid variables at or below `v`.
    pub fn subvars(&self, v: &str) -> Vec<String> {
        self.vars
            .keys()
            .filter(|w| self.subtype(&Type::Var((*w).clone()), &Type::Var(v.to_string())))
            .cloned()
            .collect()
    }

    /// Every class offering a method `name` with `arity` parameters.
    pub fn classes_with_method(&self, name: &str, arity: usize) -> Vec<&ClassEntry> {
        self.entries
            .iter()
            .filter(|e| e.methods.iter().any(|m| m.name == name && m.params.len() == arity))
            .collect()
    }

    pub fn classes_with_field(&self, name: &str) -> Vec<&ClassEntry> {
        self.entries.iter().filter(|e| e.fields.iter().any(|(f, _)| f == name)).collect()
    }
}

/// `Fun3$$` → `(3, false)`, `FunVoid2$$` → `(2, true)`.
pub fn fun_family(name: &str) -> Option<(usize, bool)> {
    let body = name.strip_prefix("Fun")?.strip_suffix("$$")?;
    let (digits, void) = match body.strip_prefix("Void") {
        Some(d) => (d, true),
        None => (body, false),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().map(|n| (n, void))
}
