//! Type terms shared by every stage of the pipeline.

use std::collections::BTreeSet;
use std::fmt;

/// A type placeholder: a fresh type variable standing for an omitted
/// annotation. Names are drawn from `A, B, ..., Z, AA, AB, ...`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tph(pub String);

impl Tph {
    pub fn new(name: impl Into<String>) -> Self {
        Tph(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Tph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    /// Nominal class type. `name` is the qualified name for built-ins
    /// (`java.lang.Integer`) and the bare name for user classes.
    Class { name: String, args: Vec<Type> },
    /// A declared (rigid) generic type parameter.
    Var(String),
    /// A type placeholder still open for inference.
    Tph(Tph),
    /// `FunN$$<T1..TN, R>` when `ret` is `Some`, `FunVoidN$$<T1..TN>` otherwise.
    Fun { args: Vec<Type>, ret: Option<Box<Type>> },
    Void,
}

pub const OBJECT: &str = "java.lang.Object";
pub const NUMBER: &str = "java.lang.Number";
pub const INTEGER: &str = "java.lang.Integer";
pub const DOUBLE: &str = "java.lang.Double";
pub const BOOLEAN: &str = "java.lang.Boolean";
pub const STRING: &str = "java.lang.String";

impl Type {
    pub fn class(name: impl Into<String>) -> Self {
        Type::Class { name: name.into(), args: Vec::new() }
    }

    pub fn generic(name: impl Into<String>, args: Vec<Type>) -> Self {
        Type::Class { name: name.into(), args }
    }

    pub fn tph(name: impl Into<String>) -> Self {
        Type::Tph(Tph::new(name))
    }

    pub fn fun(args: Vec<Type>, ret: Type) -> Self {
        Type::Fun { args, ret: Some(Box::new(ret)) }
    }

    pub fn fun_void(args: Vec<Type>) -> Self {
        Type::Fun { args, ret: None }
    }

    pub fn object() -> Self {
        Type::class(OBJECT)
    }

    pub fn is_object(&self) -> bool {
        matches!(self, Type::Class { name, .. } if name == OBJECT)
    }

    pub fn as_tph(&self) -> Option<&Tph> {
        match self {
            Type::Tph(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_tph(&self) -> bool {
        matches!(self, Type::Tph(_))
    }

    /// No placeholders anywhere inside.
    pub fn is_ground(&self) -> bool {
        match self {
            Type::Tph(_) => false,
            Type::Class { args, .. } => args.iter().all(Type::is_ground),
            Type::Fun { args, ret } => {
                args.iter().all(Type::is_ground) && ret.as_deref().is_none_or(Type::is_ground)
            }
            Type::Var(_) | Type::Void => true,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Type::Class { args, .. } => 1 + args.iter().map(Type::depth).max().unwrap_or(0),
            Type::Fun { args, ret } => {
                1 + args
                    .iter()
                    .chain(ret.as_deref())
                    .map(Type::depth)
                    .max()
                    .unwrap_or(0)
            }
            _ => 1,
        }
    }

    pub fn contains_tph(&self, t: &Tph) -> bool {
        match self {
            Type::Tph(u) => u == t,
            Type::Class { args, .. } => args.iter().any(|a| a.contains_tph(t)),
            Type::Fun { args, ret } => {
                args.iter().any(|a| a.contains_tph(t))
                    || ret.as_deref().is_some_and(|r| r.contains_tph(t))
            }
            _ => false,
        }
    }

    /// Placeholders in left-to-right order of first occurrence.
    pub fn tphs(&self) -> Vec<Tph> {
        let mut out = Vec::new();
        self.collect_tphs(&mut out);
        out
    }

    pub fn collect_tphs(&self, out: &mut Vec<Tph>) {
        match self {
            Type::Tph(t) => {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
            Type::Class { args, .. } => args.iter().for_each(|a| a.collect_tphs(out)),
            Type::Fun { args, ret } => {
                args.iter().for_each(|a| a.collect_tphs(out));
                if let Some(r) = ret {
                    r.collect_tphs(out);
                }
            }
            _ => {}
        }
    }

    pub fn tph_set(&self) -> BTreeSet<Tph> {
        self.tphs().into_iter().collect()
    }

    /// Rebuild the term, replacing every placeholder by `f(placeholder)`.
    pub fn map_tphs(&self, f: &mut impl FnMut(&Tph) -> Type) -> Type {
        match self {
            Type::Tph(t) => f(t),
            Type::Class { name, args } => Type::Class {
                name: name.clone(),
                args: args.iter().map(|a| a.map_tphs(f)).collect(),
            },
            Type::Fun { args, ret } => Type::Fun {
                args: args.iter().map(|a| a.map_tphs(f)).collect(),
                ret: ret.as_ref().map(|r| Box::new(r.map_tphs(f))),
            },
            other => other.clone(),
        }
    }

    /// Substitute declared type variables by name.
    pub fn subst_vars(&self, f: &impl Fn(&str) -> Option<Type>) -> Type {
        match self {
            Type::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Type::Class { name, args } => Type::Class {
                name: name.clone(),
                args: args.iter().map(|a| a.subst_vars(f)).collect(),
            },
            Type::Fun { args, ret } => Type::Fun {
                args: args.iter().map(|a| a.subst_vars(f)).collect(),
                ret: ret.as_ref().map(|r| Box::new(r.subst_vars(f))),
            },
            other => other.clone(),
        }
    }

    /// Rendering with simple class names, as written in source.
    pub fn display_simple(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, true);
        s
    }

    /// Rendering with qualified class names.
    pub fn display_qualified(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, false);
        s
    }

    fn write(&self, out: &mut String, simple: bool) {
        match self {
            Type::Class { name, args } => {
                out.push_str(if simple { simple_name(name) } else { name });
                if !args.is_empty() {
                    out.push('<');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        a.write(out, simple);
                    }
                    out.push('>');
                }
            }
            Type::Var(v) => out.push_str(v),
            Type::Tph(t) => out.push_str(&t.0),
            Type::Fun { args, ret } => {
                match ret {
                    Some(_) => out.push_str(&format!("Fun{}$$", args.len())),
                    None => out.push_str(&format!("FunVoid{}$$", args.len())),
                }
                out.push('<');
                let mut first = true;
                for a in args.iter().chain(ret.as_deref()) {
                    if !first {
                        out.push_str(", ");
                    }
                    first = false;
                    a.write(out, simple);
                }
                out.push('>');
            }
            Type::Void => out.push_str("void"),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_simple())
    }
}

pub fn simple_name(qualified: &str) -> &str {
    qualified.rsplit('.').next().unwrap_or(qualified)
}

/// Deterministic supply of fresh placeholder names.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    next: usize,
}

impl NameSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(next: usize) -> Self {
        NameSupply { next }
    }

    pub fn position(&self) -> usize {
        self.next
    }

    pub fn fresh(&mut self) -> Tph {
        let name = alpha_name(self.next);
        self.next += 1;
        Tph(name)
    }

    pub fn fresh_type(&mut self) -> Type {
        Type::Tph(self.fresh())
    }
}

/// `0 -> A`, `25 -> Z`, `26 -> AA`, `27 -> AB`, ... (bijective base 26).
pub fn alpha_name(mut index: usize) -> String {
    let mut chars = Vec::new();
    loop {
        chars.push((b'A' + (index % 26) as u8) as char);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    chars.iter().rev().collect()
}

/// Inverse of [`alpha_name`]; `None` for names outside the sequence.
pub fn alpha_index(name: &str) -> Option<usize> {
    if name.is_empty() || !name.bytes().all(|b| b.is_ascii_uppercase()) {
        return None;
    }
    let mut n = 0usize;
    for b in name.bytes() {
        n = n.checked_mul(26)?.checked_add((b - b'A') as usize + 1)?;
    }
    Some(n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_sequence() {
        let mut s = NameSupply::new();
        let names: Vec<_> = (0..28).map(|_| s.fresh().0).collect();
        assert_eq!(names[0], "A");
        assert_eq!(names[25], "Z");
        assert_eq!(names[26], "AA");
        assert_eq!(names[27], "AB");
        assert_ne!(names[0], names[1]);
        assert_eq!(alpha_name(26 * 27), "AAA");
        for i in [0, 25, 26, 27, 701, 702, 5000] {
            assert_eq!(alpha_index(&alpha_name(i)), Some(i));
        }
        assert_eq!(alpha_index("x"), None);
    }

    #[test]
    fn rendering() {
        let t = Type::fun(vec![Type::class(INTEGER)], Type::tph("B"));
        assert_eq!(t.display_simple(), "Fun1$$<Integer, B>");
        assert_eq!(t.display_qualified(), "Fun1$$<java.lang.Integer, B>");
        assert_eq!(Type::fun_void(vec![Type::object()]).to_string(), "FunVoid1$$<Object>");
        assert_eq!(t.depth(), 2);
        assert!(!t.is_ground());
    }
}
