//! Heterogeneous translation of function types.
//!
//! Erasing `Fun1$$<Double, Double>` and `Fun1$$<Integer, Integer>` to the
//! same `Fun1$$` makes overloads indistinguishable by descriptor. Instead
//! every ground function type gets its own interface name, built from the
//! source spelling with `.` replaced by `$` and each of `,` `<` `>` replaced
//! by `$_$`:
//!
//! ```
//! use tx_infer::funtype::mangle;
//! use tx_infer::types::{Type, DOUBLE};
//!
//! let t = Type::fun(vec![Type::class(DOUBLE)], Type::class(DOUBLE));
//! assert_eq!(mangle(&t), "Fun1$$$_$java$lang$Double$_$java$lang$Double$_$");
//! ```
//!
//! Function types with type parameters erase to their family root, as
//! generic types do in real descriptors.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::table::{fun_family, ClassTable};
use crate::types::Type;

const SEP: &str = "$_$";

/// The erased interface of a function type: `Fun1$$`, `FunVoid2$$`, ...
pub fn root_name(t: &Type) -> Option<String> {
    match t {
        Type::Fun { args, ret: Some(_) } => Some(format!("Fun{}$$", args.len())),
        Type::Fun { args, ret: None } => Some(format!("FunVoid{}$$", args.len())),
        _ => None,
    }
}

/// Mangled class name of a type. Ground types keep their arguments; types
/// mentioning placeholders or type variables erase to their head.
pub fn mangle(t: &Type) -> String {
    if !is_closed(t) {
        return erased_name(t);
    }
    let mut out = String::new();
    write_mangled(t, &mut out);
    out
}

fn erased_name(t: &Type) -> String {
    match t {
        Type::Class { name, .. } => name.replace('.', "$"),
        Type::Fun { .. } => root_name(t).unwrap(),
        Type::Void => "V".into(),
        Type::Var(_) | Type::Tph(_) => "java$lang$Object".into(),
    }
}

/// No placeholders and no type variables.
fn is_closed(t: &Type) -> bool {
    match t {
        Type::Class { args, .. } => args.iter().all(is_closed),
        Type::Fun { args, ret } => args.iter().chain(ret.as_deref()).all(is_closed),
        Type::Var(_) | Type::Tph(_) => false,
        Type::Void => true,
    }
}

fn write_mangled(t: &Type, out: &mut String) {
    match t {
        Type::Class { name, args } => {
            out.push_str(&name.replace('.', "$"));
            write_args(args.iter(), out);
        }
        Type::Fun { args, ret } => {
            out.push_str(&root_name(t).unwrap());
            write_args(args.iter().chain(ret.as_deref()), out);
        }
        Type::Void => out.push('V'),
        Type::Var(_) | Type::Tph(_) => out.push_str(&erased_name(t)),
    }
}

fn write_args<'a>(args: impl Iterator<Item = &'a Type>, out: &mut String) {
    let mut any = false;
    for a in args {
        out.push_str(SEP);
        write_mangled(a, out);
        any = true;
    }
    if any {
        out.push_str(SEP);
    }
}

/// Inverse of [`mangle`] for closed types whose classes are in `table`.
pub fn decode(name: &str, table: &ClassTable) -> Option<Type> {
    let (t, rest) = decode_at(name, table)?;
    rest.is_empty().then_some(t)
}

fn decode_at<'s>(s: &'s str, table: &ClassTable) -> Option<(Type, &'s str)> {
    // The head runs up to the first separator. The `$$` of a family name
    // cannot start one: the leftmost match in `Fun1$$$_$` is the real one.
    let head_end = s.find(SEP).unwrap_or(s.len());
    let head = &s[..head_end];
    let rest = &s[head_end..];
    if let Some((n, void)) = fun_family(head) {
        let count = n + usize::from(!void);
        let (mut args, rest) = decode_args(rest, count, table)?;
        let ret = if void { None } else { Some(Box::new(args.pop()?)) };
        return Some((Type::Fun { args, ret }, rest));
    }
    let name = head.replace('$', ".");
    let entry = table.get(&name)?;
    let (args, rest) = decode_args(rest, entry.params.len(), table)?;
    Some((Type::generic(entry.name.clone(), args), rest))
}

fn decode_args<'s>(mut s: &'s str, count: usize, table: &ClassTable) -> Option<(Vec<Type>, &'s str)> {
    let mut args = Vec::with_capacity(count);
    for _ in 0..count {
        s = s.strip_prefix(SEP)?;
        let (t, rest) = decode_at(s, table)?;
        args.push(t);
        s = rest;
    }
    if count > 0 {
        s = s.strip_prefix(SEP)?;
    }
    Some((args, s))
}

/// Every function type occurring in `types`, nested ones included.
pub fn collect_used<'a>(types: impl IntoIterator<Item = &'a Type>) -> BTreeSet<Type> {
    fn walk(t: &Type, out: &mut BTreeSet<Type>) {
        match t {
            Type::Class { args, .. } => args.iter().for_each(|a| walk(a, out)),
            Type::Fun { args, ret } => {
                out.insert(t.clone());
                args.iter().chain(ret.as_deref()).for_each(|a| walk(a, out));
            }
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    for t in types {
        walk(t, &mut out);
    }
    out
}

/// One generated marker interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunInterfaceDecl {
    pub ty: Type,
    pub name: String,
    /// Mangled names of the used types directly above this one.
    pub supers: Vec<String>,
    pub root: String,
}

/// One interface per closed used type, extending the used types directly
/// above it and the erased root. Types with parameters are their root and
/// get no interface of their own.
pub fn hierarchy(used: &BTreeSet<Type>, table: &ClassTable) -> Vec<FunInterfaceDecl> {
    let closed: Vec<&Type> = used.iter().filter(|t| is_closed(t)).collect();
    let below = |a: &Type, b: &Type| a != b && table.subtype(a, b);
    closed
        .iter()
        .map(|&t| {
            let mut supers: Vec<String> = closed
                .iter()
                .filter(|&&u| below(t, u) && !closed.iter().any(|&m| below(t, m) && below(m, u)))
                .map(|u| mangle(u))
                .collect();
            supers.sort();
            FunInterfaceDecl { ty: t.clone(), name: mangle(t), supers, root: root_name(t).unwrap() }
        })
        .collect()
}

/// Manifest text: `NAME : SUPER1, SUPER2, ROOT` per interface.
pub fn manifest(decls: &[FunInterfaceDecl]) -> String {
    let mut out = String::new();
    for d in decls {
        let supers: Vec<&str> = d.supers.iter().map(String::as_str).chain([d.root.as_str()]).collect();
        let _ = writeln!(out, "{} : {}", d.name, supers.join(", "));
    }
    out
}

/// JVM-style field descriptor of a type: `L<mangled>;`, or `V` for void.
pub fn descriptor_of(t: &Type) -> String {
    match t {
        Type::Void => "V".into(),
        _ => format!("L{};", mangle(t)),
    }
}

/// Method descriptor `(<arg>*)<ret>`.
pub fn method_descriptor(params: &[Type], ret: &Type) -> String {
    let mut out = String::from("(");
    for p in params {
        out.push_str(&descriptor_of(p));
    }
    out.push(')');
    out.push_str(&descriptor_of(ret));
    out
}

/// The display form with the `Ljava$lang$` prefix left out, as descriptors
/// are usually shown for readability.
pub fn elide_java_lang(desc: &str) -> String {
    desc.replace("Ljava$lang$", "").replace("java$lang$", "")
}
