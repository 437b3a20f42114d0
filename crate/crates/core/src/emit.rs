//! Rendering of inference results: typed source, intersection type
//! reports and method descriptors.
//!
//! Types reaching this module are final: placeholders have been replaced
//! by type variables with their display names (see [`canonical_names`]).

use std::collections::{BTreeMap, HashSet};

use crate::funtype::{elide_java_lang, method_descriptor};
use crate::generics::Bound;
use crate::syntax::{GenericParam, TypeAnn};
use crate::table::MethodSig;
use crate::types::{alpha_name, simple_name, Tph, Type, BOOLEAN, DOUBLE, INTEGER, STRING};

/// Display names for placeholders, in the order given, drawn from the
/// sequence `A, B, .., Z, AA, ..` and skipping names in `avoid`.
pub fn canonical_names<'a>(order: impl IntoIterator<Item = &'a Tph>, avoid: &HashSet<String>) -> BTreeMap<Tph, String> {
    let mut out = BTreeMap::new();
    let mut next = 0;
    for t in order {
        if out.contains_key(t) {
            continue;
        }
        let name = loop {
            let n = alpha_name(next);
            next += 1;
            if !avoid.contains(&n) {
                break n;
            }
        };
        out.insert(t.clone(), name);
    }
    out
}

/// Replace placeholders by type variables named by `names`. Placeholders
/// without a name keep their own.
pub fn to_vars(t: &Type, names: &BTreeMap<Tph, String>) -> Type {
    match t {
        Type::Tph(x) => Type::Var(names.get(x).cloned().unwrap_or_else(|| x.0.clone())),
        Type::Class { name, args } => Type::generic(name.clone(), args.iter().map(|a| to_vars(a, names)).collect()),
        Type::Fun { args, ret } => Type::Fun {
            args: args.iter().map(|a| to_vars(a, names)).collect(),
            ret: ret.as_ref().map(|r| Box::new(to_vars(r, names))),
        },
        other => other.clone(),
    }
}

/// Source annotation for a type, with simple class names.
pub fn to_ann(t: &Type) -> TypeAnn {
    match t {
        Type::Void => TypeAnn::Void { pos: Default::default() },
        Type::Class { name, args } => TypeAnn::named(simple_name(name), args.iter().map(to_ann).collect()),
        Type::Var(v) => TypeAnn::named(v.clone(), Vec::new()),
        Type::Tph(x) => TypeAnn::named(x.0.clone(), Vec::new()),
        Type::Fun { args, ret } => {
            let head = crate::funtype::root_name(t).unwrap();
            TypeAnn::named(head, args.iter().chain(ret.as_deref()).map(to_ann).collect())
        }
    }
}

/// Generic parameter clause from placeholder bounds; `Object` is left out.
pub fn generic_params(params: &[(Tph, Vec<Bound>)], names: &BTreeMap<Tph, String>) -> Vec<GenericParam> {
    params
        .iter()
        .map(|(t, bounds)| GenericParam {
            name: names.get(t).cloned().unwrap_or_else(|| t.0.clone()),
            bounds: bounds
                .iter()
                .filter_map(|b| match b {
                    Bound::Object => None,
                    Bound::Tph(u) => Some(TypeAnn::named(names.get(u).cloned().unwrap_or_else(|| u.0.clone()), vec![])),
                })
                .collect(),
        })
        .collect()
}

/// Rename the type variables of a typing to `A, B, ..` in order of first
/// occurrence in parameters, return type and bounds, so that typings equal
/// up to renaming compare equal.
pub fn normalize_typing(sig: &MethodSig) -> MethodSig {
    let declared: HashSet<&str> = sig.generics.iter().map(|(g, _)| g.as_str()).collect();
    let mut order: Vec<String> = Vec::new();
    let visit = |t: &Type, order: &mut Vec<String>| {
        collect_vars(t, &mut |v| {
            if declared.contains(v) && !order.iter().any(|o| o == v) {
                order.push(v.to_string());
            }
        })
    };
    for p in &sig.params {
        visit(p, &mut order);
    }
    visit(&sig.ret, &mut order);
    for (g, bounds) in &sig.generics {
        visit(&Type::Var(g.clone()), &mut order);
        for b in bounds {
            visit(b, &mut order);
        }
    }
    // Class parameters occur free and keep their names.
    let mut free = HashSet::new();
    for t in sig.params.iter().chain([&sig.ret]).chain(sig.generics.iter().flat_map(|(_, bs)| bs)) {
        collect_vars(t, &mut |v| {
            if !declared.contains(v) {
                free.insert(v.to_string());
            }
        });
    }
    let mut fresh = (0..).map(alpha_name).filter(|n| !free.contains(n));
    let map: BTreeMap<&str, String> = order.iter().map(|v| (v.as_str(), fresh.next().unwrap())).collect();
    let ren = |t: &Type| t.subst_vars(&|v| map.get(v).map(|n| Type::Var(n.clone())));
    let mut generics: Vec<(String, Vec<Type>)> =
        sig.generics.iter().map(|(g, bs)| (map[g.as_str()].clone(), bs.iter().map(ren).collect())).collect();
    generics.sort();
    MethodSig { name: sig.name.clone(), generics, params: sig.params.iter().map(ren).collect(), ret: ren(&sig.ret) }
}

fn collect_vars(t: &Type, f: &mut impl FnMut(&str)) {
    match t {
        Type::Var(v) => f(v),
        Type::Class { args, .. } => args.iter().for_each(|a| collect_vars(a, f)),
        Type::Fun { args, ret } => args.iter().chain(ret.as_deref()).for_each(|a| collect_vars(a, f)),
        _ => {}
    }
}

fn type_rank(t: &Type) -> (u8, String) {
    let r = match t {
        Type::Class { name, .. } if name == INTEGER => 0,
        Type::Class { name, .. } if name == DOUBLE => 1,
        Type::Class { name, .. } if name == STRING => 2,
        Type::Class { name, .. } if name == BOOLEAN => 3,
        _ => 4,
    };
    // Function types rank by their arguments' ranks.
    let r = match t {
        Type::Fun { args, ret } => args.iter().chain(ret.as_deref()).map(|a| type_rank(a).0).min().unwrap_or(4),
        _ => r,
    };
    (r, t.display_qualified())
}

/// Sort key of a typing: built-in order Integer, Double, String, Boolean,
/// then lexicographic.
pub fn typing_key(sig: &MethodSig) -> Vec<(u8, String)> {
    sig.params.iter().chain([&sig.ret]).map(type_rank).collect()
}

/// Deduplicate typings modulo renaming and put them in report order.
pub fn assemble_intersection(typings: impl IntoIterator<Item = MethodSig>) -> Vec<MethodSig> {
    let mut out: Vec<MethodSig> = Vec::new();
    let mut seen = HashSet::new();
    for t in typings {
        let n = normalize_typing(&t);
        if seen.insert(format!("{n:?}")) {
            out.push(n);
        }
    }
    out.sort_by_key(typing_key);
    out
}

/// `Integer -> Integer`, `(Integer, Double) -> Integer`, `<A> A -> A`.
pub fn format_typing(sig: &MethodSig) -> String {
    let mut s = String::new();
    if !sig.generics.is_empty() {
        let parts: Vec<String> = sig
            .generics
            .iter()
            .map(|(g, bs)| {
                let bs: Vec<String> = bs.iter().filter(|b| !b.is_object()).map(|b| b.display_simple()).collect();
                if bs.is_empty() {
                    g.clone()
                } else {
                    format!("{g} extends {}", bs.join(" & "))
                }
            })
            .collect();
        s.push_str(&format!("<{}> ", parts.join(", ")));
    }
    let params: Vec<String> = sig.params.iter().map(Type::display_simple).collect();
    if params.len() == 1 {
        s.push_str(&params[0]);
    } else {
        s.push_str(&format!("({})", params.join(", ")));
    }
    s.push_str(" -> ");
    s.push_str(&sig.ret.display_simple());
    s
}

/// `Class.m : T1 -> R1 & T2 -> R2`.
pub fn format_signature(class: &str, method: &str, typings: &[MethodSig]) -> String {
    let parts: Vec<String> = typings.iter().map(format_typing).collect();
    format!("{class}.{method} : {}", parts.join(" & "))
}

/// Descriptor of a typing in strict `L...;` form.
pub fn descriptor(sig: &MethodSig) -> String {
    method_descriptor(&sig.params, &sig.ret)
}

/// Descriptor as usually displayed, with `java$lang$` prefixes left out.
pub fn display_descriptor(sig: &MethodSig) -> String {
    elide_java_lang(&descriptor(sig))
}
