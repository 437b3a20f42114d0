//! Generated generics: remaining placeholder constraints become bounded type
//! parameters of the class and its methods.
//!
//! The steps, per class and per solution:
//!
//! 1. [`project`] decides which placeholders are declared (occur in a field,
//!    parameter, return or local type) and who owns them, and restricts the
//!    remaining constraints to declared placeholders.
//! 2. [`build_fgg`] partitions the projected constraints into one member per
//!    class and method.
//! 3. [`complete_fgg`] adds argument-to-result bounds induced by calls of
//!    the class's own methods, iterating to a fixpoint.
//! 4. [`enforce_java_conformance`] collapses cycles and infima so every
//!    member is a forest, and returns the collapse map.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::constraints::{ClassConstraints, Owner};
use crate::types::{alpha_index, NameSupply, Tph, Type};
use crate::unify::{transitive_closure, Solution};

/// Upper bound of a generated type parameter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Object,
    Tph(Tph),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Object => f.write_str("Object"),
            Bound::Tph(t) => write!(f, "{t}"),
        }
    }
}

/// Type parameters of one class or method with their bounds. A parameter
/// bounded by `Object` has exactly that one bound.
pub type Member = BTreeMap<Tph, BTreeSet<Bound>>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenericsFamily {
    pub class: Member,
    pub methods: Vec<Member>,
}

impl GenericsFamily {
    pub fn new(methods: usize) -> Self {
        GenericsFamily { class: Member::new(), methods: vec![Member::new(); methods] }
    }

    pub fn member(&self, owner: Owner) -> &Member {
        match owner {
            Owner::Class => &self.class,
            Owner::Method(i) => &self.methods[i],
        }
    }

    pub fn member_mut(&mut self, owner: Owner) -> &mut Member {
        match owner {
            Owner::Class => &mut self.class,
            Owner::Method(i) => &mut self.methods[i],
        }
    }

    pub fn owners(&self) -> impl Iterator<Item = Owner> {
        std::iter::once(Owner::Class).chain((0..self.methods.len()).map(Owner::Method))
    }

    pub fn owner_of(&self, t: &Tph) -> Option<Owner> {
        self.owners().find(|o| self.member(*o).contains_key(t))
    }

    /// Placeholder bounds of a member as pairs.
    pub fn pairs(&self, owner: Owner) -> Vec<(Tph, Tph)> {
        member_pairs(self.member(owner))
    }

    /// `T extends Bound` lines per member, sorted, under a header naming the
    /// member.
    pub fn dump(&self, class: &str, method_ids: &[String]) -> String {
        let mut out = String::new();
        for o in self.owners() {
            let name = match o {
                Owner::Class => class.to_string(),
                Owner::Method(i) => method_ids.get(i).cloned().unwrap_or_else(|| format!("#{i}")),
            };
            let _ = writeln!(out, "{name}:");
            for (t, bounds) in self.member(o) {
                for b in bounds {
                    let _ = writeln!(out, "  {t} extends {b}");
                }
            }
        }
        out
    }

    fn all_tphs(&self) -> BTreeSet<Tph> {
        let mut out = BTreeSet::new();
        for o in self.owners() {
            for (t, bs) in self.member(o) {
                out.insert(t.clone());
                for b in bs {
                    if let Bound::Tph(u) = b {
                        out.insert(u.clone());
                    }
                }
            }
        }
        out
    }
}

pub fn member_pairs(m: &Member) -> Vec<(Tph, Tph)> {
    let mut out = Vec::new();
    for (t, bs) in m {
        for b in bs {
            if let Bound::Tph(u) = b {
                out.push((t.clone(), u.clone()));
            }
        }
    }
    out
}

/// Declared placeholders of one solution and the constraints between them.
#[derive(Debug, Clone, Default)]
pub struct Projection {
    pub owners: BTreeMap<Tph, Owner>,
    /// Remaining constraints restricted to declared placeholders.
    pub pairs: Vec<(Tph, Tph)>,
    /// Method placeholders replaced by a class placeholder below them.
    pub subst: BTreeMap<Tph, Tph>,
    /// All remaining constraints, with `subst` applied.
    pub full: Vec<(Tph, Tph)>,
}

impl Projection {
    /// A slot or node type after unification and projection.
    pub fn apply(&self, sol: &Solution, t: &Type) -> Type {
        self.rename(&sol.apply(t))
    }

    pub fn rename(&self, t: &Type) -> Type {
        t.map_tphs(&mut |x| Type::Tph(self.subst.get(x).cloned().unwrap_or_else(|| x.clone())))
    }
}

/// Decide ownership of declared placeholders and project the remaining
/// constraints onto them.
///
/// A placeholder is declared when it occurs in the type of a declared slot.
/// It belongs to the class when it occurs in a field type or in the slots of
/// more than one member, otherwise to its method. Two declared placeholders
/// are related when a chain of remaining constraints leads from one to the
/// other through undeclared placeholders only.
///
/// Java has no lower bounds on type parameters, so a method placeholder
/// with a class placeholder below it is identified with that class
/// placeholder.
pub fn project(cc: &ClassConstraints, sol: &Solution) -> Projection {
    let mut seen: BTreeMap<Tph, BTreeSet<Owner>> = BTreeMap::new();
    for slot in &cc.slots {
        for t in sol.apply(&slot.ty).tphs() {
            seen.entry(t).or_default().insert(slot.owner);
        }
    }
    let mut owners: BTreeMap<Tph, Owner> = seen
        .into_iter()
        .map(|(t, os)| {
            let o = if os.len() == 1 { *os.iter().next().unwrap() } else { Owner::Class };
            (t, o)
        })
        .collect();

    let mut adj: BTreeMap<&Tph, Vec<&Tph>> = BTreeMap::new();
    for (a, b) in &sol.remaining {
        adj.entry(a).or_default().push(b);
    }
    let mut pairs = BTreeSet::new();
    for start in owners.keys() {
        let mut queue: VecDeque<&Tph> = adj.get(start).into_iter().flatten().copied().collect();
        let mut visited: BTreeSet<&Tph> = BTreeSet::new();
        while let Some(n) = queue.pop_front() {
            if !visited.insert(n) {
                continue;
            }
            if owners.contains_key(n) {
                if n != start {
                    pairs.insert((start.clone(), n.clone()));
                }
            } else if let Some(next) = adj.get(n) {
                queue.extend(next.iter().copied());
            }
        }
    }

    let mut subst: BTreeMap<Tph, Tph> = BTreeMap::new();
    loop {
        let found = pairs.iter().find(|(k, m)| {
            owners.get(k) == Some(&Owner::Class) && matches!(owners.get(m), Some(Owner::Method(_)))
        });
        let Some((k, m)) = found.cloned() else { break };
        for v in subst.values_mut() {
            if *v == m {
                *v = k.clone();
            }
        }
        subst.insert(m.clone(), k.clone());
        owners.remove(&m);
        pairs = pairs
            .into_iter()
            .map(|(a, b)| (if a == m { k.clone() } else { a }, if b == m { k.clone() } else { b }))
            .filter(|(a, b)| a != b)
            .collect();
    }
    let rename = |t: &Tph| subst.get(t).cloned().unwrap_or_else(|| t.clone());
    let full = sol
        .remaining
        .iter()
        .map(|(a, b)| (rename(a), rename(b)))
        .filter(|(a, b)| a != b)
        .collect();
    Projection { owners, pairs: pairs.into_iter().collect(), subst, full }
}

/// Partition projected constraints into class and method members.
///
/// A class parameter keeps its bounds among class parameters. A method
/// parameter keeps bounds among its own method's parameters and the class
/// parameters. Everything left without a bound is bounded by `Object`.
pub fn build_fgg(proj: &Projection, methods: usize) -> GenericsFamily {
    let mut fam = GenericsFamily::new(methods);
    for (t, owner) in &proj.owners {
        let mut bounds = BTreeSet::new();
        for (a, b) in &proj.pairs {
            if a != t {
                continue;
            }
            let keep = match (owner, proj.owners.get(b)) {
                (_, Some(o)) if o == owner => true,
                (Owner::Method(_), Some(Owner::Class)) => true,
                _ => false,
            };
            if keep {
                bounds.insert(Bound::Tph(b.clone()));
            }
        }
        if bounds.is_empty() {
            bounds.insert(Bound::Object);
        }
        fam.member_mut(*owner).insert(t.clone(), bounds);
    }
    fam
}

/// Add the bounds induced by calls of the class's own methods.
///
/// For a call `m'(.., e_i, ..)` in `m` whose result flows into `R`: when an
/// `Object`-bounded parameter `T` of `m` flows into parameter `T'` of `m'`,
/// and `T'` is below a return placeholder `R'` of `m'` in the completed
/// member of `m'`, then `T` gets bound `R`, the least placeholder of `m`
/// above `R'` that the call result reaches. Repeats in method order until
/// nothing changes.
pub fn complete_fgg(fgg: &GenericsFamily, cc: &ClassConstraints, sol: &Solution, proj: &Projection) -> GenericsFamily {
    let mut fam = fgg.clone();
    let cs = transitive_closure(proj.full.iter().cloned());
    let le = |a: &Tph, b: &Tph| a == b || cs.contains(&(a.clone(), b.clone()));
    let sigs: Vec<(Vec<Type>, Type)> = cc
        .signatures
        .iter()
        .map(|(ps, r)| (ps.iter().map(|p| proj.apply(sol, p)).collect(), proj.apply(sol, r)))
        .collect();
    loop {
        let mut changed = false;
        for mi in 0..fam.methods.len() {
            for call in cc.calls.iter().filter(|c| c.caller == Owner::Method(mi)) {
                let result: Vec<Tph> = proj.apply(sol, &call.result).tphs();
                for &callee in &call.callees {
                    let Some((params, ret)) = sigs.get(callee) else { continue };
                    let callee_cl = transitive_closure(fam.pairs(Owner::Method(callee)));
                    let ret_vars = ret.tphs();
                    for (i, arg) in call.args.iter().enumerate() {
                        let Some(param) = params.get(i) else { continue };
                        let arg_vars = proj.apply(sol, arg).tphs();
                        let candidates: Vec<Tph> = fam.methods[mi]
                            .iter()
                            .filter(|(_, b)| b.len() == 1 && b.contains(&Bound::Object))
                            .map(|(t, _)| t.clone())
                            .filter(|t| arg_vars.iter().any(|a| le(t, a)))
                            .collect();
                        for t in candidates {
                            let Some(r) = induced_bound(&t, param, &ret_vars, &callee_cl, &result, &fam.methods[mi], &le)
                            else {
                                continue;
                            };
                            if r != t {
                                fam.methods[mi].insert(t, BTreeSet::from([Bound::Tph(r)]));
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
        if !changed {
            return fam;
        }
    }
}

fn induced_bound(
    t: &Tph,
    param: &Type,
    ret_vars: &[Tph],
    callee_cl: &BTreeSet<(Tph, Tph)>,
    result: &[Tph],
    member: &Member,
    le: &impl Fn(&Tph, &Tph) -> bool,
) -> Option<Tph> {
    for t2 in param.tphs().iter().filter(|t2| le(t, t2)) {
        for r2 in ret_vars {
            let through = t2 == r2 || callee_cl.contains(&(t2.clone(), r2.clone()));
            if !through {
                continue;
            }
            let above: Vec<&Tph> = member
                .keys()
                .filter(|r| le(r2, r) && result.iter().any(|x| le(x, r)))
                .collect();
            // The least candidate: one below all others.
            if let Some(r) = above.iter().find(|r| above.iter().all(|o| le(r, o))) {
                return Some((*r).clone());
            }
        }
    }
    None
}

/// Collapse cycles and infima so that every member is a forest under its
/// bounds. Returns the repaired family and the collapse map, which is the
/// identity on placeholders not listed.
///
/// Each strongly connected component with more than one parameter becomes
/// one fresh parameter. Then each parameter with two or more placeholder
/// bounds is merged with those bounds into one fresh parameter. Both steps
/// repeat until neither applies; each merge removes at least one
/// placeholder, so this terminates.
pub fn enforce_java_conformance(fam: &GenericsFamily) -> (GenericsFamily, BTreeMap<Tph, Tph>) {
    let next = fam.all_tphs().iter().filter_map(|t| alpha_index(t.name())).max().map_or(0, |i| i + 1);
    let mut supply = NameSupply::starting_at(next);
    enforce_java_conformance_with(fam, &mut supply)
}

pub fn enforce_java_conformance_with(
    fam: &GenericsFamily,
    supply: &mut NameSupply,
) -> (GenericsFamily, BTreeMap<Tph, Tph>) {
    let mut fam = fam.clone();
    let mut h: BTreeMap<Tph, Tph> = BTreeMap::new();
    loop {
        let mut changed = false;
        let owners: Vec<Owner> = fam.owners().collect();
        for &o in &owners {
            for scc in cycles(fam.member(o)) {
                let x = supply.fresh();
                collapse(&mut fam, &mut h, &scc, &x, o);
                changed = true;
            }
        }
        for &o in &owners {
            let infimum = fam.member(o).iter().find_map(|(t, bs)| {
                let ups: Vec<Tph> = bs
                    .iter()
                    .filter_map(|b| match b {
                        Bound::Tph(u) => Some(u.clone()),
                        Bound::Object => None,
                    })
                    .collect();
                (ups.len() > 1).then(|| std::iter::once(t.clone()).chain(ups).collect::<Vec<_>>())
            });
            if let Some(group) = infimum {
                let x = supply.fresh();
                collapse(&mut fam, &mut h, &group, &x, o);
                changed = true;
                break;
            }
        }
        if !changed {
            return (fam, h);
        }
    }
}

fn cycles(m: &Member) -> Vec<Vec<Tph>> {
    let mut g: DiGraph<Tph, ()> = DiGraph::new();
    let mut idx = BTreeMap::new();
    for t in m.keys() {
        idx.insert(t.clone(), g.add_node(t.clone()));
    }
    for (a, b) in member_pairs(m) {
        if let (Some(&x), Some(&y)) = (idx.get(&a), idx.get(&b)) {
            g.add_edge(x, y, ());
        }
    }
    let mut out: Vec<Vec<Tph>> = tarjan_scc(&g)
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| {
            let mut v: Vec<Tph> = c.into_iter().map(|n| g[n].clone()).collect();
            v.sort();
            v
        })
        .collect();
    out.sort();
    out
}

/// Replace every placeholder of `group` by `x` across the whole family.
fn collapse(fam: &mut GenericsFamily, h: &mut BTreeMap<Tph, Tph>, group: &[Tph], x: &Tph, at: Owner) {
    let in_group = |t: &Tph| group.contains(t);
    // The fresh parameter lives in the class if any merged parameter did.
    let home = if group.iter().any(|t| fam.class.contains_key(t)) { Owner::Class } else { at };
    let mut merged: BTreeSet<Bound> = BTreeSet::new();
    let owners: Vec<Owner> = fam.owners().collect();
    for o in owners {
        let m = fam.member_mut(o);
        let taken: Vec<Tph> = m.keys().filter(|t| in_group(t)).cloned().collect();
        for t in taken {
            merged.extend(m.remove(&t).unwrap_or_default());
        }
        for bs in m.values_mut() {
            let renamed: BTreeSet<Bound> = bs
                .iter()
                .map(|b| match b {
                    Bound::Tph(u) if in_group(u) => Bound::Tph(x.clone()),
                    other => other.clone(),
                })
                .collect();
            *bs = renamed;
        }
    }
    let mut bounds: BTreeSet<Bound> = merged
        .into_iter()
        .filter_map(|b| match b {
            Bound::Tph(u) if in_group(&u) => None,
            other => Some(other),
        })
        .collect();
    if bounds.len() > 1 {
        bounds.remove(&Bound::Object);
    }
    if bounds.is_empty() {
        bounds.insert(Bound::Object);
    }
    fam.member_mut(home).insert(x.clone(), bounds);
    for v in h.values_mut() {
        if in_group(v) {
            *v = x.clone();
        }
    }
    for t in group {
        h.entry(t.clone()).or_insert_with(|| x.clone());
    }
}

/// Apply a collapse map to a type.
pub fn apply_h(h: &BTreeMap<Tph, Tph>, t: &Type) -> Type {
    t.map_tphs(&mut |x| Type::Tph(h.get(x).cloned().unwrap_or_else(|| x.clone())))
}

/// Whether every member is a forest: the closure is antisymmetric and no
/// parameter has two placeholder bounds.
pub fn is_java_conform(fam: &GenericsFamily) -> bool {
    fam.owners().all(|o| {
        let m = fam.member(o);
        let single = m.values().all(|bs| bs.iter().filter(|b| matches!(b, Bound::Tph(_))).count() <= 1);
        let cl = transitive_closure(member_pairs(m));
        let antisym = cl.iter().all(|(a, b)| a == b || !cl.contains(&(b.clone(), a.clone())));
        single && antisym
    })
}

/// All generics of one class for one solution.
#[derive(Debug, Clone)]
pub struct Generics {
    pub projection: Projection,
    pub fgg: GenericsFamily,
    pub cfgg: GenericsFamily,
    pub family: GenericsFamily,
    pub h: BTreeMap<Tph, Tph>,
}

impl Generics {
    /// Final type of a slot or node.
    pub fn apply(&self, sol: &Solution, t: &Type) -> Type {
        apply_h(&self.h, &self.projection.apply(sol, t))
    }
}

pub fn generate_generics(cc: &ClassConstraints, sol: &Solution) -> Generics {
    let projection = project(cc, sol);
    let fgg = build_fgg(&projection, cc.signatures.len());
    let cfgg = complete_fgg(&fgg, cc, sol, &projection);
    let (family, h) = enforce_java_conformance(&cfgg);
    Generics { projection, fgg, cfgg, family, h }
}
