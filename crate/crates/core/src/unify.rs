//! Type unification with subtyping.
//!
//! Given a plain constraint set, [`unify`] returns every most general
//! solution as a pair of remaining placeholder constraints and a
//! substitution. The problem is finitary rather than unitary, so the result
//! is a set. The rules, applied until nothing changes:
//!
//! * identical pairs and `T ⋖ Object` are dropped;
//! * `T ≐ ty` binds `T` after an occurs check (and a depth limit that keeps
//!   the search finite);
//! * `C<a..> ≐ C<b..>` decomposes, function types decompose with
//!   contravariant arguments and a covariant result;
//! * `C<a..> ⋖ D<b..>` walks up from `C` until it reaches `D`, then relates
//!   the arguments according to `D`'s variance;
//! * placeholder pairs `T ⋖ U` are kept as remaining constraints.
//!
//! When only constraints between a placeholder and a type are left, the
//! solver branches: `T ⋖ C` over every subtype of `C` in table order,
//! `C ⋖ T` over `C` and its supertypes. Upper bounds go first, and among
//! them the one with the fewest branches.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::constraints::{Constraint, Kind};
use crate::error::Pos;
use crate::table::{ClassTable, Variance};
use crate::types::{alpha_index, NameSupply, Tph, Type};

/// One most general unifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Remaining `T ⋖ U` constraints between unbound placeholders.
    pub remaining: Vec<(Tph, Tph)>,
    /// Bindings of the input placeholders, fully applied.
    pub sigma: BTreeMap<Tph, Type>,
}

impl Solution {
    pub fn apply(&self, t: &Type) -> Type {
        t.map_tphs(&mut |x| self.sigma.get(x).cloned().unwrap_or_else(|| Type::Tph(x.clone())))
    }

    pub fn remaining_constraints(&self) -> Vec<Constraint> {
        self.remaining
            .iter()
            .map(|(a, b)| Constraint::lt(Type::Tph(a.clone()), Type::Tph(b.clone())))
            .collect()
    }
}

/// The constraint a failed search got stuck on, from the branch that got
/// furthest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub constraint: Constraint,
    /// Constraints still open when the branch failed.
    pub unresolved: usize,
}

#[derive(Debug, Clone, Default)]
pub struct UnifyOutcome {
    pub solutions: Vec<Solution>,
    pub failure: Option<Failure>,
    /// The search stopped early (solution cap or step budget).
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct UnifyOptions {
    /// Stop after this many raw solutions.
    pub max_solutions: Option<usize>,
    /// Stop at the first solution without remaining constraints.
    pub stop_at_closed: bool,
    /// Bindings to terms deeper than this fail the branch.
    pub max_depth: usize,
    /// Upper bound on rule applications over the whole search.
    pub max_steps: usize,
    /// Drop solutions that are instances of other solutions.
    pub prune_subsumed: bool,
}

impl Default for UnifyOptions {
    fn default() -> Self {
        UnifyOptions { max_solutions: None, stop_at_closed: false, max_depth: 6, max_steps: 2_000_000, prune_subsumed: true }
    }
}

/// Solve `constraints` with default options.
pub fn unify(constraints: &[Constraint], table: &ClassTable) -> UnifyOutcome {
    let supply = supply_after(constraints);
    unify_with(constraints, table, supply, &UnifyOptions::default())
}

/// A name supply that cannot collide with the placeholders of `constraints`.
pub fn supply_after(constraints: &[Constraint]) -> NameSupply {
    let next = constraints
        .iter()
        .flat_map(|c| c.tphs())
        .filter_map(|t| alpha_index(t.name()))
        .max()
        .map_or(0, |i| i + 1);
    NameSupply::starting_at(next)
}

pub fn unify_with(
    constraints: &[Constraint],
    table: &ClassTable,
    supply: NameSupply,
    opts: &UnifyOptions,
) -> UnifyOutcome {
    let mut inputs: Vec<Tph> = Vec::new();
    for c in constraints {
        for t in c.tphs() {
            if !inputs.contains(&t) {
                inputs.push(t);
            }
        }
    }
    let mut search = Search { table, opts, outcome: UnifyOutcome::default(), steps: 0, raw: Vec::new() };
    let start = State {
        work: constraints.iter().cloned().collect(),
        deferred: Vec::new(),
        rem: Vec::new(),
        sigma: BTreeMap::new(),
        supply,
    };
    search.run(start);
    let mut outcome = search.outcome;
    let mut solutions: Vec<Solution> = Vec::new();
    let mut seen = BTreeSet::new();
    for st in search.raw {
        let sol = st.into_solution(&inputs);
        if seen.insert(canonical_key(&sol, &inputs)) {
            solutions.push(sol);
        }
    }
    if opts.prune_subsumed {
        solutions = prune_subsumed(solutions, &inputs, table);
    }
    outcome.solutions = solutions;
    outcome
}

#[derive(Debug, Clone)]
struct State {
    work: VecDeque<Constraint>,
    deferred: Vec<Constraint>,
    rem: Vec<(Tph, Tph, Pos)>,
    sigma: BTreeMap<Tph, Type>,
    supply: NameSupply,
}

impl State {
    fn open(&self) -> usize {
        self.work.len() + self.deferred.len()
    }

    fn bind(&mut self, t: &Tph, ty: &Type) {
        let sub = |x: &Type| x.map_tphs(&mut |y| if y == t { ty.clone() } else { Type::Tph(y.clone()) });
        for c in self.work.iter_mut().chain(self.deferred.iter_mut()) {
            c.lhs = sub(&c.lhs);
            c.rhs = sub(&c.rhs);
        }
        for v in self.sigma.values_mut() {
            *v = sub(v);
        }
        self.sigma.insert(t.clone(), ty.clone());
        let rem = std::mem::take(&mut self.rem);
        for (a, b, pos) in rem {
            if &a == t || &b == t {
                self.work.push_back(Constraint::lt(sub(&Type::Tph(a)), sub(&Type::Tph(b))).at(pos));
            } else {
                self.rem.push((a, b, pos));
            }
        }
        // Deferred constraints may simplify now.
        self.work.extend(self.deferred.drain(..));
    }

    fn into_solution(self, inputs: &[Tph]) -> Solution {
        let sigma = self.sigma.into_iter().filter(|(k, _)| inputs.contains(k)).collect();
        let mut remaining: Vec<(Tph, Tph)> = Vec::new();
        for (a, b, _) in self.rem {
            if !remaining.contains(&(a.clone(), b.clone())) {
                remaining.push((a, b));
            }
        }
        remaining.sort();
        Solution { remaining, sigma }
    }
}

enum Step {
    Done,
    Fail,
    Push(Vec<Constraint>),
    Bind(Tph, Type),
    Keep(Tph, Tph),
    Defer(Constraint),
}

/// One branch choice: bind a placeholder and add constraints.
struct Branch {
    tph: Tph,
    ty: Type,
    extra: Vec<Constraint>,
}

struct Search<'a> {
    table: &'a ClassTable,
    opts: &'a UnifyOptions,
    outcome: UnifyOutcome,
    steps: usize,
    raw: Vec<State>,
}

impl Search<'_> {
    fn stop(&self) -> bool {
        if self.outcome.truncated {
            return true;
        }
        if let Some(max) = self.opts.max_solutions {
            if self.raw.len() >= max {
                return true;
            }
        }
        self.opts.stop_at_closed && self.raw.iter().any(|s| s.rem.is_empty())
    }

    fn fail(&mut self, c: Constraint, state: &State) {
        let unresolved = state.open();
        let better = match &self.outcome.failure {
            None => true,
            Some(f) => unresolved < f.unresolved,
        };
        if better {
            self.outcome.failure = Some(Failure { constraint: c, unresolved });
        }
    }

    fn run(&mut self, start: State) {
        let mut stack = vec![start];
        while let Some(mut state) = stack.pop() {
            if self.stop() {
                if !stack.is_empty() {
                    self.outcome.truncated = self.outcome.truncated || self.opts.max_solutions.is_some();
                }
                return;
            }
            if !self.saturate(&mut state) {
                continue;
            }
            if state.deferred.is_empty() {
                self.raw.push(state);
                continue;
            }
            let (idx, branches, supply) = self.choose(&state);
            let chosen = state.deferred.remove(idx);
            // Fresh names used by the branches are consumed in every child.
            state.supply = supply;
            if branches.is_empty() {
                self.fail(chosen, &state);
                continue;
            }
            // Push in reverse so the first branch is explored first.
            for b in branches.into_iter().rev() {
                let mut next = state.clone();
                if b.ty.depth() > self.opts.max_depth {
                    continue;
                }
                next.bind(&b.tph, &b.ty);
                for c in b.extra {
                    next.work.push_back(c.at(chosen.origin));
                }
                stack.push(next);
            }
        }
    }

    /// Apply the deterministic rules. Returns false if the branch failed.
    fn saturate(&mut self, state: &mut State) -> bool {
        while let Some(c) = state.work.pop_front() {
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                self.outcome.truncated = true;
                return false;
            }
            match self.step(&c) {
                Step::Done => {}
                Step::Fail => {
                    self.fail(c, state);
                    return false;
                }
                Step::Push(cs) => {
                    for n in cs.into_iter().rev() {
                        state.work.push_front(n.at(c.origin));
                    }
                }
                Step::Bind(t, ty) => {
                    if ty.contains_tph(&t) || ty.depth() > self.opts.max_depth {
                        self.fail(c, state);
                        return false;
                    }
                    state.bind(&t, &ty);
                }
                Step::Keep(a, b) => {
                    if !state.rem.iter().any(|(x, y, _)| *x == a && *y == b) {
                        state.rem.push((a, b, c.origin));
                    }
                }
                Step::Defer(d) => state.deferred.push(d),
            }
        }
        true
    }

    fn step(&self, c: &Constraint) -> Step {
        let (l, r) = (&c.lhs, &c.rhs);
        if l == r {
            return Step::Done;
        }
        match c.kind {
            Kind::Eq => match (l, r) {
                (Type::Tph(t), other) | (other, Type::Tph(t)) => Step::Bind(t.clone(), other.clone()),
                (Type::Class { name: n1, args: a1 }, Type::Class { name: n2, args: a2 }) => {
                    if n1 != n2 || a1.len() != a2.len() {
                        return Step::Fail;
                    }
                    Step::Push(a1.iter().zip(a2).map(|(x, y)| Constraint::eq(x.clone(), y.clone())).collect())
                }
                (Type::Fun { args: a1, ret: r1 }, Type::Fun { args: a2, ret: r2 }) => {
                    if a1.len() != a2.len() || r1.is_some() != r2.is_some() {
                        return Step::Fail;
                    }
                    let mut out: Vec<Constraint> =
                        a1.iter().zip(a2).map(|(x, y)| Constraint::eq(x.clone(), y.clone())).collect();
                    if let (Some(x), Some(y)) = (r1, r2) {
                        out.push(Constraint::eq((**x).clone(), (**y).clone()));
                    }
                    Step::Push(out)
                }
                _ => Step::Fail,
            },
            Kind::Lt => {
                if r.is_object() {
                    return if *l == Type::Void { Step::Fail } else { Step::Done };
                }
                match (l, r) {
                    (Type::Void, _) | (_, Type::Void) => Step::Fail,
                    (Type::Tph(a), Type::Tph(b)) => Step::Keep(a.clone(), b.clone()),
                    (Type::Tph(_), _) | (_, Type::Tph(_)) => Step::Defer(c.clone()),
                    (Type::Fun { args: a1, ret: r1 }, Type::Fun { args: a2, ret: r2 }) => {
                        if a1.len() != a2.len() || r1.is_some() != r2.is_some() {
                            return Step::Fail;
                        }
                        let mut out: Vec<Constraint> =
                            a1.iter().zip(a2).map(|(x, y)| Constraint::lt(y.clone(), x.clone())).collect();
                        if let (Some(x), Some(y)) = (r1, r2) {
                            out.push(Constraint::lt((**x).clone(), (**y).clone()));
                        }
                        Step::Push(out)
                    }
                    (Type::Class { .. } | Type::Var(_), Type::Class { name, args }) => {
                        self.adapt(l, name, args)
                    }
                    (Type::Var(_), Type::Var(_)) => {
                        if self.table.subtype(l, r) {
                            Step::Done
                        } else {
                            Step::Fail
                        }
                    }
                    _ => Step::Fail,
                }
            }
        }
    }

    /// `l ⋖ name<args>`: find `name` among the supertypes of `l` and relate
    /// the arguments by variance.
    fn adapt(&self, l: &Type, name: &str, args: &[Type]) -> Step {
        let Some(Type::Class { args: found, .. }) = self.table.find_super(l, name) else {
            return Step::Fail;
        };
        if found.len() != args.len() {
            return Step::Fail;
        }
        let variance = self.table.get(name).map(|e| e.variance.clone()).unwrap_or_default();
        Step::Push(
            found
                .iter()
                .zip(args)
                .enumerate()
                .map(|(i, (x, y))| match variance.get(i).copied().unwrap_or(Variance::Invariant) {
                    Variance::Invariant => Constraint::eq(x.clone(), y.clone()),
                    Variance::Covariant => Constraint::lt(x.clone(), y.clone()),
                    Variance::Contravariant => Constraint::lt(y.clone(), x.clone()),
                })
                .collect(),
        )
    }

    /// Pick the deferred constraint to branch on and enumerate its branches.
    fn choose(&self, state: &State) -> (usize, Vec<Branch>, NameSupply) {
        let mut best: Option<(usize, bool, Vec<Branch>)> = None;
        for (i, c) in state.deferred.iter().enumerate() {
            let upper = c.lhs.is_tph();
            let branches = self.branches(c, &mut state.supply.clone());
            let better = match &best {
                None => true,
                Some((_, bu, bb)) => (upper && !bu) || (upper == *bu && branches.len() < bb.len()),
            };
            if better {
                best = Some((i, upper, Vec::new()));
            }
        }
        let (idx, _, _) = best.expect("deferred is not empty");
        let mut supply = state.supply.clone();
        let branches = self.branches(&state.deferred[idx], &mut supply);
        (idx, branches, supply)
    }

    fn branches(&self, c: &Constraint, supply: &mut NameSupply) -> Vec<Branch> {
        match (&c.lhs, &c.rhs) {
            (Type::Tph(t), upper) => self.subtype_branches(t, upper, supply),
            (lower, Type::Tph(t)) => self.supertype_branches(t, lower, supply),
            _ => Vec::new(),
        }
    }

    /// `T ⋖ upper`: every subtype shape of `upper`.
    fn subtype_branches(&self, t: &Tph, upper: &Type, supply: &mut NameSupply) -> Vec<Branch> {
        let mut out = Vec::new();
        match upper {
            Type::Class { name, .. } => {
                for d in self.table.subclasses(name) {
                    let fresh: Vec<Type> = d.params.iter().map(|_| supply.fresh_type()).collect();
                    let ty = Type::generic(d.name.clone(), fresh);
                    out.push(Branch { tph: t.clone(), extra: vec![Constraint::lt(ty.clone(), upper.clone())], ty });
                }
                for v in self.table.type_vars().keys() {
                    let var = Type::Var(v.clone());
                    if self.table.find_super(&var, name).is_some() {
                        out.push(Branch { tph: t.clone(), extra: vec![Constraint::lt(var.clone(), upper.clone())], ty: var });
                    }
                }
            }
            Type::Var(v) => {
                for w in self.table.subvars(v) {
                    out.push(Branch { tph: t.clone(), ty: Type::Var(w), extra: Vec::new() });
                }
            }
            Type::Fun { args, ret } => {
                let fresh_args: Vec<Type> = args.iter().map(|_| supply.fresh_type()).collect();
                let ty = match ret {
                    Some(_) => Type::fun(fresh_args, supply.fresh_type()),
                    None => Type::fun_void(fresh_args),
                };
                out.push(Branch { tph: t.clone(), extra: vec![Constraint::lt(ty.clone(), upper.clone())], ty });
            }
            _ => {}
        }
        out
    }

    /// `lower ⋖ T`: `lower` and each of its supertypes.
    fn supertype_branches(&self, t: &Tph, lower: &Type, supply: &mut NameSupply) -> Vec<Branch> {
        match lower {
            Type::Class { .. } | Type::Var(_) => self
                .table
                .ancestors(lower)
                .into_iter()
                .map(|a| Branch { tph: t.clone(), ty: a, extra: Vec::new() })
                .collect(),
            Type::Fun { args, ret } => {
                let fresh_args: Vec<Type> = args.iter().map(|_| supply.fresh_type()).collect();
                let ty = match ret {
                    Some(_) => Type::fun(fresh_args, supply.fresh_type()),
                    None => Type::fun_void(fresh_args),
                };
                vec![
                    Branch { tph: t.clone(), extra: vec![Constraint::lt(lower.clone(), ty.clone())], ty },
                    Branch { tph: t.clone(), ty: Type::object(), extra: Vec::new() },
                ]
            }
            _ => Vec::new(),
        }
    }
}

/// A renaming-invariant key: placeholders that are not inputs get
/// canonical names in order of first occurrence.
fn canonical_key(sol: &Solution, inputs: &[Tph]) -> String {
    let mut names: HashMap<Tph, String> = HashMap::new();
    let rename = |t: &Tph, names: &mut HashMap<Tph, String>| -> String {
        if inputs.contains(t) {
            return t.0.clone();
        }
        let n = names.len();
        names.entry(t.clone()).or_insert_with(|| format!("?{n}")).clone()
    };
    let mut key = String::new();
    for (k, v) in &sol.sigma {
        let v = v.map_tphs(&mut |t| Type::tph(rename(t, &mut names)));
        let _ = write!(key, "{k}={};", v.display_qualified());
    }
    let mut pairs: Vec<(String, String)> = Vec::new();
    // Pairs with known names first so the numbering is stable.
    let (known, unknown): (Vec<_>, Vec<_>) = sol
        .remaining
        .iter()
        .partition(|(a, b)| (inputs.contains(a) || names.contains_key(a)) && (inputs.contains(b) || names.contains_key(b)));
    for (a, b) in known.into_iter().chain(unknown) {
        pairs.push((rename(a, &mut names), rename(b, &mut names)));
    }
    pairs.sort();
    for (a, b) in pairs {
        let _ = write!(key, "{a}<{b};");
    }
    key
}

/// Drop every solution that is an instance of another one.
fn prune_subsumed(solutions: Vec<Solution>, inputs: &[Tph], table: &ClassTable) -> Vec<Solution> {
    let n = solutions.len();
    let mut keep = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || !keep[j] || !keep[i] {
                continue;
            }
            if instance_of(&solutions[j], &solutions[i], inputs, table) {
                // Mutual instances are renamings; keep the earlier one.
                if !instance_of(&solutions[i], &solutions[j], inputs, table) || j < i {
                    keep[i] = false;
                }
            }
        }
    }
    solutions.into_iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s).collect()
}

/// Whether `special` is an instance of `general`: some substitution of the
/// free placeholders of `general` yields `special`'s bindings, and the
/// remaining constraints of `general` then follow from those of `special`.
/// Conservative: may answer false for genuine instances.
pub fn instance_of(general: &Solution, special: &Solution, inputs: &[Tph], table: &ClassTable) -> bool {
    let mut theta: HashMap<Tph, Type> = HashMap::new();
    for v in inputs {
        let g = general.sigma.get(v).cloned().unwrap_or_else(|| Type::Tph(v.clone()));
        let s = special.sigma.get(v).cloned().unwrap_or_else(|| Type::Tph(v.clone()));
        if !match_pattern(&g, &s, &mut theta) {
            return false;
        }
    }
    let closure = transitive_closure(special.remaining.iter().cloned());
    for (a, b) in &general.remaining {
        let (Some(x), Some(y)) = (theta.get(a), theta.get(b)) else { return false };
        let ok = match (x, y) {
            _ if x == y => true,
            (Type::Tph(p), Type::Tph(q)) => closure.contains(&(p.clone(), q.clone())),
            _ if x.is_ground() && y.is_ground() => table.subtype(x, y),
            _ => false,
        };
        if !ok {
            return false;
        }
    }
    true
}

fn match_pattern(pattern: &Type, target: &Type, theta: &mut HashMap<Tph, Type>) -> bool {
    match (pattern, target) {
        (Type::Tph(t), _) => match theta.get(t) {
            Some(bound) => bound == target,
            None => {
                theta.insert(t.clone(), target.clone());
                true
            }
        },
        (Type::Class { name: n1, args: a1 }, Type::Class { name: n2, args: a2 }) => {
            n1 == n2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| match_pattern(x, y, theta))
        }
        (Type::Fun { args: a1, ret: r1 }, Type::Fun { args: a2, ret: r2 }) => {
            a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| match_pattern(x, y, theta))
                && match (r1, r2) {
                    (Some(x), Some(y)) => match_pattern(x, y, theta),
                    (None, None) => true,
                    _ => false,
                }
        }
        _ => pattern == target,
    }
}

/// Reflexive-transitive closure of a relation over the elements it
/// mentions.
pub fn transitive_closure<T: Ord + Clone>(rel: impl IntoIterator<Item = (T, T)>) -> BTreeSet<(T, T)> {
    let pairs: Vec<(T, T)> = rel.into_iter().collect();
    let mut nodes: Vec<T> = Vec::new();
    for (a, b) in &pairs {
        for x in [a, b] {
            if let Err(pos) = nodes.binary_search(x) {
                nodes.insert(pos, x.clone());
            }
        }
    }
    let n = nodes.len();
    let idx = |x: &T| nodes.binary_search(x).unwrap();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in &pairs {
        reach[idx(a)][idx(b)] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] {
                out.insert((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    out
}

/// Debug dump: one block per solution.
pub fn dump(outcome: &UnifyOutcome) -> String {
    let mut out = String::new();
    for (i, s) in outcome.solutions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "solution {}:", i + 1);
        out.push_str("remaining:\n");
        for (a, b) in &s.remaining {
            let _ = writeln!(out, "  {a} < {b}");
        }
        out.push_str("sigma:\n");
        for (k, v) in &s.sigma {
            let _ = writeln!(out, "  {k} -> {}", v.display_qualified());
        }
    }
    if outcome.solutions.is_empty() {
        out.push_str("no solution\n");
    }
    out
}

/// Pick the pointwise least typings among `solutions`.
///
/// `slots` are the declared types of a class before unification. A typing
/// is below another when each slot type is below the other's leaf by leaf
/// (a class below any of its supertypes, anything below `Object`) and its
/// remaining constraints imply the other's. Returns the indices of the
/// minimal solutions in input order; of equivalent solutions only the
/// first is kept.
pub fn select_least(solutions: &[Solution], slots: &[Type], table: &ClassTable) -> Vec<usize> {
    let typings: Vec<Vec<Type>> = solutions.iter().map(|s| slots.iter().map(|t| s.apply(t)).collect()).collect();
    let closures: Vec<BTreeSet<(Tph, Tph)>> =
        solutions.iter().map(|s| transitive_closure(s.remaining.iter().cloned())).collect();
    let below = |i: usize, j: usize| -> bool {
        typings[i].iter().zip(&typings[j]).all(|(a, b)| leaf_le(a, b, table))
            && solutions[j].remaining.iter().all(|p| closures[i].contains(p))
    };
    let minimal = (0..solutions.len()).filter(|&j| !(0..solutions.len()).any(|i| i != j && below(i, j) && !below(j, i)));
    let mut out: Vec<usize> = Vec::new();
    for j in minimal {
        if !out.iter().any(|&i| below(i, j) && below(j, i)) {
            out.push(j);
        }
    }
    out
}

fn leaf_le(a: &Type, b: &Type, table: &ClassTable) -> bool {
    if a == b {
        return true;
    }
    match (a, b) {
        (Type::Void, _) | (_, Type::Void) => false,
        (_, b) if b.is_object() => true,
        (Type::Class { .. }, Type::Class { name, args }) => match table.find_super(a, name) {
            Some(Type::Class { args: up, .. }) => up.iter().zip(args).all(|(x, y)| leaf_le(x, y, table)),
            _ => false,
        },
        (Type::Fun { args: a1, ret: r1 }, Type::Fun { args: a2, ret: r2 }) => {
            a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| leaf_le(x, y, table))
                && match (r1, r2) {
                    (Some(x), Some(y)) => leaf_le(x, y, table),
                    (None, None) => true,
                    _ => false,
                }
        }
        (Type::Var(_), Type::Var(_)) => table.subtype(a, b),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::table::build_class_table;
    use crate::types::{INTEGER, NUMBER};

    fn table() -> ClassTable {
        build_class_table(&parse("import java.lang.Integer; import java.lang.Double; class A {}").unwrap()).unwrap()
    }

    #[test]
    fn empty_input() {
        let out = unify(&[], &table());
        assert_eq!(out.solutions, vec![Solution { remaining: vec![], sigma: BTreeMap::new() }]);
    }

    #[test]
    fn placeholder_pair_remains() {
        let out = unify(&[Constraint::lt(Type::tph("A"), Type::tph("B"))], &table());
        assert_eq!(out.solutions.len(), 1);
        assert_eq!(out.solutions[0].remaining, vec![(Tph::new("A"), Tph::new("B"))]);
        assert!(out.solutions[0].sigma.is_empty());
    }

    #[test]
    fn lower_bound_expansion() {
        let out = unify(&[Constraint::lt(Type::tph("A"), Type::class(NUMBER))], &table());
        let got: Vec<String> = out.solutions.iter().map(|s| s.sigma[&Tph::new("A")].to_string()).collect();
        assert_eq!(got, vec!["Number", "Integer", "Double"]);
    }

    #[test]
    fn ground_contradiction_reports_failure() {
        let c = Constraint::eq(Type::tph("A"), Type::class(INTEGER));
        let d = Constraint::lt(Type::tph("A"), Type::class("java.lang.Double"));
        let out = unify(&[c, d], &table());
        assert!(out.solutions.is_empty());
        assert!(out.failure.is_some());
    }

    #[test]
    fn occurs_check() {
        let c = Constraint::eq(Type::tph("A"), Type::fun(vec![Type::tph("A")], Type::tph("B")));
        assert!(unify(&[c], &table()).solutions.is_empty());
    }

    #[test]
    fn closure() {
        let a = |s: &str| Tph::new(s);
        let cl = transitive_closure([(a("A"), a("B")), (a("B"), a("C"))]);
        assert!(cl.contains(&(a("A"), a("C"))));
        assert!(cl.contains(&(a("B"), a("B"))));
        assert_eq!(cl.len(), 6);
        assert!(transitive_closure(Vec::<(Tph, Tph)>::new()).is_empty());
    }
}
