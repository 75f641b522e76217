//! Reduction at a distance: the non-deterministic relation, the head
//! strategy with per-kind step counts, canonical forms and head clashes.
//!
//! A step is split into two phases. [`prepare_redex`] alpha-renames the
//! redex so that its rewrite cannot capture anything, and [`rewrite_redex`]
//! restructures the prepared redex without touching any name. The
//! derivation transformers reuse both phases, which is how a transformed
//! derivation ends up typing exactly the term the reducer produced.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::ops::Add;

use thiserror::Error;

use crate::syntax::{alpha_key, rename_binder, Name, Pattern, Position, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    /// `L<\p.t> u -> L<t[p/u]>`
    B,
    /// `t[x/u] -> t{x:=u}`
    E,
    /// `t[<p1,p2>/L<<u1,u2>>] -> L<t[p1/u1][p2/u2]>`
    M,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::B => "b",
            StepKind::E => "e",
            StepKind::M => "m",
        })
    }
}

impl std::str::FromStr for StepKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "b" => Ok(StepKind::B),
            "e" => Ok(StepKind::E),
            "m" => Ok(StepKind::M),
            _ => Err(format!("unknown step kind `{s}`")),
        }
    }
}

/// Beta, substitution and matching step counts plus a normal-form size.
/// Arithmetic is checked: an overflow panics instead of wrapping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Counters {
    pub b: u64,
    pub e: u64,
    pub m: u64,
    pub f: u64,
}

impl Counters {
    pub const ZERO: Counters = Counters { b: 0, e: 0, m: 0, f: 0 };

    pub fn new(b: u64, e: u64, m: u64, f: u64) -> Counters {
        Counters { b, e, m, f }
    }

    pub fn steps(&self) -> u64 {
        self.b + self.e + self.m
    }

    pub fn get(&self, kind: StepKind) -> u64 {
        match kind {
            StepKind::B => self.b,
            StepKind::E => self.e,
            StepKind::M => self.m,
        }
    }

    pub fn bump(&mut self, kind: StepKind) {
        let slot = match kind {
            StepKind::B => &mut self.b,
            StepKind::E => &mut self.e,
            StepKind::M => &mut self.m,
        };
        *slot = slot.checked_add(1).expect("counter overflow");
    }
}

impl Add for Counters {
    type Output = Counters;
    fn add(self, o: Counters) -> Counters {
        let add = |a: u64, b: u64| a.checked_add(b).expect("counter overflow");
        Counters { b: add(self.b, o.b), e: add(self.e, o.e), m: add(self.m, o.m), f: add(self.f, o.f) }
    }
}

impl fmt::Display for Counters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.b, self.e, self.m, self.f)
    }
}

/// A redex occurrence: where it sits and which rule contracts it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Redex {
    pub position: Position,
    pub kind: StepKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub pre: Term,
    pub kind: StepKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub final_term: Term,
}

impl Trace {
    /// The recorded steps, each located at its head redex.
    pub fn located_steps(&self) -> Vec<Step> {
        self.steps.iter().map(|s| Step::head(&s.pre).expect("recorded steps are head steps")).collect()
    }

    pub fn counters(&self) -> Counters {
        let mut c = Counters::ZERO;
        for s in &self.steps {
            c.bump(s.kind);
        }
        c
    }

    pub fn initial(&self) -> &Term {
        self.steps.first().map(|s| &s.pre).unwrap_or(&self.final_term)
    }

    /// Every term of the sequence, initial first and final last.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.steps.iter().map(|s| &s.pre).chain(std::iter::once(&self.final_term))
    }

    /// The smallest `k > 0` such that the `k`-th term is alpha-equivalent to
    /// the initial one.
    pub fn self_loop(&self) -> Option<usize> {
        let key0 = alpha_key(self.initial());
        self.terms().enumerate().skip(1).find(|(_, t)| alpha_key(t) == key0).map(|(k, _)| k)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{} {}", s.kind, s.pre)?;
        }
        writeln!(f, "FINAL {}", self.final_term)?;
        let c = self.counters();
        write!(f, "COUNTERS {} {} {}", c.b, c.e, c.m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("step budget of {budget} exhausted after {} steps", trace.steps.len())]
pub struct BudgetExceeded {
    pub budget: usize,
    pub trace: Trace,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("not a canonical form: {0}")]
pub struct NotCanonical(pub Term);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    PureCanonical,
    Canonical,
    HeadReducible,
    HeadClash,
}

impl Classification {
    pub fn is_canonical(self) -> bool {
        matches!(self, Classification::PureCanonical | Classification::Canonical)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::PureCanonical => "pure-canonical",
            Classification::Canonical => "canonical",
            Classification::HeadReducible => "head-reducible",
            Classification::HeadClash => "head-clash",
        })
    }
}

// ---------------------------------------------------------------------------
// List contexts

/// Splits `t = L<core>` with `L` the maximal stack of matchings. The layers
/// are listed innermost first.
pub fn decompose_list_context(t: &Term) -> (Vec<(Pattern, Term)>, Term) {
    let mut layers = Vec::new();
    let mut cur = t;
    while let Term::Match(b, p, a) = cur {
        layers.push((p.clone(), (**a).clone()));
        cur = b;
    }
    layers.reverse();
    (layers, cur.clone())
}

/// Inverse of [`decompose_list_context`].
pub fn recompose_list_context(layers: &[(Pattern, Term)], core: Term) -> Term {
    layers.iter().fold(core, |t, (p, a)| Term::matching(t, p.clone(), a.clone()))
}

fn core_of(t: &Term) -> &Term {
    let mut cur = t;
    while let Term::Match(b, _, _) = cur {
        cur = b;
    }
    cur
}

/// `abs(t)`: the term is an abstraction under a list context.
pub fn is_abs(t: &Term) -> bool {
    matches!(core_of(t), Term::Abs(..))
}

/// The term is a pair under a list context.
pub fn is_pair(t: &Term) -> bool {
    matches!(core_of(t), Term::Pair(..))
}

fn replace_core(t: &Term, f: &mut dyn FnMut(&Term) -> Term) -> Term {
    match t {
        Term::Match(b, p, a) => Term::matching(replace_core(b, f), p.clone(), (**a).clone()),
        core => f(core),
    }
}

/// Renames the binders of the list context around the core of `t` that
/// satisfy `clashes`. The core itself is left alone.
fn freshen_layers(t: &Term, clashes: &dyn Fn(&str) -> bool, taken: &mut BTreeSet<Name>) -> Term {
    match t {
        Term::Match(b, p, a) => {
            let (p2, b2) = rename_binder(p, b, clashes, taken);
            Term::matching(freshen_layers(&b2, clashes, taken), p2, (**a).clone())
        }
        core => core.clone(),
    }
}

// ---------------------------------------------------------------------------
// Substitution

/// Replaces free occurrences of `x` by `u` without renaming anything.
/// Callers must have made the binders of `t` safe first.
pub fn naive_subst(t: &Term, x: &str, u: &Term) -> Term {
    match t {
        Term::Var(y) if &**y == x => u.clone(),
        Term::Var(_) => t.clone(),
        Term::Abs(p, b) => {
            if p.binds(x) {
                t.clone()
            } else {
                Term::abs(p.clone(), naive_subst(b, x, u))
            }
        }
        Term::Pair(a, b) => Term::pair(naive_subst(a, x, u), naive_subst(b, x, u)),
        Term::App(a, b) => Term::app(naive_subst(a, x, u), naive_subst(b, x, u)),
        Term::Match(b, p, a) => {
            let body = if p.binds(x) { (**b).clone() } else { naive_subst(b, x, u) };
            Term::matching(body, p.clone(), naive_subst(a, x, u))
        }
    }
}

/// Renames the binders of `t` that would capture a free variable of `u`
/// when `u` is substituted for `x`. Binders with no free `x` below are kept.
pub fn freshen_for_subst(t: &Term, x: &str, u: &Term) -> Term {
    let fvu = u.free_vars();
    let mut taken: BTreeSet<Name> = fvu.iter().cloned().chain(t.names()).collect();
    taken.insert(Name::from(x));
    freshen_rec(t, x, &fvu, &mut taken)
}

fn freshen_rec(t: &Term, x: &str, fvu: &BTreeSet<Name>, taken: &mut BTreeSet<Name>) -> Term {
    if !t.has_free(x) {
        return t.clone();
    }
    let clashes = |v: &str| fvu.contains(v);
    match t {
        Term::Var(_) => t.clone(),
        Term::Abs(p, b) => {
            let (p2, b2) = rename_binder(p, b, &clashes, taken);
            Term::abs(p2, freshen_rec(&b2, x, fvu, taken))
        }
        Term::Pair(a, b) => Term::pair(freshen_rec(a, x, fvu, taken), freshen_rec(b, x, fvu, taken)),
        Term::App(a, b) => Term::app(freshen_rec(a, x, fvu, taken), freshen_rec(b, x, fvu, taken)),
        Term::Match(b, p, a) => {
            let (p2, body) = if !p.binds(x) && b.has_free(x) {
                let (p2, b2) = rename_binder(p, b, &clashes, taken);
                (p2, freshen_rec(&b2, x, fvu, taken))
            } else {
                (p.clone(), (**b).clone())
            };
            Term::matching(body, p2, freshen_rec(a, x, fvu, taken))
        }
    }
}

/// Capture-avoiding substitution `t{x:=u}`.
pub fn substitute(t: &Term, x: &str, u: &Term) -> Term {
    naive_subst(&freshen_for_subst(t, x, u), x, u)
}

// ---------------------------------------------------------------------------
// Rules

/// Which rule has a redex at the root of `t`, if any. At most one can.
pub fn root_kind(t: &Term) -> Option<StepKind> {
    match t {
        Term::App(f, _) if is_abs(f) => Some(StepKind::B),
        Term::Match(_, Pattern::Var(_), _) => Some(StepKind::E),
        Term::Match(_, Pattern::Pair(..), a) if is_pair(a) => Some(StepKind::M),
        _ => None,
    }
}

/// Alpha-renames a root redex so that [`rewrite_redex`] is capture-free.
///
/// * b: binders of `L` are renamed away from `fv(u)`.
/// * e: binders of the body are renamed away from `fv(u)` where needed.
/// * m: variables of `p2` are renamed away from `fv(u1)`, then binders of
///   `L` away from the free variables of the body outside the pattern.
pub fn prepare_redex(kind: StepKind, t: &Term) -> Term {
    match (kind, t) {
        (StepKind::B, Term::App(f, u)) => {
            let fvu = u.free_vars();
            let mut taken: BTreeSet<Name> = fvu.iter().cloned().chain(f.names()).chain(u.names()).collect();
            let f2 = freshen_layers(f, &|v| fvu.contains(v), &mut taken);
            Term::app(f2, (**u).clone())
        }
        (StepKind::E, Term::Match(v, Pattern::Var(x), u)) => {
            Term::matching(freshen_for_subst(v, x, u), Pattern::Var(x.clone()), (**u).clone())
        }
        (StepKind::M, Term::Match(v, p @ Pattern::Pair(_, p2), a)) => {
            let mut taken: BTreeSet<Name> = v.names().into_iter().chain(a.names()).chain(p.vars()).collect();
            let (layers, core) = decompose_list_context(a);
            let Term::Pair(u1, _) = &core else { return t.clone() };
            let fv1 = u1.free_vars();
            let p2_vars = p2.vars();
            let (p, v) = rename_binder(p, v, &|x| fv1.contains(x) && p2_vars.iter().any(|y| &**y == x), &mut taken);
            let body_free: BTreeSet<Name> = {
                let pv = p.vars();
                v.free_vars().into_iter().filter(|x| !pv.contains(x)).collect()
            };
            let a2 = freshen_layers(&recompose_list_context(&layers, core), &|x| body_free.contains(x), &mut taken);
            Term::matching(v, p, a2)
        }
        _ => t.clone(),
    }
}

/// Contracts a prepared root redex. No renaming happens here.
pub fn rewrite_redex(kind: StepKind, t: &Term) -> Option<Term> {
    match (kind, t) {
        (StepKind::B, Term::App(f, u)) if is_abs(f) => Some(replace_core(f, &mut |core| match core {
            Term::Abs(p, body) => Term::matching((**body).clone(), p.clone(), (**u).clone()),
            other => other.clone(),
        })),
        (StepKind::E, Term::Match(v, Pattern::Var(x), u)) => Some(naive_subst(v, x, u)),
        (StepKind::M, Term::Match(v, Pattern::Pair(p1, p2), a)) if is_pair(a) => {
            Some(replace_core(a, &mut |core| match core {
                Term::Pair(u1, u2) => Term::matching(
                    Term::matching((**v).clone(), (**p1).clone(), (**u1).clone()),
                    (**p2).clone(),
                    (**u2).clone(),
                ),
                other => other.clone(),
            }))
        }
        _ => None,
    }
}

/// Contracts the redex at `redex.position`.
pub fn contract_at(t: &Term, redex: &Redex) -> Option<Term> {
    let sub = t.subterm_at(&redex.position)?;
    if root_kind(sub) != Some(redex.kind) {
        return None;
    }
    let reduct = rewrite_redex(redex.kind, &prepare_redex(redex.kind, sub))?;
    t.replace_at(&redex.position, reduct)
}

/// Every redex of the full relation, in leftmost-outermost order.
pub fn redexes(t: &Term) -> Vec<Redex> {
    t.positions()
        .into_iter()
        .filter_map(|pos| {
            let kind = root_kind(t.subterm_at(&pos)?)?;
            Some(Redex { position: pos, kind })
        })
        .collect()
}

/// Every one-step reduct of the full relation with its position.
pub fn full_steps(t: &Term) -> Vec<(Position, Term)> {
    redexes(t)
        .into_iter()
        .filter_map(|r| {
            let reduct = contract_at(t, &r)?;
            Some((r.position, reduct))
        })
        .collect()
}

/// One reduction step located in its source term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub pre: Term,
    pub redex: Redex,
}

impl Step {
    /// The head step of `pre`, if it has one.
    pub fn head(pre: &Term) -> Option<Step> {
        Some(Step { pre: pre.clone(), redex: head_redex(pre)? })
    }

    pub fn is_head(&self) -> bool {
        head_redex(&self.pre).as_ref() == Some(&self.redex)
    }

    pub fn post(&self) -> Option<Term> {
        contract_at(&self.pre, &self.redex)
    }
}

// ---------------------------------------------------------------------------
// Head strategy

/// The redex contracted by the head strategy, if any.
pub fn head_redex(t: &Term) -> Option<Redex> {
    let mut path = Vec::new();
    let kind = head_path(t, &mut path)?;
    Some(Redex { position: Position(path), kind })
}

fn head_path(t: &Term, path: &mut Vec<usize>) -> Option<StepKind> {
    match t {
        Term::Var(_) | Term::Pair(..) => None,
        Term::Abs(_, b) => descend(b, 0, path),
        Term::App(f, _) => {
            if is_abs(f) {
                Some(StepKind::B)
            } else {
                descend(f, 0, path)
            }
        }
        Term::Match(b, p, a) => {
            if let Some(k) = descend(b, 0, path) {
                return Some(k);
            }
            match p {
                Pattern::Var(_) => Some(StepKind::E),
                Pattern::Pair(..) if is_pair(a) => Some(StepKind::M),
                Pattern::Pair(..) => descend(a, 1, path),
            }
        }
    }
}

fn descend(t: &Term, i: usize, path: &mut Vec<usize>) -> Option<StepKind> {
    path.push(i);
    let r = head_path(t, path);
    if r.is_none() {
        path.pop();
    }
    r
}

pub fn head_step(t: &Term) -> Option<(Term, StepKind)> {
    let r = head_redex(t)?;
    let reduct = contract_at(t, &r).expect("head redexes are contractible");
    Some((reduct, r.kind))
}

pub fn head_normalize(t: &Term, max_steps: usize) -> Result<(Trace, Counters), BudgetExceeded> {
    let mut steps = Vec::new();
    let mut cur = t.clone();
    while let Some((next, kind)) = head_step(&cur) {
        if steps.len() == max_steps {
            return Err(BudgetExceeded { budget: max_steps, trace: Trace { steps, final_term: cur } });
        }
        steps.push(TraceStep { pre: cur, kind });
        cur = next;
    }
    let trace = Trace { steps, final_term: cur };
    let counters = trace.counters();
    Ok((trace, counters))
}

/// The rules of the head strategy, named by their conclusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeadRule {
    Beta,
    Subst,
    Matching,
    UnderAbs,
    AppFun,
    MatchBody,
    MatchArg,
}

/// Which head rules have their premises satisfied at the root of `t`.
/// Each rule is tested on its own, so the result can list several.
pub fn applicable_head_rules(t: &Term) -> Vec<HeadRule> {
    let reduces = |s: &Term| head_redex(s).is_some();
    let mut out = Vec::new();
    match t {
        Term::App(f, _) => {
            if is_abs(f) {
                out.push(HeadRule::Beta);
            }
            if !is_abs(f) && reduces(f) {
                out.push(HeadRule::AppFun);
            }
        }
        Term::Abs(_, b) => {
            if reduces(b) {
                out.push(HeadRule::UnderAbs);
            }
        }
        Term::Match(b, p, a) => {
            let body_reduces = reduces(b);
            if body_reduces {
                out.push(HeadRule::MatchBody);
            }
            if !body_reduces && p.is_var() {
                out.push(HeadRule::Subst);
            }
            if !body_reduces && !p.is_var() && is_pair(a) {
                out.push(HeadRule::Matching);
            }
            if !body_reduces && !p.is_var() && !is_pair(a) && reduces(a) {
                out.push(HeadRule::MatchArg);
            }
        }
        Term::Var(_) | Term::Pair(..) => {}
    }
    out
}

/// No subterm of `t` has two applicable head rules.
pub fn head_rules_deterministic(t: &Term) -> bool {
    t.positions().iter().all(|p| applicable_head_rules(t.subterm_at(p).unwrap()).len() <= 1)
}

// ---------------------------------------------------------------------------
// Canonical forms

/// Membership in the pure canonical forms `N`.
pub fn is_pure_canonical(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::App(f, _) => is_pure_canonical(f),
        Term::Match(b, Pattern::Pair(..), a) => is_pure_canonical(b) && is_pure_canonical(a),
        _ => false,
    }
}

/// Membership in the canonical forms `M`.
pub fn is_canonical(t: &Term) -> bool {
    match t {
        Term::Abs(_, b) => is_canonical(b),
        Term::Pair(..) => true,
        Term::Match(b, Pattern::Pair(..), a) => is_canonical(b) && is_pure_canonical(a),
        _ => is_pure_canonical(t),
    }
}

pub fn classify(t: &Term) -> Classification {
    if is_pure_canonical(t) {
        Classification::PureCanonical
    } else if is_canonical(t) {
        Classification::Canonical
    } else if head_redex(t).is_none() {
        Classification::HeadClash
    } else {
        Classification::HeadReducible
    }
}

pub fn canonical_size(t: &Term) -> Result<u64, NotCanonical> {
    fn n(t: &Term) -> u64 {
        match t {
            Term::App(f, _) => n(f) + 1,
            Term::Match(b, _, a) => n(b) + n(a) + 1,
            _ => 0,
        }
    }
    fn m(t: &Term) -> u64 {
        match t {
            Term::Abs(_, b) => m(b) + 1,
            Term::Pair(..) => 1,
            Term::Match(b, _, a) => m(b) + n(a) + 1,
            _ => n(t),
        }
    }
    if is_canonical(t) {
        Ok(m(t))
    } else {
        Err(NotCanonical(t.clone()))
    }
}

/// Looks for a clash in head position: a pair applied to something, a pair
/// pattern matched against an abstraction, or an abstraction over a pair
/// pattern applied to an abstraction. Head positions are the body of an
/// abstraction, the function of an application, the body of a matching, and
/// the argument of a matching on a pair pattern.
pub fn has_head_clash(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Pair(..) => false,
        Term::Abs(_, b) => has_head_clash(b),
        Term::App(f, a) => {
            let pair_applied = is_pair(f);
            let abs_clash = matches!(core_of(f), Term::Abs(Pattern::Pair(..), _)) && is_abs(a);
            pair_applied || abs_clash || has_head_clash(f)
        }
        Term::Match(b, p, a) => {
            let pair_pat = !p.is_var();
            (pair_pat && is_abs(a)) || has_head_clash(b) || (pair_pat && has_head_clash(a))
        }
    }
}

// ---------------------------------------------------------------------------
// Joinability

const PROBE_NODE_CAP: usize = 20_000;

/// Contracts the first two redexes of `t` (when there are two) and searches
/// up to `budget` further steps from each side for a common reduct, up to
/// alpha-equivalence.
pub fn joinability_probe(t: &Term, budget: usize) -> bool {
    let steps = full_steps(t);
    if steps.len() < 2 {
        return true;
    }
    let left = reachable(&steps[0].1, budget);
    let right = reachable(&steps[1].1, budget);
    !left.is_disjoint(&right)
}

fn reachable(t: &Term, budget: usize) -> HashSet<String> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(alpha_key(t));
    queue.push_back((t.clone(), 0usize));
    while let Some((s, d)) = queue.pop_front() {
        if d == budget || seen.len() >= PROBE_NODE_CAP {
            continue;
        }
        for (_, next) in full_steps(&s) {
            if seen.insert(alpha_key(&next)) {
                queue.push_back((next, d + 1));
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, parse};

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(substitute(&t("x"), "x", &t("\\z.z")), t("\\z.z"));
        assert_eq!(substitute(&t("\\y.x"), "x", &t("y")), t("\\y1.y"));
        let omega = t("(\\z.z z) (\\z.z z)");
        assert_eq!(substitute(&t("y"), "x", &omega), t("y"));
        assert_eq!(substitute(&t("\\x.x"), "x", &t("y")), t("\\x.x"));
        assert_eq!(substitute(&t("(x y)[<y,z>/x]"), "x", &t("y")), t("(y y1)[<y1,z>/y]"));
        assert_eq!(substitute(&t("x[<x,z>/x]"), "x", &t("y")), t("x[<x,z>/y]"));
        assert!(alpha_eq(&substitute(&t("(x y)[<y,z>/w]"), "x", &t("y")), &t("(y a)[<a,z>/w]")));
    }

    #[test]
    fn list_context_decomposition() {
        let (l, core) = decompose_list_context(&t("(\\p.s)[p1/u1][p2/u2]"));
        assert_eq!(l, vec![(Pattern::var("p1"), t("u1")), (Pattern::var("p2"), t("u2"))]);
        assert_eq!(core, t("\\p.s"));
        assert_eq!(recompose_list_context(&l, core), t("(\\p.s)[p1/u1][p2/u2]"));
        assert_eq!(decompose_list_context(&t("x")), (vec![], t("x")));
        let (l, core) = decompose_list_context(&t("<a,b>[q/s]"));
        assert_eq!((l.len(), core), (1, t("<a,b>")));
    }

    #[test]
    fn first_step_of_the_running_example() {
        let i = "(\\z.z)";
        let k = "(\\x.\\y.x)";
        let start = t(&format!("(\\<x,y>. x ({i} y))[z/{i}] ({i} <{k},w>)"));
        let (next, kind) = head_step(&start).unwrap();
        assert_eq!(kind, StepKind::B);
        assert_eq!(next, t(&format!("(x ({i} y))[<x,y>/{i} <{k},w>][z/{i}]")));
    }

    #[test]
    fn head_step_on_normal_and_matching_terms() {
        assert_eq!(head_step(&t("x")), None);
        let (next, kind) = head_step(&t("x[<a,b>/<u,v>]")).unwrap();
        assert_eq!((next, kind), (t("x[a/u][b/v]"), StepKind::M));
    }

    #[test]
    fn b_step_freshens_list_context() {
        // The binder y of L would capture the argument's y.
        let (next, _) = head_step(&t("(\\x.x y)[y/z] y")).unwrap();
        assert_eq!(next, t("(x y1)[x/y][y1/z]"));
    }

    #[test]
    fn m_step_freshens_pattern_and_context() {
        // p2 = y would capture the y free in u1.
        let (next, _) = head_step(&t("(x y)[<x,y>/<y,b>]")).unwrap();
        assert!(alpha_eq(&next, &t("(x c)[x/y][c/b]")));
        // L binds w, which is free in the body.
        let (next, _) = head_step(&t("(x w)[<x,y>/<a,b>[w/c]]")).unwrap();
        assert!(alpha_eq(&next, &t("(x w)[x/a][y/b][d/c]")));
    }

    #[test]
    fn matching_takes_priority_over_argument_reduction() {
        let term = t("x[<a,b>/<u,v>[y/w]]");
        assert_eq!(applicable_head_rules(&term), vec![HeadRule::Matching]);
        assert_eq!(head_redex(&term).unwrap().kind, StepKind::M);
    }

    #[test]
    fn trace_serialization() {
        let (trace, c) = head_normalize(&t("(\\z.z) x"), 100).unwrap();
        assert_eq!(c, Counters::new(1, 1, 0, 0));
        assert_eq!(trace.to_string(), "b (\\z.z) x\ne z[z/x]\nFINAL x\nCOUNTERS 1 1 0");
    }

    #[test]
    fn omega_exhausts_the_budget_and_loops() {
        let omega = t("(\\z.z z) (\\z.z z)");
        let err = head_normalize(&omega, 50).unwrap_err();
        assert_eq!(err.trace.steps.len(), 50);
        assert!(err.trace.self_loop().is_some());
        assert!(alpha_eq(&err.trace.final_term, &omega));
    }

    #[test]
    fn zero_budget_on_a_normal_form_succeeds() {
        assert!(head_normalize(&t("x"), 0).is_ok());
        assert!(head_normalize(&t("(\\x.x) y"), 0).is_err());
    }

    #[test]
    fn full_steps_examples() {
        assert!(full_steps(&t("x")).is_empty());
        let one = full_steps(&t("(\\x.x) y"));
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].1, t("x[x/y]"));
        let two = full_steps(&t("(\\x.x) ((\\y.y) z)"));
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].0, Position::root());
        assert_eq!(two[1].0, Position(vec![1]));
    }

    #[test]
    fn classification_examples() {
        let omega = "((\\z.z z) (\\z.z z))";
        assert_eq!(classify(&t(&format!("z[<z,w>/x {omega}]"))), Classification::PureCanonical);
        assert_eq!(classify(&t("<x,\\z.z> w")), Classification::HeadClash);
        assert_eq!(classify(&t("(\\z.z) x")), Classification::HeadReducible);
        assert_eq!(classify(&t("\\<x,y>.<x,\\z.z>")), Classification::Canonical);
        assert_eq!(classify(&t("x[<a,b>/\\z.z]")), Classification::HeadClash);
        assert_eq!(classify(&t("x[y/z]")), Classification::HeadReducible);
    }

    #[test]
    fn canonical_size_examples() {
        let omega = "((\\z.z z) (\\z.z z))";
        assert_eq!(canonical_size(&t("\\<x,y>.<x,\\z.z>")), Ok(2));
        assert_eq!(canonical_size(&t("\\x.y (<x,z> (\\z.z))")), Ok(2));
        assert_eq!(canonical_size(&t(&format!("x {omega}"))), Ok(1));
        assert_eq!(canonical_size(&t(&format!("z[<z,w>/x {omega}]"))), Ok(2));
        assert_eq!(canonical_size(&t("x")), Ok(0));
        assert!(canonical_size(&t("(\\z.z) x")).is_err());
    }

    #[test]
    fn head_clash_shapes() {
        assert!(has_head_clash(&t("<a,b> c")));
        assert!(has_head_clash(&t("<a,b>[x/y] c")));
        assert!(has_head_clash(&t("x[<a,b>/(\\z.z)[u/v]]")));
        assert!(has_head_clash(&t("(\\<a,b>.a) (\\z.z)")));
        assert!(has_head_clash(&t("\\x.<a,b> c")));
        assert!(!has_head_clash(&t("x <a,b>")));
        assert!(!has_head_clash(&t("x[y/\\z.z]")));
    }

    #[test]
    fn joinability_examples() {
        assert!(joinability_probe(&t("x"), 10));
        assert!(joinability_probe(&t("(\\x.x) ((\\y.y) z)"), 10));
        assert!(joinability_probe(&t("(\\x.<x,x>) ((\\z.z) z)"), 10));
    }
}
