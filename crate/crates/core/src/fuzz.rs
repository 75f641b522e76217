//! Seeded random terms and the property suite run over them.

use std::collections::BTreeSet;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::derivation::{
    clash_free_holds, deriv_size, deserialize, judgment_equal, relevance_holds, serialize, Derivation, PairReading,
    SynthesisError,
};
use crate::reduction::{
    applicable_head_rules, canonical_size, classify, has_head_clash, head_normalize, head_redex, Step, StepKind,
};
use crate::syntax::{fresh_name, Name, Pattern, Position, Term};
use crate::system_e::{
    antisubst_e_with, check_e_with, forward_replay_check_with, is_tight_derivation, minimal_counters_hold,
    subject_expand_e_with, subject_reduce_e_with, subst_e_with, synthesize_tight_traced, tight_spreading_holds,
    verify_exact_with, TightReport,
};
use crate::system_u::{antisubst_u, check_u, subject_expand_u, subject_reduce_u, subst_u, synthesize_u_traced};

const FREE: [&str; 3] = ["a", "b", "c"];
const BOUND: [&str; 5] = ["x", "y", "z", "w", "v"];

// ---------------------------------------------------------------------------
// Generation

struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    fn var(&mut self, scope: &[Name]) -> Term {
        if !scope.is_empty() && self.rng.gen_bool(0.7) {
            Term::Var(scope[self.rng.gen_range(0..scope.len())].clone())
        } else {
            Term::var(FREE[self.rng.gen_range(0..FREE.len())])
        }
    }

    fn pattern(&mut self, depth: usize, used: &mut Vec<Name>) -> Pattern {
        if depth < 2 && self.rng.gen_bool(0.4) {
            let l = self.pattern(depth + 1, used);
            let r = self.pattern(depth + 1, used);
            return Pattern::pair(l, r);
        }
        let free: Vec<&str> = BOUND.iter().copied().filter(|n| !used.iter().any(|u| &**u == *n)).collect();
        let name = Name::from(free[self.rng.gen_range(0..free.len())]);
        used.push(name.clone());
        Pattern::Var(name)
    }

    fn binder(&mut self) -> Pattern {
        self.pattern(0, &mut Vec::new())
    }

    fn split(&mut self, size: usize) -> (usize, usize) {
        let left = self.rng.gen_range(1..size - 1);
        (left, size - 1 - left)
    }

    fn abstraction(&mut self, size: usize, scope: &mut Vec<Name>) -> Term {
        let p = self.binder();
        let mark = scope.len();
        scope.extend(p.vars());
        let body = self.term(size - 1, scope);
        scope.truncate(mark);
        Term::abs(p, body)
    }

    /// `\x.x x` over a fresh binder, size 4.
    fn duplicator(&mut self) -> Term {
        let x = Name::from(BOUND[self.rng.gen_range(0..BOUND.len())]);
        Term::abs(Pattern::Var(x.clone()), Term::app(Term::Var(x.clone()), Term::Var(x)))
    }

    fn pair(&mut self, size: usize, scope: &mut Vec<Name>) -> Term {
        let (l, r) = self.split(size);
        Term::pair(self.term(l, scope), self.term(r, scope))
    }

    fn term(&mut self, size: usize, scope: &mut Vec<Name>) -> Term {
        if size <= 1 {
            return self.var(scope);
        }
        if size == 2 {
            return self.abstraction(size, scope);
        }
        match self.rng.gen_range(0..12) {
            0..=2 => self.abstraction(size, scope),
            3..=6 if size >= 9 && self.rng.gen_bool(0.08) => {
                let arg = if self.rng.gen_bool(0.5) { self.duplicator() } else { self.term(size - 5, scope) };
                Term::app(self.duplicator(), arg)
            }
            3..=6 => {
                let (l, r) = self.split(size);
                let f = if l >= 2 && self.rng.gen_bool(0.3) { self.abstraction(l, scope) } else { self.term(l, scope) };
                Term::app(f, self.term(r, scope))
            }
            7..=8 => self.pair(size, scope),
            _ => {
                let p = self.binder();
                let (l, r) = self.split(size);
                let mark = scope.len();
                scope.extend(p.vars());
                let body = self.term(l, scope);
                scope.truncate(mark);
                let arg = if !p.is_var() && r >= 3 && self.rng.gen_bool(0.4) {
                    self.pair(r, scope)
                } else {
                    self.term(r, scope)
                };
                Term::matching(body, p, arg)
            }
        }
    }
}

/// `count` linear terms of size at most `max_size`, reproducible from
/// `seed`.
pub fn generate(seed: u64, count: usize, max_size: usize) -> Vec<Term> {
    let mut g = Generator { rng: ChaCha8Rng::seed_from_u64(seed) };
    (0..count)
        .map(|_| {
            let size = g.rng.gen_range(1..=max_size.max(1));
            g.term(size, &mut Vec::new())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Properties

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Determinism,
    Classification,
    Exactness,
    UpperBound,
    ForwardReplay,
    Relevance,
    ClashFreedom,
    SubstitutionLaws,
    RoundTrips,
    TightSpreading,
    MinimalCounters,
    Serialization,
    Divergence,
}

impl Property {
    pub const ALL: [Property; 13] = [
        Property::Determinism,
        Property::Classification,
        Property::Exactness,
        Property::UpperBound,
        Property::ForwardReplay,
        Property::Relevance,
        Property::ClashFreedom,
        Property::SubstitutionLaws,
        Property::RoundTrips,
        Property::TightSpreading,
        Property::MinimalCounters,
        Property::Serialization,
        Property::Divergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Determinism => "determinism",
            Property::Classification => "classification",
            Property::Exactness => "exactness",
            Property::UpperBound => "upper-bound",
            Property::ForwardReplay => "forward-replay",
            Property::Relevance => "relevance",
            Property::ClashFreedom => "clash-freedom",
            Property::SubstitutionLaws => "substitution-laws",
            Property::RoundTrips => "round-trips",
            Property::TightSpreading => "tight-spreading",
            Property::MinimalCounters => "minimal-counters",
            Property::Serialization => "serialization",
            Property::Divergence => "divergence",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Normalizing,
    Diverging,
    Clashing,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub outcome: Outcome,
    pub results: Vec<(Property, Result<(), String>)>,
}

impl Evaluation {
    pub fn failure(&self, property: Property) -> Option<&str> {
        self.results.iter().find(|(p, r)| *p == property && r.is_err()).map(|(_, r)| r.as_ref().unwrap_err().as_str())
    }

    pub fn first_failure(&self) -> Option<(Property, &str)> {
        self.results.iter().find_map(|(p, r)| r.as_ref().err().map(|e| (*p, e.as_str())))
    }
}

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn guarded(f: impl FnOnce() -> Check) -> Check {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            Err(format!("panicked: {msg}"))
        }
    }
}

fn same_judgment(a: &Derivation, b: &Derivation) -> bool {
    a.context() == b.context() && a.assigned() == b.assigned() && a.conclusion.indices == b.conclusion.indices
}

fn structural_checks(terms: &[&Term]) -> [(Property, Check); 2] {
    let determinism = guarded(|| {
        for t in terms {
            for pos in t.positions() {
                let sub = t.subterm_at(&pos).expect("positions are valid");
                let rules = applicable_head_rules(sub);
                ensure(rules.len() <= 1, || format!("{rules:?} all apply to {sub}"))?;
            }
        }
        Ok(())
    });
    let classification = guarded(|| {
        for t in terms {
            let canonical = classify(t).is_canonical();
            let stuck_cleanly = head_redex(t).is_none() && !has_head_clash(t);
            ensure(canonical == stuck_cleanly, || format!("classify says {} for {t}", classify(t)))?;
        }
        Ok(())
    });
    [(Property::Determinism, determinism), (Property::Classification, classification)]
}

/// The match nodes at a term position, across every `many` on the way.
fn nodes_at<'a>(d: &'a Derivation, path: &[usize], out: &mut Vec<&'a Derivation>) {
    use crate::derivation::Rule;
    if d.rule == Rule::Many {
        for p in &d.premises {
            nodes_at(p, path, out);
        }
        return;
    }
    let Some((&c, rest)) = path.split_first() else {
        out.push(d);
        return;
    };
    let slot = match (d.rule, c) {
        (Rule::Abs | Rule::AbsP | Rule::App | Rule::AppP | Rule::Pair | Rule::Match, 0) => 0,
        (Rule::App | Rule::Pair, 1) => 1,
        (Rule::Match, 1) => 2,
        _ => return,
    };
    if let Some(p) = d.premises.get(slot) {
        nodes_at(p, rest, out);
    }
}

fn substitution_laws(chain_u: &[Derivation], chain_e: &[Derivation], steps: &[Step], reading: PairReading) -> Check {
    for (i, step) in steps.iter().enumerate() {
        if step.redex.kind != StepKind::E {
            continue;
        }
        for (system, chain) in [("U", chain_u), ("E", chain_e)] {
            let mut sites = Vec::new();
            nodes_at(&chain[i], &step.redex.position.0, &mut sites);
            for site in sites {
                let Some(Term::Match(v, Pattern::Var(x), u)) = site.term() else {
                    return Err(format!("step {i}: no matching at the redex in {system}"));
                };
                let (phi_v, phi_u) = (&site.premises[0], &site.premises[2]);
                let a = phi_u.premises.len();
                let (r, back) = if system == "U" {
                    let r = subst_u(phi_v, x, phi_u).map_err(|e| format!("step {i} subst: {e}"))?;
                    check_u(&r).map_err(|e| format!("step {i} subst output: {e}"))?;
                    (r.clone(), antisubst_u(&r, v, x, u).map_err(|e| format!("step {i} antisubst: {e}"))?)
                } else {
                    let r = subst_e_with(phi_v, x, phi_u, reading).map_err(|e| format!("step {i} subst: {e}"))?;
                    check_e_with(&r, reading).map_err(|e| format!("step {i} subst output: {e}"))?;
                    let sum = phi_v.counters().zip(phi_u.counters()).map(|(a, b)| a + b);
                    ensure(r.counters() == sum, || {
                        format!("step {i}: indices {:?} are not the sum {sum:?}", r.counters())
                    })?;
                    (r.clone(), antisubst_e_with(&r, v, x, u, reading).map_err(|e| format!("step {i} antisubst: {e}"))?)
                };
                ensure(deriv_size(&r) + a == deriv_size(phi_v) + deriv_size(phi_u), || {
                    format!(
                        "step {i} {system}: size {} with |A| = {a} from {} and {}",
                        deriv_size(&r),
                        deriv_size(phi_v),
                        deriv_size(phi_u)
                    )
                })?;
                let expected_ctx = phi_v.context().erase([&Name::from(&**x)]).meet(phi_u.context());
                ensure(r.context() == &expected_ctx && r.assigned() == phi_v.assigned(), || {
                    format!("step {i} {system}: substitution changed the judgment")
                })?;
                let (bt, bu, ba) = back;
                ensure(same_judgment(&bt, phi_v) && same_judgment(&bu, phi_u) && ba.len() == a, || {
                    format!("step {i} {system}: anti-substitution does not invert substitution")
                })?;
                ensure(deriv_size(&bt) + deriv_size(&bu) == deriv_size(&r) + a, || {
                    format!("step {i} {system}: anti-substitution size law")
                })?;
            }
        }
    }
    Ok(())
}

/// Runs every applicable property on one term.
pub fn evaluate(t: &Term, budget: usize, reading: PairReading) -> Evaluation {
    let mut results = Vec::new();
    let (trace, counters) = match head_normalize(t, budget) {
        Ok(r) => r,
        Err(partial) => {
            let terms: Vec<&Term> = partial.trace.terms().collect();
            results.extend(structural_checks(&terms));
            let untypable = guarded(|| {
                let e = synthesize_tight_traced(t, budget, reading).err();
                let u = synthesize_u_traced(t, budget).err();
                ensure(
                    matches!(e, Some(SynthesisError::NotHeadNormalizing(_)))
                        && matches!(u, Some(SynthesisError::NotHeadNormalizing(_))),
                    || "synthesis did not report divergence".into(),
                )
            });
            results.push((Property::Divergence, untypable));
            return Evaluation { outcome: Outcome::Diverging, results };
        }
    };
    let terms: Vec<&Term> = trace.terms().collect();
    results.extend(structural_checks(&terms));
    if canonical_size(&trace.final_term).is_err() {
        let consistent = guarded(|| {
            ensure(matches!(verify_exact_with(t, budget, reading), Err(SynthesisError::Clash(_))), || {
                "a clash normal form was typed".into()
            })
        });
        results.push((Property::Divergence, consistent));
        return Evaluation { outcome: Outcome::Clashing, results };
    }
    let steps = trace.located_steps();

    let mut chain_e: Vec<Derivation> = Vec::new();
    let exactness = guarded(|| {
        let report = verify_exact_with(t, budget, reading).map_err(|e| e.to_string())?;
        check_e_with(&report.derivation, reading).map_err(|e| e.to_string())?;
        ensure(is_tight_derivation(&report.derivation), || "synthesized derivation is not tight".into())?;
        ensure(report.matches, || report.to_string())?;
        chain_e.push(report.derivation);
        Ok(())
    });
    results.push((Property::Exactness, exactness));

    let mut chain_u: Vec<Derivation> = Vec::new();
    let upper = guarded(|| {
        let (d, _) = synthesize_u_traced(t, budget).map_err(|e| e.to_string())?;
        check_u(&d).map_err(|e| e.to_string())?;
        let k = counters.steps() as usize;
        ensure(k <= deriv_size(&d), || format!("{k} steps but size {}", deriv_size(&d)))?;
        chain_u.push(d);
        for (i, step) in steps.iter().enumerate() {
            let next = subject_reduce_u(&chain_u[i], step, false).map_err(|e| format!("step {i}: {e}"))?;
            check_u(&next).map_err(|e| format!("step {i}: {e}"))?;
            let (before, after) = (deriv_size(&chain_u[i]), deriv_size(&next));
            ensure(after < before, || format!("step {i}: size {before} -> {after}"))?;
            chain_u.push(next);
        }
        Ok(())
    });
    results.push((Property::UpperBound, upper));

    let replay = guarded(|| {
        let d = chain_e.first().ok_or("no tight derivation")?;
        forward_replay_check_with(d, &trace, reading).map_err(|e| e.to_string())?;
        for (i, step) in steps.iter().enumerate() {
            let next = subject_reduce_e_with(&chain_e[i], step, reading).map_err(|e| format!("step {i}: {e}"))?;
            chain_e.push(next);
        }
        Ok(())
    });
    results.push((Property::ForwardReplay, replay));

    let complete = chain_u.len() == steps.len() + 1 && chain_e.len() == steps.len() + 1;
    let all = || chain_u.iter().chain(chain_e.iter());
    let need = || ensure(complete, || "derivation chains unavailable".into());

    results.push((
        Property::Relevance,
        guarded(|| {
            need()?;
            ensure(all().all(relevance_holds), || "a context mentions a variable that is not free".into())
        }),
    ));
    results.push((
        Property::ClashFreedom,
        guarded(|| {
            need()?;
            ensure(all().all(clash_free_holds), || "a typed subject has a head clash".into())
        }),
    ));
    results.push((
        Property::SubstitutionLaws,
        guarded(|| {
            need()?;
            substitution_laws(&chain_u, &chain_e, &steps, reading)
        }),
    ));
    results.push((
        Property::RoundTrips,
        guarded(|| {
            need()?;
            for (i, step) in steps.iter().enumerate() {
                let back_u = subject_expand_u(&chain_u[i + 1], step).map_err(|e| format!("step {i}: {e}"))?;
                ensure(same_judgment(&back_u, &chain_u[i]), || format!("step {i}: U judgment changed"))?;
                let back_e =
                    subject_expand_e_with(&chain_e[i + 1], step, reading).map_err(|e| format!("step {i}: {e}"))?;
                ensure(same_judgment(&back_e, &chain_e[i]), || format!("step {i}: E judgment changed"))?;
                let again = subject_reduce_e_with(&back_e, step, reading).map_err(|e| format!("step {i}: {e}"))?;
                ensure(same_judgment(&again, &chain_e[i + 1]), || format!("step {i}: E reduce after expand"))?;
            }
            Ok(())
        }),
    ));
    results.push((
        Property::TightSpreading,
        guarded(|| {
            need()?;
            ensure(chain_e.iter().all(tight_spreading_holds), || "tight spreading fails".into())
        }),
    ));
    results.push((
        Property::MinimalCounters,
        guarded(|| {
            need()?;
            ensure(chain_e.iter().all(minimal_counters_hold), || "minimal counters fail".into())
        }),
    ));
    results.push((
        Property::Serialization,
        guarded(|| {
            need()?;
            for d in [&chain_u[0], &chain_e[0]] {
                let back = deserialize(&serialize(d)).map_err(|e| e.to_string())?;
                ensure(judgment_equal(d, &back), || "document round trip changed the derivation".into())?;
            }
            Ok(())
        }),
    ));
    Evaluation { outcome: Outcome::Normalizing, results }
}

// ---------------------------------------------------------------------------
// Batches

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel when the `parallel` feature is on, sequential otherwise.
    Parallel,
}

/// Maps `f` over `items`, keeping input order.
pub fn map_batch<T: Sync, R: Send>(items: &[T], exec: Execution, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

pub fn evaluate_all(terms: &[Term], budget: usize, reading: PairReading, exec: Execution) -> Vec<Evaluation> {
    map_batch(terms, exec, |t| evaluate(t, budget, reading))
}

pub fn verify_all(
    terms: &[Term],
    budget: usize,
    reading: PairReading,
    exec: Execution,
) -> Vec<Result<TightReport, SynthesisError>> {
    map_batch(terms, exec, |t| verify_exact_with(t, budget, reading))
}

/// Shrinks `t` while `property` keeps failing on it.
pub fn shrink(t: &Term, property: Property, budget: usize, reading: PairReading) -> Term {
    let fails = |c: &Term| evaluate(c, budget, reading).failure(property).is_some();
    let mut cur = t.clone();
    'outer: loop {
        for c in candidates(&cur) {
            if fails(&c) {
                cur = c;
                continue 'outer;
            }
        }
        return cur;
    }
}

fn candidates(t: &Term) -> Vec<Term> {
    let taken: BTreeSet<Name> = t.names();
    let fresh = Term::Var(fresh_name("s", |n| taken.iter().any(|x| &**x == n)));
    let mut out = Vec::new();
    for pos in t.positions() {
        let sub = t.subterm_at(&pos).expect("positions are valid");
        let mut replacements = Vec::new();
        if !matches!(sub, Term::Var(_)) {
            replacements.push(fresh.clone());
        }
        match sub {
            Term::Var(_) => {}
            Term::Abs(_, b) => replacements.push((**b).clone()),
            Term::Match(b, _, _) => replacements.push((**b).clone()),
            Term::App(a, b) | Term::Pair(a, b) => {
                replacements.push((**a).clone());
                replacements.push((**b).clone());
            }
        }
        out.extend(replacements.into_iter().filter_map(|r| t.replace_at(&Position(pos.0.clone()), r)));
    }
    out.retain(|c| c.size() < t.size() || c != t);
    out
}

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub seed: u64,
    pub count: usize,
    pub max_size: usize,
    pub budget: usize,
    pub reading: PairReading,
    /// Terms checked before the generated ones.
    pub extra: Vec<Term>,
    pub execution: Execution,
}

impl Default for FuzzConfig {
    fn default() -> FuzzConfig {
        FuzzConfig {
            seed: 42,
            count: 500,
            max_size: 12,
            budget: 200,
            reading: PairReading::Sum,
            extra: Vec::new(),
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub index: usize,
    pub property: Property,
    pub term: Term,
    pub minimized: Term,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyStats {
    pub property: Property,
    pub checked: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzReport {
    pub total: usize,
    pub normalizing: usize,
    pub diverging: usize,
    pub clashing: usize,
    pub stats: Vec<PropertyStats>,
    pub counterexample: Option<Counterexample>,
}

impl FuzzReport {
    pub fn failures(&self) -> usize {
        self.stats.iter().map(|s| s.failed).sum()
    }

    pub fn stat(&self, property: Property) -> &PropertyStats {
        self.stats.iter().find(|s| s.property == property).expect("every property has a row")
    }
}

impl fmt::Display for FuzzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "terms {} | normalizing {} | diverging {} | clashing {}",
            self.total, self.normalizing, self.diverging, self.clashing
        )?;
        for s in &self.stats {
            writeln!(f, "{:<18} {}/{} passed", s.property.name(), s.checked - s.failed, s.checked)?;
        }
        match &self.counterexample {
            None => write!(f, "no failures"),
            Some(c) => write!(
                f,
                "FAILURE {} on term #{}: {}\nminimized: {}\ndetail: {}",
                c.property, c.index, c.term, c.minimized, c.detail
            ),
        }
    }
}

/// Generates the corpus, evaluates it and shrinks the first failure.
pub fn run(config: &FuzzConfig) -> FuzzReport {
    let mut terms = config.extra.clone();
    terms.extend(generate(config.seed, config.count, config.max_size));
    let evals = evaluate_all(&terms, config.budget, config.reading, config.execution);
    let mut stats: Vec<PropertyStats> =
        Property::ALL.iter().map(|&property| PropertyStats { property, checked: 0, failed: 0 }).collect();
    let (mut normalizing, mut diverging, mut clashing) = (0, 0, 0);
    for ev in &evals {
        match ev.outcome {
            Outcome::Normalizing => normalizing += 1,
            Outcome::Diverging => diverging += 1,
            Outcome::Clashing => clashing += 1,
        }
        for (p, r) in &ev.results {
            let row = stats.iter_mut().find(|s| s.property == *p).expect("every property has a row");
            row.checked += 1;
            row.failed += usize::from(r.is_err());
        }
    }
    let counterexample = evals.iter().enumerate().find_map(|(index, ev)| {
        let (property, detail) = ev.first_failure()?;
        let term = terms[index].clone();
        let minimized = shrink(&term, property, config.budget, config.reading);
        Some(Counterexample { index, property, term, minimized, detail: detail.to_string() })
    });
    FuzzReport { total: terms.len(), normalizing, diverging, clashing, stats, counterexample }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn generation_is_reproducible_and_bounded() {
        let a = generate(7, 50, 12);
        assert_eq!(a, generate(7, 50, 12));
        assert!(a.iter().all(|t| t.size() <= 12 && t.is_linear()));
        assert_ne!(a, generate(8, 50, 12));
    }

    #[test]
    fn identity_passes_everything() {
        let ev = evaluate(&parse("(\\z.z) x").unwrap(), 50, PairReading::Sum);
        assert_eq!(ev.outcome, Outcome::Normalizing);
        assert!(ev.first_failure().is_none(), "{:?}", ev.first_failure());
    }

    #[test]
    fn shrinking_keeps_the_failure() {
        let t = parse("(\\<x, y>.y) <a, b[z/c]>").unwrap();
        let ev = evaluate(&t, 50, PairReading::Crossed);
        assert!(ev.failure(Property::Exactness).is_some());
        let small = shrink(&t, Property::Exactness, 50, PairReading::Crossed);
        assert!(small.size() <= t.size());
        assert!(evaluate(&small, 50, PairReading::Crossed).failure(Property::Exactness).is_some());
    }
}
