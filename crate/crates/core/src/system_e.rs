//! The tight system E. Its indices `(b, e, m, f)` count exactly the head
//! steps of each kind and the size of the canonical form reached.

use std::fmt;

use thiserror::Error;

use crate::derivation::{
    first_violation, Derivation, PairReading, PatternIndices, Rule, RuleViolation, ShapeMismatch, Subject,
    SynthesisError, System,
};
use crate::reduction::{
    canonical_size, head_normalize, is_canonical, is_pure_canonical, Counters, NotCanonical, Step, Trace,
};
use crate::syntax::{Pattern, Term};
use crate::system_u::{antisubst_in, subst_in};
use crate::transform::{self, R};
use crate::types::{Assigned, Base, MultisetType, SimpleType, TypingContext};

const SYS: System = System::E(PairReading::Sum);

// ---------------------------------------------------------------------------
// Checking

fn counters(d: &Derivation) -> Result<Counters, String> {
    d.counters().ok_or_else(|| "term judgment without (b,e,m,f) indices".to_string())
}

fn pattern_ix(d: &Derivation) -> Result<PatternIndices, String> {
    d.pattern_indices().ok_or_else(|| "pattern judgment without (e,m,f) indices".to_string())
}

fn term(d: &Derivation) -> Result<&Term, String> {
    d.term().ok_or_else(|| format!("{} concludes on a pattern", d.rule))
}

fn pattern(d: &Derivation) -> Result<&Pattern, String> {
    d.pattern().ok_or_else(|| format!("{} concludes on a term", d.rule))
}

fn simple(d: &Derivation) -> Result<&SimpleType, String> {
    d.assigned().as_simple().ok_or_else(|| format!("expected a type, found {}", d.assigned()))
}

fn multi(d: &Derivation) -> Result<&MultisetType, String> {
    d.assigned().as_multi().ok_or_else(|| format!("expected a multiset type, found {}", d.assigned()))
}

fn arity(d: &Derivation, n: usize) -> Result<(), String> {
    if d.premises.len() != n {
        return Err(format!("expected {n} premises, found {}", d.premises.len()));
    }
    Ok(())
}

fn eq<T: PartialEq + fmt::Display>(what: &str, expected: T, actual: &T) -> Result<(), String> {
    if &expected != actual {
        return Err(format!("{what}: expected {expected}, found {actual}"));
    }
    Ok(())
}

fn eq_ix(expected: Counters, d: &Derivation) -> Result<(), String> {
    eq("indices", expected, &counters(d)?)
}

fn eq_pix(expected: PatternIndices, d: &Derivation) -> Result<(), String> {
    let actual = pattern_ix(d)?;
    if expected != actual {
        return Err(format!(
            "indices: expected ({}, {}, {}), found ({}, {}, {})",
            expected.e, expected.m, expected.f, actual.e, actual.m, actual.f
        ));
    }
    Ok(())
}

fn premise_subject(d: &Derivation, i: usize, expected: Subject) -> Result<(), String> {
    eq(&format!("subject of premise {i}"), expected, &d.premises[i].conclusion.subject)
}

fn many_premise(d: &Derivation, i: usize) -> Result<(), String> {
    if d.premises[i].rule != Rule::Many {
        return Err(format!("premise {i} must be a many node, found {}", d.premises[i].rule));
    }
    Ok(())
}

fn sum(cs: impl IntoIterator<Item = Counters>) -> Counters {
    cs.into_iter().fold(Counters::ZERO, |a, c| a + c)
}

fn check_node(d: &Derivation, reading: PairReading) -> Result<(), String> {
    if d.context().any_base(&|b| b == Base::Star) || d.assigned().any_base(&|b| b == Base::Star) {
        return Err("the plain base type belongs to the untyped-counter system".into());
    }
    if d.rule.is_pattern_rule() != d.pattern().is_some() {
        return Err("subject kind does not fit the rule".into());
    }
    if d.rule != Rule::Many && !d.rule.is_pattern_rule() && d.assigned().as_multi().is_some() {
        return Err("only many assigns a multiset type to a term".into());
    }
    let ctx = d.context();
    match d.rule {
        Rule::Ax => {
            arity(d, 0)?;
            let Term::Var(x) = term(d)? else { return Err("subject is not a variable".into()) };
            let s = simple(d)?.clone();
            eq("context", TypingContext::singleton(x.clone(), MultisetType::single(s)), ctx)?;
            eq_ix(Counters::ZERO, d)
        }
        Rule::Many => {
            let t = term(d)?;
            let mut types = Vec::new();
            for p in &d.premises {
                if p.term() != Some(t) {
                    return Err(format!("premise subject {} differs from {t}", p.conclusion.subject));
                }
                types.push(simple(p)?.clone());
            }
            eq("type", Assigned::Multi(MultisetType::new(types)), d.assigned())?;
            eq("context", d.premises.iter().fold(TypingContext::new(), |g, p| g.meet(p.context())), ctx)?;
            eq_ix(sum(d.premises.iter().map(counters).collect::<Result<Vec<_>, _>>()?), d)
        }
        Rule::Abs => {
            arity(d, 2)?;
            let Term::Abs(p, t) = term(d)? else { return Err("subject is not an abstraction".into()) };
            premise_subject(d, 0, Subject::Term((**t).clone()))?;
            premise_subject(d, 1, Subject::Pattern(p.clone()))?;
            let (body, pat) = (&d.premises[0], &d.premises[1]);
            eq("pattern context", body.context().restrict(p), pat.context())?;
            eq("type", Assigned::Simple(SimpleType::arrow(multi(pat)?.clone(), simple(body)?.clone())), d.assigned())?;
            eq("context", body.context().erase(&p.vars()), ctx)?;
            let (c, q) = (counters(body)?, pattern_ix(pat)?);
            eq_ix(Counters::new(c.b + 1, c.e + q.e, c.m + q.m, c.f + q.f), d)
        }
        Rule::AbsP => {
            arity(d, 1)?;
            let Term::Abs(p, t) = term(d)? else { return Err("subject is not an abstraction".into()) };
            premise_subject(d, 0, Subject::Term((**t).clone()))?;
            let body = &d.premises[0];
            if !simple(body)?.is_tight() {
                return Err(format!("body typed {}, not a tight type", body.assigned()));
            }
            if !body.context().restrict(p).is_tight() {
                return Err("pattern variables are not tightly typed".into());
            }
            eq("type", Assigned::Simple(SimpleType::M), d.assigned())?;
            eq("context", body.context().erase(&p.vars()), ctx)?;
            let c = counters(body)?;
            eq_ix(Counters::new(c.b, c.e, c.m, c.f + 1), d)
        }
        Rule::App => {
            arity(d, 2)?;
            let Term::App(f, a) = term(d)? else { return Err("subject is not an application".into()) };
            premise_subject(d, 0, Subject::Term((**f).clone()))?;
            premise_subject(d, 1, Subject::Term((**a).clone()))?;
            many_premise(d, 1)?;
            let (fun, arg) = (&d.premises[0], &d.premises[1]);
            let SimpleType::Arrow(dom, cod) = simple(fun)? else {
                return Err(format!("function typed {}, not an arrow", fun.assigned()));
            };
            eq("argument type", Assigned::Multi(dom.clone()), arg.assigned())?;
            eq("type", Assigned::Simple((**cod).clone()), d.assigned())?;
            eq("context", fun.context().meet(arg.context()), ctx)?;
            eq_ix(counters(fun)? + counters(arg)?, d)
        }
        Rule::AppP => {
            arity(d, 1)?;
            let Term::App(f, _) = term(d)? else { return Err("subject is not an application".into()) };
            premise_subject(d, 0, Subject::Term((**f).clone()))?;
            let fun = &d.premises[0];
            eq("function type", Assigned::Simple(SimpleType::N), fun.assigned())?;
            eq("type", Assigned::Simple(SimpleType::N), d.assigned())?;
            eq("context", fun.context().clone(), ctx)?;
            let c = counters(fun)?;
            eq_ix(Counters::new(c.b, c.e, c.m, c.f + 1), d)
        }
        Rule::Pair => {
            arity(d, 2)?;
            let Term::Pair(a, b) = term(d)? else { return Err("subject is not a pair".into()) };
            premise_subject(d, 0, Subject::Term((**a).clone()))?;
            premise_subject(d, 1, Subject::Term((**b).clone()))?;
            many_premise(d, 0)?;
            many_premise(d, 1)?;
            let (l, r) = (&d.premises[0], &d.premises[1]);
            eq("type", Assigned::Simple(SimpleType::Product(multi(l)?.clone(), multi(r)?.clone())), d.assigned())?;
            eq("context", l.context().meet(r.context()), ctx)?;
            let (cl, cr) = (counters(l)?, counters(r)?);
            let e = match reading {
                PairReading::Sum => cl.e + cr.e,
                PairReading::Crossed => cl.e + cr.b,
            };
            eq_ix(Counters::new(cl.b + cr.b, e, cl.m + cr.m, cl.f + cr.f), d)
        }
        Rule::PairP => {
            arity(d, 0)?;
            let Term::Pair(..) = term(d)? else { return Err("subject is not a pair".into()) };
            eq("context", TypingContext::new(), ctx)?;
            eq("type", Assigned::Simple(SimpleType::M), d.assigned())?;
            eq_ix(Counters::new(0, 0, 0, 1), d)
        }
        Rule::Match => {
            arity(d, 3)?;
            let Term::Match(t, p, u) = term(d)? else { return Err("subject is not a matching".into()) };
            premise_subject(d, 0, Subject::Term((**t).clone()))?;
            premise_subject(d, 1, Subject::Pattern(p.clone()))?;
            premise_subject(d, 2, Subject::Term((**u).clone()))?;
            many_premise(d, 2)?;
            let (body, pat, arg) = (&d.premises[0], &d.premises[1], &d.premises[2]);
            eq("pattern context", body.context().restrict(p), pat.context())?;
            eq("argument type", Assigned::Multi(multi(pat)?.clone()), arg.assigned())?;
            eq("type", Assigned::Simple(simple(body)?.clone()), d.assigned())?;
            eq("context", body.context().erase(&p.vars()).meet(arg.context()), ctx)?;
            let (c, q, a) = (counters(body)?, pattern_ix(pat)?, counters(arg)?);
            eq_ix(Counters::new(c.b + a.b, c.e + a.e + q.e, c.m + a.m + q.m, c.f + a.f + q.f), d)
        }
        Rule::PatV => {
            arity(d, 0)?;
            let Pattern::Var(x) = pattern(d)? else { return Err("subject is not a variable".into()) };
            eq("context", TypingContext::singleton(x.clone(), multi(d)?.clone()), ctx)?;
            eq_pix(PatternIndices::new(1, 0, 0), d)
        }
        Rule::PatX => {
            arity(d, 2)?;
            let Pattern::Pair(p, q) = pattern(d)? else { return Err("subject is not a pair pattern".into()) };
            premise_subject(d, 0, Subject::Pattern((**p).clone()))?;
            premise_subject(d, 1, Subject::Pattern((**q).clone()))?;
            if p.vars().iter().any(|x| q.binds(x)) {
                return Err("the two components share a variable".into());
            }
            let (l, r) = (&d.premises[0], &d.premises[1]);
            let product = SimpleType::Product(multi(l)?.clone(), multi(r)?.clone());
            eq("type", Assigned::Multi(MultisetType::single(product)), d.assigned())?;
            eq("context", l.context().meet(r.context()), ctx)?;
            let (a, b) = (pattern_ix(l)?, pattern_ix(r)?);
            eq_pix(PatternIndices::new(a.e + b.e, 1 + a.m + b.m, a.f + b.f), d)
        }
        Rule::PatP => {
            arity(d, 0)?;
            let p @ Pattern::Pair(..) = pattern(d)? else { return Err("subject is not a pair pattern".into()) };
            if let Some(x) = ctx.dom().find(|x| !p.binds(x)) {
                return Err(format!("context mentions {x}, which the pattern does not bind"));
            }
            if !ctx.is_tight() {
                return Err("context is not tight".into());
            }
            eq("type", Assigned::Multi(MultisetType::single(SimpleType::N)), d.assigned())?;
            eq_pix(PatternIndices::new(0, 0, 1), d)
        }
    }
}

/// Validates every node of `d`, indices included, with the pair rule's
/// second index read as `e_t + e_u`.
pub fn check_e(d: &Derivation) -> Result<(), RuleViolation> {
    check_e_with(d, PairReading::Sum)
}

pub fn check_e_with(d: &Derivation, reading: PairReading) -> Result<(), RuleViolation> {
    first_violation(d, &|n| check_node(n, reading))
}

/// Root context and root type are tight.
pub fn is_tight_derivation(d: &Derivation) -> bool {
    d.context().is_tight() && d.assigned().is_tight()
}

// ---------------------------------------------------------------------------
// Canonical forms

fn neutral(t: &Term) -> R<Derivation> {
    match t {
        Term::Var(x) => Ok(transform::ax(SYS, x, SimpleType::N)),
        Term::App(f, a) => transform::app_p(SYS, neutral(f)?, a),
        Term::Match(b, p, a) => blocked(neutral(b)?, p, a),
        _ => Err(ShapeMismatch::new("a pure canonical form", t)),
    }
}

fn blocked(body: Derivation, p: &Pattern, a: &Term) -> R<Derivation> {
    let pat = transform::pat_p(SYS, p, body.context().restrict(p));
    let arg = transform::many(SYS, a.clone(), vec![neutral(a)?])?;
    transform::match_(SYS, body, pat, arg)
}

fn canonical(t: &Term) -> R<Derivation> {
    if is_pure_canonical(t) {
        return neutral(t);
    }
    match t {
        Term::Abs(p, b) => transform::abs_p(SYS, p, canonical(b)?),
        Term::Pair(..) => Ok(transform::pair_p(SYS, t)),
        Term::Match(b, p, a) => blocked(canonical(b)?, p, a),
        _ => Err(ShapeMismatch::new("a canonical form", t)),
    }
}

/// The tight derivation of a canonical form, with indices `(0, 0, 0, |t|)`.
pub fn tight_type_canonical(t: &Term) -> Result<Derivation, NotCanonical> {
    if !is_canonical(t) {
        return Err(NotCanonical(t.clone()));
    }
    Ok(canonical(t).expect("every canonical form has a tight derivation"))
}

// ---------------------------------------------------------------------------
// Substitution, reduction, expansion

pub fn subst_e(phi_t: &Derivation, x: &str, phi_u: &Derivation) -> Result<Derivation, ShapeMismatch> {
    subst_in(SYS, phi_t, x, phi_u)
}

pub fn subst_e_with(
    phi_t: &Derivation,
    x: &str,
    phi_u: &Derivation,
    reading: PairReading,
) -> Result<Derivation, ShapeMismatch> {
    subst_in(System::E(reading), phi_t, x, phi_u)
}

pub fn antisubst_e(
    phi: &Derivation,
    t: &Term,
    x: &str,
    u: &Term,
) -> Result<(Derivation, Derivation, MultisetType), ShapeMismatch> {
    antisubst_in(SYS, phi, t, x, u)
}

pub fn antisubst_e_with(
    phi: &Derivation,
    t: &Term,
    x: &str,
    u: &Term,
    reading: PairReading,
) -> Result<(Derivation, Derivation, MultisetType), ShapeMismatch> {
    antisubst_in(System::E(reading), phi, t, x, u)
}

/// Types the reduct of a head step; the counter of the step's kind drops
/// by one.
pub fn subject_reduce_e(phi: &Derivation, step: &Step) -> Result<Derivation, ShapeMismatch> {
    subject_reduce_e_with(phi, step, PairReading::Sum)
}

pub fn subject_reduce_e_with(phi: &Derivation, step: &Step, reading: PairReading) -> Result<Derivation, ShapeMismatch> {
    if !step.is_head() {
        return Err(ShapeMismatch::new("a head step", format!("a step at {}", step.redex.position)));
    }
    transform::reduce_step(System::E(reading), phi, step)
}

/// Types `step.pre` from a derivation of its reduct; the counter of the
/// step's kind grows by one.
pub fn subject_expand_e(phi_after: &Derivation, step: &Step) -> Result<Derivation, ShapeMismatch> {
    subject_expand_e_with(phi_after, step, PairReading::Sum)
}

pub fn subject_expand_e_with(
    phi_after: &Derivation,
    step: &Step,
    reading: PairReading,
) -> Result<Derivation, ShapeMismatch> {
    transform::expand_step(System::E(reading), phi_after, step)
}

/// Head-normalizes, types the canonical form tightly and expands back
/// along the trace.
pub fn synthesize_tight(t: &Term, max_steps: usize) -> Result<Derivation, SynthesisError> {
    synthesize_tight_traced(t, max_steps, PairReading::Sum).map(|(d, _)| d)
}

pub fn synthesize_tight_traced(
    t: &Term,
    max_steps: usize,
    reading: PairReading,
) -> Result<(Derivation, Trace), SynthesisError> {
    let (trace, _) = head_normalize(t, max_steps)?;
    let mut d = tight_type_canonical(&trace.final_term).map_err(|e| SynthesisError::Clash(e.0))?;
    for step in trace.located_steps().iter().rev() {
        d = transform::expand_step(System::E(reading), &d, step)?;
    }
    Ok((d, trace))
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightReport {
    pub synthesized: Counters,
    pub observed: Counters,
    pub matches: bool,
    pub derivation: Derivation,
}

impl fmt::Display for TightReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SYNTH {} | OBS {} | MATCH {}",
            self.synthesized,
            self.observed,
            if self.matches { "yes" } else { "no" }
        )
    }
}

/// Compares the indices of the synthesized tight derivation with the
/// counters of the head reduction and the size of its result.
pub fn verify_exact(t: &Term, max_steps: usize) -> Result<TightReport, SynthesisError> {
    verify_exact_with(t, max_steps, PairReading::Sum)
}

pub fn verify_exact_with(t: &Term, max_steps: usize, reading: PairReading) -> Result<TightReport, SynthesisError> {
    let (trace, c) = head_normalize(t, max_steps)?;
    let f = canonical_size(&trace.final_term).map_err(|e| SynthesisError::Clash(e.0))?;
    let observed = Counters::new(c.b, c.e, c.m, f);
    let (derivation, _) = synthesize_tight_traced(t, max_steps, reading)?;
    let synthesized = derivation.counters().unwrap_or(Counters::ZERO);
    Ok(TightReport { synthesized, observed, matches: synthesized == observed, derivation })
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("replay mismatch at step {step}: {reason}")]
pub struct ReplayMismatch {
    pub step: usize,
    pub reason: String,
}

/// Reduces `phi` along `trace`, requiring each step to lower exactly its
/// own counter by one and the last derivation to have indices
/// `(0, 0, 0, |final|)`.
pub fn forward_replay_check(phi: &Derivation, trace: &Trace) -> Result<(), ReplayMismatch> {
    forward_replay_check_with(phi, trace, PairReading::Sum)
}

pub fn forward_replay_check_with(phi: &Derivation, trace: &Trace, reading: PairReading) -> Result<(), ReplayMismatch> {
    let fail = |step: usize, reason: String| ReplayMismatch { step, reason };
    let mut d = phi.clone();
    let mut c = d.counters().ok_or_else(|| fail(0, "derivation carries no indices".into()))?;
    let steps = trace.located_steps();
    for (i, step) in steps.iter().enumerate() {
        let next = subject_reduce_e_with(&d, step, reading).map_err(|e| fail(i, e.to_string()))?;
        check_e_with(&next, reading).map_err(|e| fail(i, e.to_string()))?;
        if next.context() != d.context() || next.assigned() != d.assigned() {
            return Err(fail(i, "context or type changed".into()));
        }
        let mut expected = c;
        let slot = match step.redex.kind {
            crate::reduction::StepKind::B => &mut expected.b,
            crate::reduction::StepKind::E => &mut expected.e,
            crate::reduction::StepKind::M => &mut expected.m,
        };
        *slot = slot.checked_sub(1).ok_or_else(|| fail(i, format!("{} counter already zero", step.redex.kind)))?;
        let got = next.counters().unwrap_or(Counters::ZERO);
        if got != expected {
            return Err(fail(i, format!("expected indices {expected}, found {got}")));
        }
        c = got;
        d = next;
    }
    let size = canonical_size(&trace.final_term).map_err(|e| fail(steps.len(), e.to_string()))?;
    if c != Counters::new(0, 0, 0, size) {
        return Err(fail(steps.len(), format!("final indices {c}, expected 0 0 0 {size}")));
    }
    Ok(())
}

/// For every term node whose subject is neutral and whose context is
/// tight, the type is tight and the rule is none of app, abs, abs_p, pair,
/// pair_p.
pub fn tight_spreading_holds(d: &Derivation) -> bool {
    d.nodes().into_iter().all(|(_, n)| {
        if n.rule == Rule::Many || !n.term().is_some_and(is_pure_canonical) || !n.context().is_tight() {
            return true;
        }
        n.assigned().is_tight() && !matches!(n.rule, Rule::App | Rule::Abs | Rule::AbsP | Rule::Pair | Rule::PairP)
    })
}

/// For every tight term node, `b = e = m = 0` exactly when its subject is
/// a canonical form.
pub fn minimal_counters_hold(d: &Derivation) -> bool {
    d.nodes().into_iter().all(|(_, n)| {
        if n.rule == Rule::Many || n.term().is_none() || !is_tight_derivation(n) {
            return true;
        }
        let c = n.counters().unwrap_or(Counters::ZERO);
        (c.b == 0 && c.e == 0 && c.m == 0) == n.term().is_some_and(is_canonical)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn tight_variable() {
        let d = tight_type_canonical(&t("x")).unwrap();
        assert_eq!(d.context().to_string(), "{x:[*N]}");
        assert_eq!(d.counters(), Some(Counters::ZERO));
        check_e(&d).unwrap();
    }

    #[test]
    fn tight_pair() {
        let d = tight_type_canonical(&t("<u, v>")).unwrap();
        assert!(d.context().is_empty());
        assert_eq!(d.counters(), Some(Counters::new(0, 0, 0, 1)));
        assert_eq!(d.assigned().to_string(), "*M");
    }

    #[test]
    fn tight_abstraction() {
        let d = tight_type_canonical(&t("\\y1.w")).unwrap();
        check_e(&d).unwrap();
        assert_eq!(d.context().to_string(), "{w:[*N]}");
        assert_eq!(d.counters(), Some(Counters::new(0, 0, 0, 1)));
    }

    #[test]
    fn pair_p_with_wrong_size_is_rejected() {
        let mut d = tight_type_canonical(&t("<u, v>")).unwrap();
        d.conclusion.indices = Some(crate::derivation::Indices::Term(Counters::new(0, 0, 0, 2)));
        assert!(check_e(&d).is_err());
    }

    #[test]
    fn arrow_root_is_not_tight() {
        let d = synthesize_tight(&t("x"), 1).unwrap();
        assert!(is_tight_derivation(&d));
        let lam =
            transform::abs(SYS, d, transform::pat_v(SYS, &"x".into(), MultisetType::single(SimpleType::N))).unwrap();
        assert!(!is_tight_derivation(&lam));
    }

    #[test]
    fn identity_counts() {
        let r = verify_exact(&t("(\\z.z) x"), 10).unwrap();
        assert_eq!(r.to_string(), "SYNTH 1 1 0 0 | OBS 1 1 0 0 | MATCH yes");
        check_e(&r.derivation).unwrap();
    }
}
