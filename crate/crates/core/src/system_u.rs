//! The non-idempotent intersection type system U, whose derivation sizes
//! bound the length of head reduction.

use crate::derivation::{
    first_violation, Derivation, Rule, RuleViolation, ShapeMismatch, Subject, SynthesisError, System,
};
use crate::reduction::{
    freshen_for_subst, head_normalize, is_canonical, is_pure_canonical, naive_subst, NotCanonical, Step, Trace,
};
use crate::syntax::{alpha_eq, Name, Pattern, Term};
use crate::transform::{self, R};
use crate::types::{Assigned, Base, MultisetType, SimpleType, TypingContext};

const SYS: System = System::U;

// ---------------------------------------------------------------------------
// Checking

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
    if d.premises.len() == n {
        Ok(())
    } else {
        Err(format!("expected {n} premises, found {}", d.premises.len()))
    }
}

fn same<T: PartialEq + std::fmt::Display>(what: &str, expected: &T, actual: &T) -> Result<(), String> {
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{what}: expected {expected}, found {actual}"))
    }
}

fn is_many(d: &Derivation, role: &str) -> Result<(), String> {
    if d.rule == Rule::Many {
        Ok(())
    } else {
        Err(format!("{role} must be a many node, found {}", d.rule))
    }
}

fn check_node(d: &Derivation) -> Result<(), String> {
    if d.conclusion.indices.is_some() {
        return Err("judgments of this system carry no indices".into());
    }
    let refined = |b: Base| b != Base::Star;
    if d.context().any_base(&refined) || d.assigned().any_base(&refined) {
        return Err("refined base types belong to the tight system".into());
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
            let s = simple(d)?;
            same("context", &TypingContext::singleton(x.clone(), MultisetType::single(s.clone())), ctx)
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
            same("type", &Assigned::Multi(MultisetType::new(types)), d.assigned())?;
            let meet = d.premises.iter().fold(TypingContext::new(), |g, p| g.meet(p.context()));
            same("context", &meet, ctx)
        }
        Rule::Abs => {
            arity(d, 2)?;
            let Term::Abs(p, t) = term(d)? else { return Err("subject is not an abstraction".into()) };
            let (body, pat) = (&d.premises[0], &d.premises[1]);
            same("body", &Subject::Term((**t).clone()), &body.conclusion.subject)?;
            same("pattern", &Subject::Pattern(p.clone()), &pat.conclusion.subject)?;
            same("pattern context", &body.context().restrict(p), pat.context())?;
            let expected = SimpleType::arrow(multi(pat)?.clone(), simple(body)?.clone());
            same("type", &Assigned::Simple(expected), d.assigned())?;
            same("context", &body.context().erase(&p.vars()), ctx)
        }
        Rule::App => {
            arity(d, 2)?;
            let Term::App(f, a) = term(d)? else { return Err("subject is not an application".into()) };
            let (fun, arg) = (&d.premises[0], &d.premises[1]);
            same("function", &Subject::Term((**f).clone()), &fun.conclusion.subject)?;
            same("argument", &Subject::Term((**a).clone()), &arg.conclusion.subject)?;
            is_many(arg, "the argument premise")?;
            let SimpleType::Arrow(dom, cod) = simple(fun)? else {
                return Err(format!("function typed {}, not an arrow", fun.assigned()));
            };
            same("argument type", &Assigned::Multi(dom.clone()), arg.assigned())?;
            same("type", &Assigned::Simple((**cod).clone()), d.assigned())?;
            same("context", &fun.context().meet(arg.context()), ctx)
        }
        Rule::Pair => {
            arity(d, 2)?;
            let Term::Pair(a, b) = term(d)? else { return Err("subject is not a pair".into()) };
            let (l, r) = (&d.premises[0], &d.premises[1]);
            same("left component", &Subject::Term((**a).clone()), &l.conclusion.subject)?;
            same("right component", &Subject::Term((**b).clone()), &r.conclusion.subject)?;
            is_many(l, "the left premise")?;
            is_many(r, "the right premise")?;
            let expected = SimpleType::Product(multi(l)?.clone(), multi(r)?.clone());
            same("type", &Assigned::Simple(expected), d.assigned())?;
            same("context", &l.context().meet(r.context()), ctx)
        }
        Rule::Match => {
            arity(d, 3)?;
            let Term::Match(t, p, u) = term(d)? else { return Err("subject is not a matching".into()) };
            let (body, pat, arg) = (&d.premises[0], &d.premises[1], &d.premises[2]);
            same("body", &Subject::Term((**t).clone()), &body.conclusion.subject)?;
            same("pattern", &Subject::Pattern(p.clone()), &pat.conclusion.subject)?;
            same("argument", &Subject::Term((**u).clone()), &arg.conclusion.subject)?;
            is_many(arg, "the argument premise")?;
            same("pattern context", &body.context().restrict(p), pat.context())?;
            same("argument type", &Assigned::Multi(multi(pat)?.clone()), arg.assigned())?;
            same("type", &Assigned::Simple(simple(body)?.clone()), d.assigned())?;
            same("context", &body.context().erase(&p.vars()).meet(arg.context()), ctx)
        }
        Rule::PatV => {
            arity(d, 0)?;
            let Pattern::Var(x) = pattern(d)? else { return Err("subject is not a variable".into()) };
            same("context", &TypingContext::singleton(x.clone(), multi(d)?.clone()), ctx)
        }
        Rule::PatX => {
            arity(d, 2)?;
            let Pattern::Pair(p, q) = pattern(d)? else { return Err("subject is not a pair pattern".into()) };
            let (l, r) = (&d.premises[0], &d.premises[1]);
            same("left pattern", &Subject::Pattern((**p).clone()), &l.conclusion.subject)?;
            same("right pattern", &Subject::Pattern((**q).clone()), &r.conclusion.subject)?;
            if p.vars().iter().any(|x| q.binds(x)) {
                return Err("the two components share a variable".into());
            }
            let product = SimpleType::Product(multi(l)?.clone(), multi(r)?.clone());
            same("type", &Assigned::Multi(MultisetType::single(product)), d.assigned())?;
            same("context", &l.context().meet(r.context()), ctx)
        }
        Rule::AbsP | Rule::AppP | Rule::PairP | Rule::PatP => Err("rule belongs to the tight system only".into()),
    }
}

/// Validates every node of `d` against the rules of System U.
pub fn check_u(d: &Derivation) -> Result<(), RuleViolation> {
    first_violation(d, &check_node)
}

// ---------------------------------------------------------------------------
// Substitution

/// `phi_t ▷ Γ; x:A ⊢ t:σ` and `phi_u ▷ Δ ⊢ u:A` (a many node) give
/// `Γ ∧ Δ ⊢ t{x:=u} : σ`.
pub fn subst_u(phi_t: &Derivation, x: &str, phi_u: &Derivation) -> Result<Derivation, ShapeMismatch> {
    subst_in(SYS, phi_t, x, phi_u)
}

/// Splits a derivation of `t{x:=u}` into one of `t` with `x:A` and a many
/// node typing `u` at `A`.
pub fn antisubst_u(
    phi: &Derivation,
    t: &Term,
    x: &str,
    u: &Term,
) -> Result<(Derivation, Derivation, MultisetType), ShapeMismatch> {
    antisubst_in(SYS, phi, t, x, u)
}

pub(crate) fn antisubst_in(
    sys: System,
    phi: &Derivation,
    t: &Term,
    x: &str,
    u: &Term,
) -> Result<(Derivation, Derivation, MultisetType), ShapeMismatch> {
    let prepared = freshen_for_subst(t, x, u);
    let aligned = transform::realign_checked(sys, phi, &naive_subst(&prepared, x, u))?;
    let (phi_t, pool) = transform::antisubst_rec(sys, &aligned, &prepared, &Name::from(x))?;
    let phi_t = transform::realign(sys, &phi_t, t)?;
    let phi_u = transform::many(sys, u.clone(), pool)?;
    let a = phi_u.assigned().as_multi().cloned().unwrap_or_default();
    Ok((phi_t, phi_u, a))
}

pub(crate) fn subst_in(
    sys: System,
    phi_t: &Derivation,
    x: &str,
    phi_u: &Derivation,
) -> Result<Derivation, ShapeMismatch> {
    let t = phi_t.term().ok_or_else(|| ShapeMismatch::new("a term judgment", &phi_t.conclusion.subject))?;
    let u = phi_u.term().ok_or_else(|| ShapeMismatch::new("a term judgment", &phi_u.conclusion.subject))?;
    let prepared = transform::realign(sys, phi_t, &freshen_for_subst(t, x, u))?;
    transform::subst_naive(sys, &prepared, x, phi_u)
}

// ---------------------------------------------------------------------------
// Subject reduction and expansion

/// Types the reduct of `step`. Without `full` the step must be the head
/// step of its source.
pub fn subject_reduce_u(phi: &Derivation, step: &Step, full: bool) -> Result<Derivation, ShapeMismatch> {
    if !full && !step.is_head() {
        return Err(ShapeMismatch::new("a head step", format!("a step at {}", step.redex.position)));
    }
    transform::reduce_step(SYS, phi, step)
}

/// Types `step.pre` from a derivation of its reduct.
pub fn subject_expand_u(phi_after: &Derivation, step: &Step) -> Result<Derivation, ShapeMismatch> {
    transform::expand_step(SYS, phi_after, step)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Moves a judgment across one step of the full relation, in either
/// direction, keeping its context and type.
pub fn transport_judgment(
    phi: &Derivation,
    t_from: &Term,
    t_to: &Term,
    step: &Step,
    direction: Direction,
) -> Result<Derivation, ShapeMismatch> {
    let post = step.post().ok_or_else(|| ShapeMismatch::new("a contractible step", &step.pre))?;
    let (src, dst) = match direction {
        Direction::Forward => (&step.pre, &post),
        Direction::Backward => (&post, &step.pre),
    };
    if !alpha_eq(src, t_from) {
        return Err(ShapeMismatch::new(src, t_from));
    }
    if !alpha_eq(dst, t_to) {
        return Err(ShapeMismatch::new(dst, t_to));
    }
    let moved = match direction {
        Direction::Forward => subject_reduce_u(phi, step, true)?,
        Direction::Backward => subject_expand_u(phi, step)?,
    };
    if moved.context() != phi.context() || moved.assigned() != phi.assigned() {
        return Err(ShapeMismatch::new(
            format!("{} ⊢ {}", phi.context(), phi.assigned()),
            format!("{} ⊢ {}", moved.context(), moved.assigned()),
        ));
    }
    transform::realign(SYS, &moved, t_to)
}

// ---------------------------------------------------------------------------
// Canonical forms and synthesis

fn neutral(t: &Term, s: SimpleType) -> R<Derivation> {
    match t {
        Term::Var(x) => Ok(transform::ax(SYS, x, s)),
        Term::App(f, v) => {
            let fun = neutral(f, SimpleType::arrow(MultisetType::empty(), s))?;
            transform::app(SYS, fun, transform::many(SYS, (**v).clone(), vec![])?)
        }
        Term::Match(b, p, a) => {
            let body = neutral(b, s)?;
            blocked(body, p, a)
        }
        _ => Err(ShapeMismatch::new("a pure canonical form", t)),
    }
}

/// Closes `body[p/a]` with `p` typed from the body's uses and `a` neutral at
/// the single product the pattern asks for.
fn blocked(body: Derivation, p: &Pattern, a: &Term) -> R<Derivation> {
    let pat = transform::pattern_from_context(SYS, p, &body.context().restrict(p))?;
    let demanded = pat.assigned().as_multi().map(|m| m.elems().to_vec()).unwrap_or_default();
    let arg = demanded.into_iter().map(|s| neutral(a, s)).collect::<R<Vec<_>>>()?;
    transform::match_(SYS, body, pat, transform::many(SYS, a.clone(), arg)?)
}

fn canonical(t: &Term) -> R<Derivation> {
    if is_pure_canonical(t) {
        return neutral(t, SimpleType::STAR);
    }
    match t {
        Term::Abs(p, b) => {
            let body = canonical(b)?;
            let pat = transform::pattern_from_context(SYS, p, &body.context().restrict(p))?;
            transform::abs(SYS, body, pat)
        }
        Term::Pair(a, b) => transform::pair(
            SYS,
            transform::many(SYS, (**a).clone(), vec![])?,
            transform::many(SYS, (**b).clone(), vec![])?,
        ),
        Term::Match(b, p, a) => blocked(canonical(b)?, p, a),
        _ => Err(ShapeMismatch::new("a canonical form", t)),
    }
}

/// A derivation of a canonical form with the head variable at `•`, unused
/// arguments at `[]` and pairs at `[] × []`.
pub fn type_canonical_u(t: &Term) -> Result<Derivation, NotCanonical> {
    if !is_canonical(t) {
        return Err(NotCanonical(t.clone()));
    }
    Ok(canonical(t).expect("every canonical form has a minimal derivation"))
}

/// Head-normalizes `t`, types the result and expands back along the trace.
pub fn synthesize_u_traced(t: &Term, max_steps: usize) -> Result<(Derivation, Trace), SynthesisError> {
    let (trace, _) = head_normalize(t, max_steps)?;
    let mut d = type_canonical_u(&trace.final_term).map_err(|e| SynthesisError::Clash(e.0))?;
    for step in trace.located_steps().iter().rev() {
        d = subject_expand_u(&d, step)?;
    }
    Ok((d, trace))
}

pub fn synthesize_u(t: &Term, max_steps: usize) -> Result<Derivation, SynthesisError> {
    synthesize_u_traced(t, max_steps).map(|(d, _)| d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::deriv_size;
    use crate::reduction::Redex;
    use crate::syntax::{parse, Position};
    use crate::types::parse_simple_type;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn canonical_variable() {
        let d = type_canonical_u(&t("x")).unwrap();
        assert_eq!(d.rule, Rule::Ax);
        assert_eq!(d.context().to_string(), "{x:[*]}");
        assert!(check_u(&d).is_ok());
    }

    #[test]
    fn canonical_application_to_a_diverging_argument() {
        let d = type_canonical_u(&t("x ((\\z.z z) (\\z.z z))")).unwrap();
        check_u(&d).unwrap();
        assert_eq!(d.premises[0].assigned().to_string(), "[] -> *");
        assert_eq!(d.premises[1].premises.len(), 0);
    }

    #[test]
    fn canonical_abstraction_over_a_pair_pattern() {
        let d = type_canonical_u(&t("\\<x, y>.x")).unwrap();
        check_u(&d).unwrap();
        assert_eq!(d.premises[1].assigned().to_string(), "[[*] x []]");
        assert_eq!(d.assigned(), &Assigned::Simple(parse_simple_type("[[*] x []] -> *").unwrap()));
    }

    #[test]
    fn pair_at_empty_product() {
        let d = type_canonical_u(&t("<a, b>")).unwrap();
        check_u(&d).unwrap();
        assert_eq!(d.assigned().to_string(), "[] x []");
    }

    #[test]
    fn pair_pattern_at_two_products_is_rejected() {
        let mut d = type_canonical_u(&t("\\<x, y>.x")).unwrap();
        let pat = &mut d.premises[1];
        let two =
            MultisetType::new(vec![parse_simple_type("[*] x []").unwrap(), parse_simple_type("[*] x []").unwrap()]);
        pat.conclusion.assigned = Assigned::Multi(two.clone());
        d.conclusion.assigned = Assigned::Simple(SimpleType::arrow(two, SimpleType::STAR));
        let err = check_u(&d).unwrap_err();
        assert_eq!(err.path, vec![1]);
    }

    #[test]
    fn identity_application_grows_by_its_steps() {
        let d = synthesize_u(&t("(\\z.z) x"), 100).unwrap();
        check_u(&d).unwrap();
        assert!(deriv_size(&d) >= 2);
    }

    #[test]
    fn omega_does_not_synthesize() {
        let err = synthesize_u(&t("(\\z.z z) (\\z.z z)"), 50).unwrap_err();
        assert!(matches!(err, SynthesisError::NotHeadNormalizing(_)));
    }

    #[test]
    fn b_step_size_drops_by_one() {
        let d = synthesize_u(&t("(\\z.z) x"), 100).unwrap();
        let step = Step::head(&t("(\\z.z) x")).unwrap();
        let r = subject_reduce_u(&d, &step, false).unwrap();
        check_u(&r).unwrap();
        assert_eq!(deriv_size(&d), deriv_size(&r) + 1);
    }

    #[test]
    fn unused_argument_step_keeps_size() {
        let pre = t("x ((\\z.z) y)");
        let d = type_canonical_u(&pre).unwrap();
        let step = Step {
            pre: pre.clone(),
            redex: Redex { position: Position(vec![1]), kind: crate::reduction::StepKind::B },
        };
        let r = subject_reduce_u(&d, &step, true).unwrap();
        check_u(&r).unwrap();
        assert_eq!(r.term().unwrap(), &t("x (z[z/y])"));
        assert_eq!(deriv_size(&d), deriv_size(&r));
        assert!(subject_reduce_u(&d, &step, false).is_err());
    }

    #[test]
    fn substitution_on_a_variable() {
        let phi_t = type_canonical_u(&t("x")).unwrap();
        let y = type_canonical_u(&t("y")).unwrap();
        let phi_u = transform::many(SYS, t("y"), vec![y]).unwrap();
        let r = subst_u(&phi_t, "x", &phi_u).unwrap();
        check_u(&r).unwrap();
        assert_eq!(deriv_size(&r), 1 + deriv_size(&phi_u) - 1);
    }

    #[test]
    fn antisubstitution_of_a_variable() {
        let phi = type_canonical_u(&t("y z")).unwrap();
        let (phi_t, phi_u, a) = antisubst_u(&phi, &t("x"), "x", &t("y z")).unwrap();
        assert_eq!(phi_t.rule, Rule::Ax);
        assert_eq!(a.len(), 1);
        assert_eq!(phi_u.premises.len(), 1);
        let back = subst_u(&phi_t, "x", &phi_u).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn transport_keeps_the_judgment() {
        let pre = t("(\\x.x) y");
        let post = t("x[x/y]");
        let step = Step::head(&pre).unwrap();
        let d = synthesize_u(&pre, 10).unwrap();
        let fwd = transport_judgment(&d, &pre, &post, &step, Direction::Forward).unwrap();
        assert_eq!(fwd.term().unwrap(), &post);
        let back = transport_judgment(&fwd, &post, &pre, &step, Direction::Backward).unwrap();
        assert_eq!((back.context(), back.assigned()), (d.context(), d.assigned()));
    }
}
