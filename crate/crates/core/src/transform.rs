//! Derivation transformers shared by both systems: node builders that
//! recompute conclusions from premises, alpha realignment, substitution and
//! anti-substitution on derivations, and subject reduction/expansion for a
//! single located step.
//!
//! Every transformer works on exact subjects. Callers realign a derivation
//! to the precise term a step talks about before touching it, and the
//! reduction side uses the same prepare/rewrite split as the reducer, so
//! subjects produced here coincide with the reducer's terms verbatim.

use crate::derivation::{
    Derivation, Indices, Judgment, PairReading, PatternIndices, Rule, ShapeMismatch, Subject, System,
};
use crate::reduction::{
    decompose_list_context, naive_subst, prepare_redex, rewrite_redex, root_kind, Counters, Step, StepKind,
};
use crate::syntax::{alpha_eq, Name, Pattern, Position, Term};
use crate::types::{context_meet, Assigned, MultisetType, SimpleType, TypingContext};

pub(crate) type R<T> = Result<T, ShapeMismatch>;

fn ix(d: &Derivation) -> Counters {
    d.counters().unwrap_or(Counters::ZERO)
}

fn pix(d: &Derivation) -> PatternIndices {
    d.pattern_indices().unwrap_or_default()
}

fn term_of(d: &Derivation) -> R<&Term> {
    d.term().ok_or_else(|| ShapeMismatch::new("a term judgment", &d.conclusion.subject))
}

fn pattern_of(d: &Derivation) -> R<&Pattern> {
    d.pattern().ok_or_else(|| ShapeMismatch::new("a pattern judgment", &d.conclusion.subject))
}

fn simple_of(d: &Derivation) -> R<&SimpleType> {
    d.assigned().as_simple().ok_or_else(|| ShapeMismatch::new("a simple type", d.assigned()))
}

fn multi_of(d: &Derivation) -> R<&MultisetType> {
    d.assigned().as_multi().ok_or_else(|| ShapeMismatch::new("a multiset type", d.assigned()))
}

fn premise(d: &Derivation, i: usize) -> R<&Derivation> {
    d.premises.get(i).ok_or_else(|| {
        ShapeMismatch::new(format!("premise {i} of {}", d.rule), format!("{} premises", d.premises.len()))
    })
}

fn expect_rule(d: &Derivation, rule: Rule) -> R<()> {
    if d.rule == rule {
        Ok(())
    } else {
        Err(ShapeMismatch::new(format!("rule {rule}"), format!("rule {} for {}", d.rule, d.conclusion.subject)))
    }
}

fn node(
    rule: Rule,
    context: TypingContext,
    subject: Subject,
    assigned: Assigned,
    indices: Option<Indices>,
    premises: Vec<Derivation>,
) -> Derivation {
    Derivation { rule, conclusion: Judgment { context, subject, assigned, indices }, premises }
}

// ---------------------------------------------------------------------------
// Builders

pub(crate) fn ax(sys: System, x: &Name, s: SimpleType) -> Derivation {
    node(
        Rule::Ax,
        TypingContext::singleton(x.clone(), MultisetType::single(s.clone())),
        Subject::Term(Term::Var(x.clone())),
        Assigned::Simple(s),
        sys.term_indices(Counters::ZERO),
        vec![],
    )
}

pub(crate) fn many(sys: System, t: Term, premises: Vec<Derivation>) -> R<Derivation> {
    let mut types = Vec::with_capacity(premises.len());
    let mut sum = Counters::ZERO;
    for (i, p) in premises.iter().enumerate() {
        if term_of(p).map_err(|e| e.within(i))? != &t {
            return Err(ShapeMismatch::new(&t, &p.conclusion.subject).within(i));
        }
        types.push(simple_of(p).map_err(|e| e.within(i))?.clone());
        sum = sum + ix(p);
    }
    let context = context_meet(premises.iter().map(|p| p.context()));
    Ok(node(
        Rule::Many,
        context,
        Subject::Term(t),
        Assigned::Multi(MultisetType::new(types)),
        sys.term_indices(sum),
        premises,
    ))
}

pub(crate) fn abs(sys: System, body: Derivation, pat: Derivation) -> R<Derivation> {
    let p = pattern_of(&pat).map_err(|e| e.within(1))?.clone();
    let a = multi_of(&pat).map_err(|e| e.within(1))?.clone();
    let s = simple_of(&body).map_err(|e| e.within(0))?.clone();
    let t = Term::abs(p.clone(), term_of(&body)?.clone());
    let (c, q) = (ix(&body), pix(&pat));
    let indices = sys.term_indices(Counters::new(c.b + 1, c.e + q.e, c.m + q.m, c.f + q.f));
    let context = body.context().erase(&p.vars());
    Ok(node(Rule::Abs, context, Subject::Term(t), Assigned::Simple(SimpleType::arrow(a, s)), indices, vec![body, pat]))
}

pub(crate) fn abs_p(sys: System, p: &Pattern, body: Derivation) -> R<Derivation> {
    let t = Term::abs(p.clone(), term_of(&body).map_err(|e| e.within(0))?.clone());
    let c = ix(&body);
    let indices = sys.term_indices(Counters::new(c.b, c.e, c.m, c.f + 1));
    let context = body.context().erase(&p.vars());
    Ok(node(Rule::AbsP, context, Subject::Term(t), Assigned::Simple(SimpleType::M), indices, vec![body]))
}

pub(crate) fn app(sys: System, fun: Derivation, arg: Derivation) -> R<Derivation> {
    let cod = match simple_of(&fun).map_err(|e| e.within(0))? {
        SimpleType::Arrow(_, cod) => (**cod).clone(),
        other => return Err(ShapeMismatch::new("an arrow type", other).within(0)),
    };
    multi_of(&arg).map_err(|e| e.within(1))?;
    let t = Term::app(term_of(&fun)?.clone(), term_of(&arg)?.clone());
    let indices = sys.term_indices(ix(&fun) + ix(&arg));
    let context = fun.context().meet(arg.context());
    Ok(node(Rule::App, context, Subject::Term(t), Assigned::Simple(cod), indices, vec![fun, arg]))
}

pub(crate) fn app_p(sys: System, fun: Derivation, arg: &Term) -> R<Derivation> {
    let t = Term::app(term_of(&fun).map_err(|e| e.within(0))?.clone(), arg.clone());
    let c = ix(&fun);
    let indices = sys.term_indices(Counters::new(c.b, c.e, c.m, c.f + 1));
    let context = fun.context().clone();
    Ok(node(Rule::AppP, context, Subject::Term(t), Assigned::Simple(SimpleType::N), indices, vec![fun]))
}

pub(crate) fn pair(sys: System, left: Derivation, right: Derivation) -> R<Derivation> {
    let a = multi_of(&left).map_err(|e| e.within(0))?.clone();
    let b = multi_of(&right).map_err(|e| e.within(1))?.clone();
    let t = Term::pair(term_of(&left)?.clone(), term_of(&right)?.clone());
    let (l, r) = (ix(&left), ix(&right));
    let e_right = match sys {
        System::E(PairReading::Crossed) => r.b,
        _ => r.e,
    };
    let indices = sys.term_indices(Counters::new(l.b + r.b, l.e + e_right, l.m + r.m, l.f + r.f));
    let context = left.context().meet(right.context());
    Ok(node(
        Rule::Pair,
        context,
        Subject::Term(t),
        Assigned::Simple(SimpleType::Product(a, b)),
        indices,
        vec![left, right],
    ))
}

pub(crate) fn pair_p(sys: System, t: &Term) -> Derivation {
    node(
        Rule::PairP,
        TypingContext::new(),
        Subject::Term(t.clone()),
        Assigned::Simple(SimpleType::M),
        sys.term_indices(Counters::new(0, 0, 0, 1)),
        vec![],
    )
}

pub(crate) fn match_(sys: System, body: Derivation, pat: Derivation, arg: Derivation) -> R<Derivation> {
    let s = simple_of(&body).map_err(|e| e.within(0))?.clone();
    let p = pattern_of(&pat).map_err(|e| e.within(1))?.clone();
    multi_of(&arg).map_err(|e| e.within(2))?;
    let t = Term::matching(term_of(&body)?.clone(), p.clone(), term_of(&arg).map_err(|e| e.within(2))?.clone());
    let (c, q, u) = (ix(&body), pix(&pat), ix(&arg));
    let indices = sys.term_indices(Counters::new(c.b + u.b, c.e + u.e + q.e, c.m + u.m + q.m, c.f + u.f + q.f));
    let context = body.context().erase(&p.vars()).meet(arg.context());
    Ok(node(Rule::Match, context, Subject::Term(t), Assigned::Simple(s), indices, vec![body, pat, arg]))
}

pub(crate) fn pat_v(sys: System, x: &Name, a: MultisetType) -> Derivation {
    node(
        Rule::PatV,
        TypingContext::singleton(x.clone(), a.clone()),
        Subject::Pattern(Pattern::Var(x.clone())),
        Assigned::Multi(a),
        sys.pattern_indices(PatternIndices::new(1, 0, 0)),
        vec![],
    )
}

pub(crate) fn pat_x(sys: System, left: Derivation, right: Derivation) -> R<Derivation> {
    let a = multi_of(&left).map_err(|e| e.within(0))?.clone();
    let b = multi_of(&right).map_err(|e| e.within(1))?.clone();
    let p = Pattern::pair(pattern_of(&left)?.clone(), pattern_of(&right)?.clone());
    let (l, r) = (pix(&left), pix(&right));
    let indices = sys.pattern_indices(PatternIndices::new(l.e + r.e, 1 + l.m + r.m, l.f + r.f));
    let context = left.context().meet(right.context());
    let assigned = Assigned::Multi(MultisetType::single(SimpleType::Product(a, b)));
    Ok(node(Rule::PatX, context, Subject::Pattern(p), assigned, indices, vec![left, right]))
}

pub(crate) fn pat_p(sys: System, p: &Pattern, context: TypingContext) -> Derivation {
    node(
        Rule::PatP,
        context,
        Subject::Pattern(p.clone()),
        Assigned::Multi(MultisetType::single(SimpleType::N)),
        sys.pattern_indices(PatternIndices::new(0, 0, 1)),
        vec![],
    )
}

/// Types a pattern from the context its body produced: variables by
/// `pat_v` at their multiset, pairs by `pat_x`.
pub(crate) fn pattern_from_context(sys: System, p: &Pattern, g: &TypingContext) -> R<Derivation> {
    match p {
        Pattern::Var(x) => Ok(pat_v(sys, x, g.get(x))),
        Pattern::Pair(l, r) => pat_x(sys, pattern_from_context(sys, l, g)?, pattern_from_context(sys, r, g)?),
    }
}

/// Recomputes the conclusion of `old`'s rule over new premises. Data that
/// the premises do not determine (axiom types, untyped arguments, pattern
/// contexts) comes from `old` and from `subject`, and the derived subject
/// must agree with `subject`.
pub(crate) fn rebuild(sys: System, old: &Derivation, prems: Vec<Derivation>, subject: &Subject) -> R<Derivation> {
    let mut it = prems.into_iter();
    let mut next = |i: usize| {
        it.next().ok_or_else(|| ShapeMismatch::new(format!("premise {i} of {}", old.rule), "too few premises"))
    };
    let term = || match subject {
        Subject::Term(t) => Ok(t),
        Subject::Pattern(p) => Err(ShapeMismatch::new("a term", p)),
    };
    let built = match old.rule {
        Rule::Ax => match term()? {
            Term::Var(x) => ax(sys, x, simple_of(old)?.clone()),
            t => return Err(ShapeMismatch::new("a variable", t)),
        },
        Rule::Many => many(sys, term()?.clone(), it.collect())?,
        Rule::Abs => abs(sys, next(0)?, next(1)?)?,
        Rule::AbsP => match term()? {
            Term::Abs(p, _) => abs_p(sys, p, next(0)?)?,
            t => return Err(ShapeMismatch::new("an abstraction", t)),
        },
        Rule::App => app(sys, next(0)?, next(1)?)?,
        Rule::AppP => match term()? {
            Term::App(_, a) => app_p(sys, next(0)?, a)?,
            t => return Err(ShapeMismatch::new("an application", t)),
        },
        Rule::Pair => pair(sys, next(0)?, next(1)?)?,
        Rule::PairP => pair_p(sys, term()?),
        Rule::Match => match_(sys, next(0)?, next(1)?, next(2)?)?,
        Rule::PatV => match subject {
            Subject::Pattern(Pattern::Var(x)) => pat_v(sys, x, multi_of(old)?.clone()),
            s => return Err(ShapeMismatch::new("a variable pattern", s)),
        },
        Rule::PatX => pat_x(sys, next(0)?, next(1)?)?,
        Rule::PatP => match subject {
            Subject::Pattern(p) => pat_p(sys, p, old.context().clone()),
            s => return Err(ShapeMismatch::new("a pattern", s)),
        },
    };
    if &built.conclusion.subject != subject {
        return Err(ShapeMismatch::new(subject, &built.conclusion.subject));
    }
    Ok(built)
}

// ---------------------------------------------------------------------------
// Alpha realignment

/// Rebuilds `d` over `target`, an alpha-variant of its subject, so that every
/// node's subject is the corresponding subterm of `target` verbatim.
pub(crate) fn realign(sys: System, d: &Derivation, target: &Term) -> R<Derivation> {
    let rec = |i: usize, t: &Term| realign(sys, premise(d, i)?, t).map_err(|e| e.within(i));
    let recp = |i: usize, p: &Pattern| realign_pattern(sys, premise(d, i)?, p).map_err(|e| e.within(i));
    match (d.rule, target) {
        (Rule::Many, _) => {
            let prems = d
                .premises
                .iter()
                .enumerate()
                .map(|(i, p)| realign(sys, p, target).map_err(|e| e.within(i)))
                .collect::<R<Vec<_>>>()?;
            many(sys, target.clone(), prems)
        }
        (Rule::Ax, Term::Var(x)) => Ok(ax(sys, x, simple_of(d)?.clone())),
        (Rule::Abs, Term::Abs(p, b)) => abs(sys, rec(0, b)?, recp(1, p)?),
        (Rule::AbsP, Term::Abs(p, b)) => abs_p(sys, p, rec(0, b)?),
        (Rule::App, Term::App(f, a)) => app(sys, rec(0, f)?, rec(1, a)?),
        (Rule::AppP, Term::App(f, a)) => app_p(sys, rec(0, f)?, a),
        (Rule::Pair, Term::Pair(a, b)) => pair(sys, rec(0, a)?, rec(1, b)?),
        (Rule::PairP, Term::Pair(..)) => Ok(pair_p(sys, target)),
        (Rule::Match, Term::Match(b, p, a)) => match_(sys, rec(0, b)?, recp(1, p)?, rec(2, a)?),
        _ => Err(ShapeMismatch::new(target, &d.conclusion.subject)),
    }
}

fn realign_pattern(sys: System, d: &Derivation, target: &Pattern) -> R<Derivation> {
    let old = pattern_of(d)?;
    if !old.same_shape(target) {
        return Err(ShapeMismatch::new(target, old));
    }
    match (d.rule, target) {
        (Rule::PatV, Pattern::Var(x)) => Ok(pat_v(sys, x, multi_of(d)?.clone())),
        (Rule::PatX, Pattern::Pair(l, r)) => {
            let left = realign_pattern(sys, premise(d, 0)?, l).map_err(|e| e.within(0))?;
            let right = realign_pattern(sys, premise(d, 1)?, r).map_err(|e| e.within(1))?;
            pat_x(sys, left, right)
        }
        (Rule::PatP, Pattern::Pair(..)) => {
            let renaming: Vec<(Name, Name)> = old.vars().into_iter().zip(target.vars()).collect();
            let context = d.context().rename_keys(&|x| {
                renaming.iter().find(|(from, _)| from == x).map_or_else(|| x.clone(), |(_, to)| to.clone())
            });
            Ok(pat_p(sys, target, context))
        }
        _ => Err(ShapeMismatch::new(target, old)),
    }
}

/// Realigns after checking that `target` is an alpha-variant of the subject.
pub(crate) fn realign_checked(sys: System, d: &Derivation, target: &Term) -> R<Derivation> {
    let t = term_of(d)?;
    if !alpha_eq(t, target) {
        return Err(ShapeMismatch::new(target, t));
    }
    realign(sys, d, target)
}

// ---------------------------------------------------------------------------
// Substitution and anti-substitution

/// Replaces the `x`-axioms of `d` by premises of the pool, leftmost first
/// among those of the right type. Binders of the subject must already avoid
/// the free variables of `u`.
fn subst_rec(sys: System, d: &Derivation, x: &str, u: &Term, pool: &mut [Option<Derivation>]) -> R<Derivation> {
    let t = term_of(d)?;
    if !t.has_free(x) {
        return Ok(d.clone());
    }
    let rec =
        |i: usize, pool: &mut [Option<Derivation>]| subst_rec(sys, premise(d, i)?, x, u, pool).map_err(|e| e.within(i));
    match (d.rule, t) {
        (Rule::Ax, _) => {
            let s = simple_of(d)?;
            let slot = pool
                .iter_mut()
                .find(|slot| slot.as_ref().is_some_and(|p| p.assigned().as_simple() == Some(s)))
                .ok_or_else(|| ShapeMismatch::new(format!("an unused premise of type {s} for {x}"), "none left"))?;
            Ok(slot.take().expect("slot was checked to be full"))
        }
        (Rule::Many, _) => {
            let mut prems = Vec::with_capacity(d.premises.len());
            for i in 0..d.premises.len() {
                prems.push(rec(i, pool)?);
            }
            many(sys, naive_subst(t, x, u), prems)
        }
        (Rule::Abs, _) => {
            let body = rec(0, pool)?;
            abs(sys, body, premise(d, 1)?.clone())
        }
        (Rule::AbsP, Term::Abs(p, _)) => abs_p(sys, p, rec(0, pool)?),
        (Rule::App, _) => {
            let f = rec(0, pool)?;
            let a = rec(1, pool)?;
            app(sys, f, a)
        }
        (Rule::AppP, Term::App(_, a)) => app_p(sys, rec(0, pool)?, &naive_subst(a, x, u)),
        (Rule::Pair, _) => {
            let l = rec(0, pool)?;
            let r = rec(1, pool)?;
            pair(sys, l, r)
        }
        (Rule::PairP, _) => Ok(pair_p(sys, &naive_subst(t, x, u))),
        (Rule::Match, Term::Match(_, p, _)) => {
            let body = if p.binds(x) { premise(d, 0)?.clone() } else { rec(0, pool)? };
            let arg = rec(2, pool)?;
            match_(sys, body, premise(d, 1)?.clone(), arg)
        }
        _ => Err(ShapeMismatch::new("a term rule matching its subject", d.rule)),
    }
}

/// `phi_t` types the prepared `t` with `x : A`; `phi_u` is a `many` node
/// typing `u` at `A`. Returns the derivation of `t{x:=u}`.
pub(crate) fn subst_naive(sys: System, phi_t: &Derivation, x: &str, phi_u: &Derivation) -> R<Derivation> {
    expect_rule(phi_u, Rule::Many)?;
    let u = term_of(phi_u)?;
    let a = phi_t.context().get(x);
    if &a != multi_of(phi_u)? {
        return Err(ShapeMismatch::new(format!("{x} : {a}"), format!("argument typed {}", phi_u.assigned())));
    }
    let mut pool: Vec<Option<Derivation>> = phi_u.premises.iter().cloned().map(Some).collect();
    let out = subst_rec(sys, phi_t, x, u, &mut pool)?;
    if pool.iter().any(Option::is_some) {
        return Err(ShapeMismatch::new("every argument premise used", "some left over"));
    }
    Ok(out)
}

/// `d` types `naive_subst(t, x, u)` exactly. Splits it into a derivation of
/// `t` and the derivations of `u` sitting at the `x` occurrences, in
/// left-to-right order.
pub(crate) fn antisubst_rec(sys: System, d: &Derivation, t: &Term, x: &Name) -> R<(Derivation, Vec<Derivation>)> {
    let rec = |i: usize, t: &Term| antisubst_rec(sys, premise(d, i)?, t, x).map_err(|e| e.within(i));
    if d.rule == Rule::Many {
        let mut prems = Vec::with_capacity(d.premises.len());
        let mut pool = Vec::new();
        for i in 0..d.premises.len() {
            let (p, mut more) = rec(i, t)?;
            prems.push(p);
            pool.append(&mut more);
        }
        return Ok((many(sys, t.clone(), prems)?, pool));
    }
    if !t.has_free(x) {
        if term_of(d)? != t {
            return Err(ShapeMismatch::new(t, &d.conclusion.subject));
        }
        return Ok((d.clone(), Vec::new()));
    }
    match (t, d.rule) {
        (Term::Var(_), _) => Ok((ax(sys, x, simple_of(d)?.clone()), vec![d.clone()])),
        (Term::Abs(_, b), Rule::Abs) => {
            let (body, pool) = rec(0, b)?;
            Ok((abs(sys, body, premise(d, 1)?.clone())?, pool))
        }
        (Term::Abs(p, b), Rule::AbsP) => {
            let (body, pool) = rec(0, b)?;
            Ok((abs_p(sys, p, body)?, pool))
        }
        (Term::App(f, a), Rule::App) => {
            let (fd, mut pool) = rec(0, f)?;
            let (ad, mut more) = rec(1, a)?;
            pool.append(&mut more);
            Ok((app(sys, fd, ad)?, pool))
        }
        (Term::App(f, a), Rule::AppP) => {
            let (fd, pool) = rec(0, f)?;
            Ok((app_p(sys, fd, a)?, pool))
        }
        (Term::Pair(l, r), Rule::Pair) => {
            let (ld, mut pool) = rec(0, l)?;
            let (rd, mut more) = rec(1, r)?;
            pool.append(&mut more);
            Ok((pair(sys, ld, rd)?, pool))
        }
        (Term::Pair(..), Rule::PairP) => Ok((pair_p(sys, t), Vec::new())),
        (Term::Match(b, p, a), Rule::Match) => {
            let (bd, mut pool) = if p.binds(x) { (premise(d, 0)?.clone(), Vec::new()) } else { rec(0, b)? };
            let (ad, mut more) = rec(2, a)?;
            pool.append(&mut more);
            Ok((match_(sys, bd, premise(d, 1)?.clone(), ad)?, pool))
        }
        _ => Err(ShapeMismatch::new(format!("a derivation shaped like {t}"), format!("rule {}", d.rule))),
    }
}

// ---------------------------------------------------------------------------
// Steps

/// Peels `n` matching layers off `d`, outermost first.
fn peel(d: &Derivation, n: usize) -> R<(Vec<(Derivation, Derivation)>, Derivation)> {
    let mut layers = Vec::with_capacity(n);
    let mut cur = d;
    for _ in 0..n {
        expect_rule(cur, Rule::Match)?;
        layers.push((premise(cur, 1)?.clone(), premise(cur, 2)?.clone()));
        cur = premise(cur, 0)?;
    }
    Ok((layers, cur.clone()))
}

fn wrap(sys: System, layers: Vec<(Derivation, Derivation)>, core: Derivation) -> R<Derivation> {
    layers.into_iter().rev().try_fold(core, |acc, (pat, arg)| match_(sys, acc, pat, arg))
}

fn root_reduce(sys: System, d: &Derivation, kind: StepKind, prep: &Term) -> R<Derivation> {
    match (kind, prep) {
        (StepKind::B, Term::App(f, _)) => {
            expect_rule(d, Rule::App)?;
            let n = decompose_list_context(f).0.len();
            let (layers, core) = peel(premise(d, 0)?, n)?;
            expect_rule(&core, Rule::Abs)?;
            let inner = match_(sys, premise(&core, 0)?.clone(), premise(&core, 1)?.clone(), premise(d, 1)?.clone())?;
            wrap(sys, layers, inner)
        }
        (StepKind::E, Term::Match(_, Pattern::Var(x), _)) => {
            expect_rule(d, Rule::Match)?;
            subst_naive(sys, premise(d, 0)?, x, premise(d, 2)?)
        }
        (StepKind::M, Term::Match(_, Pattern::Pair(..), a)) => {
            expect_rule(d, Rule::Match)?;
            let pat = premise(d, 1)?;
            expect_rule(pat, Rule::PatX)?;
            let arg = premise(d, 2)?;
            if arg.premises.len() != 1 {
                return Err(ShapeMismatch::new(
                    "a single argument premise",
                    format!("{} premises", arg.premises.len()),
                ));
            }
            let n = decompose_list_context(a).0.len();
            let (layers, core) = peel(&arg.premises[0], n)?;
            expect_rule(&core, Rule::Pair)?;
            let first = match_(sys, premise(d, 0)?.clone(), premise(pat, 0)?.clone(), premise(&core, 0)?.clone())?;
            let both = match_(sys, first, premise(pat, 1)?.clone(), premise(&core, 1)?.clone())?;
            wrap(sys, layers, both)
        }
        _ => Err(ShapeMismatch::new(format!("a {kind}-redex"), prep)),
    }
}

fn root_expand(sys: System, d: &Derivation, kind: StepKind, prep: &Term) -> R<Derivation> {
    match (kind, prep) {
        (StepKind::B, Term::App(f, _)) => {
            let n = decompose_list_context(f).0.len();
            let (layers, core) = peel(d, n)?;
            expect_rule(&core, Rule::Match)?;
            let lam = abs(sys, premise(&core, 0)?.clone(), premise(&core, 1)?.clone())?;
            app(sys, wrap(sys, layers, lam)?, premise(&core, 2)?.clone())
        }
        (StepKind::E, Term::Match(v, Pattern::Var(x), u)) => {
            let (phi_v, pool) = antisubst_rec(sys, d, v, x)?;
            let phi_u = many(sys, (**u).clone(), pool)?;
            let pv = pat_v(sys, x, multi_of(&phi_u)?.clone());
            match_(sys, phi_v, pv, phi_u)
        }
        (StepKind::M, Term::Match(_, Pattern::Pair(..), a)) => {
            let n = decompose_list_context(a).0.len();
            let (layers, core) = peel(d, n)?;
            expect_rule(&core, Rule::Match)?;
            let first = premise(&core, 0)?;
            expect_rule(first, Rule::Match)?;
            let pr = pair(sys, premise(first, 2)?.clone(), premise(&core, 2)?.clone())?;
            let arg = many(sys, (**a).clone(), vec![wrap(sys, layers, pr)?])?;
            let px = pat_x(sys, premise(first, 1)?.clone(), premise(&core, 1)?.clone())?;
            match_(sys, premise(first, 0)?.clone(), px, arg)
        }
        _ => Err(ShapeMismatch::new(format!("a {kind}-redex"), prep)),
    }
}

/// Applies `f` to the derivations of the subterm at `path`, replacing that
/// subterm by `new_sub` in the subjects above it. Subterms that no rule
/// types are rewritten in the subject only.
fn map_at(
    sys: System,
    d: &Derivation,
    path: &[usize],
    new_sub: &Term,
    f: &dyn Fn(&Derivation) -> R<Derivation>,
) -> R<Derivation> {
    let t = term_of(d)?;
    let subject = t
        .replace_at(&Position(path.to_vec()), new_sub.clone())
        .ok_or_else(|| ShapeMismatch::new(format!("a subterm at {}", Position(path.to_vec())), t))?;
    if d.rule == Rule::Many {
        let prems = d
            .premises
            .iter()
            .enumerate()
            .map(|(i, p)| map_at(sys, p, path, new_sub, f).map_err(|e| e.within(i)))
            .collect::<R<Vec<_>>>()?;
        return many(sys, subject, prems);
    }
    let Some((&c, rest)) = path.split_first() else {
        return f(d);
    };
    let slot = match (d.rule, c) {
        (Rule::Abs | Rule::AbsP | Rule::App | Rule::AppP | Rule::Pair | Rule::Match, 0) => Some(0),
        (Rule::App | Rule::Pair, 1) => Some(1),
        (Rule::Match, 1) => Some(2),
        (Rule::AppP, 1) | (Rule::PairP, _) => None,
        _ => return Err(ShapeMismatch::new(format!("a rule with a child {c}"), d.rule)),
    };
    let mut prems = d.premises.clone();
    if let Some(i) = slot {
        let p = prems.get(i).ok_or_else(|| ShapeMismatch::new(format!("premise {i}"), "none"))?;
        prems[i] = map_at(sys, p, rest, new_sub, f).map_err(|e| e.within(i))?;
    }
    rebuild(sys, d, prems, &Subject::Term(subject))
}

fn located(step: &Step) -> R<(&Term, Term, Term)> {
    let sub = step
        .pre
        .subterm_at(&step.redex.position)
        .ok_or_else(|| ShapeMismatch::new(format!("a subterm at {}", step.redex.position), &step.pre))?;
    if root_kind(sub) != Some(step.redex.kind) {
        return Err(ShapeMismatch::new(format!("a {}-redex at {}", step.redex.kind, step.redex.position), sub));
    }
    let prep = prepare_redex(step.redex.kind, sub);
    let reduct =
        rewrite_redex(step.redex.kind, &prep).ok_or_else(|| ShapeMismatch::new("a contractible redex", &prep))?;
    Ok((sub, prep, reduct))
}

/// Transports a derivation of `step.pre` to one of its reduct.
pub(crate) fn reduce_step(sys: System, phi: &Derivation, step: &Step) -> R<Derivation> {
    let (_, prep, reduct) = located(step)?;
    let phi = realign_checked(sys, phi, &step.pre)?;
    let kind = step.redex.kind;
    map_at(sys, &phi, &step.redex.position.0, &reduct, &|d| root_reduce(sys, &realign(sys, d, &prep)?, kind, &prep))
}

/// Transports a derivation of the reduct of `step` back to `step.pre`.
pub(crate) fn expand_step(sys: System, phi_after: &Derivation, step: &Step) -> R<Derivation> {
    let (_, prep, reduct) = located(step)?;
    let pos = &step.redex.position;
    let post = step.pre.replace_at(pos, reduct).expect("the position was just resolved");
    let phi = realign_checked(sys, phi_after, &post)?;
    let kind = step.redex.kind;
    let expanded = map_at(sys, &phi, &pos.0, &prep, &|d| root_expand(sys, d, kind, &prep))?;
    realign(sys, &expanded, &step.pre)
}
