use pairpat::derivation::{deriv_size, deserialize, judgment_equal, serialize, Derivation, Rule, Subject};
use pairpat::reduction::{head_normalize, Counters, Redex, Step, StepKind};
use pairpat::syntax::{alpha_eq, parse, Pattern, Position, Term};
use pairpat::system_e::{
    antisubst_e, check_e, forward_replay_check, is_tight_derivation, subject_expand_e, subject_reduce_e, subst_e,
    synthesize_tight, tight_type_canonical, verify_exact,
};
use pairpat::system_u::{
    antisubst_u, check_u, subject_expand_u, subject_reduce_u, subst_u, synthesize_u, transport_judgment,
    type_canonical_u, Direction,
};
use pairpat::types::{MultisetType, SimpleType};

const NESTED_PAIRS: &str = r"(\<x, y>.(\<w, z>.w y z) x) <<\x.\y.x, a>, b>";
const RUNNING: &str = r"(\<x, y>.x ((\z.z) y))[z/\z.z] ((\z.z) <\x.\y.x, w>)";
const GOLDEN: &str = include_str!("data/nested_pairs.deriv.json");

fn t(s: &str) -> Term {
    parse(s).unwrap()
}

fn counters(d: &Derivation) -> (u64, u64, u64, u64) {
    let c = d.counters().unwrap();
    (c.b, c.e, c.m, c.f)
}

/// The matching node produced by the first head step, split into the
/// derivation of its body and the many node typing its argument.
fn first_matching(sys_u: bool, src: &str) -> (Derivation, Derivation, Term, Term) {
    let term = t(src);
    let step = Step::head(&term).unwrap();
    let d = if sys_u {
        subject_reduce_u(&synthesize_u(&term, 100).unwrap(), &step, false).unwrap()
    } else {
        subject_reduce_e(&synthesize_tight(&term, 100).unwrap(), &step).unwrap()
    };
    assert_eq!(d.rule, Rule::Match);
    let Some(Term::Match(v, _, u)) = d.term().cloned() else { panic!("not a matching") };
    (d.premises[0].clone(), d.premises[2].clone(), *v, *u)
}

#[test]
fn golden_nested_pairs_derivation_checks_tight() {
    let d = deserialize(GOLDEN).unwrap();
    check_e(&d).unwrap();
    assert!(is_tight_derivation(&d));
    assert_eq!(counters(&d), (4, 6, 2, 0));
    assert!(judgment_equal(&d, &synthesize_tight(&t(NESTED_PAIRS), 100).unwrap()));
    assert_eq!(serialize(&d), GOLDEN);
}

#[test]
fn golden_derivation_is_not_a_u_derivation() {
    assert!(check_u(&deserialize(GOLDEN).unwrap()).is_err());
}

#[test]
fn corrupted_index_names_its_node() {
    let mut doc: serde_json::Value = serde_json::from_str(GOLDEN).unwrap();
    doc["premises"][0]["indices"][0] = 7.into();
    let err = check_e(&deserialize(&doc.to_string()).unwrap()).unwrap_err();
    assert_eq!(err.path, vec![0]);
}

#[test]
fn u_substitution_distributes_equal_premises() {
    let (phi_v, phi_u, v, u) = first_matching(true, r"(\x.x (x a)) (\y.y)");
    let a = phi_u.premises.len();
    assert_eq!(a, 2);
    assert_eq!(phi_u.premises[0].assigned(), phi_u.premises[1].assigned());
    let r = subst_u(&phi_v, "x", &phi_u).unwrap();
    check_u(&r).unwrap();
    assert_eq!(deriv_size(&r), deriv_size(&phi_v) + deriv_size(&phi_u) - a);
    assert!(r.context().get("x").is_empty());
    let (bt, bu, ms) = antisubst_u(&r, &v, "x", &u).unwrap();
    assert_eq!(ms.len(), a);
    assert!(judgment_equal(&bt, &phi_v));
    let again = subst_u(&bt, "x", &bu).unwrap();
    assert_eq!((again.context(), again.assigned()), (r.context(), r.assigned()));
    assert_eq!(deriv_size(&again), deriv_size(&r));
}

#[test]
fn e_substitution_adds_indices_over_copies() {
    let (phi_v, phi_u, v, u) = first_matching(false, r"(\x.x (x a)) (\y.y)");
    let r = subst_e(&phi_v, "x", &phi_u).unwrap();
    check_e(&r).unwrap();
    assert_eq!(r.counters(), Some(phi_v.counters().unwrap() + phi_u.counters().unwrap()));
    let (bt, bu, _) = antisubst_e(&r, &v, "x", &u).unwrap();
    let again = subst_e(&bt, "x", &bu).unwrap();
    assert_eq!((again.context(), again.assigned(), again.counters()), (r.context(), r.assigned(), r.counters()));
}

#[test]
fn e_substitution_into_a_variable() {
    let u = t(r"(\z.z) a");
    let phi = synthesize_tight(&u, 10).unwrap();
    let (phi_t, phi_u, a) = antisubst_e(&phi, &t("x"), "x", &u).unwrap();
    assert_eq!((phi_t.rule, counters(&phi_t)), (Rule::Ax, (0, 0, 0, 0)));
    assert_eq!((phi_u.rule, a.len()), (Rule::Many, 1));
    let r = subst_e(&phi_t, "x", &phi_u).unwrap();
    assert_eq!(counters(&r), counters(&phi));
    assert_eq!(counters(&r), (1, 1, 0, 0));
}

#[test]
fn e_antisubstitution_through_an_unexamined_pair() {
    let phi = tight_type_canonical(&t(r"<(\z.z) a, b>")).unwrap();
    assert_eq!(phi.rule, Rule::PairP);
    let (phi_t, phi_u, a) = antisubst_e(&phi, &t("<x, b>"), "x", &t(r"(\z.z) a")).unwrap();
    assert!(a.is_empty() && phi_u.premises.is_empty());
    assert_eq!(phi_t.rule, Rule::PairP);
    assert!(phi_t.context().is_empty());
}

#[test]
fn e_substitution_of_an_absent_variable_keeps_indices() {
    let (phi_v, phi_u, _, _) = first_matching(false, r"(\x.b) c");
    assert!(phi_u.premises.is_empty());
    let r = subst_e(&phi_v, "x", &phi_u).unwrap();
    assert_eq!(r.counters(), phi_v.counters());
}

#[test]
fn each_head_step_moves_exactly_its_counter() {
    let term = t(NESTED_PAIRS);
    let (trace, _) = head_normalize(&term, 100).unwrap();
    let mut d = synthesize_tight(&term, 100).unwrap();
    let mut kinds = Vec::new();
    for step in trace.located_steps() {
        let next = subject_reduce_e(&d, &step).unwrap();
        check_e(&next).unwrap();
        let (before, after) = (d.counters().unwrap(), next.counters().unwrap());
        let mut expected = before;
        match step.redex.kind {
            StepKind::B => expected.b -= 1,
            StepKind::E => expected.e -= 1,
            StepKind::M => expected.m -= 1,
        }
        assert_eq!(after, expected);
        let back = subject_expand_e(&next, &step).unwrap();
        check_e(&back).unwrap();
        assert_eq!((back.context(), back.assigned(), back.counters()), (d.context(), d.assigned(), d.counters()));
        kinds.push(step.redex.kind);
        d = next;
    }
    assert_eq!(kinds[2], StepKind::M);
    assert_eq!(counters(&d), (0, 0, 0, 0));
}

#[test]
fn b_step_trades_one_rule_in_u() {
    let term = t(r"(\z.z) x");
    let d = synthesize_u(&term, 10).unwrap();
    assert!(deriv_size(&d) >= 2);
    let step = Step::head(&term).unwrap();
    let after = subject_reduce_u(&d, &step, false).unwrap();
    assert_eq!(deriv_size(&after) + 1, deriv_size(&d));
    let back = subject_expand_u(&after, &step).unwrap();
    assert_eq!(deriv_size(&back), deriv_size(&d));
    assert!(judgment_equal(&back, &d));
}

#[test]
fn step_inside_an_untyped_argument_keeps_the_size() {
    let term = t(r"x ((\z.z) y)");
    let d = type_canonical_u(&term).unwrap();
    check_u(&d).unwrap();
    let step = Step { pre: term, redex: Redex { position: Position(vec![1]), kind: StepKind::B } };
    assert!(!step.is_head());
    assert!(subject_reduce_u(&d, &step, false).is_err());
    let after = subject_reduce_u(&d, &step, true).unwrap();
    check_u(&after).unwrap();
    assert_eq!(deriv_size(&after), deriv_size(&d));
}

#[test]
fn judgment_is_transported_along_the_running_trace() {
    let term = t(RUNNING);
    let (trace, _) = head_normalize(&term, 100).unwrap();
    let steps = trace.located_steps();
    assert_eq!(steps.len(), 11);
    let start = synthesize_u(&term, 100).unwrap();
    let mut d = start.clone();
    let mut chain = vec![d.clone()];
    for step in &steps {
        let post = step.post().unwrap();
        d = transport_judgment(&d, &step.pre, &post, step, Direction::Forward).unwrap();
        assert_eq!((d.context(), d.assigned()), (start.context(), start.assigned()));
        chain.push(d.clone());
    }
    assert!(alpha_eq(d.term().unwrap(), &trace.final_term));
    for (i, step) in steps.iter().enumerate().rev() {
        let post = step.post().unwrap();
        let back = transport_judgment(&chain[i + 1], &post, &step.pre, step, Direction::Backward).unwrap();
        assert_eq!((back.context(), back.assigned()), (start.context(), start.assigned()));
    }
}

#[test]
fn u_canonical_forms() {
    let d = type_canonical_u(&t(r"x ((\y.y y) (\y.y y))")).unwrap();
    check_u(&d).unwrap();
    let arg = &d.premises[1];
    assert_eq!((arg.rule, arg.premises.len()), (Rule::Many, 0));
    assert_eq!(d.premises[0].assigned().to_string(), "[] -> *");

    let d = type_canonical_u(&t(r"\<x, y>.x")).unwrap();
    check_u(&d).unwrap();
    let pat = d.premises.iter().find(|p| matches!(p.conclusion.subject, Subject::Pattern(_))).unwrap();
    assert_eq!(pat.assigned().to_string(), "[[*] x []]");
    assert!(matches!(d.assigned().as_simple(), Some(SimpleType::Arrow(..))));
    assert!(type_canonical_u(&t(r"(\z.z) x")).is_err());
}

#[test]
fn e_canonical_forms() {
    let d = tight_type_canonical(&t(r"\y.w")).unwrap();
    check_e(&d).unwrap();
    assert_eq!(d.context().to_string(), "{w:[*N]}");
    assert_eq!((d.assigned().to_string(), counters(&d)), ("*M".to_string(), (0, 0, 0, 1)));
    let d = tight_type_canonical(&t("<u, v>")).unwrap();
    assert!(d.context().is_empty());
    assert_eq!(counters(&d), (0, 0, 0, 1));
    let d = tight_type_canonical(&t("x")).unwrap();
    assert_eq!((d.context().to_string(), d.assigned().to_string()), ("{x:[*N]}".to_string(), "*N".to_string()));
}

#[test]
fn replay_of_the_erased_pair_ends_at_its_size() {
    let term = t(r"(\z.(\<x, y>.\z.z) z z) <u, v>");
    let d = synthesize_tight(&term, 100).unwrap();
    let (trace, _) = head_normalize(&term, 100).unwrap();
    forward_replay_check(&d, &trace).unwrap();
    let mut cur = d;
    for step in trace.located_steps() {
        cur = subject_reduce_e(&cur, &step).unwrap();
    }
    assert_eq!(counters(&cur), (0, 0, 0, 1));
}

#[test]
fn variable_verifies_at_zero() {
    let r = verify_exact(&t("x"), 10).unwrap();
    assert!(r.matches);
    assert_eq!(r.synthesized, Counters::ZERO);
    assert_eq!(r.to_string(), "SYNTH 0 0 0 0 | OBS 0 0 0 0 | MATCH yes");
}

#[test]
fn pair_pattern_needs_a_single_product() {
    let doc = serde_json::json!({
        "rule": "pat_x", "context": [], "subject": "<x, y>", "assigned": "[[] x [], [] x []]", "premises": [
            {"rule": "pat_v", "context": [], "subject": "x", "assigned": "[]", "premises": []},
            {"rule": "pat_v", "context": [], "subject": "y", "assigned": "[]", "premises": []}
        ]
    });
    let d = deserialize(&doc.to_string()).unwrap();
    assert!(matches!(d.conclusion.subject, Subject::Pattern(Pattern::Pair(..))));
    assert!(check_u(&d).is_err());
    assert!(MultisetType::empty().is_empty());
}

#[test]
fn self_application_loop_is_not_synthesized() {
    use pairpat::derivation::SynthesisError;
    let omega = t(r"(\x.x x) (\x.x x)");
    let Err(SynthesisError::NotHeadNormalizing(b)) = synthesize_tight(&omega, 50) else { panic!("typed a loop") };
    assert_eq!(b.trace.self_loop(), Some(2));
    assert!(alpha_eq(&b.trace.steps[0].pre, &omega));
    assert!(matches!(synthesize_u(&omega, 50), Err(SynthesisError::NotHeadNormalizing(_))));
}
