//! The ten acceptance criteria, one verdict line each.

use std::time::{Duration, Instant};

use pairpat::derivation::{PairReading, SynthesisError};
use pairpat::fuzz::{self, Execution, FuzzConfig, FuzzReport, Property};
use pairpat::reduction::{head_normalize, Counters};
use pairpat::syntax::{alpha_eq, parse, Term};
use pairpat::system_e::{check_e, is_tight_derivation, synthesize_tight};
use pairpat_cli::{expand_macros, run, EXIT_BUDGET};

fn term(src: &str) -> Term {
    expand_macros(&parse(src).unwrap())
}

fn fastest<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut best = Duration::MAX;
    let mut last = None;
    for _ in 0..runs {
        let start = Instant::now();
        let value = f();
        best = best.min(start.elapsed());
        last = Some(value);
    }
    (last.unwrap(), best)
}

fn running_term() -> Result<String, String> {
    let t = term(r"(\<x, y>. x (I y))[z/I] (I <K, w>)");
    let ((trace, c), time) = fastest(20, || head_normalize(&t, 100).unwrap());
    let expected = parse(r"\y1.w").unwrap();
    if !alpha_eq(&trace.final_term, &expected) || (c.b, c.e, c.m) != (4, 6, 1) {
        return Err(format!("final {} counters {c}", trace.final_term));
    }
    if time >= Duration::from_millis(1) {
        return Err(format!("took {time:?}"));
    }
    Ok(format!("final {} counters (4,6,1) in {time:?}", trace.final_term))
}

fn nested_pairs() -> Result<String, String> {
    let t = term(r"(\<x,y>.(\<w,z>.w y z) x) <<K, a>, b>");
    let (d, time) = fastest(20, || synthesize_tight(&t, 100).unwrap());
    check_e(&d).map_err(|e| e.to_string())?;
    let c = d.counters().unwrap();
    let ctx = d.context().to_string();
    if !is_tight_derivation(&d) || c != Counters::new(4, 6, 2, 0) || ctx != "{b:[*N]}" {
        return Err(format!("{ctx} with {c}"));
    }
    if time >= Duration::from_millis(10) {
        return Err(format!("took {time:?}"));
    }
    Ok(format!("tight, {ctx}, indices ({},{},{},{}) in {time:?}", c.b, c.e, c.m, c.f))
}

fn erased_pair() -> Result<String, String> {
    let d = synthesize_tight(&term(r"(\z.(\<x,y>.I) z z) <u, v>"), 100).map_err(|e| e.to_string())?;
    check_e(&d).map_err(|e| e.to_string())?;
    let c = d.counters().unwrap();
    if c != Counters::new(3, 4, 1, 1) {
        return Err(format!("indices {c}"));
    }
    Ok("indices (3,4,1,1)".into())
}

fn zero_failures(report: &FuzzReport, properties: &[Property]) -> Result<String, String> {
    let mut parts = Vec::new();
    for &p in properties {
        let s = report.stat(p);
        if s.failed > 0 {
            return Err(format!("{p}: {} of {} failed; {:?}", s.failed, s.checked, report.counterexample));
        }
        if s.checked == 0 {
            return Err(format!("{p}: never checked"));
        }
        parts.push(format!("{p} {}/{}", s.checked, s.checked));
    }
    Ok(parts.join(", "))
}

fn divergence() -> Result<String, String> {
    let budget = 50;
    let out = run(["pairpat", "normalize", "-e", "Omega", "--max-steps", "50"]);
    if out.code != EXIT_BUDGET {
        return Err(format!("exit {}", out.code));
    }
    let omega = term("Omega");
    let Err(exhausted) = head_normalize(&omega, budget) else { return Err("Omega normalized".into()) };
    let k = exhausted.trace.self_loop().ok_or("no self-loop in the trace")?;
    if k > budget {
        return Err(format!("loop at {k}"));
    }
    match synthesize_tight(&omega, budget) {
        Err(SynthesisError::NotHeadNormalizing(_)) => {
            Ok(format!("exit {EXIT_BUDGET}, term {k} alpha-equal to term 0, untypable"))
        }
        other => Err(format!("synthesis gave {other:?}")),
    }
}

#[test]
fn acceptance() {
    let config = FuzzConfig {
        seed: 42,
        count: 500,
        max_size: 12,
        budget: 200,
        reading: PairReading::Sum,
        extra: Vec::new(),
        execution: Execution::Sequential,
    };
    let start = Instant::now();
    let report = fuzz::run(&config);
    let elapsed = start.elapsed();
    let corpus = format!(
        "{} terms ({} normalizing, {} diverging, {} clashing) in {elapsed:?}",
        report.total, report.normalizing, report.diverging, report.clashing
    );
    let exactness = zero_failures(&report, &[Property::Exactness]).and_then(|s| {
        if report.total < 500 || elapsed >= Duration::from_secs(60) {
            Err(corpus.clone())
        } else {
            Ok(format!("{s}; {corpus}"))
        }
    });

    let verdicts: Vec<(&str, Result<String, String>)> = vec![
        ("running term reproduces", running_term()),
        ("nested pairs reproduce", nested_pairs()),
        ("erased pair reproduces", erased_pair()),
        ("exactness fuzz suite", exactness),
        ("upper-bound suite", zero_failures(&report, &[Property::UpperBound])),
        ("per-step exactness", zero_failures(&report, &[Property::ForwardReplay, Property::MinimalCounters])),
        ("determinism", zero_failures(&report, &[Property::Determinism])),
        ("classification agreement", zero_failures(&report, &[Property::Classification])),
        (
            "derivation invariant suites",
            zero_failures(
                &report,
                &[
                    Property::Relevance,
                    Property::ClashFreedom,
                    Property::SubstitutionLaws,
                    Property::RoundTrips,
                    Property::TightSpreading,
                ],
            ),
        ),
        ("divergence handling", divergence()),
    ];
    let mut failed = 0;
    for (i, (name, verdict)) in verdicts.iter().enumerate() {
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1)
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
