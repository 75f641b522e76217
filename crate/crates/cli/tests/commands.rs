use std::fs;

use pairpat_cli::{run, Output, EXIT_BUDGET, EXIT_FAILURE, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/nested_pairs.deriv.json");
const NESTED_PAIRS: &str = r"(\<x, y>.(\<w, z>.w y z) x) <<K, a>, b>";

fn pairpat(args: &[&str]) -> Output {
    run(std::iter::once("pairpat").chain(args.iter().copied()))
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("pairpat-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn normalize_identity_application() {
    let out = pairpat(&["normalize", "-e", r"(\z.z) x"]);
    assert_eq!(out.code, EXIT_OK);
    assert_eq!(out.stdout, "b (\\z.z) x\ne z[z/x]\nFINAL x\nCOUNTERS 1 1 0\n");
}

#[test]
fn normalize_a_variable() {
    let out = pairpat(&["normalize", "-e", "x"]);
    assert_eq!((out.code, out.stdout.as_str()), (EXIT_OK, "FINAL x\nCOUNTERS 0 0 0\n"));
}

#[test]
fn normalize_omega_exhausts_the_budget() {
    let out = pairpat(&["normalize", "-e", "Omega", "--max-steps", "10"]);
    assert_eq!(out.code, EXIT_BUDGET);
    assert!(out.stdout.contains("LOOP term 2"));
}

#[test]
fn macros_can_be_switched_off() {
    let out = pairpat(&["normalize", "-e", "I x", "--macros", "off"]);
    assert_eq!(out.stdout, "FINAL I x\nCOUNTERS 0 0 0\n");
}

#[test]
fn parse_errors_exit_with_code_one() {
    assert_eq!(pairpat(&["normalize", "-e", r"\<x, x>.x"]).code, EXIT_INPUT);
    assert_eq!(pairpat(&["normalize", "-e", "(x"]).code, EXIT_INPUT);
    assert_eq!(pairpat(&["normalize"]).code, EXIT_INPUT);
    assert_eq!(pairpat(&["frobnicate", "-e", "x"]).code, EXIT_INPUT);
    assert_eq!(pairpat(&["fuzz", "--size", "0"]).code, EXIT_INPUT);
}

#[test]
fn classify_reports_classes_and_sizes() {
    assert_eq!(pairpat(&["classify", "-e", "z[<z,w>/x Omega]"]).stdout, "pure-canonical\nSIZE 2\n");
    assert_eq!(pairpat(&["classify", "-e", r"\<x,y>.<x,I>"]).stdout, "canonical\nSIZE 2\n");
    assert_eq!(pairpat(&["classify", "-e", "<x,I> w"]).stdout, "head-clash\n");
    assert_eq!(pairpat(&["classify", "-e", "I x"]).stdout, "head-reducible\n");
}

#[test]
fn full_probe_lists_redexes() {
    let out = pairpat(&["normalize", "--strategy", "full-probe", "-e", r"(\x.x)((\y.y) z)"]);
    assert!(out.stdout.starts_with("REDEXES 2\n"));
    assert!(out.stdout.ends_with("JOINABLE yes\n"));
}

#[test]
fn check_golden_derivation() {
    let out = pairpat(&["check", "--system", "e", "-f", GOLDEN]);
    assert_eq!((out.code, out.stdout.as_str()), (EXIT_OK, "Ok\nTIGHT yes\nINDICES 4 6 2 0\n"));
    assert_eq!(pairpat(&["check", "--system", "u", "-f", GOLDEN]).code, EXIT_VIOLATION);
}

#[test]
fn check_names_a_corrupted_node() {
    let doc = fs::read_to_string(GOLDEN).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    v["premises"][1]["indices"][3] = 9.into();
    let out = pairpat(&["check", "-e", &v.to_string()]);
    assert_eq!(out.code, EXIT_VIOLATION);
    assert!(out.stdout.starts_with("rule violation at node 1 "), "{}", out.stdout);
    assert_eq!(pairpat(&["check", "-e", "{\"rule\": \"nope\"}"]).code, EXIT_INPUT);
}

#[test]
fn verify_reports_exact_counters() {
    let out = pairpat(&["verify", "-e", NESTED_PAIRS]);
    assert_eq!((out.code, out.stdout.as_str()), (EXIT_OK, "SYNTH 4 6 2 0 | OBS 4 6 2 0 | MATCH yes\n"));
    let out = pairpat(&["verify", "-e", r"(\z.(\<x, y>.I) z z) <u, v>"]);
    assert_eq!(out.stdout, "SYNTH 3 4 1 1 | OBS 3 4 1 1 | MATCH yes\n");
    assert_eq!(pairpat(&["verify", "-e", "x"]).stdout, "SYNTH 0 0 0 0 | OBS 0 0 0 0 | MATCH yes\n");
    assert_eq!(pairpat(&["verify", "-e", "Omega", "--max-steps", "50"]).code, EXIT_BUDGET);
    assert_eq!(pairpat(&["verify", "-e", "<x, I> w"]).code, EXIT_BUDGET);
}

#[test]
fn verify_under_the_alternative_pair_reading_mismatches() {
    let out = pairpat(&["verify", "--pair-e-reading", "paper", "-e", r"(\<x,y>.y) <a, b[z/c]>"]);
    assert_eq!(out.code, EXIT_FAILURE);
    assert!(out.stdout.ends_with("MATCH no\n"));
}

#[test]
fn synthesized_document_checks() {
    let path = scratch("nested.deriv.json");
    let out = pairpat(&["synthesize", "-e", NESTED_PAIRS, "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("INDICES 4 6 2 0"));
    assert_eq!(pairpat(&["check", "-f", path.to_str().unwrap()]).stdout, "Ok\nTIGHT yes\nINDICES 4 6 2 0\n");

    let out = pairpat(&["synthesize", "--system", "u", "-e", r"(\z.z) x"]);
    let u_path = scratch("id.deriv.json");
    fs::write(&u_path, &out.stdout).unwrap();
    let checked = pairpat(&["check", "--system", "u", "-f", u_path.to_str().unwrap()]);
    assert_eq!((checked.code, checked.stdout.as_str()), (EXIT_OK, "Ok\nTIGHT no\nSIZE 5\n"));
}

#[test]
fn fuzz_is_reproducible() {
    let args = ["fuzz", "--seed", "9", "--count", "120", "--size", "10", "--max-steps", "200"];
    let a = pairpat(&args);
    assert_eq!(a.code, EXIT_OK, "{}", a.stdout);
    assert_eq!(a, pairpat(&args));
    let seq = pairpat(&[&args[..], &["--sequential"]].concat());
    assert_eq!(a, seq);
}

#[test]
fn fuzz_catches_the_alternative_pair_reading() {
    let out = pairpat(&[
        "fuzz",
        "--count",
        "20",
        "--max-steps",
        "200",
        "--pair-e-reading",
        "paper",
        "-e",
        r"(\<x,y>.y) <a, b[z/c]>",
    ]);
    assert_eq!(out.code, EXIT_FAILURE);
    assert!(out.stdout.contains("FAILURE exactness on term #0"));
    assert!(out.stdout.contains("minimized: "));
}
