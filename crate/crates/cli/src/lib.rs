//! Argument handling and command dispatch for the `pairpat` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use pairpat::derivation::{deriv_size, deserialize, serialize, Derivation, PairReading, SynthesisError};
use pairpat::fuzz::{self, Execution, FuzzConfig};
use pairpat::reduction::{
    canonical_size, classify, full_steps, head_normalize, joinability_probe, redexes, substitute,
};
use pairpat::syntax::{parse, Term};
use pairpat::system_e::{check_e_with, is_tight_derivation, synthesize_tight_traced, verify_exact_with};
use pairpat::system_u::{check_u, synthesize_u};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

/// Expanded in this order, so `Omega` may mention `Delta`.
const MACROS: [(&str, &str); 4] = [("Omega", "Delta Delta"), ("Delta", r"\z.z z"), ("K", r"\x.\y.x"), ("I", r"\z.z")];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Normalize,
    Classify,
    Check,
    Synthesize,
    Verify,
    Fuzz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    U,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Head,
    FullProbe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Reading {
    /// e of the left component plus e of the right one.
    Sum,
    /// e of the left component plus b of the right one.
    #[value(name = "paper")]
    Crossed,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "pairpat", about = "Head reduction and quantitative typing for a pair-pattern calculus")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Inline input: a term, or a derivation document for `check`.
    #[arg(short = 'e', long = "expr", conflicts_with = "file")]
    pub expr: Option<String>,
    /// Input file.
    #[arg(short = 'f', long = "file")]
    pub file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "e")]
    pub system: SystemArg,
    #[arg(long = "max-steps", default_value_t = 10_000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub count: usize,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,
    #[arg(long, value_enum, default_value = "head")]
    pub strategy: Strategy,
    /// Where to write the derivation (synthesize, verify) or the report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "on")]
    pub macros: Switch,
    #[arg(long = "pair-e-reading", value_enum, default_value = "sum")]
    pub pair_e_reading: Reading,
    /// Evaluate fuzz terms on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Output {
        Output { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn with(code: i32, stdout: String) -> Output {
        Output { code, stdout, stderr: String::new() }
    }

    fn error(code: i32, message: impl ToString) -> Output {
        Output { code, stdout: String::new(), stderr: message.to_string() + "\n" }
    }
}

/// Replaces free occurrences of the macro names by their definitions.
pub fn expand_macros(t: &Term) -> Term {
    MACROS.iter().fold(t.clone(), |acc, (name, body)| {
        if acc.has_free(name) {
            substitute(&acc, name, &parse(body).expect("macro bodies parse"))
        } else {
            acc
        }
    })
}

impl RunConfig {
    fn reading(&self) -> PairReading {
        match self.pair_e_reading {
            Reading::Sum => PairReading::Sum,
            Reading::Crossed => PairReading::Crossed,
        }
    }

    fn source(&self) -> Result<String, Output> {
        match (&self.expr, &self.file) {
            (Some(e), _) => Ok(e.clone()),
            (None, Some(path)) => {
                fs::read_to_string(path).map_err(|e| Output::error(EXIT_INPUT, format!("{}: {e}", path.display())))
            }
            (None, None) => Err(Output::error(EXIT_INPUT, "no input: pass -e EXPR or -f FILE")),
        }
    }

    fn term(&self) -> Result<Term, Output> {
        let text = self.source()?;
        let t = parse(text.trim()).map_err(|e| Output::error(EXIT_INPUT, format!("parse error: {e}")))?;
        Ok(if self.macros == Switch::On { expand_macros(&t) } else { t })
    }

    fn emit(&self, mut out: Output, artifact: Option<&str>) -> Output {
        if let Some(path) = &self.out {
            let body = artifact.unwrap_or(&out.stdout);
            if let Err(e) = fs::write(path, body) {
                return Output::error(EXIT_INPUT, format!("{}: {e}", path.display()));
            }
            if artifact.is_some() {
                let _ = writeln!(out.stdout, "WROTE {}", path.display());
            }
        }
        out
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => execute(&config),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                Output::ok(text)
            } else {
                Output::error(code, text.trim_end())
            }
        }
    }
}

pub fn execute(config: &RunConfig) -> Output {
    let result = match config.command {
        Command::Normalize => normalize(config),
        Command::Classify => classify_cmd(config),
        Command::Check => check(config),
        Command::Synthesize => synthesize(config),
        Command::Verify => verify(config),
        Command::Fuzz => fuzz_cmd(config),
    };
    result.unwrap_or_else(|o| o)
}

fn normalize(config: &RunConfig) -> Result<Output, Output> {
    let t = config.term()?;
    if config.strategy == Strategy::FullProbe {
        let mut s = String::new();
        let found = redexes(&t);
        let _ = writeln!(s, "REDEXES {}", found.len());
        for (r, (_, reduct)) in found.iter().zip(full_steps(&t)) {
            let _ = writeln!(s, "{} {} -> {}", r.kind, r.position, reduct);
        }
        let joinable = joinability_probe(&t, config.max_steps);
        let _ = writeln!(s, "JOINABLE {}", if joinable { "yes" } else { "no" });
        return Ok(config.emit(Output::ok(s), None));
    }
    match head_normalize(&t, config.max_steps) {
        Ok((trace, _)) => Ok(config.emit(Output::ok(format!("{trace}\n")), None)),
        Err(b) => {
            let mut s = format!("{}\n", b.trace);
            let _ = writeln!(s, "BUDGET exhausted after {} steps", b.budget);
            if let Some(k) = b.trace.self_loop() {
                let _ = writeln!(s, "LOOP term {k} is alpha-equivalent to term 0");
            }
            Ok(config.emit(Output::with(EXIT_BUDGET, s), None))
        }
    }
}

fn classify_cmd(config: &RunConfig) -> Result<Output, Output> {
    let t = config.term()?;
    let mut s = format!("{}\n", classify(&t));
    if let Ok(n) = canonical_size(&t) {
        let _ = writeln!(s, "SIZE {n}");
    }
    Ok(config.emit(Output::ok(s), None))
}

fn check(config: &RunConfig) -> Result<Output, Output> {
    let doc = config.source()?;
    let d = deserialize(&doc).map_err(|e| Output::error(EXIT_INPUT, format!("format error: {e}")))?;
    let verdict = match config.system {
        SystemArg::U => check_u(&d),
        SystemArg::E => check_e_with(&d, config.reading()),
    };
    if let Err(v) = verdict {
        return Ok(config.emit(Output::with(EXIT_VIOLATION, format!("{v}\n")), None));
    }
    let mut s = String::from("Ok\n");
    let _ = writeln!(s, "TIGHT {}", if is_tight_derivation(&d) { "yes" } else { "no" });
    match (config.system, d.counters()) {
        (SystemArg::E, Some(c)) => {
            let _ = writeln!(s, "INDICES {} {} {} {}", c.b, c.e, c.m, c.f);
        }
        _ => {
            let _ = writeln!(s, "SIZE {}", deriv_size(&d));
        }
    }
    Ok(config.emit(Output::ok(s), None))
}

fn synthesis_failure(e: SynthesisError) -> Output {
    match e {
        SynthesisError::NotHeadNormalizing(b) => Output::error(EXIT_BUDGET, format!("not head-normalizing: {b}")),
        SynthesisError::Clash(t) => Output::error(EXIT_BUDGET, format!("head clash in normal form {t}")),
        SynthesisError::Shape(m) => Output::error(EXIT_VIOLATION, format!("internal transformer error: {m}")),
    }
}

fn judgment_line(d: &Derivation) -> String {
    let indices = d.counters().map(|c| format!(" INDICES {} {} {} {}", c.b, c.e, c.m, c.f)).unwrap_or_default();
    format!("{} |- {} : {}{} SIZE {}\n", d.context(), d.conclusion.subject, d.assigned(), indices, deriv_size(d))
}

fn synthesize(config: &RunConfig) -> Result<Output, Output> {
    let t = config.term()?;
    let d = match config.system {
        SystemArg::U => synthesize_u(&t, config.max_steps),
        SystemArg::E => synthesize_tight_traced(&t, config.max_steps, config.reading()).map(|(d, _)| d),
    }
    .map_err(synthesis_failure)?;
    let doc = serialize(&d);
    if config.out.is_some() {
        Ok(config.emit(Output::ok(judgment_line(&d)), Some(&doc)))
    } else {
        Ok(Output::ok(doc + "\n"))
    }
}

fn verify(config: &RunConfig) -> Result<Output, Output> {
    let t = config.term()?;
    let report = verify_exact_with(&t, config.max_steps, config.reading()).map_err(synthesis_failure)?;
    let code = if report.matches { EXIT_OK } else { EXIT_FAILURE };
    let doc = serialize(&report.derivation);
    Ok(config.emit(Output::with(code, format!("{report}\n")), config.out.as_ref().map(|_| doc.as_str())))
}

fn fuzz_cmd(config: &RunConfig) -> Result<Output, Output> {
    let extra = if config.expr.is_some() || config.file.is_some() { vec![config.term()?] } else { Vec::new() };
    let fc = FuzzConfig {
        seed: config.seed,
        count: config.count,
        max_size: config.size as usize,
        budget: config.max_steps,
        reading: config.reading(),
        extra,
        execution: if config.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let report = fuzz::run(&fc);
    let code = if report.counterexample.is_some() { EXIT_FAILURE } else { EXIT_OK };
    let mut s = format!("seed {} | size <= {} | budget {}\n", fc.seed, fc.max_size, fc.budget);
    let _ = writeln!(s, "{report}");
    Ok(config.emit(Output::with(code, s), None))
}
