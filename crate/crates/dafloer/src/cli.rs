//! Command-line front end. Results go to stdout, progress and diagnostics to
//! stderr. Exit codes: 0 success, 1 internal or computation error, 2 bad
//! input, 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bimodule::{check_relations, is_bounded, Boundedness, DABimodule};
use crate::calculus::{box_tensor, reduce};
use crate::fpfloer::{crosscheck, CurveSystemSpec, FloerError};
use crate::hochschild::{hochschild_homology, HhError, HhMethod, HhOptions};
use crate::mcg::{bimodule_of, classify, invert_word, parse_word, power_table, McgError, Orientation, RelationKind, RelationSuite};
use crate::seeddata::{builtin, parse_bimodule, serialize_bimodule, Corpus, Registry, SeedError, SEED_COUNTS};

/// Version tag carried by every JSON document.
pub const SCHEMA: &str = "dafloer/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dafloer", version, about = "Bordered Floer DA bimodules, Hochschild homology and fixed point Floer cross-checks")]
pub struct Cli {
    /// Worker threads for the relation suite. Powers are folded incrementally
    /// and always run on one thread.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hochschild homology of the bimodule of a word.
    Hh(HhArgs),
    /// rank HH of the bimodule of (Wⁿ)⁻¹ for n = 1..N.
    FixedPoints(FixedPointsArgs),
    /// Check the seed corpus and the relation suite.
    Verify(VerifyArgs),
    /// Compare HH with HF for a curve system.
    Crosscheck(CrosscheckArgs),
    /// Heuristic growth verdict for the powers of a word.
    Classify(ClassifyArgs),
    /// Cancel a seed-format bimodule down to a reduced model.
    Reduce(ReduceArgs),
    /// Box tensor product of two seed-format bimodules.
    Tensor(TensorArgs),
    /// Print a built-in bimodule in seed format.
    Dump(DumpArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Koszul,
    Bar,
}

#[derive(Args, Debug)]
pub struct HhArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub word: String,
    /// Use N(W⁻¹), the fixed-point orientation.
    #[arg(long)]
    pub inverse: bool,
    /// Report ranks by mod-2 grade.
    #[arg(long)]
    pub graded: bool,
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Koszul)]
    pub method: MethodArg,
    /// Largest bar length tried by the bar method.
    #[arg(long, default_value_t = 12)]
    pub k_max: usize,
    /// Sandwich between bounded identities first.
    #[arg(long)]
    pub sandwich: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    Inverse,
    Direct,
}

#[derive(Args, Debug)]
pub struct FixedPointsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub word: String,
    #[arg(long)]
    pub powers: usize,
    #[arg(long, value_enum, default_value_t = OrientationArg::Inverse)]
    pub orientation: OrientationArg,
    #[arg(long)]
    pub json: bool,
    /// Include wall-clock timings in JSON output (they are always shown in text output).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Seeds,
    Relations,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct CrosscheckArgs {
    /// Positively twisted curves, e.g. A:5,B:1.
    #[arg(long, default_value = "")]
    pub right: String,
    /// Negatively twisted curves.
    #[arg(long, default_value = "")]
    pub left: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub word: String,
    #[arg(long, default_value_t = 6)]
    pub max_power: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TensorArgs {
    /// Two files; the result is FIRST ⊠ SECOND.
    #[arg(long = "in", num_args = 1, required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    #[arg(long)]
    pub name: String,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    BadInput(String),
    Verification(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::BadInput(_) => EXIT_BAD_INPUT,
            Failure::Verification(_) => EXIT_VERIFY_FAILED,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<McgError> for Failure {
    fn from(e: McgError) -> Self {
        match e {
            McgError::SyntaxError { .. } | McgError::PowerTooSmall { .. } => Failure::BadInput(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<FloerError> for Failure {
    fn from(e: FloerError) -> Self {
        match e {
            FloerError::SpecInvalid(_) | FloerError::SpecSyntax(_) => Failure::BadInput(e.to_string()),
            FloerError::Mcg(m) => m.into(),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<HhError> for Failure {
    fn from(e: HhError) -> Self {
        match e {
            HhError::NotAnEndomorphism(..) => Failure::BadInput(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<SeedError> for Failure {
    fn from(e: SeedError) -> Self {
        Failure::BadInput(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let jobs = cli.jobs.max(1);
    let result = match &cli.cmd {
        Command::Hh(a) => cmd_hh(a, out),
        Command::FixedPoints(a) => cmd_fixed_points(a, out, err),
        Command::Verify(a) => cmd_verify(a, jobs, out, err),
        Command::Crosscheck(a) => cmd_crosscheck(a, out),
        Command::Classify(a) => cmd_classify(a, out, err),
        Command::Reduce(a) => cmd_reduce(a, out),
        Command::Tensor(a) => cmd_tensor(a, out),
        Command::Dump(a) => cmd_dump(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let (Failure::BadInput(m) | Failure::Verification(m) | Failure::Internal(m)) = &f;
            let _ = writeln!(err, "error: {m}");
            f.code()
        }
    }
}

fn emit_json(out: &mut dyn Write, command: &str, body: Value) -> CmdResult {
    let mut doc = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Internal(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn cmd_hh(a: &HhArgs, out: &mut dyn Write) -> CmdResult {
    let w = parse_word(&a.word)?;
    let target = if a.inverse { invert_word(&w) } else { w.clone() };
    let m = bimodule_of(&target)?;
    let method = match a.method {
        MethodArg::Koszul => HhMethod::Koszul,
        MethodArg::Bar => match HhMethod::bar_default() {
            HhMethod::BarTruncation { k_start, max_generators, .. } => {
                HhMethod::BarTruncation { k_start, k_max: a.k_max, max_generators }
            }
            other => other,
        },
    };
    let r = hochschild_homology(&m, &HhOptions { method, sandwich: a.sandwich, check_square_zero: true })?;
    if a.json {
        let steps: Vec<Value> =
            r.truncation.iter().map(|s| json!({ "k": s.k, "rank": s.rank, "persistent": s.persistent })).collect();
        return emit_json(
            out,
            "hh",
            json!({
                "word": w.to_string(),
                "inverse": a.inverse,
                "method": format!("{:?}", a.method).to_lowercase(),
                "sandwich": a.sandwich,
                "generators": m.num_generators(),
                "complex_size": r.complex_size,
                "rank": r.total,
                "graded": if a.graded { json!(r.graded) } else { Value::Null },
                "truncation": steps,
            }),
        );
    }
    writeln!(out, "word: {}{}", if w.is_empty() { "(identity)".to_string() } else { w.to_string() }, if a.inverse { " (inverted)" } else { "" })?;
    writeln!(out, "bimodule: {} generators, {} actions", m.num_generators(), m.num_actions())?;
    for s in &r.truncation {
        writeln!(out, "bar length {}: rank {}, image of previous {:?}", s.k, s.rank, s.persistent)?;
    }
    writeln!(out, "rank HH = {}", r.total)?;
    if a.graded {
        match r.graded {
            Some([g0, g1]) => writeln!(out, "grade 0: {g0}\ngrade 1: {g1}")?,
            None => writeln!(out, "grading unavailable")?,
        }
    }
    Ok(())
}

fn cmd_fixed_points(a: &FixedPointsArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let w = parse_word(&a.word)?;
    if a.powers == 0 {
        return Err(Failure::BadInput("--powers must be at least 1".into()));
    }
    let orientation = match a.orientation {
        OrientationArg::Inverse => Orientation::Inverse,
        OrientationArg::Direct => Orientation::Direct,
    };
    let rows = power_table(&w, a.powers, orientation, |r| {
        let _ = writeln!(err, "power {}: rank {} ({} generators, {:.2} s)", r.n, r.rank, r.generators, r.seconds);
    })?;
    if a.json {
        let table: Vec<Value> = rows
            .iter()
            .map(|r| {
                let mut v = json!({ "n": r.n, "rank": r.rank, "graded": r.graded, "generators": r.generators, "actions": r.actions });
                if a.timings {
                    v["seconds"] = json!(r.seconds);
                }
                v
            })
            .collect();
        return emit_json(out, "fixed-points", json!({ "word": w.to_string(), "orientation": orientation, "powers": table }));
    }
    writeln!(out, "{:>3}  {:>8}  {:>10}  {:>9}", "n", "rank", "generators", "seconds")?;
    for r in &rows {
        writeln!(out, "{:>3}  {:>8}  {:>10}  {:>9.3}", r.n, r.rank, r.generators, r.seconds)?;
    }
    Ok(())
}

/// Per-seed checks: counts, structure equations, and boundedness of [𝕀]ᵇ.
pub fn seed_checks() -> Vec<(String, bool, String)> {
    let corpus = Corpus::get();
    let mut out = Vec::new();
    for (name, gens, acts) in SEED_COUNTS {
        let m = &corpus.bimodules[name];
        let counts_ok = m.num_generators() == gens && m.num_actions() == acts;
        let max_len = (2 * m.max_arity()).max(2);
        let rel = check_relations(m, max_len);
        let (rel_ok, detail) = match &rel {
            Ok(r) if r.passed() => (true, format!("{} terms", r.terms_checked)),
            Ok(r) => (false, format!("{} violations, first {}", r.violations.len(), r.violations[0])),
            Err(e) => (false, e.to_string()),
        };
        let bounded_ok = name != "I_bounded" || matches!(is_bounded(m), Boundedness::Acyclic(_));
        out.push((
            name.to_string(),
            counts_ok && rel_ok && bounded_ok,
            format!("{} generators, {} actions, {detail}", m.num_generators(), m.num_actions()),
        ));
    }
    out
}

fn cmd_verify(a: &VerifyArgs, jobs: usize, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let mut all_ok = true;
    let mut seeds_json = Vec::new();
    let mut rel_json = Vec::new();
    if matches!(a.suite, Suite::Seeds | Suite::All) {
        let _ = writeln!(err, "checking seed corpus");
        for (name, ok, detail) in seed_checks() {
            all_ok &= ok;
            if a.json {
                seeds_json.push(json!({ "name": name, "passed": ok, "detail": detail }));
            } else {
                writeln!(out, "[{}] seed {name}: {detail}", if ok { "PASS" } else { "FAIL" })?;
            }
        }
    }
    if matches!(a.suite, Suite::Relations | Suite::All) {
        let _ = writeln!(err, "checking relations");
        for r in RelationSuite::default().verify(&RelationKind::ALL, jobs)? {
            all_ok &= r.passed;
            if a.json {
                rel_json.push(serde_json::to_value(&r).map_err(|e| Failure::Internal(e.to_string()))?);
            } else {
                writeln!(out, "[{}] {:?} {} ({} / {} generators)", if r.passed { "PASS" } else { "FAIL" }, r.kind, r.name, r.sizes.0, r.sizes.1)?;
            }
        }
    }
    if a.json {
        emit_json(out, "verify", json!({ "passed": all_ok, "seeds": seeds_json, "relations": rel_json }))?;
    }
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Verification("verification failed".into()))
    }
}

fn cmd_crosscheck(a: &CrosscheckArgs, out: &mut dyn Write) -> CmdResult {
    let spec = CurveSystemSpec::parse(&a.right, &a.left)?;
    let c = crosscheck(&spec)?;
    if a.json {
        let body = serde_json::to_value(&c).map_err(|e| Failure::Internal(e.to_string()))?;
        emit_json(out, "crosscheck", body)?;
    } else {
        writeln!(out, "curve system: {spec}")?;
        writeln!(out, "word: {}", if c.word.is_empty() { "(identity)" } else { &c.word })?;
        writeln!(out, "HH(N(word⁻¹)): {} graded {:?}", c.hh_total, c.hh_graded)?;
        writeln!(out, "HF by degree: {:?} total {}", c.hf.degrees, c.hf.total)?;
        writeln!(out, "totals match: {}", c.totals_match)?;
        writeln!(out, "HH grade g vs HF grade g+1: {:?}", c.shifted_grades_match)?;
        writeln!(out, "graded match up to shift: {:?}", c.grades_match_up_to_shift)?;
    }
    if c.totals_match {
        Ok(())
    } else {
        Err(Failure::Verification("HH and HF ranks differ".into()))
    }
}

fn cmd_classify(a: &ClassifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let w = parse_word(&a.word)?;
    let _ = writeln!(err, "computing {} powers", a.max_power);
    let c = classify(&w, a.max_power)?;
    if a.json {
        return emit_json(
            out,
            "classify",
            json!({ "word": w.to_string(), "ranks": c.ranks, "verdict": c.verdict, "heuristic": true }),
        );
    }
    writeln!(out, "ranks: {:?}", c.ranks)?;
    writeln!(out, "verdict (heuristic): {}", c.verdict.describe())?;
    Ok(())
}

fn read_bimodule(path: &PathBuf) -> Result<DABimodule, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
    Ok(parse_bimodule(&text, &mut Registry::standard())?)
}

fn write_bimodule(m: &DABimodule, path: &Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let text = serialize_bimodule(m);
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_reduce(a: &ReduceArgs, out: &mut dyn Write) -> CmdResult {
    let m = read_bimodule(&a.input)?;
    write_bimodule(&reduce(&m), &a.out, out)
}

fn cmd_tensor(a: &TensorArgs, out: &mut dyn Write) -> CmdResult {
    if a.inputs.len() != 2 {
        return Err(Failure::BadInput(format!("tensor needs exactly two --in files, got {}", a.inputs.len())));
    }
    let (m, n) = (read_bimodule(&a.inputs[0])?, read_bimodule(&a.inputs[1])?);
    let t = box_tensor(&m, &n).map_err(|e| Failure::BadInput(e.to_string()))?;
    write_bimodule(&t, &a.out, out)
}

fn cmd_dump(a: &DumpArgs, out: &mut dyn Write) -> CmdResult {
    let m = builtin(&a.name)?;
    write_bimodule(&m, &None, out)
}

/// Entry point for the binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("dafloer").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn identity_hh() {
        let (code, out, _) = run_capture(&["hh", "--word", "", "--graded"]);
        assert_eq!(code, 0);
        assert!(out.contains("rank HH = 4"));
        assert!(out.contains("grade 0: 4"));
    }

    #[test]
    fn bad_inputs() {
        assert_eq!(run_capture(&["hh", "--word", "A Q"]).0, EXIT_BAD_INPUT);
        assert_eq!(run_capture(&["crosscheck", "--right", "A", "--left", "B"]).0, EXIT_BAD_INPUT);
        assert_eq!(run_capture(&["dump", "--name", "nope"]).0, EXIT_BAD_INPUT);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_BAD_INPUT);
        assert_eq!(run_capture(&["classify", "--word", "A", "--max-power", "2"]).0, EXIT_BAD_INPUT);
    }

    #[test]
    fn json_is_versioned() {
        let (code, out, _) = run_capture(&["crosscheck", "--right", "A,B,C,D", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["hh_total"], 1);
        assert_eq!(v["hf"]["total"], 1);
    }
}
