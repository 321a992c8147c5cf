//! `qudit-extract`: decompose stabilizer-group files, print subsystem phase
//! matrices, replay operation logs and emit random groups.
//!
//! Exit codes: 0 success, 1 oracle fidelity below `1 - 1e-8`, 2 unreadable
//! or invalid input, 3 engine failure, 4 oracle dimension cap exceeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qudit_extract::clifford::OperationLog;
use qudit_extract::decompose::{run, DecompositionReport, EngineConfig};
use qudit_extract::groupfile::{parse_group, print_group};
use qudit_extract::linalg::{ModMatrix, RingParams};
use qudit_extract::oracle::{random_stabilizer_group, verify_log, RandomGroupParams, DEFAULT_DIM_CAP};
use qudit_extract::spm::{compute_spm, project_mod_p};
use qudit_extract::stabilizer::StabilizerGroup;
use qudit_extract::Error;

#[derive(Parser)]
#[command(name = "qudit-extract", version, about = "Entanglement extraction for prime-power qudit stabilizer states")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decompose a group into GHZ states, EPR pairs and |0> factors.
    Decompose(DecomposeArgs),
    /// Print the subsystem phase matrices and their mod-p projections.
    Spm {
        file: PathBuf,
        /// Emit JSON instead of the text block.
        #[arg(long)]
        json: bool,
    },
    /// Replay an operation log (or a decomposition report) on a group.
    Verify {
        group: PathBuf,
        log: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
        cap: u64,
    },
    /// Emit a random pure stabilizer group as a group file.
    Random(RandomArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    file: PathBuf,
    /// Replay the log on the dense oracle.
    #[arg(long)]
    verify: bool,
    /// Recorded in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration bound; defaults to n(2N + 1).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Largest D^N the oracle may allocate.
    #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
    cap: u64,
    /// Include each iteration's phase matrices in the trace.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long)]
    d: u64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    parties: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// At most this many generators; must be at least N.
    #[arg(long)]
    gens_max: Option<usize>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::InvalidModulus(..)
            | Error::InvalidPhase(_)
            | Error::InvalidGroup(_)
            | Error::UnknownParty(_)
            | Error::DimensionMismatch(_)
            | Error::RingMismatch(..) => 2,
            Error::DimensionCap { .. } => 4,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Parses and validates; validation failures are reported verbatim.
fn load_group(path: &Path) -> Result<StabilizerGroup, Failure> {
    let s = parse_group(&read(path)?)?;
    let report = s.validate();
    if !report.is_valid() {
        return Err(Failure::input(report.describe()));
    }
    Ok(s)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure { code: 3, message: format!("{}: {e}", p.display()) }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure { code: 3, message: e.to_string() })
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize") + "\n"
}

fn oracle_dim(d: u64, n: usize) -> Option<u64> {
    d.checked_pow(n as u32)
}

fn check_cap(d: u64, n: usize, cap: u64) -> Result<(), Failure> {
    match oracle_dim(d, n) {
        Some(dim) if dim <= cap => Ok(()),
        dim => Err(Failure {
            code: 4,
            message: format!(
                "oracle dimension {}^{n} = {} exceeds cap {cap}",
                d,
                dim.map_or("overflow".to_string(), |x| x.to_string())
            ),
        }),
    }
}

fn cmd_decompose(a: &DecomposeArgs) -> CmdResult {
    let s = load_group(&a.file)?;
    if a.verify {
        check_cap(s.ring.d(), s.n, a.cap)?;
    }
    let config =
        EngineConfig { max_iterations: a.max_iter, verify: a.verify, cap: a.cap, seed: a.seed, trace_spm: a.trace };
    let report = run(&s, &config)?;
    emit(&to_json(&report), a.out.as_deref())?;
    Ok(if report.verified_ok() { 0 } else { 1 })
}

fn matrix_rows(m: &ModMatrix) -> Vec<Vec<u64>> {
    m.rows_vec()
}

fn text_block(out: &mut String, name: &str, m: &ModMatrix) {
    if m.rows == 0 {
        out.push_str(&format!("{name} = []\n"));
        return;
    }
    out.push_str(&format!("{name} =\n"));
    let width = m.rows_vec().iter().flatten().map(|x| x.to_string().len()).max().unwrap_or(1);
    for row in m.rows_vec() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:>width$}")).collect();
        out.push_str(&format!("  {}\n", cells.join(" ")));
    }
}

fn cmd_spm(file: &Path, as_json: bool) -> CmdResult {
    let s = load_group(file)?;
    let spm = compute_spm(&s);
    spm.check_invariants()?;
    let projected = if s.ring.is_prime_power() { Some(project_mod_p(&spm)?) } else { None };
    let p = s.ring.p();
    let text = if as_json {
        let parties: Vec<Value> = spm
            .labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                json!({
                    "party": label,
                    "m": matrix_rows(&spm.mats[i]),
                    "m_mod_p": projected.as_ref().map(|pr| matrix_rows(&pr.mats[i])),
                })
            })
            .collect();
        to_json(&json!({ "d": s.ring.d(), "p": p, "num_gens": spm.num_gens(), "parties": parties }))
    } else {
        let mut out = format!("d = {}, generators = {}\n", s.ring.d(), spm.num_gens());
        for (i, label) in spm.labels.iter().enumerate() {
            text_block(&mut out, &format!("M_{label}"), &spm.mats[i]);
            match (&projected, p) {
                (Some(pr), Some(p)) => text_block(&mut out, &format!("M'_{label} (mod {p})"), &pr.mats[i]),
                _ => out.push_str(&format!("M'_{label}: undefined for composite D\n")),
            }
        }
        out
    };
    emit(&text, None)?;
    Ok(0)
}

/// Accepts a bare operation log or a full decomposition report. A composite
/// report is checked factor by factor and prints one verification per factor.
fn cmd_verify(group: &Path, log: &Path, cap: u64) -> CmdResult {
    let s = load_group(group)?;
    let text = read(log)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", log.display())))?;
    let bad_log = |e: serde_json::Error| Failure::input(format!("{}: {e}", log.display()));
    let pairs: Vec<(StabilizerGroup, OperationLog)> = if value.get("entries").is_some() {
        vec![(s, serde_json::from_value(value).map_err(bad_log)?)]
    } else {
        let report: DecompositionReport = serde_json::from_value(value).map_err(bad_log)?;
        if report.d != s.ring.d() {
            return Err(Failure::input(format!("report is for D = {}, group has D = {}", report.d, s.ring.d())));
        }
        if report.factors.is_empty() {
            vec![(s, report.log)]
        } else {
            let split = s.crt_split()?;
            if split.len() != report.factors.len() {
                return Err(Failure::input("report factors do not match the group's prime-power split"));
            }
            split.into_iter().zip(report.factors).map(|(g, f)| (g, f.log)).collect()
        }
    };
    let mut reports = Vec::new();
    for (g, l) in &pairs {
        check_cap(g.ring.d(), g.n, cap)?;
        reports.push(verify_log(g, l, cap)?);
    }
    let passed = reports.iter().all(|r| r.passed);
    let text = if reports.len() == 1 { to_json(&reports[0]) } else { to_json(&reports) };
    emit(&text, None)?;
    Ok(if passed { 0 } else { 1 })
}

fn cmd_random(a: &RandomArgs) -> CmdResult {
    let ring = RingParams::new(a.d)?;
    if a.n == 0 {
        return Err(Failure::input("--n must be positive"));
    }
    if !(1..=8).contains(&a.parties) {
        return Err(Failure::input("--parties must be between 1 and 8"));
    }
    if let Some(m) = a.gens_max {
        if m < a.n {
            return Err(Failure::input(format!(
                "--gens-max {m} is below N = {}; a pure group needs N generators",
                a.n
            )));
        }
    }
    let mut params = RandomGroupParams::new(ring, a.n, a.parties);
    params.max_gens = a.gens_max;
    let s = random_stabilizer_group(&params, a.seed);
    let header = format!(
        "# random group: d = {}, n = {}, parties = {}, seed = {}, gens-max = {}\n",
        a.d,
        a.n,
        a.parties,
        a.seed,
        a.gens_max.map_or("none".to_string(), |m| m.to_string())
    );
    emit(&(header + &print_group(&s)), None)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Decompose(a) => cmd_decompose(a),
        Cmd::Spm { file, json } => cmd_spm(file, *json),
        Cmd::Verify { group, log, cap } => cmd_verify(group, log, *cap),
        Cmd::Random(a) => cmd_random(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("qudit-extract: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
