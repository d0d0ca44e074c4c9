//! `lientropy`: entropy certificates, Jordan decompositions and brute-force
//! oracles from the command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `verify` ran and at least one property failed |
//! | 2 | input or validation error (unreadable file, parse error, ERROR finding, bad flag) |
//! | 3 | numeric failure (non-convergence, singular matrix, overflow) |
//! | 4 | budget exhausted (estimate wall budget ran out; partial table still printed) |
//!
//! Results go to standard output as JSON (or CSV for `estimate --format csv`).
//! Diagnostics, banners and timings go to standard error only, so standard
//! output is byte-identical across runs with the same inputs and flags.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lientropy::group::DESCRIPTOR_SCHEMA;
use lientropy::linalg::eigenvalues;
use lientropy::oracle::{
    adjoint_matrix, conjugation_recurrent_membership, estimate_entropy, li_yorke_search,
    recurrence_check, verify_adjoint_jordan_with, EstimateConfig, RecurrenceReport,
};
use lientropy::verify::{run_verify_seeded, VerifyLevel, DEFAULT_SEED};
use lientropy::{
    compute_with, multiplicative_jordan, recurrent_subspace, Descriptor, Error, IntegerMatrix,
    LogBase, RealMatrix, Tolerances,
};

const EXIT_OK: u8 = 0;
const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(
    name = "lientropy",
    version,
    about = "Topological entropy of Lie group endomorphisms"
)]
struct Cli {
    /// Print the JSON schema of descriptor files and exit.
    #[arg(long)]
    schema: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy certificate for a group/endomorphism descriptor file.
    Compute(ComputeArgs),
    /// Multiplicative Jordan decomposition g = e·h·u of a real matrix.
    Jordan(MatrixArgs),
    /// Recurrent subspace of a linear map, or recurrent-set membership for a
    /// conjugation.
    Recurrent(RecurrentArgs),
    /// Adjoint matrix of g and the Jordan compatibility check.
    Adjoint(AdjointArgs),
    /// Separated-set entropy estimate of a torus map.
    Estimate(EstimateArgs),
    /// Search for a Li-Yorke pair of a torus map.
    Liyorke(LiYorkeArgs),
    /// Run the built-in property suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ComputeArgs {
    /// Descriptor JSON file (see --schema).
    path: PathBuf,
    /// Logarithm base of the reported value; overrides the file.
    #[arg(long, value_parser = ["e", "2"])]
    log_base: Option<String>,
    /// Decide zero entropy of small lattice maps from the characteristic
    /// polynomial.
    #[arg(long)]
    exact_cyclotomic: bool,
    /// Relative rank tolerance; overrides the file [default from file, else 1e-9].
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct MatrixArgs {
    /// JSON file holding a square matrix as an array of rows.
    path: Option<PathBuf>,
    /// The matrix inline, e.g. '[[1,1],[0,1]]'.
    #[arg(long, conflicts_with = "path")]
    matrix: Option<String>,
}

#[derive(Args)]
struct RecurrentArgs {
    #[command(flatten)]
    input: MatrixArgs,
    /// Treat the matrix as a group element g and test the probes against the
    /// recurrent set of the conjugation x ↦ g·x·g⁻¹.
    #[arg(long)]
    conjugation: bool,
    /// Probe matrix for --conjugation, inline JSON; repeatable.
    #[arg(long = "probe", requires = "conjugation")]
    probes: Vec<String>,
    /// Commutator tolerance for --conjugation.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Also run the orbit recurrence check on every basis vector.
    #[arg(long, conflicts_with = "conjugation")]
    check: bool,
    /// Orbit length for --check.
    #[arg(long, default_value_t = 100_000)]
    n_max: u64,
    /// Return radius for --check.
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
}

#[derive(Args)]
struct AdjointArgs {
    #[command(flatten)]
    input: MatrixArgs,
    /// Relative rank tolerance of the Jordan decompositions.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: MatrixArgs,
    #[arg(long, default_value_t = 14)]
    n_max: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Grid points per coordinate.
    #[arg(long, default_value_t = 200)]
    grid: u64,
    /// Wall-clock limit in seconds; finished rows are kept when it runs out.
    #[arg(long)]
    wall_budget: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct LiYorkeArgs {
    #[command(flatten)]
    input: MatrixArgs,
    /// Map applications allowed in total.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Fast,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Level::Fast)]
    level: Level,
    /// Seed of the random samples.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

/// A failure with its exit code; the message goes to standard error.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::BudgetExceeded(_) => EXIT_BUDGET,
            e if e.is_input_error() => EXIT_INPUT,
            _ => EXIT_NUMERIC,
        };
        let mut message = format!("error: {}: {e}", e.code());
        if let Error::ValidationFailed(report) = &e {
            for f in &report.findings {
                message.push_str(&format!("\n  {} {}: {}", f.severity, f.code, f.message));
            }
        }
        Failure { code, message }
    }
}

fn input_failure(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: format!("error: {message}"),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| {
        Failure::from(Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    })
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| input_failure(format!("cannot read {}: {e}", path.display())))
}

impl MatrixArgs {
    fn text(&self) -> Result<String, Failure> {
        match (&self.path, &self.matrix) {
            (Some(p), _) => read_file(p),
            (None, Some(m)) => Ok(m.clone()),
            (None, None) => Err(input_failure("give a matrix file or --matrix".into())),
        }
    }

    fn real(&self) -> Result<RealMatrix, Failure> {
        parse_json(&self.text()?)
    }

    fn integer(&self) -> Result<IntegerMatrix, Failure> {
        parse_json(&self.text()?)
    }
}

fn emit<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("results serialize");
    write_stdout(&format!("{text}\n"))
}

/// A closed pipe on standard output is not an error worth reporting.
fn write_stdout(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(input_failure(format!("cannot write output: {e}")))
        }
        _ => Ok(()),
    }
}

fn tolerances(tol: f64) -> Tolerances {
    Tolerances {
        relative: tol,
        ..Tolerances::default()
    }
}

fn run_compute(args: &ComputeArgs) -> Result<u8, Failure> {
    let mut d = Descriptor::from_json(&read_file(&args.path)?)?;
    if let Some(base) = &args.log_base {
        d.options.log_base = base.parse::<LogBase>().map_err(input_failure)?;
    }
    if args.exact_cyclotomic {
        d.options.exact_cyclotomic = true;
    }
    if let Some(tol) = args.tol {
        d.options.tolerances.relative = tol;
    }
    let cert = compute_with(&d.group, &d.endo, &d.options)?;
    if cert.conjectural {
        eprintln!("********************************************************");
        eprintln!("* CONJECTURAL: this value rests on an unproven formula *");
        eprintln!("********************************************************");
    }
    write_stdout(&format!("{}\n", cert.to_json()))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct JordanOutput {
    #[serde(flatten)]
    decomposition: lientropy::MultiplicativeJordan,
    residuals: lientropy::jordan::JordanResiduals,
}

fn run_jordan(args: &MatrixArgs) -> Result<u8, Failure> {
    let m = args.real()?;
    let decomposition = multiplicative_jordan(&m)?;
    let residuals = decomposition.residuals()?;
    emit(&JordanOutput {
        decomposition,
        residuals,
    })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RecurrentOutput {
    subspace: lientropy::Subspace,
    #[serde(skip_serializing_if = "Option::is_none")]
    checks: Option<Vec<RecurrenceReport>>,
}

#[derive(Serialize)]
struct MembershipOutput {
    g: RealMatrix,
    tolerance: f64,
    probes: Vec<Membership>,
}

#[derive(Serialize)]
struct Membership {
    probe: RealMatrix,
    member: bool,
}

fn run_recurrent(args: &RecurrentArgs) -> Result<u8, Failure> {
    let m = args.input.real()?;
    if args.conjugation {
        if args.probes.is_empty() {
            return Err(input_failure(
                "--conjugation needs at least one --probe".into(),
            ));
        }
        let mut probes = Vec::with_capacity(args.probes.len());
        for text in &args.probes {
            let probe: RealMatrix = parse_json(text)?;
            let member = conjugation_recurrent_membership(&m, &probe, args.tol)?;
            probes.push(Membership { probe, member });
        }
        emit(&MembershipOutput {
            g: m,
            tolerance: args.tol,
            probes,
        })?;
        return Ok(EXIT_OK);
    }
    let subspace = recurrent_subspace(&m)?;
    let checks = if args.check {
        let mut reports = Vec::with_capacity(subspace.basis.len());
        for v in &subspace.basis {
            reports.push(recurrence_check(&m, v, args.n_max, args.delta)?);
        }
        Some(reports)
    } else {
        None
    };
    emit(&RecurrentOutput { subspace, checks })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AdjointOutput {
    adjoint: RealMatrix,
    spectral_radius: f64,
    jordan_check: lientropy::oracle::AdjointJordanReport,
}

fn run_adjoint(args: &AdjointArgs) -> Result<u8, Failure> {
    let g = args.input.real()?;
    let tol = tolerances(args.tol);
    let adjoint = adjoint_matrix(&g)?;
    let spectral_radius = eigenvalues(&adjoint, &tol)?.spectral_radius();
    let jordan_check = verify_adjoint_jordan_with(&g, &tol)?;
    emit(&AdjointOutput {
        adjoint,
        spectral_radius,
        jordan_check,
    })?;
    Ok(EXIT_OK)
}

fn run_estimate(args: &EstimateArgs) -> Result<u8, Failure> {
    let t = args.input.integer()?;
    let wall_budget = match args.wall_budget {
        Some(s) if !(s >= 0.0 && s.is_finite()) => {
            return Err(input_failure(format!(
                "--wall-budget must be a nonnegative number, got {s}"
            )))
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    let config = EstimateConfig {
        n_max: args.n_max,
        epsilon: args.epsilon,
        grid_resolution: args.grid,
        wall_budget,
    };
    let est = estimate_entropy(&t, &config)?;
    match args.format {
        Format::Json => emit(&est)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            for row in &est.per_n {
                w.serialize(row)
                    .map_err(|e| input_failure(format!("cannot write CSV: {e}")))?;
            }
            w.flush()
                .map_err(|e| input_failure(format!("cannot write CSV: {e}")))?;
        }
    }
    if est.wall_budget_exhausted {
        eprintln!(
            "wall budget exhausted after {} of {} rows",
            est.per_n.len(),
            args.n_max
        );
        return Ok(EXIT_BUDGET);
    }
    Ok(EXIT_OK)
}

fn run_liyorke(args: &LiYorkeArgs) -> Result<u8, Failure> {
    let t = args.input.integer()?;
    let search = li_yorke_search(&t, args.budget, args.delta)?;
    if search.witness.is_none() {
        eprintln!(
            "no witness within budget {}: {}",
            search.budget, search.caveat
        );
    }
    emit(&search)?;
    Ok(EXIT_OK)
}

fn run_verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let level = match args.level {
        Level::Fast => VerifyLevel::Fast,
        Level::Full => VerifyLevel::Full,
    };
    let report = run_verify_seeded(level, args.seed);
    for p in report.properties.iter().filter(|p| !p.passed) {
        eprintln!(
            "FAIL {}: residual {} > tolerance {} ({})",
            p.name, p.residual, p.tolerance, p.detail
        );
    }
    emit(&report)?;
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.schema {
        return match write_stdout(DESCRIPTOR_SCHEMA) {
            Ok(()) => ExitCode::from(EXIT_OK),
            Err(f) => ExitCode::from(f.code),
        };
    }
    let Some(command) = cli.command else {
        eprintln!("error: give a subcommand or --schema (see --help)");
        return ExitCode::from(EXIT_INPUT);
    };
    let start = Instant::now();
    let result = match &command {
        Command::Compute(a) => run_compute(a),
        Command::Jordan(a) => run_jordan(a),
        Command::Recurrent(a) => run_recurrent(a),
        Command::Adjoint(a) => run_adjoint(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Liyorke(a) => run_liyorke(a),
        Command::Verify(a) => run_verify(a),
    };
    let _ = std::io::stdout().flush();
    let code = match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.message);
            f.code
        }
    };
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(code)
}
