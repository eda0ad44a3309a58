//! Command-line front end for `teamlmi`.
//!
//! Exit codes: `0` success, `1` input error, `2` bracket failure (the
//! optimal value appears to lie at or above the signaling ceiling), `3`
//! ill-posed gain.

pub mod files;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use teamlmi::model::ModelError;
use teamlmi::oracle::{self, OracleError};
use teamlmi::solver::{self, SolveError, SolverConfig};
use teamlmi::lmi::{self, LmiError};
use teamlmi::{corpus, BlockGain};

use files::{gain_rows, Problem};
use report::{Scalar, SolveReportFile, SolverMeta, TraceRecord, VerifyReportFile, WitnessRecord};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Bracket(String),
    #[error("{0}")]
    IllPosed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Bracket(_) => 2,
            CliError::IllPosed(_) => 3,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BracketInfeasible { .. } | SolveError::NoUpperBracket => CliError::Bracket(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "teamlmi", version, about = "Optimal linear strategies for minimax LQ team problems")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Bisection tolerance on gamma.
    #[arg(long, global = true, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// No human-readable summary on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the optimal gain by bisection on gamma.
    Solve {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        gamma_lo: Option<f64>,
        #[arg(long)]
        gamma_hi: Option<f64>,
    },
    /// Evaluate a given gain exactly and produce a worst-case disturbance.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Gain file: list of blocks, {"blocks": [...]}, or a solve report.
        #[arg(long)]
        gain: PathBuf,
    },
    /// Lift a dynamic problem file to a static team problem file.
    Lift { input: PathBuf },
    /// Print the signaling ceiling gamma_bar ("inf" when there is no signaling).
    GammaBar {
        #[command(flatten)]
        source: Source,
    },
    /// Write a built-in problem file.
    Example {
        name: ExampleName,
        #[arg(long, default_value_t = 0.1)]
        k2: f64,
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    Witsenhausen,
    Multistage,
    MultistageDynamic,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Problem file (JSON).
    #[arg(required_unless_present = "example", conflicts_with = "example")]
    pub input: Option<PathBuf>,
    /// Use a built-in problem instead of a file.
    #[arg(long)]
    pub example: Option<ExampleName>,
    #[arg(long, default_value_t = 0.1)]
    pub k2: f64,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
}

fn example_problem(name: ExampleName, k2: f64, m: usize) -> Result<Problem, CliError> {
    let bad = |e: corpus::CorpusError| CliError::Input(e.to_string());
    Ok(match name {
        ExampleName::Witsenhausen => Problem::GammaForm(corpus::witsenhausen(k2).map_err(bad)?),
        ExampleName::Multistage => Problem::Team(corpus::multistage(m).map_err(bad)?),
        ExampleName::MultistageDynamic => Problem::Dynamic(corpus::multistage_dynamic(m).map_err(bad)?),
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load(source: &Source) -> Result<Problem, CliError> {
    match (&source.input, source.example) {
        (_, Some(name)) => example_problem(name, source.k2, source.m),
        (Some(path), None) => files::parse_problem(&read(path)?, &path.display().to_string()),
        (None, None) => Err(CliError::Input("no input file or --example given".into())),
    }
}

/// What a command produced: the main output plus a one-line summary.
pub struct Outcome {
    pub body: String,
    pub summary: String,
    /// Nonzero when the command completed but the result signals a problem
    /// (an ill-posed gain in `verify`).
    pub code: i32,
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    files::pretty_json(v)
}

pub fn cmd_solve(
    problem: &Problem,
    cfg: &SolverConfig,
) -> Result<(SolveReportFile, teamlmi::SolveReport), CliError> {
    let gform = problem.gamma_form()?;
    let team = problem.team()?;
    let start = Instant::now();
    let rep = solver::bisect_gamma(&gform, cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let file = SolveReportFile {
        command: "solve".into(),
        problem_kind: problem.kind().into(),
        gamma_star: rep.gamma_star,
        gamma_bar: Scalar(rep.gamma_bar),
        gain: gain_rows(&rep.gain),
        gain_norm: rep.gain_norm,
        lmi_margin: rep.lmi_margin,
        feas_threshold: rep.feas_threshold,
        oracle_gamma: Scalar(rep.oracle_gamma),
        well_posed: team.as_ref().map(|t| oracle::well_posed(t, &rep.gain)),
        bisection_trace: rep.bisection_trace.iter().map(TraceRecord::from).collect(),
        solver: SolverMeta {
            seed: cfg.seed,
            gamma_tol: cfg.gamma_tol,
            feas_tol: cfg.feas_tol,
            inner_tol: cfg.inner_tol,
            max_outer: cfg.max_outer,
            max_inner: cfg.max_inner,
            gamma_lo: cfg.gamma_lo,
            gamma_hi: cfg.gamma_hi,
            inner_iterations: rep.inner_iterations,
            converged: rep.converged,
            wall_time_s: wall,
        },
    };
    Ok((file, rep))
}

pub fn cmd_verify(problem: &Problem, gain: &BlockGain) -> Result<VerifyReportFile, CliError> {
    let gform = problem.gamma_form()?;
    let team = problem.team()?;
    gain.check(&gform.partition)
        .map_err(|e| CliError::Input(format!("gain: {e}")))?;
    let achieved = oracle::achieved_gamma(&gform, gain).map_err(|e| CliError::Input(e.to_string()))?;
    let gamma_bar = gform.gamma_bar()?;
    let well_posed = team.as_ref().map(|t| oracle::well_posed(t, gain));

    let witness = match oracle::worst_case_point(&gform, gain) {
        Ok(pt) => {
            let (w, v) = match (&team, well_posed) {
                (Some(t), Some(true)) => {
                    let wit = oracle::worst_case_witness(t, gain).map_err(|e| CliError::Input(e.to_string()))?;
                    (Some(wit.w.as_slice().to_vec()), Some(wit.v.as_slice().to_vec()))
                }
                _ => (None, None),
            };
            Some(WitnessRecord {
                x: pt.x.as_slice().to_vec(),
                u: pt.u.as_slice().to_vec(),
                w,
                v,
                ratio: pt.ratio,
                w_degenerate: pt.w_degenerate,
            })
        }
        Err(OracleError::Unbounded) => None,
        Err(e) => return Err(CliError::Input(e.to_string())),
    };

    let (lmi_margin, feas_threshold) = if achieved.is_finite() && achieved < gamma_bar {
        match (
            lmi::feasibility_margin(&gform, gain, achieved),
            lmi::feasibility_threshold(&gform, achieved, lmi::FEAS_RTOL),
        ) {
            (Ok(margin), Ok(thr)) => (Some(margin), Some(thr)),
            (Err(LmiError::QuuNotPd { .. }), _) | (_, Err(LmiError::QuuNotPd { .. })) => (None, None),
            (Err(e), _) | (_, Err(e)) => return Err(CliError::Input(e.to_string())),
        }
    } else {
        (None, None)
    };

    Ok(VerifyReportFile {
        command: "verify".into(),
        problem_kind: problem.kind().into(),
        gain: gain_rows(gain),
        oracle_gamma: Scalar(achieved),
        gamma_bar: Scalar(gamma_bar),
        well_posed,
        witness,
        lmi_margin,
        feas_threshold,
    })
}

pub fn cmd_lift(problem: &Problem) -> Result<Problem, CliError> {
    match problem {
        Problem::Dynamic(d) => Ok(Problem::Team(
            teamlmi::lift_dynamic(d).map_err(|e| CliError::Input(format!("lifting failed: {e}")))?,
        )),
        other => Err(CliError::Input(format!(
            "lift expects a dynamic problem, got kind {:?}",
            other.kind()
        ))),
    }
}

pub fn cmd_gamma_bar(problem: &Problem) -> Result<f64, CliError> {
    Ok(problem.gamma_form()?.gamma_bar()?)
}

/// Run a parsed command and return its output without touching the
/// filesystem beyond reading inputs.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Solve { source, gamma_lo, gamma_hi } => {
            let problem = load(source)?;
            let cfg = SolverConfig {
                gamma_tol: cli.tol,
                gamma_lo: *gamma_lo,
                gamma_hi: *gamma_hi,
                seed: cli.seed,
                ..Default::default()
            };
            let (file, rep) = cmd_solve(&problem, &cfg)?;
            Ok(Outcome {
                summary: format!(
                    "gamma_star = {:.6}  oracle = {}  gamma_bar = {}  |K| = {:.4}",
                    rep.gamma_star,
                    Scalar(rep.oracle_gamma),
                    Scalar(rep.gamma_bar),
                    rep.gain_norm
                ),
                body: to_json(&file),
                code: 0,
            })
        }
        Command::Verify { source, gain } => {
            let problem = load(source)?;
            let gain = files::parse_gain(&read(gain)?, &gain.display().to_string(), &problem.partition()?)?;
            let file = cmd_verify(&problem, &gain)?;
            let ill = file.well_posed == Some(false);
            Ok(Outcome {
                summary: if ill {
                    "ill-posed gain: I - DK is singular".into()
                } else {
                    format!("oracle_gamma = {}  gamma_bar = {}", file.oracle_gamma, file.gamma_bar)
                },
                body: to_json(&file),
                code: if ill { 3 } else { 0 },
            })
        }
        Command::Lift { input } => {
            let problem = files::parse_problem(&read(input)?, &input.display().to_string())?;
            let lifted = cmd_lift(&problem)?;
            Ok(Outcome {
                body: files::serialize_problem(&lifted),
                summary: format!("lifted {} to a static team problem", input.display()),
                code: 0,
            })
        }
        Command::GammaBar { source } => {
            let v = cmd_gamma_bar(&load(source)?)?;
            Ok(Outcome {
                body: Scalar(v).to_string(),
                summary: format!("gamma_bar = {}", Scalar(v)),
                code: 0,
            })
        }
        Command::Example { name, k2, m } => {
            let problem = example_problem(*name, *k2, *m)?;
            Ok(Outcome {
                body: files::serialize_problem(&problem),
                summary: format!("{} problem file", problem.kind()),
                code: 0,
            })
        }
    }
}

/// Full command-line entry point. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        let _ = writeln!(stderr, "error: --tol must be positive, got {}", cli.tol);
        return 1;
    }
    match execute(&cli) {
        Ok(out) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, format!("{}\n", out.body)),
                None => writeln!(stdout, "{}", out.body),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 1;
            }
            if !cli.quiet {
                let _ = writeln!(stderr, "{}", out.summary);
            }
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
