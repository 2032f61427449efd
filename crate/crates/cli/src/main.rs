//! `closure`: informational-closure analysis of discrete stochastic systems.
//!
//! Exit status is 0 when the analysis finds the system closed (or every
//! check passes), 3 when it is open (or a check fails) and 1 on any usage or
//! input error.

use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use closure_core::report::{self, AnalysisOptions, ClosureReport, FdReport};
use closure_core::{
    sample, scenarios, Bits, Estimator, FunctionTable, MarkovScenario, TrajectorySet, EMPIRICAL_TOLERANCE,
    EXACT_TOLERANCE, RNG_ALGORITHM,
};

const EXIT_CLOSED: u8 = 0;
const EXIT_OPEN: u8 = 3;
const EXIT_ERROR: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "closure", version, about = "Informational closure analysis for discrete Markov systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze a scenario or trajectory file at one step.
    Analyze {
        #[command(flatten)]
        input: AnalysisInput,
        /// Time step to analyze.
        #[arg(long, default_value_t = 0)]
        step: usize,
        #[command(flatten)]
        common: AnalysisFlags,
    },
    /// Analyze every step of a range, e.g. `0..10` or `0..=10`.
    Sweep {
        #[command(flatten)]
        input: AnalysisInput,
        #[arg(long, value_parser = parse_steps)]
        steps: Range<usize>,
        #[command(flatten)]
        common: AnalysisFlags,
    },
    /// Draw Monte Carlo trajectories from a scenario.
    Sample {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Minimal determinant sets of a function table.
    Fd {
        #[arg(long)]
        table: PathBuf,
        /// Comma-separated inputs that belong to the outer environment.
        #[arg(long, value_delimiter = ',')]
        environment: Option<Vec<String>>,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Run the seeded identity suite and derivation-chain checks.
    Verify {
        #[arg(long, default_value_t = report::DEFAULT_VERIFY_SEED)]
        seed: u64,
        #[arg(long, default_value_t = EXACT_TOLERANCE.0)]
        tolerance: f64,
        #[command(flatten)]
        out: OutputFlags,
    },
}

#[derive(Args, Debug)]
struct AnalysisInput {
    /// Scenario JSON file, or `builtin:NAME` for a bundled scenario. With
    /// `--trajectories` it supplies the variable schema.
    #[arg(long)]
    scenario: String,
    /// Trajectory CSV to estimate from instead of exact propagation.
    #[arg(long)]
    trajectories: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EstimatorArg::PlugIn)]
    estimator: EstimatorArg,
}

#[derive(Args, Debug)]
struct AnalysisFlags {
    /// Closure tolerance in bits [default: 1e-9 exact, 0.01 empirical].
    #[arg(long)]
    tolerance: Option<f64>,
    /// Ceiling on system-environment mutual information, in bits.
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    out: OutputFlags,
}

#[derive(Args, Debug)]
struct OutputFlags {
    #[arg(long, value_enum, env = "CLOSURE_FORMAT", default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    PlugIn,
    MillerMadow,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::PlugIn => Estimator::PlugIn,
            EstimatorArg::MillerMadow => Estimator::MillerMadow,
        }
    }
}

fn parse_steps(text: &str) -> Result<Range<usize>, String> {
    let (a, b, inclusive) = if let Some((a, b)) = text.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = text.split_once("..") {
        (a, b, false)
    } else {
        return Err(format!("expected A..B or A..=B, got '{text}'"));
    };
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("'{s}' is not a step"));
    let (a, b) = (parse(a)?, parse(b)?);
    let end = if inclusive { b + 1 } else { b };
    if end <= a {
        return Err(format!("step range '{text}' is empty"));
    }
    Ok(a..end)
}

fn load_scenario(source: &str) -> Result<MarkovScenario> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return scenarios::bundled(name).ok_or_else(|| {
            anyhow!(
                "unknown bundled scenario '{name}' (available: {})",
                scenarios::BUNDLED.join(", ")
            )
        });
    }
    let text = fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
    MarkovScenario::from_json(&text).with_context(|| source.to_owned())
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: &OutputFlags, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn verdict(ok: bool) -> u8 {
    if ok {
        EXIT_CLOSED
    } else {
        EXIT_OPEN
    }
}

fn analysis(input: &AnalysisInput, steps: Range<usize>, flags: &AnalysisFlags) -> Result<u8> {
    let scenario = load_scenario(&input.scenario)?;
    let default_tolerance = if input.trajectories.is_some() {
        EMPIRICAL_TOLERANCE
    } else {
        EXACT_TOLERANCE
    };
    let opts = AnalysisOptions {
        tolerance: flags.tolerance.map(Bits).unwrap_or(default_tolerance),
        delta: flags.delta.map(Bits),
    };
    let report: ClosureReport = match &input.trajectories {
        Some(path) => {
            let traj = TrajectorySet::from_csv(open(path)?, scenario.partition())
                .with_context(|| format!("{}", path.display()))?;
            report::analyze_trajectories(
                &traj,
                steps,
                opts,
                input.estimator.into(),
                Some(&scenario.fingerprint()),
            )?
        }
        None => report::analyze_scenario(&scenario, steps, opts)?,
    };
    for w in &report.warnings {
        eprintln!("warning[{}]: {}", w.code, w.message);
    }
    let text = match flags.out.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json()?,
    };
    emit(&flags.out, &text)?;
    Ok(verdict(report.closed()))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { input, step, common } => analysis(&input, step..step + 1, &common),
        Command::Sweep { input, steps, common } => analysis(&input, steps, &common),
        Command::Sample {
            scenario,
            count,
            horizon,
            seed,
            out,
        } => {
            let sc = load_scenario(&scenario)?;
            let traj = sample(&sc, count, horizon, seed)?;
            let text = match out.format {
                Format::Text => traj.to_csv()?,
                Format::Json => {
                    let doc = serde_json::json!({
                        "tool": report::TOOL,
                        "version": report::VERSION,
                        "scenario": { "name": sc.name(), "fingerprint": sc.fingerprint() },
                        "seed": seed,
                        "rng_algorithm": RNG_ALGORITHM,
                        "count": count,
                        "horizon": horizon,
                        "columns": traj.columns(),
                        "rows": traj.records().collect::<Vec<_>>(),
                    });
                    serde_json::to_string_pretty(&doc)? + "\n"
                }
            };
            emit(&out, &text)?;
            Ok(EXIT_CLOSED)
        }
        Command::Fd {
            table,
            environment,
            out,
        } => {
            let t = FunctionTable::from_csv(open(&table)?).with_context(|| format!("{}", table.display()))?;
            let report = FdReport::build(&t, environment.as_deref())?;
            let text = match out.format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json()?,
            };
            emit(&out, &text)?;
            Ok(verdict(report.passed()))
        }
        Command::Verify { seed, tolerance, out } => {
            if tolerance.is_nan() || tolerance <= 0.0 {
                bail!("tolerance must be positive, got {tolerance}");
            }
            let report = report::verify(seed, Bits(tolerance))?;
            let text = match out.format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json()?,
            };
            emit(&out, &text)?;
            Ok(verdict(report.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_CLOSED });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
