//! `ks-stopping`: roots, bounds, simulations and verification suites for
//! the last-success problem under the Karamata-Stirling profile.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 failed
//! verification.

mod manifest;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ks_stopping::bounds::{table1, table1_csv, theorem_bounds_csv, TABLE1_KS};
use ks_stopping::policy::{
    cont_threshold, cutoffs, threshold_win_prob, win_prob_formula, IntensityModel, StrategySpec,
};
use ks_stopping::profile::ModelParams;
use ks_stopping::roots::{root_table_covering, root_table_with};
use ks_stopping::simulator::{
    compare_strategies, simulate_continuous, simulate_homogeneous, simulate_inhomogeneous, SimConfig, WinStats,
};
use ks_stopping::special::SeriesControl;
use ks_stopping::verify::{run_suite, Suite};
use ks_stopping::Error;

use manifest::{Command as ManifestCommand, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "ks-stopping", version, about = "Optimal last-success stopping under the Karamata-Stirling profile")]
struct Cli {
    /// Worker threads for root tables and simulations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the critical roots γ_1..γ_K and write them as CSV.
    Roots(RootsArgs),
    /// Emit the table of original and improved root bounds.
    BoundsTable(BoundsArgs),
    /// Run a Monte Carlo experiment.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Run a verification suite; exits 3 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct RootsArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    k_max: usize,
    /// Absolute bracket width for each root.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Relative truncation tolerance of the Kummer series.
    #[arg(long, default_value_t = 1e-14)]
    series_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct BoundsArgs {
    /// Comma-separated root indices, each at least 2.
    #[arg(long, value_delimiter = ',', default_values_t = TABLE1_KS)]
    ks: Vec<usize>,
    /// Evaluate the general-θ bounds instead of the θ = 1 comparison table.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    /// Required: runs are reproducible only from an explicit seed.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyChoice {
    Myopic,
    Immediate,
}

#[derive(Debug, Subcommand)]
enum SimulateCommand {
    /// Homogeneous arrivals with intensity λ.
    Homogeneous {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, value_enum, default_value_t = StrategyChoice::Myopic)]
        strategy: StrategyChoice,
        /// Shift every myopic cutoff by this amount.
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        /// Read cutoffs from a `k,cutoff` CSV instead.
        #[arg(long, conflicts_with_all = ["strategy", "delta"])]
        cutoffs: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Arrivals with intensity λ (constant) or (t + κ)^α.
    Inhomogeneous {
        #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["kappa", "alpha"])]
        lambda: Option<f64>,
        #[arg(long, allow_negative_numbers = true, requires = "alpha")]
        kappa: Option<f64>,
        #[arg(long, allow_negative_numbers = true, requires = "kappa")]
        alpha: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Success process with intensity κ(t + κ)^{α-1}, threshold rule.
    Continuous {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Myopic cutoffs against shifted cutoffs on common random numbers.
    Compare {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: SuiteChoice,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteChoice {
    Signs,
    Em,
    Identities,
    Monotone,
}

impl From<SuiteChoice> for Suite {
    fn from(s: SuiteChoice) -> Self {
        match s {
            SuiteChoice::Signs => Suite::Signs,
            SuiteChoice::Em => Suite::Em,
            SuiteChoice::Identities => Suite::Identities,
            SuiteChoice::Monotone => Suite::Monotone,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
            Failure::Verification => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Domain { .. } | Error::Parse { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage(flag: &str, detail: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("--{flag} {detail}"))
}

fn positive(flag: &str, v: f64) -> Outcome {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(flag, format!("must be a positive number (got {v})")))
    }
}

fn at_least_one(flag: &str, v: u64) -> Outcome {
    if v >= 1 {
        Ok(())
    } else {
        Err(usage(flag, "must be at least 1"))
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("--out {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_roots(a: &RootsArgs) -> Outcome {
    positive("theta", a.theta)?;
    at_least_one("k-max", a.k_max as u64)?;
    positive("tol", a.tol)?;
    let ctl = SeriesControl::new(a.series_tol, 10_000).map_err(|e| usage("series-tol", e))?;
    let table = root_table_with(a.k_max, a.theta, a.tol, ctl)?;
    emit(a.out.as_ref(), &table.to_csv())
}

fn cmd_bounds(a: &BoundsArgs) -> Outcome {
    if a.ks.is_empty() {
        return Err(usage("ks", "must list at least one index"));
    }
    if let Some(&k) = a.ks.iter().find(|&&k| k < 2) {
        return Err(usage("ks", format!("entries must be at least 2 (got {k})")));
    }
    let text = match a.theta {
        Some(theta) => {
            positive("theta", theta)?;
            theorem_bounds_csv(&a.ks, theta)?
        }
        None => table1_csv(&table1(&a.ks)?),
    };
    emit(a.out.as_ref(), &text)
}

fn sim_config(run: &RunArgs, ell: usize) -> std::result::Result<SimConfig, Failure> {
    at_least_one("trials", run.trials)?;
    at_least_one("ell", ell as u64)?;
    Ok(SimConfig::new(run.trials, run.seed, ell)?)
}

fn write_stats(out: &mut String, prefix: &str, s: &WinStats) {
    let _ = writeln!(out, "{prefix}trials={}", s.trials);
    let _ = writeln!(out, "{prefix}wins={}", s.wins);
    let _ = writeln!(out, "{prefix}p_hat={}", s.p_hat);
    let _ = writeln!(out, "{prefix}std_err={}", s.std_err);
}

fn cmd_simulate(cmd: &SimulateCommand) -> Outcome {
    match cmd {
        SimulateCommand::Homogeneous {
            lambda,
            theta,
            strategy,
            delta,
            cutoffs: cutoff_file,
            tol,
            run,
        } => {
            positive("lambda", *lambda)?;
            positive("theta", *theta)?;
            positive("tol", *tol)?;
            let cfg = sim_config(run, 1)?;
            let spec = match cutoff_file {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Failure::Usage(format!("--cutoffs {}: {e}", path.display())))?;
                    StrategySpec::from_csv(&text)?
                }
                None => {
                    let base = match strategy {
                        StrategyChoice::Myopic => cutoffs(*lambda, &root_table_covering(*theta, *tol, *lambda)?)?,
                        StrategyChoice::Immediate => StrategySpec::immediate(),
                    };
                    match delta {
                        Some(d) => base.perturbed(*d),
                        None => base,
                    }
                }
            };
            let params = ModelParams::new(*theta, *lambda)?;
            let stats = simulate_homogeneous(&params, &spec, &cfg)?;

            let mut m = RunManifest::new(ManifestCommand::SimulateHomogeneous, Some(run.seed), run.out.clone());
            m.param("lambda", lambda).param("theta", theta).param("trials", run.trials);
            match cutoff_file {
                Some(p) => m.param("cutoffs", p.display()),
                None => m.param("strategy", format!("{strategy:?}").to_lowercase()),
            };
            if let Some(d) = delta {
                m.param("delta", d);
            }
            let mut text = m.echo();
            let _ = writeln!(text, "strategy_kind={}", spec.kind());
            write_stats(&mut text, "", &stats);
            emit(run.out.as_ref(), &text)
        }
        SimulateCommand::Inhomogeneous {
            lambda,
            kappa,
            alpha,
            theta,
            tol,
            run,
        } => {
            positive("theta", *theta)?;
            positive("tol", *tol)?;
            let model = match (lambda, kappa, alpha) {
                (Some(l), None, None) => {
                    positive("lambda", *l)?;
                    IntensityModel::homogeneous(*l)?
                }
                (None, Some(k), Some(a)) => {
                    positive("kappa", *k)?;
                    IntensityModel::power_law(*k, *a)?
                }
                _ => return Err(Failure::Usage("give either --lambda or both --kappa and --alpha".into())),
            };
            let cfg = sim_config(run, 1)?;
            let total = model.total();
            let table = root_table_covering(*theta, *tol, total)?;
            let stats = simulate_inhomogeneous(&model, *theta, &table, &cfg)?;

            let mut m = RunManifest::new(ManifestCommand::SimulateInhomogeneous, Some(run.seed), run.out.clone());
            match model {
                IntensityModel::Homogeneous { lambda } => m.param("lambda", lambda),
                IntensityModel::PowerLaw { kappa, alpha } => m.param("kappa", kappa).param("alpha", alpha),
            };
            m.param("theta", theta).param("trials", run.trials);
            let mut text = m.echo();
            let _ = writeln!(text, "expected_arrivals={total}");
            write_stats(&mut text, "", &stats);
            emit(run.out.as_ref(), &text)
        }
        SimulateCommand::Continuous { kappa, alpha, ell, run } => {
            positive("kappa", *kappa)?;
            let cfg = sim_config(run, *ell)?;
            let threshold = cont_threshold(*ell, *kappa, *alpha)?;
            let stats = simulate_continuous(*kappa, *alpha, &cfg)?;

            let mut m = RunManifest::new(ManifestCommand::SimulateContinuous, Some(run.seed), run.out.clone());
            m.param("kappa", kappa)
                .param("alpha", alpha)
                .param("ell", ell)
                .param("trials", run.trials);
            let mut text = m.echo();
            let _ = writeln!(text, "threshold={}", threshold.time);
            let _ = writeln!(text, "threshold_clamped={}", threshold.clamped);
            let _ = writeln!(text, "formula_win_prob={}", win_prob_formula(*ell));
            let _ = writeln!(text, "exact_win_prob={}", threshold_win_prob(*ell, *kappa, *alpha)?);
            write_stats(&mut text, "", &stats);
            emit(run.out.as_ref(), &text)
        }
        SimulateCommand::Compare {
            lambda,
            theta,
            deltas,
            tol,
            run,
        } => {
            positive("lambda", *lambda)?;
            positive("theta", *theta)?;
            positive("tol", *tol)?;
            if deltas.iter().any(|d| !d.is_finite()) {
                return Err(usage("deltas", "entries must be finite"));
            }
            let cfg = sim_config(run, 1)?;
            let params = ModelParams::new(*theta, *lambda)?;
            let table = root_table_covering(*theta, *tol, *lambda)?;
            let report = compare_strategies(&params, &table, deltas, &cfg)?;

            let mut m = RunManifest::new(ManifestCommand::SimulateCompare, Some(run.seed), run.out.clone());
            let joined: Vec<String> = deltas.iter().map(|d| d.to_string()).collect();
            m.param("lambda", lambda)
                .param("theta", theta)
                .param("deltas", joined.join(","))
                .param("trials", run.trials);
            let mut text = m.echo();
            write_stats(&mut text, "myopic.", &report.myopic);
            for (i, row) in report.rows.iter().enumerate() {
                let p = format!("row.{}.", i + 1);
                let _ = writeln!(text, "{p}delta={}", row.delta);
                write_stats(&mut text, &p, &row.stats);
                let _ = writeln!(text, "{p}diff={}", row.diff);
                let _ = writeln!(text, "{p}paired_std_err={}", row.paired_std_err);
                let _ = writeln!(text, "{p}z={}", row.z());
            }
            emit(run.out.as_ref(), &text)
        }
    }
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let report = run_suite(a.suite.into())?;
    emit(a.out.as_ref(), &format!("{report}\n"))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        at_least_one("threads", n as u64)?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Roots(a) => cmd_roots(a),
        Command::BoundsTable(a) => cmd_bounds(a),
        Command::Simulate(s) => cmd_simulate(s),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Numeric(msg) => eprintln!("numerical failure: {msg}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
