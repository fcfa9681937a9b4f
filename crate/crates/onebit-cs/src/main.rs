//! Command-line harness: instance generation, single solves, and seeded
//! Monte-Carlo sweeps over the sparsity level.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use onebit_cs::bench::{emit_csv, run_benchmark, BenchmarkConfig};
use onebit_cs::error::{Error, Result};
use onebit_cs::loss::PenaltyMode;
use onebit_cs::model::{load_instance, save_instance, ProblemInstance};
use onebit_cs::solver::{solve, Init, SolveResult, SolverConfig};

const EXIT_NONCONVERGED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(
    name = "onebit-cs",
    version,
    about = "Sparse signal recovery from one-bit (sign-only) measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random problem instance and write it as JSON.
    Generate {
        /// Number of one-bit measurements.
        #[arg(long)]
        m: usize,
        /// Signal dimension.
        #[arg(long)]
        n: usize,
        /// Number of nonzero coefficients.
        #[arg(long)]
        k: usize,
        /// Master seed; the instance is a pure function of (m, n, k, seed).
        #[arg(long)]
        seed: u64,
        /// Output path for the instance file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance and print the recovered support.
    Solve {
        /// Instance file to load. Alternatively pass --m/--n/--k/--seed.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Penalty: `gauss` (log-sum) or `l1`.
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverArgs,
        /// Starting point: `matched` or `random:SEED`.
        #[arg(long, default_value = "matched", value_parser = parse_init)]
        init: InitArg,
        /// Optional path for the solve result as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo sweep over sparsity levels, writing one CSV row per
    /// (K, algorithm) pair.
    Bench {
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// Sparsity levels, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10,12")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 300)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Algorithms to compare, comma separated.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "gauss,l1")]
        modes: Vec<ModeArg>,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Relative support-extraction threshold.
        #[arg(long, default_value_t = 1e-2)]
        tau: f64,
        /// Output CSV path.
        #[arg(long)]
        csv: PathBuf,
        /// Report wall times as zero, making the CSV reproducible byte for
        /// byte across runs.
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

/// Solver knobs shared by `solve` and `bench`.
#[derive(Args)]
struct SolverArgs {
    #[arg(long = "outer-tol", default_value_t = 1e-6)]
    outer_tol: f64,
    #[arg(long = "max-outer", default_value_t = 200)]
    max_outer: usize,
    #[arg(long = "newton-tol", default_value_t = 1e-9)]
    newton_tol: f64,
    #[arg(long = "max-newton", default_value_t = 50)]
    max_newton: usize,
    /// Relative pruning threshold.
    #[arg(long = "prune", default_value_t = 1e-8)]
    prune: f64,
}

impl SolverArgs {
    fn to_config(&self, mode: PenaltyMode, lambda: f64, init: Init) -> SolverConfig {
        SolverConfig {
            mode,
            lambda,
            outer_tol: self.outer_tol,
            max_outer: self.max_outer,
            newton_tol: self.newton_tol,
            max_newton: self.max_newton,
            prune_threshold: self.prune,
            init,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Gauss,
    L1,
}

impl From<ModeArg> for PenaltyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Gauss => PenaltyMode::GaussianEntropy,
            ModeArg::L1 => PenaltyMode::L1,
        }
    }
}

#[derive(Clone)]
enum InitArg {
    Matched,
    Random(u64),
}

fn parse_init(s: &str) -> std::result::Result<InitArg, String> {
    if s == "matched" {
        return Ok(InitArg::Matched);
    }
    if let Some(seed) = s.strip_prefix("random:") {
        return seed
            .parse()
            .map(InitArg::Random)
            .map_err(|_| format!("invalid random seed `{seed}`"));
    }
    Err(format!(
        "invalid init `{s}`, expected `matched` or `random:SEED`"
    ))
}

#[derive(Serialize)]
struct SolveResultFile<'a> {
    estimate: &'a [f64],
    support: &'a [usize],
    outer_iterations: usize,
    converged: bool,
    objective_trace: &'a [f64],
    active_trace: &'a [usize],
    wall_time_ms: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Io(_) | Error::Parse { .. } => EXIT_IO,
                Error::InvalidArgument(_) => EXIT_USAGE,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { m, n, k, seed, out } => {
            let instance = ProblemInstance::generate(m, n, k, seed)?;
            save_instance(&instance, &out)?;
            println!(
                "wrote instance m={m} n={n} K={k} seed={seed} to {}",
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            instance,
            m,
            n,
            k,
            seed,
            mode,
            lambda,
            solver,
            init,
            out,
        } => {
            let instance = resolve_instance(instance, m, n, k, seed)?;
            let init = match init {
                InitArg::Matched => Init::MatchedFilter,
                InitArg::Random(seed) => Init::RandomUnit(seed),
            };
            let cfg = solver.to_config(mode.into(), lambda, init);
            let result = solve(&instance, &cfg)?;
            print_result(&instance, &cfg, &result);
            if let Some(path) = out {
                let file = SolveResultFile {
                    estimate: result.estimate.as_slice().unwrap(),
                    support: &result.support,
                    outer_iterations: result.outer_iterations,
                    converged: result.converged,
                    objective_trace: &result.objective_trace,
                    active_trace: &result.active_trace,
                    wall_time_ms: result.wall_time.as_secs_f64() * 1e3,
                };
                std::fs::write(path, serde_json::to_string(&file).unwrap())?;
            }
            Ok(if result.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NONCONVERGED)
            })
        }
        Command::Bench {
            m,
            n,
            k,
            trials,
            seed,
            modes,
            lambda,
            tau,
            csv,
            no_timing,
            solver,
        } => {
            let cfg = BenchmarkConfig {
                m,
                n,
                k_values: k,
                trials,
                lambda,
                master_seed: seed,
                algorithms: modes.into_iter().map(PenaltyMode::from).collect(),
                tau,
                solver: solver.to_config(PenaltyMode::GaussianEntropy, lambda, Init::MatchedFilter),
                record_timing: !no_timing,
            };
            let records = run_benchmark(&cfg)?;
            emit_csv(&records, &csv)?;
            println!(
                "{:>4} {:>6} {:>7} {:>7} {:>12} {:>12} {:>9} {:>7} {:>9}",
                "K", "algo", "trials", "failed", "false_alarm", "miss", "support", "iters", "ms"
            );
            for r in &records {
                println!(
                    "{:>4} {:>6} {:>7} {:>7} {:>12.6} {:>12.6} {:>9.3} {:>7.1} {:>9.3}",
                    r.k,
                    r.algorithm,
                    r.trials,
                    r.failed,
                    r.mean_false_alarm_rate,
                    r.mean_miss_rate,
                    r.mean_support_size,
                    r.mean_outer_iterations,
                    r.mean_wall_time_ms
                );
                if r.flagged {
                    eprintln!(
                        "warning: K={} {} had {}/{} failed trials",
                        r.k, r.algorithm, r.failed, r.trials
                    );
                }
            }
            println!("csv written to {}", csv.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn resolve_instance(
    path: Option<PathBuf>,
    m: Option<usize>,
    n: Option<usize>,
    k: Option<usize>,
    seed: Option<u64>,
) -> Result<ProblemInstance> {
    match (path, m, n, k, seed) {
        (Some(p), None, None, None, None) => load_instance(p),
        (None, Some(m), Some(n), Some(k), Some(seed)) => ProblemInstance::generate(m, n, k, seed),
        _ => Err(Error::InvalidArgument(
            "pass either --instance PATH or all of --m --n --k --seed".into(),
        )),
    }
}

fn print_result(instance: &ProblemInstance, cfg: &SolverConfig, result: &SolveResult) {
    println!(
        "instance: m={} n={} (seed {})",
        instance.m(),
        instance.n(),
        instance.seed
    );
    println!("mode: {}  lambda: {}", cfg.mode, cfg.lambda);
    println!(
        "converged: {} after {} outer iterations ({:.3} ms)",
        result.converged,
        result.outer_iterations,
        result.wall_time.as_secs_f64() * 1e3
    );
    let trace: Vec<String> = result
        .objective_trace
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect();
    println!("objective trace: [{}]", trace.join(", "));
    println!("estimated support: {:?}", result.support);
    if let Some(truth) = &instance.truth {
        println!("true support:      {:?}", truth.support());
    }
    let entries: Vec<String> = result
        .support
        .iter()
        .map(|&i| format!("{i}:{:+.6}", result.estimate[i]))
        .collect();
    println!("estimate (unit norm): {{{}}}", entries.join(", "));
}
