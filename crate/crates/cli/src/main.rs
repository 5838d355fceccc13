use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iapd_core::bench::{
    read_csv, run_benchmark, Algorithm, CertificateState, Experiment, ExperimentConfig,
    StepOverrides,
};
use iapd_core::linalg::{read_matrix_market, write_matrix_market};
use iapd_core::problem::{SaddleProblem, StepParams};
use iapd_core::solvers::{solve_iapd, IapdOption, NoObserver, SolverOptions};
use iapd_core::{Error, LinearMap, ProxFunction, SmoothFunction, Vector};

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "iapd",
    version,
    about = "Inertial accelerated primal-dual solver and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded benchmark and write traces, plot data and a summary.
    Bench(BenchArgs),
    /// Solve min f1(x) + 1/2 ||Kx - b||^2 for a Matrix Market matrix.
    Solve(SolveArgs),
    /// Re-run the certificates of an IAPD trace.
    Certify(CertifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    L1ls,
    Nnls,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct StepArgs {
    /// Initial extrapolation scalar t1 (overrides the preset).
    #[arg(long)]
    t1: Option<f64>,
    /// Primal step (overrides the preset).
    #[arg(long)]
    alpha: Option<f64>,
    /// Dual step (overrides the preset).
    #[arg(long)]
    beta: Option<f64>,
}

impl StepArgs {
    fn overrides(&self) -> StepOverrides {
        StepOverrides {
            t1: self.t1,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    experiment: ExperimentArg,
    /// Rows of K [default: 200 for l1ls, 400 for nnls]
    #[arg(long)]
    m: Option<usize>,
    /// Columns of K [default: 400 for l1ls, 200 for nnls]
    #[arg(long)]
    n: Option<usize>,
    /// l1 weight (l1ls).
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Probability that an entry of K is present (nnls).
    #[arg(long, default_value_t = 0.1)]
    density: f64,
    /// [default: 7 for l1ls, 11 for nnls]
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Comma-separated subset of iapd-op1, iapd-op2, pda, apda, fista, tseng.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algos: Option<Vec<Algorithm>>,
    /// Output directory [default: bench-<experiment>]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    steps: StepArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Regularizer {
    /// lambda ||x||_1
    L1,
    /// x >= 0
    Nonneg,
    None,
}

#[derive(Args)]
struct SolveArgs {
    /// Matrix Market file with K.
    #[arg(long)]
    matrix: PathBuf,
    /// Matrix Market file with b as an m x 1 matrix.
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long, value_enum, default_value_t = Regularizer::L1)]
    regularizer: Regularizer,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Use the averaged (second) primal update.
    #[arg(long)]
    option2: bool,
    /// Write the trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the solution as an n x 1 Matrix Market file.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[command(flatten)]
    steps: StepArgs,
}

#[derive(Args)]
struct CertifyArgs {
    /// Trace written by `bench`.
    #[arg(long)]
    csv: PathBuf,
    /// Matching `.cert.json` state file.
    #[arg(long)]
    state: PathBuf,
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::InvalidArgument(_) | Error::InvalidParameters(_) => ExitCode::from(EXIT_USAGE),
        _ => ExitCode::from(EXIT_RUNTIME),
    }
}

fn bench(args: BenchArgs) -> ExitCode {
    let experiment = match args.experiment {
        ExperimentArg::L1ls => Experiment::L1ls,
        ExperimentArg::Nnls => Experiment::Nnls,
    };
    let mut cfg = ExperimentConfig::new(experiment);
    cfg.m = args.m.unwrap_or(cfg.m);
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.lambda = args.lambda;
    cfg.density = args.density;
    cfg.iters = args.iters;
    if let Some(algos) = args.algos {
        cfg.algorithms = algos;
    }
    cfg.overrides = args.steps.overrides();
    cfg.out_dir = Some(
        args.out
            .unwrap_or_else(|| PathBuf::from(format!("bench-{experiment}"))),
    );
    if let Err(e) = cfg.validate() {
        return fail(e);
    }

    let report = match run_benchmark(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    print!("{}", report.summary());
    for path in &report.files {
        eprintln!("wrote {}", path.display());
    }
    if report.is_complete() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    }
}

fn read_rhs(path: &PathBuf) -> iapd_core::Result<Vector> {
    let b = read_matrix_market(path)?;
    if b.cols() != 1 {
        return Err(Error::InvalidArgument(format!(
            "right-hand side must be an m x 1 matrix, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    Vector::new(b.to_dense())
}

fn solve(args: SolveArgs) -> iapd_core::Result<()> {
    let k = Arc::new(read_matrix_market(&args.matrix)?);
    let b = read_rhs(&args.rhs)?;
    let f1 = match args.regularizer {
        Regularizer::L1 => ProxFunction::l1(args.lambda)?,
        Regularizer::Nonneg => ProxFunction::IndicatorNonnegative,
        Regularizer::None => ProxFunction::Zero,
    };
    let p = SaddleProblem::new(
        f1,
        SmoothFunction::Zero,
        ProxFunction::shifted_quadratic(b),
        SmoothFunction::Zero,
        Arc::clone(&k),
    )?;
    let defaults = StepParams::default_for(&p)?;
    let steps = StepParams::new(
        args.steps.alpha.unwrap_or(defaults.alpha),
        args.steps.beta.unwrap_or(defaults.beta),
        args.steps.t1.unwrap_or(defaults.t1),
    )?;
    let opts = SolverOptions {
        option: if args.option2 {
            IapdOption::Option2
        } else {
            IapdOption::Option1
        },
        max_iters: args.iters,
        ..SolverOptions::default()
    };
    let out = solve_iapd(
        &p,
        &steps,
        &Vector::zeros(p.n()),
        &Vector::zeros(p.m()),
        &opts,
        NoObserver,
    )?;
    let last = out.trace.last().expect("at least one iteration");
    println!(
        "iterations={} objective={:.16e} dx={:.16e} t1={} alpha={} beta={}",
        out.iterations, last.objective, last.dx, steps.t1, steps.alpha, steps.beta
    );
    if let Some(path) = &args.trace {
        iapd_core::bench::emit_csv(&out.trace, path)?;
    }
    if let Some(path) = &args.solution {
        let x = out.state.x.into_inner();
        write_matrix_market(&LinearMap::dense(x.len(), 1, x)?, path)?;
    }
    Ok(())
}

fn certify(args: CertifyArgs) -> iapd_core::Result<bool> {
    let rows = read_csv(&args.csv)?;
    let state = CertificateState::read(&args.state)?;
    let cert = state.certify(&rows)?;
    let checks = [
        ("gap", &cert.gap),
        ("dual", &cert.dual),
        ("dual_v", &cert.dual_v),
        ("energy", &cert.energy_monotone),
        ("t_lower", &cert.t_lower),
        ("t_recursion", &cert.t_recursion),
    ];
    println!("rows={} E1={:.16e}", cert.rows, cert.base_energy);
    for (name, c) in checks {
        println!(
            "{name}: checked={} violations={} worst_excess={:.3e}",
            c.checked, c.violations, c.worst_excess
        );
    }
    println!(
        "max_dx_t={:.16e} max_dy_t2={:.16e} tail_max_dx_t={:.16e} tail_max_dy_t2={:.16e}",
        cert.max_dx_t, cert.max_dy_t2, cert.tail_max_dx_t, cert.tail_max_dy_t2
    );
    Ok(cert.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Bench(args) => bench(args),
        Command::Solve(args) => match solve(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Certify(args) => match certify(args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => {
                eprintln!("certificate violations found");
                ExitCode::from(EXIT_RUNTIME)
            }
            Err(e) => fail(e),
        },
    }
}
