use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;

use crate::bench::config::{Algorithm, Experiment, ExperimentConfig, StepOverrides};
use crate::bench::files::{
    emit_csv, fmt_f64, write_plotdata, CertificateState, DualDistances, PlotSeries,
};
use crate::bench::generators::{generate_l1ls, generate_nnls, Instance};
use crate::diagnostics::{
    certify, slope, Certificate, CertifyConfig, EnergyMonitor, EnergyReport, SlopeFit,
};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problem::{compute_reference_with, ReferencePoint, SaddleProblem, StepParams};
use crate::prox::{ProxFunction, SmoothFunction};
use crate::solvers::{
    solve_apda, solve_fista, solve_iapd, solve_pda, solve_tseng, IapdOption, IapdState, NoObserver,
    SolverOptions,
};
use crate::trace::TraceRow;

pub fn build_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    match cfg.experiment {
        Experiment::L1ls => generate_l1ls(cfg.m, cfg.n, cfg.lambda, cfg.seed),
        Experiment::Nnls => generate_nnls(cfg.m, cfg.n, cfg.density, cfg.seed),
    }
}

/// IAPD presets: `t1 = 5, alpha = 0.98 / (2||K||), beta = 2 / ||K||` for
/// l1ls and `t1 = 1.2, alpha = 0.98 / ||K||, beta = 1 / ||K||` for nnls.
pub fn iapd_preset(
    experiment: Experiment,
    norm_k: f64,
    overrides: &StepOverrides,
) -> Result<StepParams> {
    let (alpha, beta, t1) = match experiment {
        Experiment::L1ls => (0.98 / (2.0 * norm_k), 2.0 / norm_k, 5.0),
        Experiment::Nnls => (0.98 / norm_k, 1.0 / norm_k, 1.2),
    };
    StepParams::new(
        overrides.alpha.unwrap_or(alpha),
        overrides.beta.unwrap_or(beta),
        overrides.t1.unwrap_or(t1),
    )
}

/// Primal composite `f1 + ½||Kx - b||²` run by the forward-backward
/// baselines, with `b` the shift of `g1`.
pub fn primal_composite(p: &SaddleProblem) -> Result<(ProxFunction, SmoothFunction)> {
    match &p.g1 {
        ProxFunction::ShiftedQuadratic { shift } if p.g2.is_zero() && p.f2.is_zero() => Ok((
            p.f1.clone(),
            SmoothFunction::least_squares(Arc::clone(&p.k), shift.clone())?,
        )),
        _ => Err(Error::UnsupportedStructure(
            "forward-backward baselines need g1 = ½||y + b||² and f2 = g2 = 0".into(),
        )),
    }
}

#[derive(Clone, Debug)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    /// Human-readable parameter summary.
    pub parameters: String,
    pub trace: Vec<TraceRow>,
    /// IAPD only: the initial report followed by one report per row.
    pub energy: Vec<EnergyReport>,
    pub certificate: Option<Certificate>,
    pub certify_config: Option<CertifyConfig>,
}

impl AlgorithmRun {
    pub fn final_objective(&self) -> Option<f64> {
        self.trace.last().map(|r| r.objective)
    }

    fn certificate_state(&self) -> Option<CertificateState> {
        let (config, initial) = (self.certify_config?, self.energy.first()?.clone());
        Some(CertificateState {
            algorithm: self.algorithm.name().into(),
            config,
            initial,
            dual: self.energy[1..]
                .iter()
                .zip(&self.trace)
                .map(|(e, r)| DualDistances {
                    k: r.k,
                    dual_dist_sq: e.dual_dist_sq,
                    v_dist_sq: e.v_dist_sq,
                })
                .collect(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub config: ExperimentConfig,
    pub norm_k: f64,
    pub reference: ReferencePoint,
    pub runs: Vec<AlgorithmRun>,
    /// Algorithms that could not run, with the reason.
    pub skipped: Vec<(Algorithm, String)>,
    pub files: Vec<PathBuf>,
}

impl BenchReport {
    pub fn is_complete(&self) -> bool {
        self.skipped.is_empty()
    }

    pub fn run(&self, algorithm: Algorithm) -> Option<&AlgorithmRun> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }

    /// `F(x_K) - F*` at the last row.
    pub fn final_gap(&self, algorithm: Algorithm) -> Option<f64> {
        Some(self.run(algorithm)?.final_objective()? - self.reference.objective_value)
    }

    /// Log-log slope of `F(x_k) - F*` over the slope window.
    pub fn objective_slope(&self, algorithm: Algorithm) -> Result<SlopeFit> {
        let run = self
            .run(algorithm)
            .ok_or_else(|| Error::InvalidArgument(format!("{algorithm} did not run")))?;
        let pts: Vec<_> = run
            .trace
            .iter()
            .map(|r| (r.k, r.objective - self.reference.objective_value))
            .collect();
        let (lo, hi) = slope_window(self.config.iters);
        slope(&pts, lo, hi)
    }

    /// Log-log slope of the reference gap over the slope window.
    pub fn gap_slope(&self, algorithm: Algorithm) -> Result<SlopeFit> {
        let run = self
            .run(algorithm)
            .ok_or_else(|| Error::InvalidArgument(format!("{algorithm} did not run")))?;
        let pts: Vec<_> = run
            .trace
            .iter()
            .filter_map(|r| r.gap_ref.map(|g| (r.k, g)))
            .collect();
        let (lo, hi) = slope_window(self.config.iters);
        slope(&pts, lo, hi)
    }

    pub fn summary(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let shape = match c.experiment {
            Experiment::L1ls => format!("lambda={}", c.lambda),
            Experiment::Nnls => format!("density={}", c.density),
        };
        let _ = writeln!(
            s,
            "experiment={} m={} n={} {shape} seed={} iters={}",
            c.experiment, c.m, c.n, c.seed, c.iters
        );
        let _ = writeln!(s, "norm_K={}", fmt_f64(self.norm_k));
        let _ = writeln!(
            s,
            "reference iterations={} F*={} accuracy={}",
            self.reference.iterations,
            fmt_f64(self.reference.objective_value),
            fmt_f64(self.reference.accuracy)
        );
        let (lo, hi) = slope_window(c.iters);
        let _ = writeln!(s, "slope window=[{lo},{hi}]");
        for run in &self.runs {
            let a = run.algorithm;
            let fmt_slope = |r: Result<SlopeFit>| {
                r.map(|f| format!("{:.4}", f.slope))
                    .unwrap_or_else(|_| "n/a".into())
            };
            let _ = write!(
                s,
                "{a}: {} final_objective={} final_gap={} slope_objective={} slope_gap_ref={}",
                run.parameters,
                run.final_objective().map(fmt_f64).unwrap_or_default(),
                self.final_gap(a).map(fmt_f64).unwrap_or_default(),
                fmt_slope(self.objective_slope(a)),
                fmt_slope(self.gap_slope(a)),
            );
            if let Some(cert) = &run.certificate {
                let _ = write!(
                    s,
                    " cert_gap={} cert_dual={} cert_dual_v={} cert_energy={} cert_t_lower={} cert_t_recursion={} \
                     max_dx_t={} max_dy_t2={} tail_max_dx_t={} tail_max_dy_t2={}",
                    cert.gap.violations,
                    cert.dual.violations,
                    cert.dual_v.violations,
                    cert.energy_monotone.violations,
                    cert.t_lower.violations,
                    cert.t_recursion.violations,
                    fmt_f64(cert.max_dx_t),
                    fmt_f64(cert.max_dy_t2),
                    fmt_f64(cert.tail_max_dx_t),
                    fmt_f64(cert.tail_max_dy_t2),
                );
            }
            s.push('\n');
        }
        for (a, why) in &self.skipped {
            let _ = writeln!(s, "{a}: skipped: {why}");
        }
        s
    }
}

/// `[100, 1000]` when the run is long enough, otherwise the upper 95% of it.
pub fn slope_window(iters: usize) -> (usize, usize) {
    if iters >= 1000 {
        (100, 1000)
    } else {
        ((iters / 20).max(1), iters.max(2))
    }
}

enum Outcome {
    Ran(Box<AlgorithmRun>),
    Skipped(String),
}

fn skip_or_fail(e: Error) -> Result<Outcome> {
    match e {
        Error::InvalidParameters(report) => {
            Ok(Outcome::Skipped(format!("invalid parameters: {report}")))
        }
        Error::InvalidArgument(msg) | Error::UnsupportedStructure(msg) => Ok(Outcome::Skipped(msg)),
        Error::Diverged { iteration, .. } => Ok(Outcome::Skipped(format!(
            "diverged at iteration {iteration}"
        ))),
        other => Err(other),
    }
}

fn plain_run(algorithm: Algorithm, parameters: String, trace: Vec<TraceRow>) -> Outcome {
    Outcome::Ran(Box::new(AlgorithmRun {
        algorithm,
        parameters,
        trace,
        energy: Vec::new(),
        certificate: None,
        certify_config: None,
    }))
}

fn run_iapd(
    p: &SaddleProblem,
    s: &StepParams,
    r: &ReferencePoint,
    algorithm: Algorithm,
    iters: usize,
) -> Result<Outcome> {
    let option = if algorithm == Algorithm::IapdOp1 {
        IapdOption::Option1
    } else {
        IapdOption::Option2
    };
    if let Err(report) = p.validate_params(s) {
        return Ok(Outcome::Skipped(format!("invalid parameters: {report}")));
    }
    let x0 = Vector::zeros(p.n());
    let y0 = Vector::zeros(p.m());
    let initial = IapdState::new(p, s, &x0, &y0)?;
    let monitor = EnergyMonitor::new(p, s, r, &initial)?;
    let mut energy = vec![monitor.report(&initial)?];
    let mut failure = None;
    let opts = SolverOptions {
        option,
        max_iters: iters,
        reference: Some(r),
        ..SolverOptions::default()
    };
    let out = solve_iapd(
        p,
        s,
        &x0,
        &y0,
        &opts,
        |_: &TraceRow, st: &IapdState| match monitor.report(st) {
            Ok(rep) => energy.push(rep),
            Err(e) => {
                failure.get_or_insert(e);
            }
        },
    );
    let out = match out {
        Ok(out) => out,
        Err(e) => return skip_or_fail(e),
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let cfg = CertifyConfig::new(p, s, r);
    Ok(Outcome::Ran(Box::new(AlgorithmRun {
        algorithm,
        parameters: format!("t1={} alpha={} beta={}", s.t1, s.alpha, s.beta),
        trace: out.trace,
        certificate: Some(certify(&energy, &cfg)),
        certify_config: Some(cfg),
        energy,
    })))
}

fn run_one(
    inst: &Instance,
    cfg: &ExperimentConfig,
    reference: &ReferencePoint,
    algorithm: Algorithm,
) -> Result<Outcome> {
    let p = &inst.problem;
    let norm = p.norm_k();
    let x0 = Vector::zeros(p.n());
    let y0 = Vector::zeros(p.m());
    let opts = SolverOptions {
        max_iters: cfg.iters,
        reference: Some(reference),
        ..SolverOptions::default()
    };
    let result = match algorithm {
        Algorithm::IapdOp1 | Algorithm::IapdOp2 => {
            let s = iapd_preset(cfg.experiment, norm, &cfg.overrides)?;
            return run_iapd(p, &s, reference, algorithm, cfg.iters);
        }
        Algorithm::Pda => {
            let (alpha, beta) = (1.0 / (20.0 * norm), 20.0 / norm);
            solve_pda(p, &x0, &y0, alpha, beta, 1.0, &opts, NoObserver).map(|o| {
                plain_run(
                    algorithm,
                    format!("alpha={alpha} beta={beta} theta=1"),
                    o.trace,
                )
            })
        }
        Algorithm::Apda => {
            let tau = 1.0 / norm;
            let gamma = p.mu_g();
            solve_apda(p, &x0, &y0, tau, tau, gamma, &opts, NoObserver).map(|o| {
                plain_run(
                    algorithm,
                    format!("tau0={tau} sigma0={tau} gamma={gamma}"),
                    o.trace,
                )
            })
        }
        Algorithm::Fista | Algorithm::Tseng => {
            let (f1, f2) = primal_composite(p)?;
            let alpha = 1.0 / f2.lipschitz();
            let params = format!("alpha={alpha} t1=1");
            if algorithm == Algorithm::Fista {
                solve_fista(&f1, &f2, &x0, alpha, 1.0, &opts, NoObserver)
                    .map(|o| plain_run(algorithm, params, o.trace))
            } else {
                solve_tseng(&f1, &f2, &x0, alpha, 1.0, &opts, NoObserver)
                    .map(|o| plain_run(algorithm, params, o.trace))
            }
        }
    };
    result.or_else(skip_or_fail)
}

/// Reference point by IAPD Option 1 with the experiment's preset (without
/// overrides) for `reference_factor * iters` iterations.
pub fn benchmark_reference(inst: &Instance, cfg: &ExperimentConfig) -> Result<ReferencePoint> {
    let p = &inst.problem;
    let s = iapd_preset(cfg.experiment, p.norm_k(), &StepOverrides::default())?;
    compute_reference_with(p, &s, IapdOption::Option1, cfg.reference_factor * cfg.iters)
}

/// Generates the instance, computes the reference point, runs every selected
/// algorithm on its own thread and, when `out_dir` is set, writes
/// `<algorithm>.csv`, `plotdata.tsv`, `summary.txt` and, for IAPD runs,
/// `<algorithm>.cert.json`.
///
/// Algorithms whose parameters are rejected, or which diverge, are listed in
/// [`BenchReport::skipped`] instead of failing the whole run.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let inst = build_instance(cfg)?;
    let norm_k = inst.problem.norm_k();
    let reference = benchmark_reference(&inst, cfg)?;

    let outcomes: Vec<Result<Outcome>> = thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .algorithms
            .iter()
            .map(|&a| {
                let (inst, reference) = (&inst, &reference);
                scope.spawn(move || run_one(inst, cfg, reference, a))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });

    let mut report = BenchReport {
        config: cfg.clone(),
        norm_k,
        reference,
        runs: Vec::new(),
        skipped: Vec::new(),
        files: Vec::new(),
    };
    for (&a, outcome) in cfg.algorithms.iter().zip(outcomes) {
        match outcome? {
            Outcome::Ran(run) => report.runs.push(*run),
            Outcome::Skipped(why) => report.skipped.push((a, why)),
        }
    }
    if let Some(dir) = &cfg.out_dir {
        report.files = write_outputs(&report, dir)?;
    }
    Ok(report)
}

pub fn write_outputs(report: &BenchReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for run in &report.runs {
        let path = dir.join(format!("{}.csv", run.algorithm));
        emit_csv(&run.trace, &path)?;
        files.push(path);
        if let Some(state) = run.certificate_state() {
            let path = dir.join(format!("{}.cert.json", run.algorithm));
            state.write(&path)?;
            files.push(path);
        }
    }
    let series: Vec<_> = report
        .runs
        .iter()
        .map(|r| PlotSeries {
            name: r.algorithm.name(),
            rows: &r.trace,
        })
        .collect();
    let path = dir.join("plotdata.tsv");
    write_plotdata(
        &series,
        report.reference.objective_value,
        BufWriter::new(fs::File::create(&path)?),
    )?;
    files.push(path);
    let path = dir.join("summary.txt");
    fs::write(&path, report.summary())?;
    files.push(path);
    Ok(files)
}
