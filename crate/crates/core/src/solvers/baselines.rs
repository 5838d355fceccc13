//! Reference methods: fixed-step PDA, APDA with adaptive steps, FISTA and
//! Tseng's accelerated forward-backward scheme.

use crate::error::{check_len, Error, Result};
use crate::linalg::Vector;
use crate::problem::SaddleProblem;
use crate::prox::{ProxFunction, SmoothFunction};
use crate::solvers::{nesterov_next, primal_dual_metrics, Driver, Observer};
use crate::solvers::{SolveOutput, SolverOptions};
use crate::trace::TraceRow;

#[derive(Clone, Debug, PartialEq)]
pub struct PdaState {
    pub x: Vector,
    pub x_prev: Vector,
    pub y: Vector,
    pub y_prev: Vector,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApdaState {
    pub x: Vector,
    pub x_prev: Vector,
    pub x_bar: Vector,
    pub y: Vector,
    pub y_prev: Vector,
    pub tau: f64,
    pub sigma: f64,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FistaState {
    pub x: Vector,
    pub x_prev: Vector,
    pub t: f64,
    pub t_next: f64,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TsengState {
    pub x: Vector,
    pub x_prev: Vector,
    pub u: Vector,
    pub t: f64,
    pub t_next: f64,
    pub k: usize,
}

/// PDA and APDA take proximal steps on all of `f` and `g`.
fn require_full_prox(p: &SaddleProblem, solver: &str) -> Result<()> {
    if !p.f2.is_zero() || !p.g2.is_zero() {
        return Err(Error::UnsupportedStructure(format!(
            "{solver} needs f2 = 0 and g2 = 0 (proximal steps on the whole of f and g)"
        )));
    }
    Ok(())
}

fn check_start(p: &SaddleProblem, x0: &Vector, y0: &Vector) -> Result<()> {
    check_len("initial x", p.n(), x0.len())?;
    check_len("initial y", p.m(), y0.len())
}

/// Fixed-step primal-dual iteration
///
/// ```text
/// x_{k+1}  = prox_{alpha f}(x_k - alpha K^T y_k)
/// xb_{k+1} = x_{k+1} + theta (x_{k+1} - x_k)
/// y_{k+1}  = prox_{beta g}(y_k + beta K xb_{k+1})
/// ```
///
/// `theta = 0` gives the Arrow-Hurwicz ordering.
#[allow(clippy::too_many_arguments)]
pub fn solve_pda(
    p: &SaddleProblem,
    x0: &Vector,
    y0: &Vector,
    alpha: f64,
    beta: f64,
    theta: f64,
    opts: &SolverOptions<'_>,
    mut observer: impl Observer<PdaState>,
) -> Result<SolveOutput<PdaState>> {
    require_full_prox(p, "PDA")?;
    check_start(p, x0, y0)?;
    if !(alpha > 0.0 && beta > 0.0 && (0.0..=1.0).contains(&theta)) {
        return Err(Error::InvalidArgument(format!(
            "PDA needs alpha, beta > 0 and theta in [0, 1] (alpha={alpha}, beta={beta}, theta={theta})"
        )));
    }
    let mut driver = Driver::new(opts, &mut observer)?;
    let mut st = PdaState {
        x: x0.clone(),
        x_prev: x0.clone(),
        y: y0.clone(),
        y_prev: y0.clone(),
        k: 0,
    };
    for iter in 1..=opts.max_iters {
        let kty = p.k.apply_adjoint(&st.y)?;
        let x = match p.f1.prox(alpha, &st.x.add_scaled(-alpha, &kty)) {
            Ok(x) => x,
            Err(Error::NonFinite(_)) => return Err(driver.diverged(iter)),
            Err(e) => return Err(e),
        };
        let x_bar = x.add_scaled(theta, &(&x - &st.x));
        let kxb = p.k.apply(&x_bar)?;
        let y = match p.g1.prox(beta, &st.y.add_scaled(beta, &kxb)) {
            Ok(y) => y,
            Err(Error::NonFinite(_)) => return Err(driver.diverged(iter)),
            Err(e) => return Err(e),
        };
        st = PdaState {
            x_prev: std::mem::replace(&mut st.x, x),
            y_prev: std::mem::replace(&mut st.y, y),
            k: iter,
            ..st
        };
        let stop = driver.record(iter, &st, |elapsed| {
            let (objective, gap_ref) = primal_dual_metrics(p, opts.reference, &st.x, &st.y)?;
            Ok(TraceRow {
                algorithm: "pda".into(),
                k: iter,
                t_k: None,
                objective,
                gap_ref,
                dx: st.x.dist(&st.x_prev),
                dy: Some(st.y.dist(&st.y_prev)),
                energy: None,
                elapsed_s: elapsed,
            })
        })?;
        if stop {
            return Ok(driver.finish(st, iter));
        }
    }
    unreachable!("loop exits through the driver at max_iters")
}

/// Primal-dual iteration with steps adapted to the strong convexity `gamma`
/// of `g`:
///
/// ```text
/// y_{k+1}  = prox_{sigma_k g}(y_k + sigma_k K xb_k)
/// x_{k+1}  = prox_{tau_k f}(x_k - tau_k K^T y_{k+1})
/// theta_k  = 1 / sqrt(1 + 2 gamma sigma_k)
/// sigma_{k+1} = theta_k sigma_k,  tau_{k+1} = tau_k / theta_k
/// xb_{k+1} = x_{k+1} + theta_k (x_{k+1} - x_k)
/// ```
///
/// With `gamma = 0` this freezes to fixed-step PDA with `theta = 1`.
#[allow(clippy::too_many_arguments)]
pub fn solve_apda(
    p: &SaddleProblem,
    x0: &Vector,
    y0: &Vector,
    tau0: f64,
    sigma0: f64,
    gamma: f64,
    opts: &SolverOptions<'_>,
    mut observer: impl Observer<ApdaState>,
) -> Result<SolveOutput<ApdaState>> {
    require_full_prox(p, "APDA")?;
    check_start(p, x0, y0)?;
    let norm = p.norm_k();
    if !(tau0 > 0.0 && sigma0 > 0.0 && gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "APDA needs tau0, sigma0 > 0 and gamma >= 0 (tau0={tau0}, sigma0={sigma0}, gamma={gamma})"
        )));
    }
    // Rounding slack so that tau0 = sigma0 = 1/||K|| is accepted.
    if tau0 * sigma0 * norm * norm > 1.0 + 4.0 * f64::EPSILON {
        return Err(Error::InvalidArgument(format!(
            "APDA needs tau0 sigma0 ||K||^2 <= 1, got {}",
            tau0 * sigma0 * norm * norm
        )));
    }
    let mut driver = Driver::new(opts, &mut observer)?;
    let mut st = ApdaState {
        x: x0.clone(),
        x_prev: x0.clone(),
        x_bar: x0.clone(),
        y: y0.clone(),
        y_prev: y0.clone(),
        tau: tau0,
        sigma: sigma0,
        k: 0,
    };
    for iter in 1..=opts.max_iters {
        let (tau, sigma) = (st.tau, st.sigma);
        let kxb = p.k.apply(&st.x_bar)?;
        let y = match p.g1.prox(sigma, &st.y.add_scaled(sigma, &kxb)) {
            Ok(y) => y,
            Err(Error::NonFinite(_)) => return Err(driver.diverged(iter)),
            Err(e) => return Err(e),
        };
        let kty = p.k.apply_adjoint(&y)?;
        let x = match p.f1.prox(tau, &st.x.add_scaled(-tau, &kty)) {
            Ok(x) => x,
            Err(Error::NonFinite(_)) => return Err(driver.diverged(iter)),
            Err(e) => return Err(e),
        };
        let theta = 1.0 / (1.0 + 2.0 * gamma * sigma).sqrt();
        let x_bar = x.add_scaled(theta, &(&x - &st.x));
        st = ApdaState {
            x_prev: std::mem::replace(&mut st.x, x),
            y_prev: std::mem::replace(&mut st.y, y),
            x: st.x,
            y: st.y,
            x_bar,
            tau: tau / theta,
            sigma: theta * sigma,
            k: iter,
        };
        let stop = driver.record(iter, &st, |elapsed| {
            let (objective, gap_ref) = primal_dual_metrics(p, opts.reference, &st.x, &st.y)?;
            Ok(TraceRow {
                algorithm: "apda".into(),
                k: iter,
                t_k: None,
                objective,
                gap_ref,
                dx: st.x.dist(&st.x_prev),
                dy: Some(st.y.dist(&st.y_prev)),
                energy: None,
                elapsed_s: elapsed,
            })
        })?;
        if stop {
            return Ok(driver.finish(st, iter));
        }
    }
    unreachable!("loop exits through the driver at max_iters")
}

fn check_forward_backward(f2: &SmoothFunction, x0: &Vector, alpha: f64, t1: f64) -> Result<()> {
    if let Some(n) = f2.dim() {
        check_len("initial x", n, x0.len())?;
    }
    let l = f2.lipschitz();
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(
            "forward-backward methods need L_f2 > 0".into(),
        ));
    }
    if !(alpha > 0.0 && alpha <= 1.0 / l) {
        return Err(Error::InvalidArgument(format!(
            "step {alpha} must lie in (0, 1/L_f2 = {}]",
            1.0 / l
        )));
    }
    if !(t1 >= 1.0) {
        return Err(Error::InvalidArgument(format!("t1 must be >= 1, got {t1}")));
    }
    Ok(())
}

/// FISTA on `min f1 + f2`:
/// `xb_k = x_k + ((t_k - 1) / t_{k+1}) (x_k - x_{k-1})`,
/// `x_{k+1} = prox_{alpha f1}(xb_k - alpha grad f2(xb_k))`.
pub fn solve_fista(
    f1: &ProxFunction,
    f2: &SmoothFunction,
    x0: &Vector,
    alpha: f64,
    t1: f64,
    opts: &SolverOptions<'_>,
    mut observer: impl Observer<FistaState>,
) -> Result<SolveOutput<FistaState>> {
    check_forward_backward(f2, x0, alpha, t1)?;
    let mut driver = Driver::new(opts, &mut observer)?;
    let mut st = FistaState {
        x: x0.clone(),
        x_prev: x0.clone(),
        t: t1,
        t_next: nesterov_next(t1),
        k: 1,
    };
    for iter in 1..=opts.max_iters {
        let (t, tn) = (st.t, st.t_next);
        let x_bar = st.x.add_scaled((t - 1.0) / tn, &(&st.x - &st.x_prev));
        let grad = f2.grad(&x_bar)?;
        let x = match f1.prox(alpha, &x_bar.add_scaled(-alpha, &grad)) {
            Ok(x) => x,
            Err(Error::NonFinite(_)) => return Err(driver.diverged(iter)),
            Err(e) => return Err(e),
        };
        st = FistaState {
            x_prev: std::mem::replace(&mut st.x, x),
            t: tn,
            t_next: nesterov_next(tn),
            k: st.k + 1,
            ..st
        };
        let stop = driver.record(iter, &st, |elapsed| {
            Ok(TraceRow {
                algorithm: "fista".into(),
                k: iter,
                t_k: Some(st.t),
                objective: f1.evaluate(&st.x) + f2.evaluate(&st.x)?,
                gap_ref: None,
                dx: st.x.dist(&st.x_prev),
                dy: None,
                energy: None,
                elapsed_s: elapsed,
            })
        })?;
        if stop {
            return Ok(driver.finish(st, iter));
        }
    }
    unreachable!("loop exits through the driver at max_iters")
}

/// Tseng's accelerated forward-backward scheme on `min f1 + f2`:
/// `u_{k+1} = prox_{alpha t_{k+1} f1}(u_k - alpha t_{k+1} grad f2(xb_k))`,
/// `x_{k+1} = ((t_{k+1} - 1) x_k + u_{k+1}) / t_{k+1}`.
pub fn solve_tseng(
    f1: &ProxFunction,
    f2: &SmoothFunction,
    x0: &Vector,
    alpha: f64,
    t1: f64,
    opts: &SolverOptions<'_>,
    mut observer: impl Observer<TsengState>,
) -> Result<SolveOutput<TsengState>> {
    check_forward_backward(f2, x0, alpha, t1)?;
    let mut driver = Driver::new(opts, &mut observer)?;
    let mut st = TsengState {
        x: x0.clone(),
        x_prev: x0.clone(),
        u: x0.clone(),
        t: t1,
        t_next: nesterov_next(t1),
        k: 1,
    };
    for iter in 1..=opts.max_iters {
        let (t, tn) = (st.t, st.t_next);
        let x_bar = st.x.add_scaled((t - 1.0) / tn, &(&st.x - &st.x_prev));
        let grad = f2.grad(&x_bar)?;
        let step = alpha * tn;
        let u = match f1.prox(step, &st.u.add_scaled(-step, &grad)) {
            Ok(u) => u,
            Err(Error::NonFinite(_)) => return Err(driver.diverged(iter)),
            Err(e) => return Err(e),
        };
        let x = Vector::lin_comb((tn - 1.0) / tn, &st.x, 1.0 / tn, &u);
        if !x.is_finite() {
            return Err(driver.diverged(iter));
        }
        st = TsengState {
            x_prev: std::mem::replace(&mut st.x, x),
            x: st.x,
            u,
            t: tn,
            t_next: nesterov_next(tn),
            k: st.k + 1,
        };
        let stop = driver.record(iter, &st, |elapsed| {
            Ok(TraceRow {
                algorithm: "tseng".into(),
                k: iter,
                t_k: Some(st.t),
                objective: f1.evaluate(&st.x) + f2.evaluate(&st.x)?,
                gap_ref: None,
                dx: st.x.dist(&st.x_prev),
                dy: None,
                energy: None,
                elapsed_s: elapsed,
            })
        })?;
        if stop {
            return Ok(driver.finish(st, iter));
        }
    }
    unreachable!("loop exits through the driver at max_iters")
}
