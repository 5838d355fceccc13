use crate::diagnostics::energy;
use crate::error::{check_len, Error, Result};
use crate::linalg::Vector;
use crate::problem::{SaddleProblem, StepParams};
use crate::solvers::{
    finite_or_diverged, next_t, primal_dual_metrics, Driver, IapdOption, Observer,
};
use crate::solvers::{SolveOutput, SolverOptions};
use crate::trace::TraceRow;

/// Iterate state at index `k` (the initial state has `k = 1`).
///
/// `t` is `t_k` and `t_next` is `t_{k+1}`, which the next step uses and the
/// energy term on `v_k` needs.
#[derive(Clone, Debug, PartialEq)]
pub struct IapdState {
    pub x: Vector,
    pub x_prev: Vector,
    pub y: Vector,
    pub y_prev: Vector,
    pub u: Vector,
    pub v: Vector,
    pub v_prev: Vector,
    pub t: f64,
    pub t_next: f64,
    pub k: usize,
}

impl IapdState {
    /// `u_1 = x_1 = x_0`, `v_1 = v_0 = y_1 = y_0`.
    pub fn new(p: &SaddleProblem, s: &StepParams, x0: &Vector, y0: &Vector) -> Result<Self> {
        check_len("initial x", p.n(), x0.len())?;
        check_len("initial y", p.m(), y0.len())?;
        Ok(IapdState {
            x: x0.clone(),
            x_prev: x0.clone(),
            y: y0.clone(),
            y_prev: y0.clone(),
            u: x0.clone(),
            v: y0.clone(),
            v_prev: y0.clone(),
            t: s.t1,
            t_next: next_t(s.t1, p.mu_g() * s.beta),
            k: 1,
        })
    }
}

/// One iteration `k -> k + 1`.
pub fn iapd_step(
    p: &SaddleProblem,
    s: &StepParams,
    st: &IapdState,
    option: IapdOption,
) -> Result<IapdState> {
    let (t, tn) = (st.t, st.t_next);
    let iteration = st.k;
    let inertia = (t - 1.0) / tn;
    let x_bar = st.x.add_scaled(inertia, &(&st.x - &st.x_prev));
    let y_bar = st.y.add_scaled(inertia, &(&st.y - &st.y_prev));

    // K^T (v_k + (t_k / t_{k+1}) (v_k - v_{k-1}))
    let v_ext = st.v.add_scaled(t / tn, &(&st.v - &st.v_prev));
    let mut primal_dir = p.f2.grad(&x_bar)?;
    let coupling = p.k.apply_adjoint(&v_ext)?;
    primal_dir = &primal_dir + &coupling;

    let (x, u) = match option {
        IapdOption::Option1 => {
            let x = finite_or_diverged(
                p.f1.prox(s.alpha, &x_bar.add_scaled(-s.alpha, &primal_dir)),
                iteration,
            )?;
            let u = x.add_scaled(tn - 1.0, &(&x - &st.x));
            (x, u)
        }
        IapdOption::Option2 => {
            let step = s.alpha * tn;
            let u = finite_or_diverged(
                p.f1.prox(step, &st.u.add_scaled(-step, &primal_dir)),
                iteration,
            )?;
            let x = Vector::lin_comb((tn - 1.0) / tn, &st.x, 1.0 / tn, &u);
            (x, u)
        }
    };

    let dual_step = s.beta / tn;
    let ku = p.k.apply(&u)?;
    let dual_dir = &p.g2.grad(&y_bar)? - &ku;
    let v = finite_or_diverged(
        p.g1.prox(dual_step, &st.v.add_scaled(-dual_step, &dual_dir)),
        iteration,
    )?;
    let y = Vector::lin_comb((tn - 1.0) / tn, &st.y, 1.0 / tn, &v);

    if !(x.is_finite() && u.is_finite() && y.is_finite()) {
        return Err(Error::Diverged {
            iteration,
            trace: Vec::new(),
        });
    }

    Ok(IapdState {
        x_prev: st.x.clone(),
        y_prev: st.y.clone(),
        v_prev: st.v.clone(),
        x,
        y,
        u,
        v,
        t: tn,
        t_next: next_t(tn, p.mu_g() * s.beta),
        k: st.k + 1,
    })
}

pub fn algorithm_name(option: IapdOption) -> &'static str {
    match option {
        IapdOption::Option1 => "iapd-op1",
        IapdOption::Option2 => "iapd-op2",
    }
}

/// Runs [`iapd_step`] from `(x0, y0)` until `opts.max_iters` or the stopping
/// rule. Parameters must satisfy [`SaddleProblem::validate_params`].
pub fn solve_iapd(
    p: &SaddleProblem,
    s: &StepParams,
    x0: &Vector,
    y0: &Vector,
    opts: &SolverOptions<'_>,
    mut observer: impl Observer<IapdState>,
) -> Result<SolveOutput<IapdState>> {
    p.validate_params(s).map_err(Error::InvalidParameters)?;
    let mut driver = Driver::new(opts, &mut observer)?;
    let mut st = IapdState::new(p, s, x0, y0)?;
    let name = algorithm_name(opts.option);

    for iter in 1..=opts.max_iters {
        st = match iapd_step(p, s, &st, opts.option) {
            Ok(next) => next,
            Err(Error::Diverged { iteration, .. }) => return Err(driver.diverged(iteration)),
            Err(e) => return Err(e),
        };
        let stop = driver.record(iter, &st, |elapsed| {
            let (objective, gap_ref) = primal_dual_metrics(p, opts.reference, &st.x, &st.y)?;
            let energy = opts
                .reference
                .map(|r| energy(p, s, &st, r).map(|e| e.energy))
                .transpose()?;
            Ok(TraceRow {
                algorithm: name.to_string(),
                k: iter,
                t_k: Some(st.t),
                objective,
                gap_ref,
                dx: st.x.dist(&st.x_prev),
                dy: Some(st.y.dist(&st.y_prev)),
                energy,
                elapsed_s: elapsed,
            })
        })?;
        if stop {
            return Ok(driver.finish(st, iter));
        }
    }
    unreachable!("loop exits through the driver at max_iters")
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::linalg::LinearMap;
    use crate::prox::{ProxFunction, SmoothFunction};
    use crate::solvers::NoObserver;

    fn scalar_problem() -> SaddleProblem {
        SaddleProblem::new(
            ProxFunction::Zero,
            SmoothFunction::Zero,
            ProxFunction::shifted_quadratic(Vector::zeros(1)),
            SmoothFunction::Zero,
            Arc::new(LinearMap::identity(1)),
        )
        .unwrap()
    }

    #[test]
    fn first_iteration_by_hand() {
        let p = scalar_problem();
        let s = StepParams::new(0.5, 0.5, 1.0).unwrap();
        let x0 = Vector::new(vec![1.0]).unwrap();
        let y0 = Vector::zeros(1);
        let st = IapdState::new(&p, &s, &x0, &y0).unwrap();
        // t_2 = min{(1 + sqrt 5)/2, sqrt 1.5} = sqrt 1.5
        assert!((st.t_next - 1.224744871391589).abs() < 1e-15);

        let next = iapd_step(&p, &s, &st, IapdOption::Option1).unwrap();
        // Values evaluated by hand to 15 digits:
        // s = 0.5 / sqrt 1.5 = 0.408248290463863
        // v_2 = s / (1 + s) = 0.289897948556636
        // y_2 = v_2 / sqrt 1.5 = 0.236700683814455
        assert_eq!(next.k, 2);
        assert!((next.x[0] - 1.0).abs() < 1e-12);
        assert!((next.u[0] - 1.0).abs() < 1e-12);
        assert!((next.v[0] - 0.289897948556636).abs() < 1e-12);
        assert!((next.y[0] - 0.236700683814455).abs() < 1e-12);
        assert_eq!(next.v_prev[0], 0.0);
        assert_eq!(next.x_prev[0], 1.0);
    }

    #[test]
    fn one_iteration_gives_one_row() {
        let p = scalar_problem();
        let s = StepParams::new(0.5, 0.5, 1.0).unwrap();
        let opts = SolverOptions {
            max_iters: 1,
            ..Default::default()
        };
        let out = solve_iapd(
            &p,
            &s,
            &Vector::filled(1, 1.0),
            &Vector::zeros(1),
            &opts,
            NoObserver,
        )
        .unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.state.k, 2);
        assert!(!out.stopped_early);
    }

    #[test]
    fn observer_stride_and_final_row() {
        let p = scalar_problem();
        let s = StepParams::new(0.5, 0.5, 1.0).unwrap();
        let opts = SolverOptions {
            max_iters: 10,
            observer_stride: 4,
            ..Default::default()
        };
        let mut seen = Vec::new();
        let out = solve_iapd(
            &p,
            &s,
            &Vector::filled(1, 1.0),
            &Vector::zeros(1),
            &opts,
            |r: &TraceRow, _: &IapdState| seen.push(r.k),
        )
        .unwrap();
        assert_eq!(seen, vec![4, 8, 10]);
        assert_eq!(out.trace.iter().map(|r| r.k).collect::<Vec<_>>(), seen);
    }

    #[test]
    fn rejects_invalid_parameters() {
        let p = scalar_problem();
        let s = StepParams::new(2.0, 2.0, 1.0).unwrap();
        let err = solve_iapd(
            &p,
            &s,
            &Vector::zeros(1),
            &Vector::zeros(1),
            &SolverOptions::default(),
            NoObserver,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameters(_)));
    }

    #[test]
    fn divergence_is_reported() {
        // Steps far outside the admissible range blow the iterates up.
        let p = scalar_problem();
        let s = StepParams::new(50.0, 50.0, 1.0).unwrap();
        let mut cur = IapdState::new(&p, &s, &Vector::filled(1, 1e300), &Vector::zeros(1)).unwrap();
        for _ in 0..5000 {
            match iapd_step(&p, &s, &cur, IapdOption::Option1) {
                Ok(n) => cur = n,
                Err(Error::Diverged { iteration, .. }) => {
                    assert!(iteration >= 1);
                    return;
                }
                Err(e) => panic!("{e}"),
            }
        }
        panic!("no divergence detected");
    }
}
