//! The saddle-point model `min_x max_y f1(x) + f2(x) + <Kx, y> - g1(y) - g2(y)`.
//!
//! The saddle set is assumed nonempty. Nothing here verifies it; for a
//! concrete instance [`compute_reference`] is the practical substitute.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{LinearMap, Vector};
use crate::prox::{ProxFunction, SmoothFunction};
use crate::solvers::{solve_iapd, IapdOption, SolverOptions};

#[derive(Clone, Debug)]
pub struct SaddleProblem {
    pub f1: ProxFunction,
    pub f2: SmoothFunction,
    pub g1: ProxFunction,
    pub g2: SmoothFunction,
    pub k: Arc<LinearMap>,
}

impl SaddleProblem {
    /// Checks that `g1` is strongly convex and that every term acts on the
    /// dimension implied by `k` (`n = k.cols()` for f, `m = k.rows()` for g).
    pub fn new(
        f1: ProxFunction,
        f2: SmoothFunction,
        g1: ProxFunction,
        g2: SmoothFunction,
        k: Arc<LinearMap>,
    ) -> Result<Self> {
        let (m, n) = (k.rows(), k.cols());
        if g1.strong_convexity() <= 0.0 {
            return Err(Error::UnsupportedStructure(
                "g1 must be strongly convex (mu_g > 0)".into(),
            ));
        }
        for (context, dim, expected) in [
            ("f1 dimension", f1.dim(), n),
            ("f2 dimension", f2.dim(), n),
            ("g1 dimension", g1.dim(), m),
            ("g2 dimension", g2.dim(), m),
        ] {
            if let Some(d) = dim {
                check_len(context, expected, d)?;
            }
        }
        Ok(SaddleProblem { f1, f2, g1, g2, k })
    }

    /// Primal dimension.
    pub fn n(&self) -> usize {
        self.k.cols()
    }

    /// Dual dimension.
    pub fn m(&self) -> usize {
        self.k.rows()
    }

    pub fn mu_g(&self) -> f64 {
        self.g1.strong_convexity()
    }

    pub fn lipschitz_f2(&self) -> f64 {
        self.f2.lipschitz()
    }

    pub fn lipschitz_g2(&self) -> f64 {
        self.g2.lipschitz()
    }

    pub fn norm_k(&self) -> f64 {
        self.k.norm()
    }

    /// `L(x, y)`. `+inf` when `x` is outside `dom f1`, otherwise `-inf` when
    /// `y` is outside `dom g1`.
    pub fn lagrangian(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_len("lagrangian x", self.n(), x.len())?;
        check_len("lagrangian y", self.m(), y.len())?;
        let f1 = self.f1.evaluate(x);
        if f1 == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        let g1 = self.g1.evaluate(y);
        if g1 == f64::INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let coupling = self.k.apply(x)?.dot(y);
        Ok(f1 + self.f2.evaluate(x)? + coupling - g1 - self.g2.evaluate(y)?)
    }

    /// Composite primal objective `f(x) + 0.5 ||Kx - b||^2` when the dual
    /// side is `g1 = 0.5 ||y + b||^2, g2 = 0`. This equals
    /// `max_y L(x, y) + 0.5 ||b||^2`. Returns `None` for other dual terms.
    pub fn primal_objective(&self, x: &[f64]) -> Result<Option<f64>> {
        let (ProxFunction::ShiftedQuadratic { shift }, SmoothFunction::Zero) = (&self.g1, &self.g2)
        else {
            return Ok(None);
        };
        let kx = self.k.apply(x)?;
        let residual = 0.5 * kx.dist_sq(shift);
        Ok(Some(self.f1.evaluate(x) + self.f2.evaluate(x)? + residual))
    }

    /// Checks the step-size condition
    /// `alpha beta ||K||^2 < (1 - alpha L_f2)(1 - beta L_g2 / t1^2)`,
    /// `alpha < 1 / L_f2`, `beta < t1^2 / L_g2`, using the safety-factored
    /// norm estimate. Conditions on a vanished smooth term are vacuous.
    pub fn validate_params(&self, s: &StepParams) -> std::result::Result<(), ParamReport> {
        let norm = self.norm_k();
        let (lf, lg) = (self.lipschitz_f2(), self.lipschitz_g2());
        let mut violations = Vec::new();

        let lhs = s.alpha * s.beta * norm * norm;
        let rhs = (1.0 - s.alpha * lf) * (1.0 - s.beta * lg / (s.t1 * s.t1));
        if !(lhs < rhs) {
            violations.push(Violation {
                condition: Condition::Coupling,
                lhs,
                rhs,
            });
        }
        if lf > 0.0 && !(s.alpha < 1.0 / lf) {
            violations.push(Violation {
                condition: Condition::PrimalStep,
                lhs: s.alpha,
                rhs: 1.0 / lf,
            });
        }
        if lg > 0.0 && !(s.beta < s.t1 * s.t1 / lg) {
            violations.push(Violation {
                condition: Condition::DualStep,
                lhs: s.beta,
                rhs: s.t1 * s.t1 / lg,
            });
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ParamReport { violations })
        }
    }
}

/// Primal step `alpha`, dual step `beta` and the initial extrapolation
/// scalar `t1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub alpha: f64,
    pub beta: f64,
    pub t1: f64,
}

impl StepParams {
    pub fn new(alpha: f64, beta: f64, t1: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step sizes must be positive and finite (alpha={alpha}, beta={beta})"
            )));
        }
        if !(t1 >= 1.0 && t1.is_finite()) {
            return Err(Error::InvalidArgument(format!("t1 must be >= 1, got {t1}")));
        }
        Ok(StepParams { alpha, beta, t1 })
    }

    /// Parameters used when the caller does not supply any.
    ///
    /// Without smooth terms this is `t1 = 1`, `alpha = 0.98 / (2||K||)`,
    /// `beta = 2 / ||K||`. Smooth terms cap the steps at half their limits,
    /// and both steps shrink together until the coupling condition holds.
    pub fn default_for(p: &SaddleProblem) -> Result<Self> {
        let t1 = 1.0;
        let norm = p.norm_k();
        let (lf, lg) = (p.lipschitz_f2(), p.lipschitz_g2());
        let (mut alpha, mut beta) = if norm > 0.0 {
            (0.49 / norm, 2.0 / norm)
        } else {
            (1.0, 1.0)
        };
        if lf > 0.0 {
            alpha = alpha.min(0.5 / lf);
        }
        if lg > 0.0 {
            beta = beta.min(0.5 * t1 * t1 / lg);
        }
        let mut s = StepParams::new(alpha, beta, t1)?;
        for _ in 0..200 {
            if p.validate_params(&s).is_ok() {
                return Ok(s);
            }
            s.alpha *= 0.9;
            s.beta *= 0.9;
        }
        p.validate_params(&s).map_err(Error::InvalidParameters)?;
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// `alpha beta ||K||^2 < (1 - alpha L_f2)(1 - beta L_g2 / t1^2)`
    Coupling,
    /// `alpha < 1 / L_f2`
    PrimalStep,
    /// `beta < t1^2 / L_g2`
    DualStep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    pub lhs: f64,
    pub rhs: f64,
}

/// Every violated step-size inequality with both sides evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ParamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| {
                let name = match v.condition {
                    Condition::Coupling => "alpha*beta*||K||^2 < (1-alpha*L_f2)(1-beta*L_g2/t1^2)",
                    Condition::PrimalStep => "alpha < 1/L_f2",
                    Condition::DualStep => "beta < t1^2/L_g2",
                };
                format!("{name} fails ({} >= {})", v.lhs, v.rhs)
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// An approximate saddle point.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferencePoint {
    pub x_star: Vector,
    pub y_star: Vector,
    /// Primal objective at `x_star` ([`SaddleProblem::primal_objective`]),
    /// or `L(x_star, y_star)` when no closed-form primal objective exists.
    pub objective_value: f64,
    pub lagrangian_value: f64,
    /// `|L(x_K, y~) - L(x~, y_K)|` between the final iterate and the previous
    /// checkpoint `(x~, y~)`.
    pub accuracy: f64,
    pub iterations: usize,
}

impl ReferencePoint {
    /// `L(x, y_star) - L(x_star, y)`
    pub fn gap(&self, p: &SaddleProblem, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(p.lagrangian(x, &self.y_star)? - p.lagrangian(&self.x_star, y)?)
    }
}

/// Runs the IAPD solver (Option 1, [`StepParams::default_for`]) from the
/// origin for `effort` iterations.
pub fn compute_reference(p: &SaddleProblem, effort: usize) -> Result<ReferencePoint> {
    let params = StepParams::default_for(p)?;
    compute_reference_with(p, &params, IapdOption::Option1, effort)
}

pub fn compute_reference_with(
    p: &SaddleProblem,
    params: &StepParams,
    option: IapdOption,
    effort: usize,
) -> Result<ReferencePoint> {
    if effort == 0 {
        return Err(Error::InvalidArgument(
            "reference effort must be >= 1".into(),
        ));
    }
    p.validate_params(params)
        .map_err(Error::InvalidParameters)?;
    let x0 = Vector::zeros(p.n());
    let y0 = Vector::zeros(p.m());

    let checkpoint_at = effort.saturating_sub((effort / 10).max(1));
    let mut checkpoint: Option<(Vector, Vector)> = None;
    let opts = SolverOptions {
        option,
        max_iters: effort,
        ..SolverOptions::default()
    };
    let out = solve_iapd(
        p,
        params,
        &x0,
        &y0,
        &opts,
        |row: &crate::trace::TraceRow, st: &crate::solvers::IapdState| {
            if row.k == checkpoint_at {
                checkpoint = Some((st.x.clone(), st.y.clone()));
            }
        },
    )?;
    let st = out.state;
    let (cx, cy) = checkpoint.unwrap_or_else(|| (x0.clone(), y0.clone()));

    let accuracy = (p.lagrangian(&st.x, &cy)? - p.lagrangian(&cx, &st.y)?).abs();
    let lagrangian_value = p.lagrangian(&st.x, &st.y)?;
    let objective_value = p.primal_objective(&st.x)?.unwrap_or(lagrangian_value);
    Ok(ReferencePoint {
        x_star: st.x,
        y_star: st.y,
        objective_value,
        lagrangian_value,
        accuracy,
        iterations: effort,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec1(xs: &[f64]) -> Vector {
        Vector::new(xs.to_vec()).unwrap()
    }

    fn quad_dual(m: usize) -> ProxFunction {
        ProxFunction::shifted_quadratic(Vector::zeros(m))
    }

    #[test]
    fn lagrangian_vanishes_for_zero_terms() {
        // mu_g > 0 is required, so the "all zero" case uses a zero-shift
        // quadratic evaluated at y = 0.
        let p = SaddleProblem::new(
            ProxFunction::Zero,
            SmoothFunction::Zero,
            quad_dual(2),
            SmoothFunction::Zero,
            Arc::new(LinearMap::zero(2, 3)),
        )
        .unwrap();
        assert_eq!(p.lagrangian(&[1.0, -2.0, 3.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(p.lagrangian(&[5.0, 5.0, 5.0], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn lagrangian_hand_arithmetic() {
        let p = SaddleProblem::new(
            ProxFunction::l1(0.1).unwrap(),
            SmoothFunction::Zero,
            quad_dual(1),
            SmoothFunction::Zero,
            Arc::new(LinearMap::identity(1)),
        )
        .unwrap();
        assert!((p.lagrangian(&[1.0], &[1.0]).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn infeasible_primal_takes_precedence() {
        let p = SaddleProblem::new(
            ProxFunction::IndicatorNonnegative,
            SmoothFunction::Zero,
            quad_dual(1),
            SmoothFunction::Zero,
            Arc::new(LinearMap::identity(1)),
        )
        .unwrap();
        assert_eq!(p.lagrangian(&[-1.0], &[0.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rejects_non_strongly_convex_dual_and_bad_dims() {
        let k = Arc::new(LinearMap::identity(2));
        assert!(SaddleProblem::new(
            ProxFunction::Zero,
            SmoothFunction::Zero,
            ProxFunction::Zero,
            SmoothFunction::Zero,
            k.clone()
        )
        .is_err());
        assert!(matches!(
            SaddleProblem::new(
                ProxFunction::Zero,
                SmoothFunction::Zero,
                quad_dual(3),
                SmoothFunction::Zero,
                k
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn l1ls_like(k: LinearMap, lf2: Option<f64>) -> SaddleProblem {
        let m = k.rows();
        let k = Arc::new(k);
        let f2 = match lf2 {
            None => SmoothFunction::Zero,
            Some(l) => SmoothFunction::LeastSquares {
                map: Arc::new(LinearMap::identity(k.cols())),
                data: Vector::zeros(k.cols()),
                lipschitz: l,
            },
        };
        SaddleProblem::new(
            ProxFunction::l1(0.1).unwrap(),
            f2,
            quad_dual(m),
            SmoothFunction::Zero,
            k,
        )
        .unwrap()
    }

    #[test]
    fn validate_params_examples() {
        let k = LinearMap::dense(2, 2, vec![2.0, 0.5, -1.0, 3.0]).unwrap();
        let p = l1ls_like(k, None);
        let norm = p.norm_k();

        let ok = StepParams::new(0.98 / (2.0 * norm), 2.0 / norm, 5.0).unwrap();
        assert!(p.validate_params(&ok).is_ok());

        let bad = StepParams::new(2.0 / norm, 2.0 / norm, 1.0).unwrap();
        let report = p.validate_params(&bad).unwrap_err();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].condition, Condition::Coupling);
        assert!((report.violations[0].lhs - 4.0).abs() < 1e-12);

        let p = l1ls_like(LinearMap::zero(2, 2), Some(10.0));
        let report = p
            .validate_params(&StepParams::new(0.2, 1.0, 1.0).unwrap())
            .unwrap_err();
        assert!(report
            .violations
            .iter()
            .any(|v| v.condition == Condition::PrimalStep));
        assert!(report.to_string().contains("alpha < 1/L_f2"));
    }

    #[test]
    fn default_params_validate() {
        let k = LinearMap::dense(2, 3, vec![1.0, 2.0, 0.0, -1.0, 0.5, 4.0]).unwrap();
        let p = l1ls_like(k, Some(7.0));
        let s = StepParams::default_for(&p).unwrap();
        assert!(p.validate_params(&s).is_ok());
        let p = l1ls_like(LinearMap::zero(3, 3), None);
        assert!(p
            .validate_params(&StepParams::default_for(&p).unwrap())
            .is_ok());
    }

    #[test]
    fn step_params_reject_bad_values() {
        assert!(StepParams::new(0.0, 1.0, 1.0).is_err());
        assert!(StepParams::new(1.0, -1.0, 1.0).is_err());
        assert!(StepParams::new(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn reference_for_decoupled_l1() {
        let p = SaddleProblem::new(
            ProxFunction::l1(0.5).unwrap(),
            SmoothFunction::Zero,
            ProxFunction::shifted_quadratic(vec1(&[1.0, -2.0])),
            SmoothFunction::Zero,
            Arc::new(LinearMap::zero(2, 3)),
        )
        .unwrap();
        let r = compute_reference(&p, 2000).unwrap();
        assert_eq!(r.x_star.as_slice(), &[0.0, 0.0, 0.0]);
        // y* minimizes 0.5||y + b||^2.
        assert!(r.y_star.dist(&[-1.0, 2.0]) < 1e-3, "{:?}", r.y_star);
    }

    #[test]
    fn reference_for_scalar_nnls() {
        // min_{x >= 0} 0.5 (x - 2)^2 has x* = 2 and y* = Kx* - b = 0.
        let p = SaddleProblem::new(
            ProxFunction::IndicatorNonnegative,
            SmoothFunction::Zero,
            ProxFunction::shifted_quadratic(vec1(&[2.0])),
            SmoothFunction::Zero,
            Arc::new(LinearMap::identity(1)),
        )
        .unwrap();
        let r = compute_reference(&p, 5000).unwrap();
        assert!((r.x_star[0] - 2.0).abs() < 1e-6, "{:?}", r.x_star);
        assert!(r.y_star[0].abs() < 1e-6, "{:?}", r.y_star);
        assert!(r.objective_value.abs() < 1e-10);
        assert!(compute_reference(&p, 0).is_err());
    }
}
