//! Proximable and smooth building blocks for the saddle-point terms.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::linalg::{LinearMap, Vector};

/// A closed convex function with a closed-form proximal map.
#[derive(Clone, Debug, PartialEq)]
pub enum ProxFunction {
    /// `lambda * ||x||_1`
    L1Norm {
        lambda: f64,
    },
    /// Indicator of the nonnegative orthant.
    IndicatorNonnegative,
    /// `0.5 * ||x + shift||^2`, strongly convex with modulus 1.
    ShiftedQuadratic {
        shift: Vector,
    },
    Zero,
}

impl ProxFunction {
    pub fn l1(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "l1 weight must be >= 0, got {lambda}"
            )));
        }
        Ok(ProxFunction::L1Norm { lambda })
    }

    pub fn shifted_quadratic(shift: Vector) -> Self {
        ProxFunction::ShiftedQuadratic { shift }
    }

    pub fn strong_convexity(&self) -> f64 {
        match self {
            ProxFunction::ShiftedQuadratic { .. } => 1.0,
            _ => 0.0,
        }
    }

    /// Dimension fixed by the function's own data, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ProxFunction::ShiftedQuadratic { shift } => Some(shift.len()),
            _ => None,
        }
    }

    /// `argmin_p f(p) + ||p - z||^2 / (2 step)`
    pub fn prox(&self, step: f64, z: &[f64]) -> Result<Vector> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "prox step must be > 0, got {step}"
            )));
        }
        let out = match self {
            ProxFunction::L1Norm { lambda } => {
                let thr = step * lambda;
                z.iter().map(|&zi| soft_threshold(zi, thr)).collect()
            }
            ProxFunction::IndicatorNonnegative => z.iter().map(|&zi| zi.max(0.0)).collect(),
            ProxFunction::ShiftedQuadratic { shift } => {
                check_len("shifted quadratic prox", shift.len(), z.len())?;
                z.iter()
                    .zip(shift.iter())
                    .map(|(zi, bi)| (zi - step * bi) / (1.0 + step))
                    .collect()
            }
            ProxFunction::Zero => z.to_vec(),
        };
        Vector::new(out)
    }

    /// Function value; `+inf` outside the domain of the indicator.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            ProxFunction::L1Norm { lambda } => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            ProxFunction::IndicatorNonnegative => {
                if x.iter().all(|&v| v >= 0.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxFunction::ShiftedQuadratic { shift } => {
                0.5 * x
                    .iter()
                    .zip(shift.iter())
                    .map(|(a, b)| (a + b) * (a + b))
                    .sum::<f64>()
            }
            ProxFunction::Zero => 0.0,
        }
    }

    /// True when the function is a proper constant zero, i.e. adds nothing.
    pub fn is_zero(&self) -> bool {
        matches!(
            self,
            ProxFunction::Zero | ProxFunction::L1Norm { lambda: 0.0 }
        )
    }
}

fn soft_threshold(z: f64, thr: f64) -> f64 {
    z.signum() * (z.abs() - thr).max(0.0)
}

/// A convex function with Lipschitz gradient.
#[derive(Clone, Debug)]
pub enum SmoothFunction {
    Zero,
    /// `0.5 * ||K x - b||^2` with `lipschitz = ||K||^2` (safety-factored
    /// estimate).
    LeastSquares {
        map: Arc<LinearMap>,
        data: Vector,
        lipschitz: f64,
    },
}

impl SmoothFunction {
    pub fn least_squares(map: Arc<LinearMap>, data: Vector) -> Result<Self> {
        check_len("least-squares data", map.rows(), data.len())?;
        let norm = map.norm();
        Ok(SmoothFunction::LeastSquares {
            map,
            data,
            lipschitz: norm * norm,
        })
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            SmoothFunction::Zero => 0.0,
            SmoothFunction::LeastSquares { lipschitz, .. } => *lipschitz,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SmoothFunction::Zero)
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            SmoothFunction::Zero => None,
            SmoothFunction::LeastSquares { map, .. } => Some(map.cols()),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        match self {
            SmoothFunction::Zero => Ok(0.0),
            SmoothFunction::LeastSquares { map, data, .. } => {
                let r = map.apply(x)?;
                Ok(0.5 * r.dist_sq(data))
            }
        }
    }

    /// `K^T (K x - b)` for least squares, zero otherwise.
    pub fn grad(&self, x: &[f64]) -> Result<Vector> {
        match self {
            SmoothFunction::Zero => Vector::new(vec![0.0; x.len()]),
            SmoothFunction::LeastSquares { map, data, .. } => {
                let kx = map.apply(x)?;
                map.apply_adjoint(&(&kx - data))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn soft_threshold_example() {
        let f = ProxFunction::l1(1.0).unwrap();
        assert_eq!(
            f.prox(1.0, &[3.0, -0.5, 0.0]).unwrap().as_slice(),
            &[2.0, 0.0, 0.0]
        );
        let p = f.prox(1.0, &[-3.0]).unwrap();
        assert_eq!(p.as_slice(), &[-2.0]);
    }

    #[test]
    fn shifted_quadratic_prox_example() {
        let f = ProxFunction::shifted_quadratic(v(&[1.0]));
        assert_eq!(f.prox(1.0, &[1.0]).unwrap().as_slice(), &[0.0]);
    }

    #[test]
    fn nonnegative_projection() {
        let f = ProxFunction::IndicatorNonnegative;
        for step in [1e-3, 1.0, 50.0] {
            assert_eq!(f.prox(step, &[-1.0, 2.0]).unwrap().as_slice(), &[0.0, 2.0]);
        }
    }

    #[test]
    fn zero_prox_is_identity() {
        assert_eq!(
            ProxFunction::Zero
                .prox(3.0, &[1.5, -2.0])
                .unwrap()
                .as_slice(),
            &[1.5, -2.0]
        );
    }

    #[test]
    fn nonpositive_step_rejected() {
        let f = ProxFunction::l1(0.1).unwrap();
        assert!(f.prox(0.0, &[1.0]).is_err());
        assert!(f.prox(-1.0, &[1.0]).is_err());
        assert!(f.prox(f64::NAN, &[1.0]).is_err());
        assert!(ProxFunction::l1(-0.1).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let l1 = ProxFunction::l1(0.1).unwrap();
        assert!((l1.evaluate(&[1.0, -2.0]) - 0.3).abs() < 1e-15);
        let ind = ProxFunction::IndicatorNonnegative;
        assert_eq!(ind.evaluate(&[0.0, 5.0]), 0.0);
        assert_eq!(ind.evaluate(&[-1e-9, 5.0]), f64::INFINITY);
        let q = ProxFunction::shifted_quadratic(v(&[0.0, 0.0]));
        assert_eq!(q.evaluate(&[3.0, 4.0]), 12.5);
        assert_eq!(ProxFunction::Zero.evaluate(&[9.0]), 0.0);
    }

    #[test]
    fn strong_convexity_moduli() {
        assert_eq!(
            ProxFunction::shifted_quadratic(v(&[0.0])).strong_convexity(),
            1.0
        );
        assert_eq!(ProxFunction::IndicatorNonnegative.strong_convexity(), 0.0);
        assert_eq!(ProxFunction::l1(2.0).unwrap().strong_convexity(), 0.0);
    }

    #[test]
    fn least_squares_gradient_vanishes_at_minimizer() {
        let f = SmoothFunction::least_squares(Arc::new(LinearMap::identity(2)), v(&[1.0, 1.0]))
            .unwrap();
        assert_eq!(f.grad(&[1.0, 1.0]).unwrap().as_slice(), &[0.0, 0.0]);
        assert!((f.lipschitz() - 1.001f64.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn zero_smooth_function() {
        let f = SmoothFunction::Zero;
        assert_eq!(f.grad(&[3.0, -1.0]).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(f.evaluate(&[3.0]).unwrap(), 0.0);
        assert_eq!(f.lipschitz(), 0.0);
    }
}
