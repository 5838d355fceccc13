//! Energy sequence, certified bounds and empirical rates for IAPD runs.
//!
//! The energy at `(x, y)` is `E_k = I1 + I2 + I3 + I4` with
//!
//! ```text
//! I1 = t_k^2 (L(x_k, y) - L(x, y_k))
//! I2 = ||u_k - x||^2 / (2 alpha)
//! I3 = t_{k+1}^2 ||v_k - y||^2 / (2 beta)
//! I4 = -t_k <K(u_k - x), v_k - v_{k-1}> + (t_k^2 - beta L_g2) ||v_k - v_{k-1}||^2 / (2 beta)
//! ```
//!
//! Under valid step parameters `E_k(x*, y*)` is nonincreasing and bounds
//! `t_k^2` times the reference gap. The true saddle point is not available,
//! so every check here runs at a [`ReferencePoint`] and tolerates an
//! additive slack derived from its accuracy estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Vector};
use crate::problem::{ReferencePoint, SaddleProblem, StepParams};
use crate::solvers::{growth_lower_bound, IapdState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyTerms {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub energy: f64,
}

/// Energy terms at an arbitrary point `(x, y)`.
pub fn energy_terms(
    p: &SaddleProblem,
    s: &StepParams,
    st: &IapdState,
    x: &Vector,
    y: &Vector,
) -> Result<EnergyTerms> {
    let (t, tn) = (st.t, st.t_next);
    let gap = p.lagrangian(&st.x, y)? - p.lagrangian(x, &st.y)?;
    let i1 = t * t * gap;
    let i2 = st.u.dist_sq(x) / (2.0 * s.alpha);
    let i3 = tn * tn * st.v.dist_sq(y) / (2.0 * s.beta);
    let dv = &st.v - &st.v_prev;
    // K(u_k - x) is recomputed here and never taken from solver internals.
    let k_du = p.k.apply(&(&st.u - x))?;
    let i4 =
        -t * dot(&k_du, &dv) + (t * t - s.beta * p.lipschitz_g2()) * dv.norm_sq() / (2.0 * s.beta);
    Ok(EnergyTerms {
        i1,
        i2,
        i3,
        i4,
        energy: i1 + i2 + i3 + i4,
    })
}

/// Energy and certified quantities at iteration `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub k: usize,
    pub t_k: f64,
    pub t_next: f64,
    pub energy: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    /// `L(x_k, y*) - L(x*, y_k)`
    pub gap_ref: f64,
    /// `E_base / t_k^2`
    pub bound_gap: f64,
    /// `||y_k - y*||^2`
    pub dual_dist_sq: f64,
    /// `2 E_base / (mu_g t_k^2)`
    pub dual_bound: f64,
    /// `||v_k - y*||^2`
    pub v_dist_sq: f64,
    /// `2 beta E_base / t_{k+1}^2`
    pub v_bound: f64,
    pub dx: f64,
    pub dy: f64,
}

/// Energy report at the reference point. The bounds use this state's own
/// energy as the baseline; use [`EnergyMonitor`] for bounds relative to
/// `E_1`.
pub fn energy(
    p: &SaddleProblem,
    s: &StepParams,
    st: &IapdState,
    r: &ReferencePoint,
) -> Result<EnergyReport> {
    let terms = energy_terms(p, s, st, &r.x_star, &r.y_star)?;
    Ok(build_report(p, s, st, r, terms, terms.energy))
}

fn build_report(
    p: &SaddleProblem,
    s: &StepParams,
    st: &IapdState,
    r: &ReferencePoint,
    terms: EnergyTerms,
    base: f64,
) -> EnergyReport {
    let (t, tn) = (st.t, st.t_next);
    EnergyReport {
        k: st.k,
        t_k: t,
        t_next: tn,
        energy: terms.energy,
        i1: terms.i1,
        i2: terms.i2,
        i3: terms.i3,
        i4: terms.i4,
        gap_ref: terms.i1 / (t * t),
        bound_gap: base / (t * t),
        dual_dist_sq: st.y.dist_sq(&r.y_star),
        dual_bound: 2.0 * base / (p.mu_g() * t * t),
        v_dist_sq: st.v.dist_sq(&r.y_star),
        v_bound: 2.0 * s.beta * base / (tn * tn),
        dx: st.x.dist(&st.x_prev),
        dy: st.y.dist(&st.y_prev),
    }
}

/// Produces reports whose bounds are relative to the energy at the initial
/// state.
pub struct EnergyMonitor<'a> {
    p: &'a SaddleProblem,
    s: &'a StepParams,
    r: &'a ReferencePoint,
    e1: f64,
}

impl<'a> EnergyMonitor<'a> {
    pub fn new(
        p: &'a SaddleProblem,
        s: &'a StepParams,
        r: &'a ReferencePoint,
        initial: &IapdState,
    ) -> Result<Self> {
        let e1 = energy_terms(p, s, initial, &r.x_star, &r.y_star)?.energy;
        Ok(EnergyMonitor { p, s, r, e1 })
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn report(&self, st: &IapdState) -> Result<EnergyReport> {
        let terms = energy_terms(self.p, self.s, st, &self.r.x_star, &self.r.y_star)?;
        Ok(build_report(self.p, self.s, st, self.r, terms, self.e1))
    }
}

/// Settings for [`certify`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub t1: f64,
    /// `mu_g * beta`
    pub a: f64,
    pub mu_g: f64,
    pub beta: f64,
    /// Relative tolerance on the bounds.
    pub rel_tol: f64,
    /// Energy monotonicity tolerance, relative to `1 + |E_1|`.
    pub energy_tol: f64,
    /// Additive slack on gap values for an inaccurate reference point.
    pub slack: f64,
}

impl CertifyConfig {
    /// Tolerances `1e-6` (bounds) and `1e-8` (energy), slack ten times the
    /// reference accuracy estimate.
    pub fn new(p: &SaddleProblem, s: &StepParams, r: &ReferencePoint) -> Self {
        CertifyConfig {
            t1: s.t1,
            a: p.mu_g() * s.beta,
            mu_g: p.mu_g(),
            beta: s.beta,
            rel_tol: 1e-6,
            energy_tol: 1e-8,
            slack: 10.0 * r.accuracy,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckSummary {
    pub checked: usize,
    pub violations: usize,
    /// Largest amount by which a violated inequality was exceeded.
    pub worst_excess: f64,
    pub first_violation_k: Option<usize>,
}

impl CheckSummary {
    fn check(&mut self, k: usize, lhs: f64, rhs: f64) {
        self.checked += 1;
        if !(lhs <= rhs) {
            self.violations += 1;
            let excess = if lhs.is_finite() && rhs.is_finite() {
                lhs - rhs
            } else {
                f64::INFINITY
            };
            self.worst_excess = self.worst_excess.max(excess);
            self.first_violation_k.get_or_insert(k);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Certificate {
    pub rows: usize,
    /// `E_base`, the energy of the first report.
    pub base_energy: f64,
    /// `gap_ref <= E_base / t_k^2`
    pub gap: CheckSummary,
    /// `||y_k - y*||^2 <= 2 E_base / (mu_g t_k^2)`
    pub dual: CheckSummary,
    /// `||v_k - y*||^2 <= 2 beta E_base / t_{k+1}^2`
    pub dual_v: CheckSummary,
    /// `E_{k+1} <= E_k`
    pub energy_monotone: CheckSummary,
    /// `t_k >= min{1/2, b} (k + 1)`
    pub t_lower: CheckSummary,
    /// `t_{k+1}^2 - t_{k+1} <= t_k^2` and `t_{k+1}^2 <= t_k^2 + a t_k`
    pub t_recursion: CheckSummary,
    pub max_dx_t: f64,
    pub max_dy_t2: f64,
    /// Maxima over the second half of the trace.
    pub tail_max_dx_t: f64,
    pub tail_max_dy_t2: f64,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        [
            &self.gap,
            &self.dual,
            &self.dual_v,
            &self.energy_monotone,
            &self.t_lower,
            &self.t_recursion,
        ]
        .iter()
        .all(|c| c.passed())
    }
}

/// Checks a trace of reports against the certified bounds. The first
/// report's energy is the baseline `E_base`; for a trace starting at the
/// initial state this is `E_1`.
pub fn certify(reports: &[EnergyReport], cfg: &CertifyConfig) -> Certificate {
    let mut cert = Certificate {
        rows: reports.len(),
        ..Default::default()
    };
    let Some(first) = reports.first() else {
        return cert;
    };
    let base = first.energy;
    cert.base_energy = base;
    let rel = 1.0 + cfg.rel_tol;
    let dist_slack = 2.0 * cfg.slack / cfg.mu_g;
    let half = reports.len() / 2;

    for (i, r) in reports.iter().enumerate() {
        let (t, tn) = (r.t_k, r.t_next);
        cert.gap
            .check(r.k, r.gap_ref, base / (t * t) * rel + cfg.slack);

        let cross = |d: f64| 2.0 * (d * dist_slack).sqrt() + dist_slack;
        cert.dual.check(
            r.k,
            r.dual_dist_sq,
            2.0 * base / (cfg.mu_g * t * t) * rel + cross(r.dual_dist_sq),
        );
        cert.dual_v.check(
            r.k,
            r.v_dist_sq,
            2.0 * cfg.beta * base / (tn * tn) * rel + cross(r.v_dist_sq),
        );

        cert.t_lower
            .check(r.k, growth_lower_bound(cfg.t1, cfg.a, r.k), t);
        cert.t_recursion.check(r.k, tn * tn - tn, t * t);
        cert.t_recursion.check(r.k, tn * tn, t * t + cfg.a * t);

        if let Some(next) = reports.get(i + 1) {
            // E_{k+1} - E_k <= c_k gap_k with c_k = t_{k+1}(t_{k+1} - 1) - t_k^2 <= 0;
            // a reference gap below zero by at most `slack` lets E rise by |c_k| slack.
            let c = tn * (tn - 1.0) - t * t;
            let tol = cfg.energy_tol * (1.0 + base.abs()) + c.abs() * cfg.slack;
            if next.k == r.k + 1 {
                cert.energy_monotone
                    .check(next.k, next.energy, r.energy + tol);
            } else {
                cert.energy_monotone.check(
                    next.k,
                    next.energy,
                    r.energy + cfg.energy_tol * (1.0 + base.abs()) + t * t * cfg.slack,
                );
            }
        }

        let dx_t = r.dx * t;
        let dy_t2 = r.dy * t * t;
        cert.max_dx_t = cert.max_dx_t.max(dx_t);
        cert.max_dy_t2 = cert.max_dy_t2.max(dy_t2);
        if i >= half {
            cert.tail_max_dx_t = cert.tail_max_dx_t.max(dx_t);
            cert.tail_max_dy_t2 = cert.tail_max_dy_t2.max(dy_t2);
        }
    }
    cert
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub used: usize,
    /// Rows in the window with a nonpositive value.
    pub excluded: usize,
}

/// Least-squares slope of `log(value)` against `log(k)` over
/// `k_min <= k <= k_max`. Nonpositive values are skipped and counted.
pub fn slope(points: &[(usize, f64)], k_min: usize, k_max: usize) -> Result<SlopeFit> {
    if !(k_max > k_min && k_min >= 1) {
        return Err(Error::InvalidArgument(format!(
            "slope window needs k_max > k_min >= 1, got [{k_min}, {k_max}]"
        )));
    }
    let mut excluded = 0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(k, v) in points.iter().filter(|(k, _)| (k_min..=k_max).contains(k)) {
        if v > 0.0 && v.is_finite() {
            xs.push((k as f64).ln());
            ys.push(v.ln());
        } else {
            excluded += 1;
        }
    }
    const MIN_ROWS: usize = 5;
    if xs.len() < MIN_ROWS {
        return Err(Error::InsufficientData {
            usable: xs.len(),
            required: MIN_ROWS,
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        used: xs.len(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::linalg::LinearMap;
    use crate::prox::{ProxFunction, SmoothFunction};
    use crate::solvers::{iapd_step, IapdOption, TSequence};

    #[test]
    fn slope_of_exact_power_laws() {
        let inv_sq: Vec<_> = (1..=200).map(|k| (k, 1.0 / (k as f64).powi(2))).collect();
        assert!((slope(&inv_sq, 10, 150).unwrap().slope + 2.0).abs() < 1e-6);
        let inv: Vec<_> = (1..=200).map(|k| (k, 1.0 / k as f64)).collect();
        assert!((slope(&inv, 10, 150).unwrap().slope + 1.0).abs() < 1e-6);
    }

    #[test]
    fn slope_needs_five_usable_rows() {
        let pts: Vec<_> = (1..=10)
            .map(|k| (k, if k % 2 == 0 { 0.0 } else { 1.0 }))
            .collect();
        match slope(&pts, 1, 8) {
            Err(Error::InsufficientData { usable, .. }) => assert_eq!(usable, 4),
            other => panic!("{other:?}"),
        }
        let fit = slope(&pts, 1, 10).unwrap();
        assert_eq!(fit.excluded, 5);
        assert!(slope(&pts, 5, 5).is_err());
    }

    fn small_problem() -> (SaddleProblem, StepParams) {
        let k = LinearMap::dense(2, 3, vec![1.0, -0.5, 2.0, 0.3, 1.5, -1.0]).unwrap();
        let p = SaddleProblem::new(
            ProxFunction::l1(0.1).unwrap(),
            SmoothFunction::Zero,
            ProxFunction::shifted_quadratic(Vector::new(vec![1.0, -2.0]).unwrap()),
            SmoothFunction::Zero,
            Arc::new(k),
        )
        .unwrap();
        let norm = p.norm_k();
        (p, StepParams::new(0.49 / norm, 2.0 / norm, 1.0).unwrap())
    }

    #[test]
    fn energy_vanishes_at_the_initial_iterate() {
        let (p, s) = small_problem();
        let x0 = Vector::new(vec![0.5, -1.0, 2.0]).unwrap();
        let y0 = Vector::new(vec![0.1, 0.2]).unwrap();
        let st = IapdState::new(&p, &s, &x0, &y0).unwrap();
        let e = energy_terms(&p, &s, &st, &x0, &y0).unwrap();
        assert_eq!(e.energy, 0.0);
        let other = Vector::new(vec![3.0, 1.0]).unwrap();
        assert_eq!(energy_terms(&p, &s, &st, &x0, &other).unwrap().i4, 0.0);
    }

    #[test]
    fn single_initial_row_certifies() {
        let (p, s) = small_problem();
        let st = IapdState::new(&p, &s, &Vector::zeros(3), &Vector::zeros(2)).unwrap();
        let r = crate::problem::compute_reference(&p, 3000).unwrap();
        let rep = energy(&p, &s, &st, &r).unwrap();
        let cert = certify(&[rep], &CertifyConfig::new(&p, &s, &r));
        assert!(cert.passed(), "{cert:?}");
        assert_eq!(cert.rows, 1);
    }

    #[test]
    fn short_run_certifies() {
        let (p, s) = small_problem();
        let r = crate::problem::compute_reference(&p, 5000).unwrap();
        let mut st = IapdState::new(&p, &s, &Vector::zeros(3), &Vector::zeros(2)).unwrap();
        let mon = EnergyMonitor::new(&p, &s, &r, &st).unwrap();
        let mut reports = vec![mon.report(&st).unwrap()];
        for _ in 0..300 {
            st = iapd_step(&p, &s, &st, IapdOption::Option2).unwrap();
            reports.push(mon.report(&st).unwrap());
        }
        let cert = certify(&reports, &CertifyConfig::new(&p, &s, &r));
        assert!(cert.passed(), "{cert:?}");
        assert_eq!(cert.base_energy, mon.e1());
    }

    #[test]
    fn corrupted_t_sequence_is_flagged() {
        let cfg = CertifyConfig {
            t1: 1.0,
            a: 0.5,
            mu_g: 1.0,
            beta: 0.5,
            rel_tol: 1e-6,
            energy_tol: 1e-8,
            slack: 0.0,
        };
        let row = |k: usize, t: f64, tn: f64| EnergyReport {
            k,
            t_k: t,
            t_next: tn,
            energy: 1.0,
            i1: 0.0,
            i2: 1.0,
            i3: 0.0,
            i4: 0.0,
            gap_ref: 0.0,
            bound_gap: 1.0,
            dual_dist_sq: 0.0,
            dual_bound: 1.0,
            v_dist_sq: 0.0,
            v_bound: 1.0,
            dx: 0.0,
            dy: 0.0,
        };
        let corrupted: Vec<_> = (1..=20)
            .map(|k| row(k, 1.0 + 2.0 * (k - 1) as f64, 1.0 + 2.0 * k as f64))
            .collect();
        let cert = certify(&corrupted, &cfg);
        assert_eq!(cert.t_recursion.violations, 40);
        assert!(!cert.passed());

        let mut seq = TSequence::new(1.0, 0.5);
        let mut t = 1.0;
        let honest: Vec<_> = (1..=20)
            .map(|k| {
                let tn = seq.next_t();
                let r = row(k, t, tn);
                t = tn;
                r
            })
            .collect();
        assert!(certify(&honest, &cfg).t_recursion.passed());
        assert!(certify(&honest, &cfg).t_lower.passed());
    }
}
