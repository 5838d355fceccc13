//! Seeded synthetic instances.
//!
//! All randomness comes from a ChaCha8 stream seeded with the 64-bit seed.
//! Uniform reals use `rand`'s `Uniform` sampler and normals use the ziggurat
//! sampler of `rand_distr`. Draw order is fixed: matrix entries in row-major
//! order, then the planted support, then its values, then the noise.

use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{LinearMap, Vector};
use crate::problem::SaddleProblem;
use crate::prox::{ProxFunction, SmoothFunction};

/// Standard deviation of the l1ls observation noise (variance 0.1).
pub const L1LS_NOISE_SD: f64 = 0.316_227_766_016_837_94;

/// A generated problem together with its ground truth.
#[derive(Clone, Debug)]
pub struct Instance {
    pub problem: SaddleProblem,
    /// The planted solution `x̄`.
    pub planted: Vector,
    /// Observation noise; `None` for noiseless instances.
    pub noise: Option<Vector>,
    /// `b = K x̄ (+ noise)`.
    pub rhs: Vector,
}

impl Instance {
    pub fn support_size(&self) -> usize {
        self.planted.iter().filter(|v| **v != 0.0).count()
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "dimensions must be >= 1, got {m}x{n}"
        )));
    }
    Ok(())
}

fn planted(rng: &mut ChaCha8Rng, n: usize, count: usize, lo: f64, hi: f64) -> Vector {
    let mut support = index::sample(rng, n, count).into_vec();
    support.sort_unstable();
    let mut x = vec![0.0; n];
    for i in support {
        // A draw of exactly 0 would shrink the support; redraw.
        x[i] = loop {
            let v = rng.random_range(lo..=hi);
            if v != 0.0 {
                break v;
            }
        };
    }
    Vector::from_raw(x)
}

fn assemble(
    k: LinearMap,
    f1: ProxFunction,
    planted: Vector,
    noise: Option<Vector>,
) -> Result<Instance> {
    let k = Arc::new(k);
    let mut rhs = k.apply(&planted)?;
    if let Some(w) = &noise {
        rhs = &rhs + w;
    }
    let problem = SaddleProblem::new(
        f1,
        SmoothFunction::Zero,
        ProxFunction::shifted_quadratic(rhs.clone()),
        SmoothFunction::Zero,
        k,
    )?;
    Ok(Instance {
        problem,
        planted,
        noise,
        rhs,
    })
}

/// l1-regularized least squares `min λ||x||_1 + ½||Kx - b||²` with a dense
/// standard normal `K`, `round(0.95 n)` planted nonzeros uniform on
/// `[-10, 10]` and `b = K x̄ + ω`, `ω ~ N(0, 0.1 I)`.
pub fn generate_l1ls(m: usize, n: usize, lambda: f64, seed: u64) -> Result<Instance> {
    check_dims(m, n)?;
    let f1 = ProxFunction::l1(lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..m * n)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let k = LinearMap::dense(m, n, data)?;
    let count = (0.95 * n as f64).round() as usize;
    let x = planted(&mut rng, n, count, -10.0, 10.0);
    let normal = Normal::new(0.0, L1LS_NOISE_SD).expect("valid standard deviation");
    let noise = Vector::from_raw((0..m).map(|_| normal.sample(&mut rng)).collect());
    assemble(k, f1, x, Some(noise))
}

/// Nonnegative least squares `min_{x >= 0} ½||Kx - b||²` with a sparse `K`
/// whose entries are present independently with probability `density` and
/// uniform on `[0, 0.1]`, `round(0.05 n)` planted nonzeros uniform on
/// `[0, 100]` and `b = K x̄`.
pub fn generate_nnls(m: usize, n: usize, density: f64, seed: u64) -> Result<Instance> {
    check_dims(m, n)?;
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triplets = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.random::<f64>() < density {
                triplets.push((i, j, rng.random_range(0.0..=0.1)));
            }
        }
    }
    let k = LinearMap::from_triplets(m, n, &triplets)?;
    let count = (0.05 * n as f64).round() as usize;
    let x = planted(&mut rng, n, count, 0.0, 100.0);
    assemble(k, ProxFunction::IndicatorNonnegative, x, None)
}
