use std::sync::OnceLock;

use crate::error::{check_len, Error, Result};
use crate::linalg::vector::Vector;

/// Multiplier applied to the converged power-iteration estimate so that
/// step-size conditions checked with it stay valid for the exact norm.
pub const NORM_SAFETY_FACTOR: f64 = 1.001;
pub const DEFAULT_NORM_TOL: f64 = 1e-10;
pub const DEFAULT_NORM_MAX_ITERS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    /// Row-major entries, `rows * cols` long.
    Dense(Vec<f64>),
    /// Compressed sparse rows with strictly increasing column indices per row.
    Csr {
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    },
}

/// A real `rows x cols` matrix used as a linear operator together with its
/// adjoint.
///
/// The spectral-norm estimate is computed at most once and cached.
#[derive(Clone, Debug)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    storage: Storage,
    norm: OnceLock<f64>,
}

impl LinearMap {
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols)?;
        check_len("dense matrix data", rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self::with_storage(rows, cols, Storage::Dense(data)))
    }

    /// Builds CSR storage from `(row, col, value)` triplets. Duplicate
    /// positions are summed; explicitly stored zeros are kept.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        check_shape(rows, cols)?;
        let mut sorted = triplets.to_vec();
        for &(r, c, v) in &sorted {
            if r >= rows || c >= cols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r}, {c}) outside {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("matrix entries"));
            }
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self::with_storage(
            rows,
            cols,
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            },
        ))
    }

    pub fn csr(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_shape(rows, cols)?;
        check_len("csr row pointer", rows + 1, row_ptr.len())?;
        check_len("csr values", col_idx.len(), values.len())?;
        if row_ptr[0] != 0 || row_ptr[rows] != col_idx.len() {
            return Err(Error::InvalidArgument("csr row pointer bounds".into()));
        }
        for r in 0..rows {
            let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
            if lo > hi {
                return Err(Error::InvalidArgument(
                    "csr row pointer not monotone".into(),
                ));
            }
            let cols_in_row = &col_idx[lo..hi];
            if cols_in_row.iter().any(|&c| c >= cols)
                || cols_in_row.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(Error::InvalidArgument(format!(
                    "row {r}: column indices must be in range and strictly increasing"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self::with_storage(
            rows,
            cols,
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            },
        ))
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &triplets).expect("identity is well formed")
    }

    /// The all-zero map with an empty sparsity pattern.
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, &[]).expect("zero map is well formed")
    }

    fn with_storage(rows: usize, cols: usize, storage: Storage) -> Self {
        LinearMap {
            rows,
            cols,
            storage,
            norm: OnceLock::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Csr { .. })
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.len(),
            Storage::Csr { values, .. } => values.len(),
        }
    }

    /// `K x`
    pub fn apply(&self, x: &[f64]) -> Result<Vector> {
        check_len("apply input", self.cols, x.len())?;
        Ok(Vector::from_raw(self.apply_unchecked(x)))
    }

    /// `K^T y`
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vector> {
        check_len("adjoint input", self.rows, y.len())?;
        Ok(Vector::from_raw(self.apply_adjoint_unchecked(y)))
    }

    fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(data) => data
                .chunks_exact(self.cols)
                .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
                .collect(),
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            } => (0..self.rows)
                .map(|r| {
                    let span = row_ptr[r]..row_ptr[r + 1];
                    col_idx[span.clone()]
                        .iter()
                        .zip(&values[span])
                        .map(|(&c, v)| v * x[c])
                        .sum()
                })
                .collect(),
        }
    }

    fn apply_adjoint_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        match &self.storage {
            Storage::Dense(data) => {
                for (row, &yr) in data.chunks_exact(self.cols).zip(y) {
                    for (o, a) in out.iter_mut().zip(row) {
                        *o += a * yr;
                    }
                }
            }
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            } => {
                for (r, &yr) in y.iter().enumerate() {
                    let span = row_ptr[r]..row_ptr[r + 1];
                    for (&c, v) in col_idx[span.clone()].iter().zip(&values[span]) {
                        out[c] += v * yr;
                    }
                }
            }
        }
        out
    }

    /// Estimates the spectral norm by power iteration on `K^T K` and caches
    /// the result. Later calls return the cached value regardless of the
    /// arguments.
    ///
    /// The power iteration starts from the normalized all-ones vector. The
    /// returned value is the converged singular-value estimate times
    /// [`NORM_SAFETY_FACTOR`]; the zero map gives 0.
    pub fn estimate_norm(&self, tol: f64, max_iters: usize) -> f64 {
        *self
            .norm
            .get_or_init(|| power_norm(self, tol, max_iters.max(1)) * NORM_SAFETY_FACTOR)
    }

    /// Cached norm estimate, computing it with default settings if needed.
    pub fn norm(&self) -> f64 {
        self.estimate_norm(DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITERS)
    }

    pub fn cached_norm(&self) -> Option<f64> {
        self.norm.get().copied()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let values = match &self.storage {
            Storage::Dense(d) => d,
            Storage::Csr { values, .. } => values,
        };
        values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Row-major dense copy of the entries.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Csr { .. } => {
                let mut out = vec![0.0; self.rows * self.cols];
                for (r, c, v) in self.triplets() {
                    out[r * self.cols + c] = v;
                }
                out
            }
        }
    }

    /// Stored entries sorted by `(row, col)`. Dense maps report every entry.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match &self.storage {
            Storage::Dense(d) => d
                .iter()
                .enumerate()
                .map(|(i, &v)| (i / self.cols, i % self.cols, v))
                .collect(),
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            } => (0..self.rows)
                .flat_map(|r| (row_ptr[r]..row_ptr[r + 1]).map(move |i| (r, col_idx[i], values[i])))
                .collect(),
        }
    }
}

impl PartialEq for LinearMap {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.storage == other.storage
    }
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "matrix shape {rows}x{cols}: both dimensions must be >= 1"
        )));
    }
    Ok(())
}

/// Power iteration on `K^T K`; returns the singular-value estimate without
/// the safety factor.
fn power_norm(map: &LinearMap, tol: f64, max_iters: usize) -> f64 {
    let n = map.cols;
    let ones = vec![1.0 / (n as f64).sqrt(); n];
    if let Some(sigma) = power_from(map, ones, tol, max_iters) {
        return sigma;
    }
    // The all-ones start can be orthogonal to the row space (e.g. K = [1, -1]).
    let alternating: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 / 7.0).collect();
    let scale = alternating.iter().map(|v| v * v).sum::<f64>().sqrt();
    let alternating = alternating.into_iter().map(|v| v / scale).collect();
    if let Some(sigma) = power_from(map, alternating, tol, max_iters) {
        return sigma;
    }
    // Either the map is zero or both starts were annihilated; the Frobenius
    // norm is a valid upper bound on the spectral norm.
    map.frobenius_norm()
}

fn power_from(map: &LinearMap, mut v: Vec<f64>, tol: f64, max_iters: usize) -> Option<f64> {
    let mut sigma = 0.0f64;
    for _ in 0..max_iters {
        let kv = map.apply_unchecked(&v);
        let next_sigma = kv.iter().map(|a| a * a).sum::<f64>().sqrt();
        if next_sigma == 0.0 {
            return None;
        }
        let mut w = map.apply_adjoint_unchecked(&kv);
        let w_norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if w_norm == 0.0 {
            return None;
        }
        w.iter_mut().for_each(|a| *a /= w_norm);
        v = w;
        let converged = (next_sigma - sigma).abs() <= tol * next_sigma;
        sigma = next_sigma;
        if converged {
            break;
        }
    }
    // One more Rayleigh evaluation at the final direction.
    let kv = map.apply_unchecked(&v);
    Some(kv.iter().map(|a| a * a).sum::<f64>().sqrt().max(sigma))
}
