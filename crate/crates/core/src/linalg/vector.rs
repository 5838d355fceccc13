use std::ops::{Add, Deref, Mul, Sub};

use crate::error::{Error, Result};

/// A dense real vector with finite entries.
///
/// Constructors reject empty input and non-finite entries. Arithmetic on two
/// vectors of different lengths panics, like slice zipping would silently
/// truncate otherwise; the public solver entry points check dimensions first.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument(
                "vector must have length >= 1".into(),
            ));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector entries"));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "vector must have length >= 1");
        Vector(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        assert!(n >= 1 && value.is_finite());
        Vector(vec![value; n])
    }

    /// Wraps entries produced by an internal computation. Finiteness is the
    /// caller's responsibility (solvers check it once per iteration).
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Vector(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| s * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&v| f(v)).collect())
    }

    /// `a * self + b * other`
    pub fn lin_comb(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vector {
        assert_eq!(x.len(), y.len());
        Vector(x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect())
    }

    /// `self + s * (other)` evaluated entrywise as `x + s * d`.
    pub fn add_scaled(&self, s: f64, d: &[f64]) -> Vector {
        assert_eq!(self.len(), d.len());
        Vector(self.0.iter().zip(d).map(|(xi, di)| xi + s * di).collect())
    }

    pub fn dist_sq(&self, other: &[f64]) -> f64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn dist(&self, other: &[f64]) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector::lin_comb(1.0, self, 1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.len(), rhs.len());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        self.scaled(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(Vector::new(vec![0.0, -2.5]).is_ok());
    }

    #[test]
    fn basic_arithmetic() {
        let a = Vector::new(vec![1.0, 2.0]).unwrap();
        let b = Vector::new(vec![3.0, -1.0]).unwrap();
        assert_eq!((&a + &b).as_slice(), &[4.0, 1.0]);
        assert_eq!((&a - &b).as_slice(), &[-2.0, 3.0]);
        assert_eq!((&a * 2.0).as_slice(), &[2.0, 4.0]);
        assert_eq!(a.dot(&b), 1.0);
        assert_eq!(b.norm_l1(), 4.0);
        assert_eq!(a.dist_sq(&b), 13.0);
    }
}
