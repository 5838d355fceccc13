use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// l1-regularized least squares with a dense Gaussian matrix.
    L1ls,
    /// Nonnegative least squares with a sparse nonnegative matrix.
    Nnls,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::L1ls => "l1ls",
            Experiment::Nnls => "nnls",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1ls" => Ok(Experiment::L1ls),
            "nnls" => Ok(Experiment::Nnls),
            other => Err(Error::InvalidArgument(format!(
                "unknown experiment '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "iapd-op1")]
    IapdOp1,
    #[serde(rename = "iapd-op2")]
    IapdOp2,
    #[serde(rename = "pda")]
    Pda,
    #[serde(rename = "apda")]
    Apda,
    #[serde(rename = "fista")]
    Fista,
    #[serde(rename = "tseng")]
    Tseng,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::IapdOp1,
        Algorithm::IapdOp2,
        Algorithm::Pda,
        Algorithm::Apda,
        Algorithm::Fista,
        Algorithm::Tseng,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::IapdOp1 => "iapd-op1",
            Algorithm::IapdOp2 => "iapd-op2",
            Algorithm::Pda => "pda",
            Algorithm::Apda => "apda",
            Algorithm::Fista => "fista",
            Algorithm::Tseng => "tseng",
        }
    }

    pub fn is_iapd(self) -> bool {
        matches!(self, Algorithm::IapdOp1 | Algorithm::IapdOp2)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown algorithm '{s}' (expected one of {})",
                    known.join(", ")
                ))
            })
    }
}

/// Parses a comma-separated algorithm list, dropping repeats.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let a: Algorithm = name.parse()?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("empty algorithm list".into()));
    }
    Ok(out)
}

/// Explicit IAPD step parameters replacing the preset values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepOverrides {
    pub t1: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub m: usize,
    pub n: usize,
    /// l1 weight (l1ls only).
    pub lambda: f64,
    /// Entry inclusion probability (nnls only).
    pub density: f64,
    pub seed: u64,
    pub iters: usize,
    pub algorithms: Vec<Algorithm>,
    /// Where trace files are written; `None` keeps everything in memory.
    pub out_dir: Option<PathBuf>,
    pub overrides: StepOverrides,
    /// The reference point runs for `reference_factor * iters` iterations.
    pub reference_factor: usize,
}

impl ExperimentConfig {
    /// Desk-size defaults: `200 x 400` for l1ls, `400 x 200` for nnls.
    pub fn new(experiment: Experiment) -> Self {
        let (m, n) = match experiment {
            Experiment::L1ls => (200, 400),
            Experiment::Nnls => (400, 200),
        };
        ExperimentConfig {
            experiment,
            m,
            n,
            lambda: 0.1,
            density: 0.1,
            seed: match experiment {
                Experiment::L1ls => 7,
                Experiment::Nnls => 11,
            },
            iters: 2000,
            algorithms: Algorithm::ALL.to_vec(),
            out_dir: None,
            overrides: StepOverrides::default(),
            reference_factor: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidArgument(format!(
                "dimensions must be >= 1, got {}x{}",
                self.m, self.n
            )));
        }
        if self.iters == 0 {
            return Err(Error::InvalidArgument("iters must be >= 1".into()));
        }
        if self.reference_factor == 0 {
            return Err(Error::InvalidArgument(
                "reference factor must be >= 1".into(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("no algorithms selected".into()));
        }
        match self.experiment {
            Experiment::L1ls if !(self.lambda >= 0.0 && self.lambda.is_finite()) => {
                Err(Error::InvalidArgument(format!(
                    "lambda must be finite and nonnegative, got {}",
                    self.lambda
                )))
            }
            Experiment::Nnls if !(self.density > 0.0 && self.density <= 1.0) => Err(
                Error::InvalidArgument(format!("density must lie in (0, 1], got {}", self.density)),
            ),
            _ => Ok(()),
        }
    }
}
