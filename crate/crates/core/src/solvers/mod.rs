//! The inertial accelerated primal-dual method and the baseline solvers.
//!
//! Every solver reports progress through an [`Observer`], which receives a
//! [`TraceRow`] and the solver's full state every `observer_stride`
//! iterations (and at the final iteration).

mod baselines;
mod iapd;
mod tsequence;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use baselines::{
    solve_apda, solve_fista, solve_pda, solve_tseng, ApdaState, FistaState, PdaState, TsengState,
};
pub use iapd::{iapd_step, solve_iapd, IapdState};
pub use tsequence::{growth_lower_bound, nesterov_branch, nesterov_next, next_t, TSequence};

use crate::error::{Error, Result};
use crate::problem::{ReferencePoint, SaddleProblem};
use crate::trace::TraceRow;

/// How the primal pair `(x_{k+1}, u_{k+1})` is updated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IapdOption {
    /// Proximal step on `x`, then `u` by extrapolation.
    Option1,
    /// Proximal step on `u` with step `alpha t_{k+1}`, then `x` by averaging.
    Option2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// Run exactly `max_iters` iterations.
    Iterations,
    /// Stop once `objective - reference.objective_value <= tol`. Requires
    /// [`SolverOptions::reference`].
    ObjectiveGap { tol: f64 },
}

#[derive(Clone, Debug)]
pub struct SolverOptions<'a> {
    pub option: IapdOption,
    pub max_iters: usize,
    pub observer_stride: usize,
    pub stop_rule: StopRule,
    /// When set, rows carry the reference-point gap (and the energy for IAPD).
    pub reference: Option<&'a ReferencePoint>,
}

impl Default for SolverOptions<'_> {
    fn default() -> Self {
        SolverOptions {
            option: IapdOption::Option1,
            max_iters: 1000,
            observer_stride: 1,
            stop_rule: StopRule::Iterations,
            reference: None,
        }
    }
}

impl SolverOptions<'_> {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if self.observer_stride == 0 {
            return Err(Error::InvalidArgument(
                "observer_stride must be >= 1".into(),
            ));
        }
        if let StopRule::ObjectiveGap { .. } = self.stop_rule {
            if self.reference.is_none() {
                return Err(Error::InvalidArgument(
                    "objective-gap stopping needs a reference point".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Receives a row and the corresponding solver state.
pub trait Observer<S> {
    fn observe(&mut self, row: &TraceRow, state: &S);
}

impl<S, F: FnMut(&TraceRow, &S)> Observer<S> for F {
    fn observe(&mut self, row: &TraceRow, state: &S) {
        self(row, state)
    }
}

/// Observer that ignores everything.
pub struct NoObserver;

impl<S> Observer<S> for NoObserver {
    fn observe(&mut self, _: &TraceRow, _: &S) {}
}

#[derive(Clone, Debug)]
pub struct SolveOutput<S> {
    pub state: S,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    /// True when the stopping rule fired before `max_iters`.
    pub stopped_early: bool,
}

/// Shared loop bookkeeping: row emission, timing, stopping.
pub(crate) struct Driver<'o, 'r, S, O: Observer<S>> {
    observer: &'o mut O,
    opts: &'o SolverOptions<'r>,
    start: Instant,
    trace: Vec<TraceRow>,
    _state: std::marker::PhantomData<S>,
}

impl<'o, 'r, S, O: Observer<S>> Driver<'o, 'r, S, O> {
    pub(crate) fn new(opts: &'o SolverOptions<'r>, observer: &'o mut O) -> Result<Self> {
        opts.validate()?;
        Ok(Driver {
            observer,
            opts,
            start: Instant::now(),
            trace: Vec::new(),
            _state: std::marker::PhantomData,
        })
    }

    fn wants_row(&self, k: usize) -> bool {
        k.is_multiple_of(self.opts.observer_stride) || k == self.opts.max_iters
    }

    fn needs_objective(&self, k: usize) -> bool {
        self.wants_row(k) || matches!(self.opts.stop_rule, StopRule::ObjectiveGap { .. })
    }

    /// Records iteration `k`; `row` builds the row when one is needed.
    /// Returns true when the loop should stop.
    pub(crate) fn record(
        &mut self,
        k: usize,
        state: &S,
        row: impl FnOnce(f64) -> Result<TraceRow>,
    ) -> Result<bool> {
        let last = k >= self.opts.max_iters;
        if !self.needs_objective(k) {
            return Ok(last);
        }
        let r = row(self.start.elapsed().as_secs_f64())?;
        let hit = match (self.opts.stop_rule, self.opts.reference) {
            (StopRule::ObjectiveGap { tol }, Some(reference)) => {
                r.objective - reference.objective_value <= tol
            }
            _ => false,
        };
        if self.wants_row(k) || hit {
            self.observer.observe(&r, state);
            self.trace.push(r);
        }
        Ok(last || hit)
    }

    pub(crate) fn diverged(self, iteration: usize) -> Error {
        Error::Diverged {
            iteration,
            trace: self.trace,
        }
    }

    pub(crate) fn finish(self, state: S, iterations: usize) -> SolveOutput<S> {
        SolveOutput {
            state,
            trace: self.trace,
            iterations,
            stopped_early: iterations < self.opts.max_iters,
        }
    }
}

/// Objective and reference gap for a primal-dual pair.
pub(crate) fn primal_dual_metrics(
    p: &SaddleProblem,
    reference: Option<&ReferencePoint>,
    x: &[f64],
    y: &[f64],
) -> Result<(f64, Option<f64>)> {
    let objective = match p.primal_objective(x)? {
        Some(v) => v,
        None => p.lagrangian(x, y)?,
    };
    let gap = reference.map(|r| r.gap(p, x, y)).transpose()?;
    Ok((objective, gap))
}

/// Maps a non-finite prox output to a divergence marker.
pub(crate) fn finite_or_diverged<T>(res: Result<T>, iteration: usize) -> Result<T> {
    match res {
        Err(Error::NonFinite(_)) => Err(Error::Diverged {
            iteration,
            trace: Vec::new(),
        }),
        other => other,
    }
}
