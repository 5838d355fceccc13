use serde::{Deserialize, Serialize};

/// One observed iteration of a solver.
///
/// `k` counts completed iterations (1 after the first step). Columns an
/// algorithm does not produce are `None`: PDA and APDA have no `t_k`, the
/// primal-only methods have no `dy` or `gap_ref`, and `energy` is reported
/// for IAPD runs with a reference point only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub algorithm: String,
    pub k: usize,
    pub t_k: Option<f64>,
    pub objective: f64,
    pub gap_ref: Option<f64>,
    pub dx: f64,
    pub dy: Option<f64>,
    pub energy: Option<f64>,
    pub elapsed_s: f64,
}
