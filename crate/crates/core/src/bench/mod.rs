//! Seeded benchmark instances, the experiment runner and its output files.

mod config;
mod files;
mod generators;
mod runner;

pub use config::{parse_algorithms, Algorithm, Experiment, ExperimentConfig, StepOverrides};
pub use files::{
    emit_csv, parse_csv, read_csv, write_csv, write_plotdata, CertificateState, DualDistances,
    PlotSeries, CSV_HEADER,
};
pub use generators::{generate_l1ls, generate_nnls, Instance, L1LS_NOISE_SD};
pub use runner::{
    benchmark_reference, build_instance, iapd_preset, primal_composite, run_benchmark,
    slope_window, write_outputs, AlgorithmRun, BenchReport,
};
