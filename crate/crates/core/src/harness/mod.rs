//! Configuration-driven experiments: a chain, its impurity twins, noisy
//! simulation at every gain, mitigation, post-selection and report files.

mod config;
mod emit;
mod run;
mod verify;

pub use config::{
    label, ExperimentConfig, GainConfig, MitigationConfig, NoiseConfig, SelectionConfig, TrotterConfig, MAX_SITES,
};
pub use emit::{
    average_plot_csv, emit_report, relerr_plot_csv, results_csv, summary_json, AVERAGE_PLOT_FILE, RELERR_PLOT_FILE,
    RESULTS_FILE, SUMMARY_FILE,
};
pub use run::{
    relative_error, run_experiment, simulate_exact, Check, ExactData, ExperimentReport, GateCountCheck, MethodEstimate,
    MethodSummary, ObservableStep, RelativeError, StepSummary, RELIABLE_IDEAL,
};
pub use verify::{verify_bound, verify_decay, BoundReport, DecayReport, DECAY_TOLERANCE, LOG_RATIO_TOLERANCE};
