//! Rate studies and the experiment configuration behind the CLI.

pub mod config;
pub mod functions;
pub mod jet;
pub mod rates;

pub use config::{run_config, ExperimentConfig, FunctionSpec, Orders, RunSummary};
pub use functions::{integrability, validate_regularity, Family, IntegrabilityReport, Regularity, TestFunction};
pub use rates::{
    exponent_table, loglog_fit, run_commutator_rate, run_l2_rate, run_residual_rates, run_sobolev_rate, ExperimentKind,
    RateOptions, RatePoint, RateReport,
};
