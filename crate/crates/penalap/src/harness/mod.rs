//! Case files, error metrics, sweeps and report files.

pub mod cases;
pub mod config;
pub mod metrics;
pub mod output;
pub mod report;
pub mod sweep;

pub use cases::{run_case, run_convection, run_error_case, CaseOutput, ConvectionReport, SolveOutput};
pub use config::{Alpha, CaseConfig, Problem, WallNode};
pub use metrics::{error_norms, fit_order, local_orders, ErrorNorms};
pub use report::{ErrorReport, Failure, OrderFit};
pub use sweep::{n_for_h, sweep, write_sweep, SweepResult};
