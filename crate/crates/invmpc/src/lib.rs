//! Closed-loop inverter simulation harness: configuration files, scenario
//! runs, CSV and summary output, and the `invmpc` command line.

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

pub use config::FileConfig;
pub use error::{HarnessError, Result};
pub use output::{emit_csv, write_compare_table, write_summary, write_timeseries};
pub use scenario::{compute_report, run_scenario, MetricsReport, TimeSeriesLog};
