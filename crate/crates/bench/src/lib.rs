//! Monte-Carlo SNR sweep benchmark for the OFDM radar detection strategies:
//! trial orchestration, detection-probability scoring, runtime accounting,
//! and CSV emission. The `radar-bench` binary wraps this library.

pub mod config_file;
pub mod csv_io;
pub mod error;
pub mod sweep;

pub use csv_io::{emit_csv, parse_csv};
pub use error::{BenchError, Result};
pub use sweep::{
    run_sweep, score_trial, Strategy, SweepConfig, SweepRecord, Tolerance, FULL_SCALE_TRIALS,
    MAX_SEARCH_RANGE_M, SIDELOBE_WINDOW_DB,
};
