//! Experiment orchestration: configuration text parsing and validation
//! ([`config`]), the deterministic parallel Monte-Carlo engine ([`engine`]),
//! and result aggregation with CSV output ([`report`]).

pub mod config;
pub mod engine;
pub mod report;

pub use config::{
    parse_bit_string, parse_config, ConfigError, ExperimentConfig, SnrSweep, TrialsPolicy,
};
pub use engine::{run_experiment, theory_curve, EngineError, TheoryPoint, TARGET_USER};
pub use report::{emit_csv, emit_csv_string, emit_theory_csv, BerCurve, PointStats, TerminalStat};
