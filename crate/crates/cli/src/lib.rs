//! Experiment runner: scenario suites, repeated identification runs, reports
//! and convergence traces.

pub mod report;
pub mod suite;
pub mod traces;

pub use report::{ScenarioReport, SuiteReport};
pub use suite::{load_suite, parse_suite, run_suite, RunRecord, SuiteOptions, SuiteOutcome};
