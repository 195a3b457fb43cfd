//! Evolutionary tuning of the mapper's heuristic genome.
//!
//! Each outer iteration plans which operator's knob group to change, mutates
//! a small population inside that group, maps the benchmark suite with every
//! candidate, and accepts the best candidate by reward.

pub mod config;
pub mod engine;
pub mod evaluate;
pub mod mutate;
pub mod plan;
pub mod record;
pub mod remote;
pub mod reward;
pub mod signals;

use thiserror::Error;

pub use config::EvolutionConfig;
pub use engine::{audit, evolve, run_evolution, EvolutionReport, IterationArtifact, PlanEngine, RuleEngine};
pub use evaluate::{load_suite, score_results, Benchmark, CircuitResult, Evaluator, SuiteScore};
pub use mutate::mutate;
pub use plan::{plan, EvolutionPlan};
pub use record::{IterationRecord, Strategy, ValidationStatus};
pub use reward::{accept, accept_reason, reward, AcceptReason};
pub use signals::{compute_signals, AdaptiveSignals, DiversityPressure, ObjectiveHint};

#[derive(Debug, Error, PartialEq)]
pub enum EvolveError {
    #[error("config field {field}: {msg}")]
    Config { field: String, msg: String },
    #[error("benchmark suite: {0}")]
    Suite(String),
    #[error("baseline genome fails on: {0}")]
    Baseline(String),
    #[error("i/o: {0}")]
    Io(String),
}
