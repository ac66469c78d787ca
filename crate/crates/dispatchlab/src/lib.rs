//! Dispatch-policy laboratory.
//!
//! Look-ahead economic dispatch (LAED) and ramp-product (RP) co-optimization
//! are built as linear programs over a generator fleet, run under
//! rolling-window operation against net-load profiles, and scored by their
//! total unserved energy.
//!
//! - [`system`]: generators, fleets, profiles and dispatch state
//! - [`policies`]: per-step LP builders and decisions
//! - [`equivalence`]: single-step feasible-region comparison of LAED and RP
//! - [`simulator`]: rolling-window engine and security-loss metric
//! - [`scenarios`]: study profiles and CSV ingestion
//! - [`cli`]: command-line front end

pub mod cli;
pub mod equivalence;
pub mod policies;
pub mod scenarios;
pub mod simulator;
pub mod system;

pub use policies::{PolicyConfig, PolicyDecision, PolicyKind};
pub use simulator::SimulationResult;
pub use system::{DispatchState, GeneratorSpec, NetLoadProfile, PenaltyConfig, SystemSpec};

use lpcore::{LpError, Status};

#[derive(Debug, thiserror::Error)]
pub enum DispatchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid system: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidSystem(Vec<system::Violation>),
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("forecast has {got} values, expected {expected}")]
    ForecastLength { expected: usize, got: usize },
    #[error("LP model error: {0}")]
    Lp(#[from] LpError),
    #[error("LP status {0:?}")]
    Solve(Status),
    #[error("{0}")]
    Io(String),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}
