//! Analytic evaluators for last-passage-time laws, past-future martingales
//! and related Black–Scholes identities, each paired with a Monte Carlo or
//! quadrature oracle.

pub mod asian;
pub mod closed_forms;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod last_passage;
pub mod levy;
pub mod mc;
pub mod paths;
pub mod pfh;
pub mod quad;
pub mod report;
pub mod rng;
pub mod samplers;
pub mod special;
pub mod stats;
pub mod strict_local;

pub use error::{Error, Result};
pub use grid::{PathSample, TimeGrid};
pub use report::{CheckReport, SuiteSummary};
pub use rng::{derive_seed, RngStream};
pub use stats::{EmpiricalDistribution, KsResult, McEstimate};
