//! manetlab: a deterministic mobility-scenario laboratory for mobile ad hoc
//! networks.
//!
//! The crate generates movement traces under four mobility models (random
//! waypoint, Gauss-Markov, reference point group, nomadic community),
//! computes protocol-independent mobility metrics over a unit-disk contact
//! structure, runs a reactive-routing traffic simulation, and orchestrates
//! multi-seed experiments with CSV reporting.

pub mod cli;
pub mod config;
pub mod contact;
pub mod error;
pub mod experiment;
pub mod geom;
pub mod io;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod routesim;
pub mod trace;

pub use config::{ModelKind, ScenarioConfig};
pub use error::{Error, Result};
pub use geom::Vec2;
pub use metrics::MetricReport;
pub use rng::RandomStream;
pub use trace::{validate, NodeTrace, Scenario, ValidationReport, Waypoint};
