//! Cooperative content caching and delivery optimization for mobile edge
//! networks.
//!
//! The crate models a set of mobile edge nodes (MENs) and a base station (BS)
//! that cache contents from a remote content server. It provides exact delay
//! evaluation, a mixed-integer nonlinear reformulation solved by
//! branch-and-bound over interior-point relaxations, a distributed heuristic,
//! baseline policies, an exhaustive oracle and experiment sweeps.

pub mod bnb;
pub mod config;
pub mod distributed;
pub mod error;
pub mod ipm;
pub mod metrics;
pub mod oracle;
pub mod policies;
pub mod popularity;
pub mod scenario;
pub mod sweep;
pub mod transform;

pub use config::{build_scenario, ScenarioConfig, ScenarioTemplate};
pub use error::{Error, Result};
pub use scenario::{Placement, Scenario};
