//! Cellular automata whose cells hold Bernoulli probability measures.
//!
//! The crate covers both directions of the problem:
//!
//! * the forward model: a configuration of Bernoulli parameters on a toroidal
//!   2-D lattice evolves by a space-invariant convex-combination rule over a
//!   Manhattan or Moore neighborhood ([`rule`], [`neighborhood`], [`lattice`]);
//! * the inverse model: given a (noisy) observed trajectory, recover the rule
//!   weights with a self-adaptive differential evolution search ([`sade`]) and
//!   cross-check the answer against a projected-subgradient solver of the same
//!   convex objective ([`oracle`]).
//!
//! Distances between cell states are Monge-Kantorovich distances, which for
//! Bernoulli measures reduce to `|p - q|` ([`metric`]).

pub mod error;
pub mod io;
pub mod lattice;
pub mod metric;
pub mod neighborhood;
pub mod objective;
pub mod oracle;
pub mod rule;
pub mod sade;
pub mod scenario;
pub mod seed;
pub mod stats;

pub use error::{CamError, Result};
pub use lattice::{BernoulliParam, Configuration};
pub use metric::{d_m, d_mk, WeightScheme};
pub use neighborhood::{NeighborhoodSpec, Topology};
pub use objective::{fitness, Objective};
pub use oracle::{simplex_project, solve_projected_subgradient, OracleConfig, OracleResult};
pub use rule::{apply_rule, evolve, gather_neighborhood, RuleParams};
pub use sade::{SadeConfig, SadeRunResult, Strategy};
pub use scenario::{build_dataset, make_theta, ObservedDataset, ScenarioSpec, ThetaScheme};
pub use stats::{nrmse, Summary};
