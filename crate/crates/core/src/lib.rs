//! Distributed monotone submodular maximization under partition matroids.
//!
//! Agents own disjoint blocks of strategies and jointly choose at most `κᵢ`
//! strategies each. The crate provides:
//!
//! - value oracles and utilities ([`oracle`], [`utility`]),
//! - exact multilinear-extension references ([`exact`]),
//! - sampled gradients ([`sampling`]),
//! - the synchronous distributed continuous greedy with max-consensus
//!   ([`distributed`]),
//! - stochastic pipage rounding ([`pipage`]),
//! - brute force, sequential greedy, and centralized baselines ([`baselines`]),
//! - scenario-driven experiments ([`experiment`]).

pub mod baselines;
pub mod bounds;
pub mod distributed;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod graph;
pub mod info_set;
pub mod matroid;
pub mod oracle;
pub mod pipage;
pub mod rng;
pub mod sampling;
pub mod set;
pub mod utility;

pub use error::{Error, Result};
pub use graph::CommGraph;
pub use matroid::{AgentPartition, MembershipVector};
pub use oracle::{SetFunction, ValueOracle};
pub use set::StrategySet;
