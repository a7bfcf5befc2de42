//! Decomposed agent pipelines for knapsack and task assignment.
//!
//! A task is described as a [`blueprint::Blueprint`] of typed leaf tasks. The
//! [`orchestrator`] realizes the knapsack and assignment blueprints as
//! controller loops that call one [`bridge::AgentBackend`] per role, and
//! [`eval`] profiles agents and whole systems against the exact solvers in
//! [`problem`].

pub mod agents;
pub mod blueprint;
pub mod bridge;
pub mod eval;
pub mod orchestrator;
pub mod problem;
pub mod seed;
