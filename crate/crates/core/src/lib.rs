//! Compressive data aggregation for mobile sensor networks in bike races.
//!
//! Riders carry sensors that report their along-road velocity once per
//! second. Rather than relaying every reading, sensors broadcast random
//! ±1 combinations of what they heard over a few rounds, and a sink
//! recovers all velocities from the collected linear equations: directly
//! when the system has full rank, otherwise with a linear program that
//! favours equal velocities among spatially neighbouring riders.

pub mod lp;
pub mod graph;
pub mod sparsity;
pub mod mobility;
pub mod keyed;
pub mod radio;
pub mod protocol;
pub mod metrics;
pub mod experiment;
