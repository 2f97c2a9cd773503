//! Link-cost-aware in-network caching: a flow-level cache-network simulator
//! with LCE, UtilCache and GRD placement strategies, plus an offline toolkit
//! for the link-cost objective, its marginal utilities and greedy placement.
//!
//! The usual flow is [`topology::load_network`] -> [`workload::ZipfCatalog`]
//! -> [`engine::run`], or [`harness::run_experiment`] for whole sweeps. See
//! the crate's `examples/` directory for one runnable program per
//! capability.

pub mod cache;
pub mod engine;
pub mod harness;
pub mod objective;
pub mod rng;
pub mod strategy;
pub mod topology;
pub mod workload;

pub use cache::{CacheState, Policy};
pub use engine::{run, SimConfig, SimReport, Simulator};
pub use objective::{Instance, Placement};
pub use strategy::Strategy;
pub use topology::{load_network, ContentId, Network, NodeId, RequestClass};
pub use workload::{Request, ZipfCatalog};
