//! Exact security analysis for restaking networks.
//!
//! A restaking graph allocates validator stake to services. This crate
//! decides whether such a graph is secure against profit-motivated coalition
//! attacks, measures how much overcollateralization slack it has, simulates
//! and verifies cascading attacks triggered by stake shocks, and computes
//! worst-case stake loss both globally and from the perspective of a single
//! coalition of services. All arithmetic is exact rational arithmetic; every
//! search is exhaustive within an explicit enumeration cap and every verdict
//! comes with a checkable witness.

pub mod analysis;
pub mod cascade;
pub mod conditions;
pub mod constructions;
pub mod error;
pub mod model;
pub mod rational;
pub mod sets;

pub use error::{Error, Result};
pub use model::{
    build_graph, parse_graph, serialize_graph, RestakingGraph, Service, ServiceId, Validator,
    ValidatorId,
};
pub use rational::{format_rational, parse_rational, rat, rat_int, Rational};
pub use sets::{ServiceSet, ValidatorSet};
