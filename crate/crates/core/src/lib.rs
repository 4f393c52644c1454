//! Astrocyte-regulated spiking central pattern generator for quadruped gait
//! learning.

// `!(x > 0.0)` is used on purpose so NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod astrocyte;
pub mod cpg;
pub mod error;
pub mod physics;
pub mod plasticity;
pub mod rng;
pub mod snn;
pub mod energy;
pub mod metrics;
pub mod trainer;
pub mod config;
pub mod io;
pub mod commands;
