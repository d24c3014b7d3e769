//! Core of a trace-driven O-RAN/MEC orchestration simulator and the
//! branching double DQN agents (plain and Bayesian/Thompson-sampling) that
//! learn to control it.
//!
//! The crate only needs `alloc`. Everything that touches files, clocks or
//! the command line lives in the `oranmec-harness` crate. Enable the `std`
//! feature for runtime SIMD detection in the matrix kernels.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod agents;
pub mod env;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod neural;
pub mod oracle;
pub mod splits;
pub mod topology;
pub mod workload;

pub use error::{Error, Result};
