//! Greedy sparse recovery from hybrid compressed measurements: a small number
//! of real-valued linear measurements combined with many one-bit (sign)
//! measurements of the same sparse signal.
//!
//! The crate provides
//!
//! - [`measurement`]: sparse signals, SNR-calibrated noise, Gaussian sensing
//!   matrices and the linear / sign measurement maps;
//! - [`recovery`]: the two hybrid greedy algorithms (detection by binary
//!   inequality checking, and support modification);
//! - [`baselines`]: OMP, subspace pursuit and CoSaMP on a single linear system;
//! - [`theory`]: regularized incomplete beta, binomial CDF and the success
//!   probability lower bounds of both hybrid algorithms;
//! - [`tessellation`]: Monte Carlo checks of hyperplane-tessellation geometry;
//! - [`experiment`]: bit-budget-matched Monte Carlo benchmarks with CSV output;
//! - [`cli`]: the `hybridcs` command-line front end.
//!
//! Support indices are zero-based throughout.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod measurement;
pub mod recovery;
pub mod stats;
pub mod support;
pub mod tessellation;
pub mod theory;

pub use error::{Error, Result};
pub use measurement::{HybridMeasurements, MeasurementMatrix, Signal, SignalSnr};
pub use recovery::{algorithm1, algorithm2, RecoveryResult};
pub use support::SupportSet;
