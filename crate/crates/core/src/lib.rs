//! Removal of additive interference from the transmitted signal of a
//! synchronized chaotic system, using the largest Lyapunov exponent and the
//! time a deviation needs to grow to a fixed length.
//!
//! Module map:
//! - [`ode`]: fixed-step RK4 for autonomous and scalar-driven fields
//! - [`models`]: Lorenz drive, x-driven response, free-running copy
//! - [`interference`]: series type, noise generators, DC offset, SNR
//! - [`lyapunov`]: two-trajectory and delay-embedding exponent estimators
//! - [`denoiser`]: escape-time interference estimation and removal
//! - [`config`], [`harness`]: experiment files, runs and CSV output

pub mod config;
pub mod denoiser;
pub mod error;
pub mod harness;
pub mod interference;
pub mod lyapunov;
pub mod models;
pub mod ode;

pub use error::{Error, Result};
