//! Autocovariance calculus for stationary linear time series.
//!
//! ARMA and FARIMA models are expanded into filter weights, autocovariances
//! are pushed through causal linear filters, and the resulting sequences are
//! checked numerically for the Berman condition `|γ_k| ln k → 0` and the
//! summability condition `Σ |γ_k| / k^ε < ∞` (some `ε < 1`).

pub mod acvf;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod models;
pub mod simulation;
pub mod weights;
pub mod zoo;

pub use error::{Error, Result};
