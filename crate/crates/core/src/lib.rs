//! Coverage and capacity analysis for single-hop mmWave integrated access and backhaul
//! networks with in-band full-duplex relays.
//!
//! gNBs form a Matérn type-II hard-core process, IAB-nodes and UEs are Poisson. The
//! [`analysis`] module evaluates coverage, capacity with outage and ergodic capacity in
//! closed form; [`montecarlo`] simulates the same scalar SINR model as ground truth.

pub mod analysis;
pub mod beamforming;
pub mod config;
pub mod geometry;
pub mod montecarlo;
pub mod numeric;
pub mod point_process;
pub mod stochastics;

pub use config::{validate, ConfigError, Duplex, NodeClass, RawParams, SystemParams};

/// Failure of an analytic or simulation evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("quadrature did not converge for {what} (achieved error {achieved:e})")]
    Quadrature { what: String, achieved: f64 },
    #[error("threshold unreachable under quantization noise: tau = {tau} >= {limit}")]
    ThresholdUnreachable { tau: f64, limit: f64 },
    #[error("invalid request: {0}")]
    Invalid(String),
}
