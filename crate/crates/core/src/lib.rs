//! Simulation, analysis and optimization toolkit for network-assisted
//! full-duplex distributed massive-MIMO downlink/uplink cells whose RAUs and
//! users run low-resolution ADCs.
//!
//! The crate is organized as a pipeline:
//! - [`scenario`]: node placement and large-scale fading;
//! - [`quantizer`]: additive-noise converter model and bit allocations;
//! - [`channels`]: small-scale fading draws for simulation;
//! - [`estimation`]: two-stage channel estimation (closed-form and sampled);
//! - [`rates`]: closed-form per-user spectral efficiencies;
//! - [`power`]: energy model and the energy-efficiency objective;
//! - [`montecarlo`]: full-chain instantaneous-rate oracle;
//! - [`moop`]: bi-objective bit-allocation solvers (NSGA-II and DQN);
//! - [`config`]: TOML-backed run configuration.
//!
//! The analytical engine is generic over the scalar type through
//! [`scalar::Real`] (`f32` or `f64`); simulation and solver code is pinned
//! to `f64`. The aliases below fix common instantiations.

pub mod channels;
pub mod config;
pub mod error;
pub mod estimation;
pub mod montecarlo;
pub mod moop;
pub mod power;
pub mod quantizer;
pub mod rates;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};

/// Double-precision instantiations of the generic analytical types.
pub type ChannelStats64 = scenario::ChannelStats<f64>;
pub type PilotEstStats64 = estimation::PilotEstStats<f64>;
pub type BfTrainingStats64 = estimation::BfTrainingStats<f64>;
pub type InterferenceEstStats64 = estimation::InterferenceEstStats<f64>;
pub type GammaPair64 = estimation::GammaPair<f64>;
pub type RateReport64 = rates::RateReport<f64>;

/// Single-precision instantiations of the generic analytical types.
pub type ChannelStats32 = scenario::ChannelStats<f32>;
pub type PilotEstStats32 = estimation::PilotEstStats<f32>;
pub type BfTrainingStats32 = estimation::BfTrainingStats<f32>;
pub type InterferenceEstStats32 = estimation::InterferenceEstStats<f32>;
pub type GammaPair32 = estimation::GammaPair<f32>;
pub type RateReport32 = rates::RateReport<f32>;
