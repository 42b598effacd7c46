//! Link-level simulator for mmWave MIMO transceivers.
//!
//! Implements a clustered multipath channel model, SVD-based fully-digital
//! and BCD-decomposed hybrid beamforming, three transceiver schemes
//! (single-carrier with time- or frequency-domain equalization, and
//! MIMO-OFDM), a Rapp power amplifier with optional Volterra predistortion,
//! and mutual-information-based spectral/energy efficiency metrics, all
//! driven by a deterministic Monte Carlo sweep harness.

pub mod beamforming;
pub mod chain;
pub mod channel;
pub mod config;
pub mod constellation;
pub mod error;
pub mod metrics;
pub mod noise;
pub mod pa;
pub mod power;
pub mod pulse;
pub mod report;
pub mod sweep;
pub mod transceiver;

pub use error::{Error, Result};
