//! Simulation library for MIMO fluid-antenna links: spatially correlated
//! port channels, port selection, beamforming with waterfilling, outage and
//! diversity–multiplexing statistics, and mutual-coupling distortion.

pub mod beamforming;
pub mod campaign;
pub mod channel;
pub mod correlation;
pub mod coupling;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod reduction;
pub mod selection;
pub mod special;

pub use error::{FasError, Result};
