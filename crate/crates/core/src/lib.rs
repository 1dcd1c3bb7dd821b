//! Aircraft fuel burn from surveillance trajectories.
//!
//! The pipeline turns a flight track into truncated cosine-series features
//! ([`spectral`]), regresses interval fuel with a wide-and-deep network
//! ([`fuelnet`]), rebuilds a smooth monotone cumulative-fuel curve whose
//! derivative is the instantaneous flow ([`monotone`]), and distributes the
//! burn over a latitude/longitude/altitude grid ([`emissions`]). The
//! [`synth`] module provides a ground-truth fuel law and labelled datasets
//! used to validate everything end to end.

pub mod emissions;
pub mod error;
pub mod fuelnet;
pub mod metrics;
pub mod monotone;
pub mod quadrature;
pub mod seed;
pub mod spectral;
pub mod synth;
pub mod trajectory;

pub use error::{Error, Result};
