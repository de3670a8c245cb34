//! Outage analysis of fluid-antenna cellular downlinks with skip-enabled
//! LMMSE channel estimation and two-stage port selection.
//!
//! The crate pairs every analytical expression with an independent Monte
//! Carlo engine over Poisson networks.

pub mod analytics;
pub mod channel;
pub mod config;
pub mod error;
pub mod field;
pub mod geometry;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod sweep;

pub use error::{Error, Result};
