//! Distance covariance and HSIC with an additive decomposition of the
//! statistic into weighted squared correlations of spectral features.

pub mod adc;
pub mod cli;
pub mod data;
pub mod dcov;
pub mod error;
pub mod inference;
pub mod metrics;
pub mod numeric;
pub mod population;
pub mod spectral;
pub mod synthetic;
pub mod viz;

pub use error::{Error, Result};
