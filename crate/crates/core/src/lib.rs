//! Estimation, bounds and sensitivity analysis for the treatment effect among
//! units whose post-treatment indicator is switched on by treatment (TRACE),
//! with percentile-bootstrap inference and a simulation oracle.

pub mod bounds;
pub mod data;
pub mod error;
pub mod estimators;
pub mod inference;
pub mod oracle;
pub mod sensitivity;

pub use error::{Error, Result};
