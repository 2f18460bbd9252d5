//! State policy-bundle clustering and lagged panel regression of overdose
//! mortality, with synthetic-data generation for end-to-end checks.

pub mod cluster;
pub mod effects;
pub mod error;
pub mod glm;
pub mod ingest;
pub mod io;
pub mod run;
pub mod states;

pub use error::{Error, ErrorCategory, Result};
