//! Feature-selection sensitivity benchmark.
//!
//! Time-series similarity measures used as feature selectors, next to
//! classical filter, wrapper and embedded selectors, all scored by
//! cross-validated linear-regression R² while the dataset shrinks.

pub mod bench;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod regression;
pub mod report;
pub mod rng;
pub mod selectors;

pub use error::{Error, Result};
