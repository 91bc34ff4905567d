//! Compressive print-error inspection.
//!
//! Word images are acquired through a seeded random binary sensing matrix at
//! far fewer measurements than pixels, classified as good or bad directly in
//! the measurement domain, and audited for privacy by attempting the best
//! reconstruction available to an adversary holding the key.

pub mod classify;
pub mod dataset;
pub mod error;
pub mod font;
pub mod harness;
pub mod image;
pub mod operator;
pub mod recovery;
pub mod seed;
pub mod sensing;
pub mod wavelet;

pub use error::{Error, Result};
