//! Child-vs-adult detection from touch gestures and motion sensors.
//!
//! The pipeline runs raw logs through segmentation, feature extraction,
//! a classifier and score fusion over consecutive observations:
//!
//! ```text
//! session -> gestures / sensor windows -> feature vectors -> scores -> bundles
//! ```

pub mod classify;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod segment;
pub mod sensor;
pub mod session;
pub mod synth;
pub mod touch;

pub use error::{Error, Result};
