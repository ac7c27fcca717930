//! Periodic non-autonomous dynamical systems and finite-horizon detectors
//! for sensitivity, equicontinuity and their syndetic and thick variants.

pub mod cli;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod hitting;
pub mod rng;
pub mod space;
pub mod system;
pub mod symbolic;

pub use error::{Error, Result};
