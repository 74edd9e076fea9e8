pub mod classify;
pub mod error;
pub mod motion;
pub mod pipeline;
pub mod rng;
pub mod sensing;
pub mod synth;
pub mod tseries;

pub use error::{Error, Result};
