//! File formats, replay, simulation and evaluation around `roadwork-core`.

pub mod config;
pub mod detector;
pub mod error;
pub mod outputs;
pub mod records;
pub mod replay;
pub mod simulator;

pub use error::{AppError, ConfigError, InputError};
