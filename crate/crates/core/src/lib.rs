pub mod cli;
pub mod config;
pub mod cylinder;
pub mod error;
pub mod flow;
pub mod model;
pub mod potential;
pub mod pressure;
pub mod report;
pub mod scalar;
pub mod spectrum;
pub mod transfer;

pub use error::{Error, Result};
