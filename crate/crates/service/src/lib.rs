//! Command-line tools, streaming benchmark, and HTTP reconstruction service
//! built on `oatk-core`.

pub mod bench;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod recon;
pub mod service;

pub use config::EngineConfig;
pub use recon::{reconstruct, Method, ReconOutcome, ReconParams};
