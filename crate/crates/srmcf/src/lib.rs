//! File formats, configuration and subcommands for the `srmcf` tool.
//!
//! The numerical work lives in [`srmcf_core`]; this crate reads
//! configurations, writes SRMCF1 snapshots, CSV reports and PGM images, and
//! contains the orientation-score inpainting demo.

pub mod commands;
pub mod config;
pub mod error;
pub mod initial;
pub mod inpaint;
pub mod pgm;
pub mod report;
pub mod snapshot;

pub use config::Config;
pub use error::{AppError, Result};
