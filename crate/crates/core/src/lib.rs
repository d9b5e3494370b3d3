//! Coded multibeam simulation: spreading-code families, subarray codebooks,
//! chip-level synthesis and decoding, and inter-beam isolation metrics.

pub mod cli;
pub mod codes;
pub mod config;
pub mod io;
pub mod metrics;
pub mod report;
pub mod sim;
pub mod spatial;
