//! Array geometry, subarray partitions and spherical beamforming codebooks.
//!
//! All patterns are evaluated on the `phi = 0` cut unless stated otherwise.

mod codebook;
mod geometry;
mod optimize;
mod partition;

pub use codebook::{
    beam_pattern, codebook_mu, make_codeword, restrict, spatial_bound, spatial_corr, Codebook,
    SphericalCodeword, Taper,
};
pub use geometry::{
    grid_geometry, steering_vector, ArrayGeometry, Lattice, CUT_PHI_DEG, MAX_ELEMENTS,
};
pub use optimize::{optimize_partition, OptimizeOutcome};
pub use partition::{nested_partition, sparse_partition, PartitionKind, SubarrayPartition};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("{what} = {value} is out of range [{min}, {max}]")]
    SizeOutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("element spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("element positions {0} and {1} coincide")]
    DuplicatePosition(usize, usize),
    #[error("{total} elements cannot be split into {j} equal nested subarrays")]
    NonDivisible { total: usize, j: usize },
    #[error("{j} subarrays of {m} elements do not fit in {total} elements")]
    Infeasible { total: usize, j: usize, m: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("subarray index {index} out of range for {count} subarrays")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("probe length {probe} does not match codeword support {support}")]
    SupportMismatch { probe: usize, support: usize },
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("{angles} beam angles given for {j} subarrays")]
    AngleCountMismatch { angles: usize, j: usize },
}

pub type Result<T> = std::result::Result<T, SpatialError>;
