use serde::{Deserialize, Serialize};

use crate::codes::{CodeFamily, FamilyKind};
use crate::config::ExperimentConfig;
use crate::metrics::{BoundKind, SllCurve, VariationStats};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub kind: FamilyKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub count: usize,
    pub assigned: Vec<usize>,
    pub worst_case_raw: i64,
    pub worst_case_xcorr: f64,
    pub worst_case_db: f64,
}

impl FamilyStats {
    pub fn new(family: &CodeFamily, assigned: Vec<usize>) -> Self {
        Self {
            kind: family.kind,
            n: family.length,
            count: family.sequences.len(),
            assigned,
            worst_case_raw: family.worst_case_raw,
            worst_case_xcorr: family.worst_case_xcorr,
            worst_case_db: 20.0 * family.worst_case_xcorr.max(1e-300).log10(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookStats {
    pub j: usize,
    pub m: usize,
    pub mu_max: f64,
    pub spatial_bound: f64,
    /// `mu_max / (1/sqrt(m))`.
    pub mu_over_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted_swaps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub bound_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub curve: SllCurve,
    pub variation: VariationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub family: FamilyStats,
    pub codebook: CodebookStats,
    pub curves: Vec<CurveSummary>,
    /// Variation over all curves together.
    pub overall: VariationStats,
    pub bounds: Vec<BoundValue>,
    pub wall_clock_s: f64,
}

impl RunReport {
    /// The report with the timing field zeroed, for comparing runs.
    pub fn body(&self) -> RunReport {
        RunReport {
            wall_clock_s: 0.0,
            ..self.clone()
        }
    }
}
