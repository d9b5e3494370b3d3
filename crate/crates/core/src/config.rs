//! Experiment configuration. Every field has a default; the defaults describe a
//! two-beam sweep at ±35° on a 16 × 8 half-wavelength grid split into two nested
//! 64-element subarrays, coded with a two-member gold-like family of length 15.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codes::{self, ChipSequence, CodeFamily, FamilyKind};
use crate::metrics::Window;
use crate::sim::{self, DecodeMode, NoiseSpec, SweepOptions, Tap, MAX_TAPS};
use crate::spatial::{Taper, MAX_ELEMENTS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("infeasible `{field}`: {reason}")]
    Infeasible { field: String, reason: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("cannot read config {path}: {source}")]
    Read {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ConfigError>;

fn invalid<T>(field: &str, reason: impl Into<String>) -> Result<T> {
    Err(ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    /// Element pitch in wavelengths.
    pub spacing: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            rows: 16,
            cols: 8,
            spacing: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionMode {
    Nested,
    Sparse,
    /// Sparse start refined by the swap search.
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub kind: PartitionMode,
    /// Elements per subarray; defaults to an even split of the array.
    pub m: Option<usize>,
    pub iters: usize,
    pub taper: Taper,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            kind: PartitionMode::Nested,
            m: None,
            iters: 2000,
            taper: Taper::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeConfig {
    pub family: FamilyKind,
    /// LFSR degree for gold and gold-like, log2 N for walsh.
    pub n: u32,
    /// First Walsh row assigned to a beam.
    pub walsh_first_row: usize,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self {
            family: FamilyKind::GoldLike,
            n: 4,
            walsh_first_row: 2,
        }
    }
}

impl CodeConfig {
    pub fn length(&self) -> usize {
        match self.family {
            FamilyKind::Walsh => 1usize << self.n.min(30),
            _ => (1usize << self.n.min(30)) - 1,
        }
    }

    /// Builds the family and picks one code per beam.
    pub fn build(&self, beams: usize) -> codes::Result<(CodeFamily, Vec<ChipSequence>)> {
        let family = match self.family {
            FamilyKind::Walsh => codes::walsh_family(self.n)?,
            FamilyKind::Gold => codes::gold_family(self.n)?,
            FamilyKind::GoldLike => codes::gold_like_family(self.n, beams)?,
            FamilyKind::MSequence => {
                return Err(codes::CodeError::SizeOutOfRange {
                    what: "m-sequence family size",
                    value: beams,
                    min: 1,
                    max: 1,
                })
            }
        };
        let first = if self.family == FamilyKind::Walsh {
            self.walsh_first_row
        } else {
            0
        };
        let chosen = family
            .sequences
            .iter()
            .skip(first)
            .take(beams)
            .cloned()
            .collect();
        Ok((family, chosen))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self {
            start: -75.0,
            stop: 75.0,
            step: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapConfig {
    pub delay_chips: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub mode: DecodeMode,
    /// Defaults to every delay `0..N`.
    pub delays: Option<Vec<i64>>,
    pub window: Window,
    pub snr_db: Option<f64>,
    /// Per-beam multipath taps; empty means a single direct path.
    pub taps: Vec<Vec<TapConfig>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            mode: DecodeMode::TemporalOnly,
            delays: None,
            window: Window::FirstNull,
            snr_db: None,
            taps: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Drives the sparse partition, the swap search and the noise.
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub partition: PartitionConfig,
    pub angles_deg: Vec<f64>,
    pub code: CodeConfig,
    pub theta: ThetaConfig,
    pub sweep: SweepConfig,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            geometry: GeometryConfig::default(),
            partition: PartitionConfig::default(),
            angles_deg: vec![-35.0, 35.0],
            code: CodeConfig::default(),
            theta: ThetaConfig::default(),
            sweep: SweepConfig::default(),
            out_dir: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn total(&self) -> usize {
        self.geometry.rows * self.geometry.cols
    }

    pub fn j(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn m(&self) -> usize {
        self.partition.m.unwrap_or(self.total() / self.j().max(1))
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        sim::theta_grid(self.theta.start, self.theta.stop, self.theta.step)
    }

    pub fn delays(&self) -> Vec<i64> {
        self.sweep
            .delays
            .clone()
            .unwrap_or_else(|| (0..self.code.length() as i64).collect())
    }

    pub fn sweep_options(&self) -> SweepOptions {
        let taps = (!self.sweep.taps.is_empty()).then(|| {
            self.sweep
                .taps
                .iter()
                .map(|list| {
                    list.iter()
                        .map(|t| Tap {
                            delay_chips: t.delay_chips,
                            gain: Complex64::new(t.re, t.im),
                        })
                        .collect()
                })
                .collect()
        });
        SweepOptions {
            multipath_taps: taps,
            noise: self.sweep.snr_db.map(|snr_db| NoiseSpec {
                snr_db,
                seed: self.seed,
            }),
        }
    }

    /// Checks every field in declaration order and names the first bad one.
    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if g.rows == 0 {
            return invalid("geometry.rows", "must be at least 1");
        }
        if g.cols == 0 {
            return invalid("geometry.cols", "must be at least 1");
        }
        if !(2..=MAX_ELEMENTS).contains(&self.total()) {
            return invalid(
                "geometry.rows",
                format!("rows x cols = {} outside [2, {MAX_ELEMENTS}]", self.total()),
            );
        }
        if !(g.spacing.is_finite() && g.spacing > 0.0) {
            return invalid("geometry.spacing", "must be positive");
        }

        let j = self.j();
        if j == 0 {
            return invalid("angles_deg", "at least one beam angle is required");
        }
        let m = self.m();
        if m == 0 || j * m > self.total() {
            return Err(ConfigError::Infeasible {
                field: "partition.m".into(),
                reason: format!("{j} subarrays of {m} do not fit {} elements", self.total()),
            });
        }
        if self.partition.kind == PartitionMode::Nested {
            if !self.total().is_multiple_of(j) {
                return invalid(
                    "partition.kind",
                    format!("nested needs J={j} to divide {} elements", self.total()),
                );
            }
            if m != self.total() / j {
                return invalid("partition.m", "nested subarrays cover the whole array");
            }
        }
        if let Taper::Taylor { nbar, sll_db } = self.partition.taper {
            if nbar == 0 || !sll_db.is_finite() {
                return invalid(
                    "partition.taper",
                    "taylor needs nbar >= 1 and finite sll_db",
                );
            }
        }

        let t = &self.theta;
        if !(t.step.is_finite() && t.step > 0.0) {
            return invalid("theta.step", "must be positive");
        }
        if !(t.start.is_finite() && t.start >= -90.0) {
            return invalid("theta.start", "must be within [-90, 90]");
        }
        if !(t.stop.is_finite() && t.stop <= 90.0 && t.stop > t.start) {
            return invalid("theta.stop", "must exceed start and be at most 90");
        }
        let grid = self.theta_grid();
        for a in &self.angles_deg {
            if !grid.iter().any(|x| (x - a).abs() < 1e-9) {
                return invalid("angles_deg", format!("{a} is not on the theta grid"));
            }
        }
        let mut sorted = self.angles_deg.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("angles_deg", "angles must be distinct");
        }

        let c = &self.code;
        match c.family {
            FamilyKind::Walsh => {
                if !(1..=8).contains(&c.n) {
                    return invalid("code.n", "walsh log2 N must be in [1, 8]");
                }
                if c.walsh_first_row + j > c.length() {
                    return invalid(
                        "code.walsh_first_row",
                        format!(
                            "rows {}..{} exceed N={}",
                            c.walsh_first_row,
                            c.walsh_first_row + j,
                            c.length()
                        ),
                    );
                }
            }
            FamilyKind::Gold => {
                if c.n.is_multiple_of(4) || !(5..=12).contains(&c.n) {
                    return invalid(
                        "code.n",
                        "gold needs a degree in [5, 12] not divisible by 4 (use gold-like)",
                    );
                }
                if j > c.length() + 2 {
                    return invalid("code.n", "family too small for the beam count");
                }
            }
            FamilyKind::GoldLike => {
                if !(4..=12).contains(&c.n) {
                    return invalid("code.n", "gold-like degree must be in [4, 12]");
                }
                if j > c.length() + 2 {
                    return invalid("code.n", "family too small for the beam count");
                }
            }
            FamilyKind::MSequence => {
                return invalid("code.family", "use walsh, gold or gold-like for beam codes");
            }
        }

        let n = c.length() as i64;
        let s = &self.sweep;
        if let Some(d) = &s.delays {
            if d.is_empty() {
                return invalid("sweep.delays", "must not be empty");
            }
            if let Some(bad) = d.iter().find(|&&x| x < 0 || x >= n) {
                return invalid("sweep.delays", format!("{bad} outside [0, {}]", n - 1));
            }
        }
        if let Window::Fixed(w) = s.window {
            if !(w.is_finite() && w > 0.0) {
                return invalid("sweep.window", "fixed window must be positive");
            }
        }
        if let Some(snr) = s.snr_db {
            if !snr.is_finite() {
                return invalid("sweep.snr_db", "must be finite");
            }
        }
        if !s.taps.is_empty() {
            if s.taps.len() != j {
                return invalid(
                    "sweep.taps",
                    format!("{} tap lists for {j} beams", s.taps.len()),
                );
            }
            for list in &s.taps {
                if list.len() > MAX_TAPS {
                    return invalid("sweep.taps", format!("at most {MAX_TAPS} taps per beam"));
                }
                for tap in list {
                    if tap.delay_chips < 0 {
                        return invalid("sweep.taps", "tap delays must be non-negative");
                    }
                    if Complex64::new(tap.re, tap.im).norm() > 1.0 + 1e-12 {
                        return invalid("sweep.taps", "tap gain magnitude must be at most 1");
                    }
                }
            }
        }
        if self.out_dir.is_empty() {
            return invalid("out_dir", "must not be empty");
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Layers tables over the defaults, later layers winning, then deserializes.
    pub fn layered(layers: &[toml::Table]) -> Result<Self> {
        let mut base = toml::Table::try_from(Self::default())
            .map_err(|e| ConfigError::Parse(e.to_string()))?;
        for layer in layers {
            merge(&mut base, layer);
        }
        toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
    }

    pub fn read_table(path: &std::path::Path) -> Result<toml::Table> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse::<toml::Table>()
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
    }
}

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}
