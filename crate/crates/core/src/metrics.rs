//! Inter-beam isolation measured on decoded θ-cuts, its behavior over chip
//! delay, and the nominal correlation bounds per code family.
//!
//! Isolation is positive dB (main peak above leakage). SLL curves carry the
//! negative of it, so a curve at −15 dB means the leakage sits 15 dB down.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::FamilyKind;
use crate::sim::{DecodeMode, DecodedPattern};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("angle {0} deg is not on the theta grid")]
    AngleOffGrid(f64),
    #[error("no samples within {window} deg of {angle} deg")]
    EmptyWindow { angle: f64, window: f64 },
    #[error("window half-width must be positive, got {0}")]
    BadWindow(f64),
    #[error("pattern has {found} samples but the grid has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("beam pair ({i}, {j}) is not two distinct beams of {count}")]
    UnknownBeam { i: usize, j: usize, count: usize },
    #[error("curve is empty")]
    EmptyCurve,
    #[error("spherical-gold bound needs a subarray size m")]
    MissingM,
    #[error("code length must be at least 2, got {0}")]
    BadLength(usize),
    #[error("subarray size must be at least 1")]
    BadM,
    #[error("code lengths must be strictly ascending")]
    NotAscending,
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Isolation ceiling in dB; leakage below main − 60 dB is reported as 60 dB.
pub const FLOOR_DB: f64 = 60.0;

const GRID_TOL: f64 = 1e-9;

fn grid_index(grid: &[f64], angle: f64) -> Result<usize> {
    grid.iter()
        .position(|t| (t - angle).abs() <= GRID_TOL)
        .ok_or(MetricsError::AngleOffGrid(angle))
}

fn window_max(pattern: &[f64], grid: &[f64], angle: f64, window: f64) -> Result<f64> {
    pattern
        .iter()
        .zip(grid)
        .filter(|(_, t)| (*t - angle).abs() <= window + GRID_TOL)
        .map(|(v, _)| v.abs())
        .reduce(f64::max)
        .ok_or(MetricsError::EmptyWindow { angle, window })
}

fn ratio_db(peak: f64, leak: f64) -> f64 {
    let tiny = f64::MIN_POSITIVE;
    (20.0 * (peak.max(tiny) / leak.max(tiny)).log10()).clamp(-FLOOR_DB, FLOOR_DB)
}

/// Isolation in dB between the peak within `window_deg` of `own_angle` and the
/// largest magnitude within `window_deg` of `other_angle`.
pub fn inter_beam_sll(
    pattern: &[f64],
    theta_grid: &[f64],
    own_angle: f64,
    other_angle: f64,
    window_deg: f64,
) -> Result<f64> {
    isolation_two_windows(
        pattern,
        theta_grid,
        (own_angle, window_deg),
        (other_angle, window_deg),
    )
}

/// As [`inter_beam_sll`] with separate half-widths around each angle.
pub fn isolation_two_windows(
    pattern: &[f64],
    theta_grid: &[f64],
    (own_angle, own_window): (f64, f64),
    (other_angle, other_window): (f64, f64),
) -> Result<f64> {
    if pattern.len() != theta_grid.len() {
        return Err(MetricsError::LengthMismatch {
            expected: theta_grid.len(),
            found: pattern.len(),
        });
    }
    for w in [own_window, other_window] {
        if !(w > 0.0) || !w.is_finite() {
            return Err(MetricsError::BadWindow(w));
        }
    }
    grid_index(theta_grid, own_angle)?;
    grid_index(theta_grid, other_angle)?;
    let peak = window_max(pattern, theta_grid, own_angle, own_window)?;
    let leak = window_max(pattern, theta_grid, other_angle, other_window)?;
    Ok(ratio_db(peak, leak))
}

/// Distance from `angle` to the nearer first null of a clean pattern, found by
/// walking downhill on each side until the magnitude rises again. Never less
/// than one grid step.
pub fn first_null_halfwidth(pattern: &[f64], theta_grid: &[f64], angle: f64) -> Result<f64> {
    if pattern.len() != theta_grid.len() {
        return Err(MetricsError::LengthMismatch {
            expected: theta_grid.len(),
            found: pattern.len(),
        });
    }
    let i0 = grid_index(theta_grid, angle)?;
    let mag: Vec<f64> = pattern.iter().map(|v| v.abs()).collect();
    let mut r = i0;
    while r + 1 < mag.len() && mag[r + 1] < mag[r] {
        r += 1;
    }
    let mut l = i0;
    while l > 0 && mag[l - 1] < mag[l] {
        l -= 1;
    }
    let step = if theta_grid.len() > 1 {
        theta_grid[1] - theta_grid[0]
    } else {
        1.0
    };
    let half = (theta_grid[r] - theta_grid[i0]).min(theta_grid[i0] - theta_grid[l]);
    Ok(half.max(step))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "deg", rename_all = "kebab-case")]
#[derive(Default)]
pub enum Window {
    Fixed(f64),
    /// Per-beam first-null half-width of the clean reference pattern.
    #[default]
    FirstNull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SllCurve {
    pub beam_pair: (usize, usize),
    pub mode: DecodeMode,
    pub own_angle_deg: f64,
    pub other_angle_deg: f64,
    pub own_window_deg: f64,
    pub other_window_deg: f64,
    pub delays: Vec<i64>,
    pub sll_db: Vec<f64>,
}

impl SllCurve {
    pub fn len(&self) -> usize {
        self.sll_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sll_db.is_empty()
    }
}

/// SLL of decoded beam `i` against the mainlobe of beam `j` at every delay.
pub fn sll_vs_delay(
    sweep: &DecodedPattern,
    pair: (usize, usize),
    window: Window,
) -> Result<SllCurve> {
    let (i, j) = pair;
    let count = sweep.beams();
    if i == j || i >= count || j >= count {
        return Err(MetricsError::UnknownBeam { i, j, count });
    }
    let grid = &sweep.theta_grid;
    let (own, other) = (sweep.beam_angles[i], sweep.beam_angles[j]);
    let (own_w, other_w) = match window {
        Window::Fixed(w) => (w, w),
        Window::FirstNull => (
            first_null_halfwidth(&sweep.reference[i], grid, own)?,
            first_null_halfwidth(&sweep.reference[j], grid, other)?,
        ),
    };
    let sll_db = sweep.magnitudes[i]
        .iter()
        .map(|cut| isolation_two_windows(cut, grid, (own, own_w), (other, other_w)).map(|iso| -iso))
        .collect::<Result<Vec<_>>>()?;
    Ok(SllCurve {
        beam_pair: pair,
        mode: sweep.mode,
        own_angle_deg: own,
        other_angle_deg: other,
        own_window_deg: own_w,
        other_window_deg: other_w,
        delays: sweep.delays.clone(),
        sll_db,
    })
}

/// Every ordered pair of distinct beams.
pub fn all_sll_curves(sweep: &DecodedPattern, window: Window) -> Result<Vec<SllCurve>> {
    let n = sweep.beams();
    (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|p| sll_vs_delay(sweep, p, window))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationStats {
    pub min_db: f64,
    pub max_db: f64,
    pub range_db: f64,
    pub half_range_db: f64,
}

pub fn variation(curve: &SllCurve) -> Result<VariationStats> {
    variation_of(&curve.sll_db)
}

pub fn variation_of(values: &[f64]) -> Result<VariationStats> {
    let min_db = values
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(MetricsError::EmptyCurve)?;
    let max_db = values
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(MetricsError::EmptyCurve)?;
    let range_db = max_db - min_db;
    Ok(VariationStats {
        min_db,
        max_db,
        range_db,
        half_range_db: range_db / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Walsh,
    Gold,
    SphericalGold,
}

impl BoundKind {
    pub const ALL: [BoundKind; 3] = [BoundKind::Walsh, BoundKind::Gold, BoundKind::SphericalGold];
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::Walsh => "walsh",
            BoundKind::Gold => "gold",
            BoundKind::SphericalGold => "spherical-gold",
        })
    }
}

impl std::str::FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "walsh" => Ok(BoundKind::Walsh),
            "gold" => Ok(BoundKind::Gold),
            "spherical-gold" => Ok(BoundKind::SphericalGold),
            _ => Err(format!(
                "unknown bound kind '{s}' (walsh, gold, spherical-gold)"
            )),
        }
    }
}

impl From<FamilyKind> for BoundKind {
    fn from(k: FamilyKind) -> Self {
        match k {
            FamilyKind::Walsh => BoundKind::Walsh,
            _ => BoundKind::Gold,
        }
    }
}

/// Nominal isolation in dB: `20 log10 N` for Walsh, `10 log10 N` for Gold and
/// `10 log10 (N m)` for spherical-Gold. `m` is ignored for the first two.
pub fn theoretical_bound(kind: BoundKind, n: usize, m: Option<usize>) -> Result<f64> {
    if n < 2 {
        return Err(MetricsError::BadLength(n));
    }
    let n = n as f64;
    Ok(match kind {
        BoundKind::Walsh => 20.0 * n.log10(),
        BoundKind::Gold => 10.0 * n.log10(),
        BoundKind::SphericalGold => {
            let m = m.ok_or(MetricsError::MissingM)?;
            if m == 0 {
                return Err(MetricsError::BadM);
            }
            10.0 * (n * m as f64).log10()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub n: Vec<usize>,
    pub bound_db: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

pub fn bound_curve(kind: BoundKind, n_list: &[usize], m: Option<usize>) -> Result<BoundCurve> {
    if n_list.is_empty() {
        return Err(MetricsError::EmptyCurve);
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MetricsError::NotAscending);
    }
    let bound_db = n_list
        .iter()
        .map(|&n| theoretical_bound(kind, n, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve {
        kind,
        n: n_list.to_vec(),
        bound_db,
        m: if kind == BoundKind::SphericalGold {
            m
        } else {
            None
        },
    })
}
