use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Result, SpatialError};

/// Largest supported element count.
pub const MAX_ELEMENTS: usize = 4096;

/// Azimuth of the evaluation cut, in degrees.
pub const CUT_PHI_DEG: f64 = 0.0;

/// Row/column layout of a rectangular lattice; element `r * cols + c` sits in row `r`, column `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
}

/// Element positions `(x, y)` in carrier wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    positions: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lattice: Option<Lattice>,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(SpatialError::SizeOutOfRange {
                what: "element count",
                value: 0,
                min: 1,
                max: MAX_ELEMENTS,
            });
        }
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|&a, &b| positions[a].partial_cmp(&positions[b]).unwrap());
        for w in order.windows(2) {
            if positions[w[0]] == positions[w[1]] {
                return Err(SpatialError::DuplicatePosition(
                    w[0].min(w[1]),
                    w[0].max(w[1]),
                ));
            }
        }
        Ok(Self {
            positions,
            lattice: None,
        })
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn lattice(&self) -> Option<Lattice> {
        self.lattice
    }

    /// Total element count.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn x_extent(&self) -> (f64, f64) {
        self.positions
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[0]), hi.max(p[0]))
            })
    }
}

/// Rectangular `rows x cols` lattice centered at the origin, columns along x.
pub fn grid_geometry(rows: usize, cols: usize, spacing: f64) -> Result<ArrayGeometry> {
    let total = rows.saturating_mul(cols);
    if !(2..=MAX_ELEMENTS).contains(&total) {
        return Err(SpatialError::SizeOutOfRange {
            what: "rows * cols",
            value: total,
            min: 2,
            max: MAX_ELEMENTS,
        });
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(SpatialError::BadSpacing(spacing));
    }
    let x0 = (cols as f64 - 1.0) / 2.0;
    let y0 = (rows as f64 - 1.0) / 2.0;
    let positions = (0..rows)
        .flat_map(|r| {
            (0..cols).map(move |c| [(c as f64 - x0) * spacing, (r as f64 - y0) * spacing])
        })
        .collect();
    Ok(ArrayGeometry {
        positions,
        lattice: Some(Lattice {
            rows,
            cols,
            spacing,
        }),
    })
}

pub(crate) fn clamp_theta(theta_deg: f64) -> f64 {
    if !(-90.0..=90.0).contains(&theta_deg) {
        log::warn!("theta {theta_deg} deg clamped to [-90, 90]");
        theta_deg.clamp(-90.0, 90.0)
    } else {
        theta_deg
    }
}

/// Phase `exp(+j 2 pi (x sin(theta) cos(phi) + y sin(theta) sin(phi)))` of one element.
#[inline]
pub(crate) fn element_response(pos: [f64; 2], sin_theta: f64, phi_rad: f64) -> Complex64 {
    let path = pos[0] * sin_theta * phi_rad.cos() + pos[1] * sin_theta * phi_rad.sin();
    Complex64::from_polar(1.0, 2.0 * PI * path)
}

/// Unit-amplitude arrival vector for a plane wave from `(theta, phi)`.
pub fn steering_vector(geometry: &ArrayGeometry, theta_deg: f64, phi_deg: f64) -> Vec<Complex64> {
    let s = clamp_theta(theta_deg).to_radians().sin();
    let phi = phi_deg.to_radians();
    geometry
        .positions
        .iter()
        .map(|&p| element_response(p, s, phi))
        .collect()
}
