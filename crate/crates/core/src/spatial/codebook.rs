use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::geometry::{clamp_theta, element_response};
use super::{steering_vector, ArrayGeometry, Result, SpatialError, SubarrayPartition, CUT_PHI_DEG};

/// Amplitude taper applied along x over the full array aperture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Taper {
    #[default]
    Uniform,
    Taylor {
        nbar: usize,
        sll_db: f64,
    },
}

impl Taper {
    /// Amplitude at normalized aperture coordinate `u` in `[-0.5, 0.5]`.
    pub fn amplitude(&self, u: f64) -> f64 {
        match *self {
            Taper::Uniform => 1.0,
            Taper::Taylor { nbar, sll_db } => taylor(u, nbar, sll_db),
        }
    }

    pub(crate) fn element_amplitudes(&self, geometry: &ArrayGeometry) -> Vec<f64> {
        let (lo, hi) = geometry.x_extent();
        let (mid, span) = ((lo + hi) / 2.0, hi - lo);
        geometry
            .positions()
            .iter()
            .map(|p| {
                let u = if span > 0.0 { (p[0] - mid) / span } else { 0.0 };
                self.amplitude(u)
            })
            .collect()
    }
}

fn taylor(u: f64, nbar: usize, sll_db: f64) -> f64 {
    if nbar <= 1 {
        return 1.0;
    }
    let r = 10f64.powf(sll_db.abs() / 20.0);
    let a = r.acosh() / std::f64::consts::PI;
    let nb = nbar as f64;
    let sigma2 = nb * nb / (a * a + (nb - 0.5).powi(2));
    let mut w = 1.0;
    for m in 1..nbar {
        let mf = m as f64;
        let num: f64 = (1..nbar)
            .map(|n| 1.0 - mf * mf / (sigma2 * (a * a + (n as f64 - 0.5).powi(2))))
            .product();
        let den: f64 = (1..nbar)
            .filter(|&n| n != m)
            .map(|n| 1.0 - mf * mf / (n * n) as f64)
            .product();
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let f_m = sign * num / (2.0 * den);
        w += 2.0 * f_m * (2.0 * std::f64::consts::PI * mf * u).cos();
    }
    w
}

/// Unit-norm beamforming weight vector of one subarray, steered to `steer_angle_deg`.
///
/// `weights[k]` belongs to element `support[k]`; the combiner output for an arrival
/// vector `a` is `sum_k conj(weights[k]) a[support[k]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalCodeword {
    pub subarray_index: usize,
    pub steer_angle_deg: f64,
    pub support: Vec<usize>,
    pub weights: Vec<Complex64>,
    /// Euclidean norm before normalization.
    pub norm: f64,
}

impl SphericalCodeword {
    /// Weight vector over the whole array, zero off the support.
    pub fn full_weights(&self, total: usize) -> Vec<Complex64> {
        let mut w = vec![Complex64::new(0.0, 0.0); total];
        for (&e, &v) in self.support.iter().zip(&self.weights) {
            w[e] = v;
        }
        w
    }

    pub fn m(&self) -> usize {
        self.support.len()
    }
}

pub fn make_codeword(
    partition: &SubarrayPartition,
    geometry: &ArrayGeometry,
    subarray_index: usize,
    theta_deg: f64,
    taper: Taper,
) -> Result<SphericalCodeword> {
    let support = partition
        .subset(subarray_index)
        .ok_or(SpatialError::IndexOutOfRange {
            index: subarray_index,
            count: partition.j(),
        })?
        .to_vec();
    let amps = taper.element_amplitudes(geometry);
    let s = clamp_theta(theta_deg).to_radians().sin();
    let phi = CUT_PHI_DEG.to_radians();
    let raw: Vec<Complex64> = support
        .iter()
        .map(|&e| amps[e] * element_response(geometry.positions()[e], s, phi))
        .collect();
    let norm = raw.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    let weights = raw.into_iter().map(|w| w / norm).collect();
    Ok(SphericalCodeword {
        subarray_index,
        steer_angle_deg: theta_deg,
        support,
        weights,
        norm,
    })
}

/// Picks the entries of a full-array vector that lie on `support`.
pub fn restrict(full: &[Complex64], support: &[usize]) -> Vec<Complex64> {
    support.iter().map(|&e| full[e]).collect()
}

/// `|<u, probe>| / (|u| |probe|)` with the probe given on `u`'s support.
pub fn spatial_corr(u: &SphericalCodeword, probe: &[Complex64]) -> Result<f64> {
    if probe.len() != u.weights.len() {
        return Err(SpatialError::SupportMismatch {
            probe: probe.len(),
            support: u.weights.len(),
        });
    }
    let inner: Complex64 = u.weights.iter().zip(probe).map(|(w, p)| w.conj() * p).sum();
    let nu = u.weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    let np = probe.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
    if nu == 0.0 || np == 0.0 {
        return Ok(0.0);
    }
    Ok((inner.norm() / (nu * np)).min(1.0))
}

/// Combiner output of codeword `u` for a unit plane wave from `theta_deg` on the cut.
pub fn beam_pattern(u: &SphericalCodeword, geometry: &ArrayGeometry, theta_deg: f64) -> Complex64 {
    let s = clamp_theta(theta_deg).to_radians().sin();
    let phi = CUT_PHI_DEG.to_radians();
    u.support
        .iter()
        .zip(&u.weights)
        .map(|(&e, w)| w.conj() * element_response(geometry.positions()[e], s, phi))
        .sum()
}

/// One codeword per beam plus the worst inter-beam spatial leakage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    codewords: Vec<SphericalCodeword>,
    mu_max: f64,
}

impl Codebook {
    pub fn new(codewords: Vec<SphericalCodeword>, geometry: &ArrayGeometry) -> Result<Self> {
        let mut cb = Self {
            codewords,
            mu_max: 0.0,
        };
        cb.mu_max = codebook_mu(&cb, geometry)?;
        Ok(cb)
    }

    /// Codeword `i` steers subset `i` of `partition` to `angles[i]`.
    pub fn from_partition(
        partition: &SubarrayPartition,
        geometry: &ArrayGeometry,
        angles: &[f64],
        taper: Taper,
    ) -> Result<Self> {
        if angles.len() != partition.j() {
            return Err(SpatialError::AngleCountMismatch {
                angles: angles.len(),
                j: partition.j(),
            });
        }
        let codewords = angles
            .iter()
            .enumerate()
            .map(|(i, &a)| make_codeword(partition, geometry, i, a, taper))
            .collect::<Result<Vec<_>>>()?;
        Self::new(codewords, geometry)
    }

    pub fn codewords(&self) -> &[SphericalCodeword] {
        &self.codewords
    }

    pub fn angles(&self) -> Vec<f64> {
        self.codewords.iter().map(|c| c.steer_angle_deg).collect()
    }

    pub fn mu_max(&self) -> f64 {
        self.mu_max
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }
}

/// Worst inter-beam spatial leakage: the largest `spatial_corr` of codeword `i`
/// against the arrival vector at beam `j`'s angle, over ordered pairs `i != j`.
/// A single-beam codebook has no pairs and scores 0.
pub fn codebook_mu(codebook: &Codebook, geometry: &ArrayGeometry) -> Result<f64> {
    let cws = codebook.codewords();
    if cws.is_empty() {
        return Err(SpatialError::EmptyCodebook);
    }
    let mut mu: f64 = 0.0;
    for (i, u) in cws.iter().enumerate() {
        for (j, v) in cws.iter().enumerate() {
            if i == j {
                continue;
            }
            let arrival = steering_vector(geometry, v.steer_angle_deg, CUT_PHI_DEG);
            mu = mu.max(spatial_corr(u, &restrict(&arrival, &u.support))?);
        }
    }
    Ok(mu)
}

/// Scaling floor `1/sqrt(m)` for an `m`-element subarray.
pub fn spatial_bound(m: usize) -> f64 {
    1.0 / (m.max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{grid_geometry, nested_partition, PartitionKind};

    #[test]
    fn broadside_uniform_weights() {
        let g = grid_geometry(16, 8, 0.5).unwrap();
        let p = nested_partition(&g, 2).unwrap();
        let cw = make_codeword(&p, &g, 1, 0.0, Taper::Uniform).unwrap();
        for w in &cw.weights {
            assert!((w - Complex64::new(1.0 / 8.0, 0.0)).norm() < 1e-15);
        }
        assert!((cw.norm - 8.0).abs() < 1e-12);
    }

    #[test]
    fn codeword_is_unit_norm() {
        let g = grid_geometry(8, 8, 0.5).unwrap();
        let p = nested_partition(&g, 4).unwrap();
        let taper = Taper::Taylor {
            nbar: 4,
            sll_db: 30.0,
        };
        let cw = make_codeword(&p, &g, 2, -20.0, taper).unwrap();
        let n: f64 = cw.weights.iter().map(|w| w.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn index_out_of_range() {
        let g = grid_geometry(8, 8, 0.5).unwrap();
        let p = nested_partition(&g, 2).unwrap();
        assert_eq!(
            make_codeword(&p, &g, 2, 0.0, Taper::Uniform),
            Err(SpatialError::IndexOutOfRange { index: 2, count: 2 })
        );
    }

    #[test]
    fn matched_steering_gives_unit_correlation() {
        let g = grid_geometry(16, 8, 0.5).unwrap();
        let p = nested_partition(&g, 2).unwrap();
        let cw = make_codeword(&p, &g, 0, 35.0, Taper::Uniform).unwrap();
        let probe = restrict(&steering_vector(&g, 35.0, 0.0), &cw.support);
        assert!((spatial_corr(&cw, &probe).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_element_null_at_endfire() {
        let g = grid_geometry(1, 2, 0.5).unwrap();
        let p = SubarrayPartition::new(vec![vec![0, 1]], PartitionKind::Custom, 2).unwrap();
        let cw = make_codeword(&p, &g, 0, 0.0, Taper::Uniform).unwrap();
        let probe = steering_vector(&g, 90.0, 0.0);
        assert!(spatial_corr(&cw, &probe).unwrap() < 1e-15);
    }

    #[test]
    fn support_mismatch() {
        let g = grid_geometry(1, 4, 0.5).unwrap();
        let p = nested_partition(&g, 2).unwrap();
        let cw = make_codeword(&p, &g, 0, 0.0, Taper::Uniform).unwrap();
        assert_eq!(
            spatial_corr(&cw, &steering_vector(&g, 0.0, 0.0)),
            Err(SpatialError::SupportMismatch {
                probe: 4,
                support: 2
            })
        );
    }

    #[test]
    fn single_beam_codebook_has_zero_mu() {
        let g = grid_geometry(8, 8, 0.5).unwrap();
        let p = nested_partition(&g, 1).unwrap();
        let cb = Codebook::from_partition(&p, &g, &[10.0], Taper::Uniform).unwrap();
        assert_eq!(cb.mu_max(), 0.0);
    }

    #[test]
    fn identical_codewords_give_unit_mu() {
        let g = grid_geometry(8, 8, 0.5).unwrap();
        let p = nested_partition(&g, 2).unwrap();
        let cw = make_codeword(&p, &g, 0, 20.0, Taper::Uniform).unwrap();
        let cb = Codebook::new(vec![cw.clone(), cw], &g).unwrap();
        assert!((cb.mu_max() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_codebook() {
        let g = grid_geometry(8, 8, 0.5).unwrap();
        assert_eq!(Codebook::new(vec![], &g), Err(SpatialError::EmptyCodebook));
    }

    #[test]
    fn angle_count_mismatch() {
        let g = grid_geometry(8, 8, 0.5).unwrap();
        let p = nested_partition(&g, 2).unwrap();
        assert!(matches!(
            Codebook::from_partition(&p, &g, &[0.0], Taper::Uniform),
            Err(SpatialError::AngleCountMismatch { .. })
        ));
    }

    #[test]
    fn spatial_bound_values() {
        assert_eq!(spatial_bound(64), 0.125);
        assert_eq!(spatial_bound(1), 1.0);
        assert_eq!(spatial_bound(4), 0.5);
    }

    #[test]
    fn taylor_taper_is_symmetric_and_peaked() {
        let t = Taper::Taylor {
            nbar: 5,
            sll_db: 35.0,
        };
        assert!((t.amplitude(0.3) - t.amplitude(-0.3)).abs() < 1e-12);
        assert!(t.amplitude(0.0) > t.amplitude(0.45));
        assert_eq!(Taper::Uniform.amplitude(0.4), 1.0);
    }

    #[test]
    fn mirror_partition_leakage_is_symmetric() {
        let g = grid_geometry(16, 8, 0.5).unwrap();
        let p = nested_partition(&g, 2).unwrap();
        let a = make_codeword(&p, &g, 0, -35.0, Taper::Uniform).unwrap();
        let b = make_codeword(&p, &g, 1, 35.0, Taper::Uniform).unwrap();
        let ab = spatial_corr(&a, &restrict(&steering_vector(&g, 35.0, 0.0), &a.support)).unwrap();
        let ba = spatial_corr(&b, &restrict(&steering_vector(&g, -35.0, 0.0), &b.support)).unwrap();
        assert!((ab - ba).abs() < 1e-9);
    }
}
