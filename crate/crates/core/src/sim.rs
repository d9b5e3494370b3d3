//! Chip-spaced simulation of the combined coded multibeam output and its
//! per-beam matched-filter decoding.
//!
//! For a plane wave from `theta`, beam `j` contributes
//! `sum_l g_jl C_j(t - tau_j - d_jl) P_j(theta)` to chip sample `t`, where
//! `P_j(theta) = w_j^H a(theta)` is the subarray combiner output.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::ChipSequence;
use crate::spatial::{beam_pattern, ArrayGeometry, Codebook, SpatialError, SphericalCodeword};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("no beams given")]
    EmptyBeams,
    #[error("code length {found} does not match {expected}")]
    CodeLengthMismatch { expected: usize, found: usize },
    #[error("unknown beam {beam} ({count} beams)")]
    UnknownBeam { beam: usize, count: usize },
    #[error("invalid delay scenario: {0}")]
    InvalidScenario(String),
    #[error("theta grid must be nonempty and strictly increasing")]
    BadThetaGrid,
    #[error("matrix has {found} values, expected {rows} x {cols}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        found: usize,
    },
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Most multipath taps allowed per beam.
pub const MAX_TAPS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamAssignment {
    pub codeword: SphericalCodeword,
    pub code: ChipSequence,
    pub beam_angle_deg: f64,
}

impl BeamAssignment {
    pub fn new(codeword: SphericalCodeword, code: ChipSequence) -> Self {
        let beam_angle_deg = codeword.steer_angle_deg;
        Self {
            codeword,
            code,
            beam_angle_deg,
        }
    }
}

/// Pairs codeword `i` with code `i`.
pub fn assign_beams(codebook: &Codebook, codes: &[ChipSequence]) -> Result<Vec<BeamAssignment>> {
    if codebook.is_empty() {
        return Err(SimError::EmptyBeams);
    }
    if codes.len() < codebook.len() {
        return Err(SimError::UnknownBeam {
            beam: codes.len(),
            count: codebook.len(),
        });
    }
    Ok(codebook
        .codewords()
        .iter()
        .zip(codes)
        .map(|(cw, c)| BeamAssignment::new(cw.clone(), c.clone()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub delay_chips: i64,
    pub gain: Complex64,
}

impl Tap {
    pub const DIRECT: Tap = Tap {
        delay_chips: 0,
        gain: Complex64 { re: 1.0, im: 0.0 },
    };
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayScenario {
    pub per_beam_delay_chips: Vec<i64>,
    /// Per-beam taps; a missing entry means a single direct tap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipath_taps: Option<Vec<Vec<Tap>>>,
}

impl DelayScenario {
    pub fn aligned(beams: usize) -> Self {
        Self {
            per_beam_delay_chips: vec![0; beams],
            multipath_taps: None,
        }
    }

    pub fn validate(&self, beams: usize, n: usize) -> Result<()> {
        if self.per_beam_delay_chips.len() != beams {
            return Err(SimError::InvalidScenario(format!(
                "{} delays for {beams} beams",
                self.per_beam_delay_chips.len()
            )));
        }
        if let Some(d) = self
            .per_beam_delay_chips
            .iter()
            .find(|&&d| d < 0 || d >= n as i64)
        {
            return Err(SimError::InvalidScenario(format!(
                "delay {d} outside [0, {}]",
                n - 1
            )));
        }
        if let Some(taps) = &self.multipath_taps {
            if taps.len() != beams {
                return Err(SimError::InvalidScenario(format!(
                    "{} tap lists for {beams} beams",
                    taps.len()
                )));
            }
            for (j, list) in taps.iter().enumerate() {
                if list.len() > MAX_TAPS {
                    return Err(SimError::InvalidScenario(format!(
                        "beam {j} has {} taps (max {MAX_TAPS})",
                        list.len()
                    )));
                }
                if let Some(t) = list.iter().find(|t| t.gain.norm() > 1.0 + 1e-12) {
                    return Err(SimError::InvalidScenario(format!(
                        "beam {j} tap gain magnitude {} exceeds 1",
                        t.gain.norm()
                    )));
                }
                if let Some(t) = list.iter().find(|t| t.delay_chips < 0) {
                    return Err(SimError::InvalidScenario(format!(
                        "beam {j} tap delay {} is negative",
                        t.delay_chips
                    )));
                }
            }
        }
        Ok(())
    }

    fn taps(&self, beam: usize) -> &[Tap] {
        match &self.multipath_taps {
            Some(t) if !t[beam].is_empty() => &t[beam],
            _ => std::slice::from_ref(&Tap::DIRECT),
        }
    }
}

/// Additive circular complex white noise at `snr_db` relative to the mean power
/// of the noise-free matrix. `stream` selects an independent substream of `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Combined received samples indexed `[theta][chip]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedMatrix {
    theta_grid: Vec<f64>,
    n_chips: usize,
    values: Vec<Complex64>,
}

impl ReceivedMatrix {
    pub fn new(theta_grid: Vec<f64>, n_chips: usize, values: Vec<Complex64>) -> Result<Self> {
        check_grid(&theta_grid)?;
        if n_chips == 0 || values.len() != theta_grid.len() * n_chips {
            return Err(SimError::DimensionMismatch {
                rows: theta_grid.len(),
                cols: n_chips,
                found: values.len(),
            });
        }
        Ok(Self {
            theta_grid,
            n_chips,
            values,
        })
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn n_chips(&self) -> usize {
        self.n_chips
    }

    pub fn row(&self, theta_index: usize) -> &[Complex64] {
        &self.values[theta_index * self.n_chips..(theta_index + 1) * self.n_chips]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks(self.n_chips)
    }

    /// Elementwise sum of two matrices on the same grid.
    pub fn add(&self, other: &ReceivedMatrix) -> Result<ReceivedMatrix> {
        if self.theta_grid != other.theta_grid || self.n_chips != other.n_chips {
            return Err(SimError::DimensionMismatch {
                rows: self.theta_grid.len(),
                cols: self.n_chips,
                found: other.values.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            theta_grid: self.theta_grid.clone(),
            n_chips: self.n_chips,
            values,
        })
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SimError::BadThetaGrid);
    }
    Ok(())
}

/// Evenly spaced grid from `start` to `stop` inclusive.
pub fn theta_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|k| start + k as f64 * step).collect()
}

fn common_length(beams: &[BeamAssignment]) -> Result<usize> {
    let first = beams.first().ok_or(SimError::EmptyBeams)?;
    let n = first.code.len();
    if let Some(b) = beams.iter().find(|b| b.code.len() != n) {
        return Err(SimError::CodeLengthMismatch {
            expected: n,
            found: b.code.len(),
        });
    }
    Ok(n)
}

/// Combiner output of every beam's codeword across the grid, `[beam][theta]`.
pub fn beam_patterns(
    beams: &[BeamAssignment],
    geometry: &ArrayGeometry,
    theta_grid: &[f64],
) -> Vec<Vec<Complex64>> {
    beams
        .iter()
        .map(|b| {
            theta_grid
                .iter()
                .map(|&t| beam_pattern(&b.codeword, geometry, t))
                .collect()
        })
        .collect()
}

pub fn synth_received(
    beams: &[BeamAssignment],
    geometry: &ArrayGeometry,
    scenario: &DelayScenario,
    theta_grid: &[f64],
    noise: Option<(NoiseSpec, u64)>,
) -> Result<ReceivedMatrix> {
    let n = common_length(beams)?;
    check_grid(theta_grid)?;
    scenario.validate(beams.len(), n)?;
    let patterns = beam_patterns(beams, geometry, theta_grid);

    // effective chip waveform per beam: sum_l g_l C((t - tau - d_l) mod N)
    let waveforms: Vec<Vec<Complex64>> = beams
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let tau = scenario.per_beam_delay_chips[j];
            (0..n as i64)
                .map(|t| {
                    scenario
                        .taps(j)
                        .iter()
                        .map(|tap| tap.gain * b.code.chip_at(t - tau - tap.delay_chips) as f64)
                        .sum()
                })
                .collect()
        })
        .collect();

    let mut values = Vec::with_capacity(theta_grid.len() * n);
    for th in 0..theta_grid.len() {
        for t in 0..n {
            let y: Complex64 = (0..beams.len())
                .map(|j| waveforms[j][t] * patterns[j][th])
                .sum();
            values.push(y);
        }
    }

    if let Some((spec, stream)) = noise {
        let power = values.iter().map(|v| v.norm_sqr()).sum::<f64>() / values.len() as f64;
        let sigma = (power / 10f64.powf(spec.snr_db / 10.0) / 2.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(stream);
        for v in values.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v += Complex64::new(re * sigma, im * sigma);
        }
    }
    ReceivedMatrix::new(theta_grid.to_vec(), n, values)
}

/// Matched filter `z(theta) = (1/N) sum_t C((t - decode_delay) mod N) y[theta, t]`.
pub fn decode_temporal(
    rx: &ReceivedMatrix,
    code: &ChipSequence,
    decode_delay_chips: i64,
) -> Result<Vec<Complex64>> {
    let n = rx.n_chips();
    if code.len() != n {
        return Err(SimError::CodeLengthMismatch {
            expected: n,
            found: code.len(),
        });
    }
    let reference: Vec<f64> = (0..n as i64)
        .map(|t| code.chip_at(t - decode_delay_chips) as f64)
        .collect();
    Ok(rx
        .rows()
        .map(|row| {
            row.iter()
                .zip(&reference)
                .map(|(y, c)| y * c)
                .sum::<Complex64>()
                / n as f64
        })
        .collect())
}

/// Spatial matched-filter gain of codeword `u` across the grid: its normalized
/// correlation with the arrival vector at each angle.
pub fn spatial_gain(
    u: &SphericalCodeword,
    geometry: &ArrayGeometry,
    theta_grid: &[f64],
) -> Vec<f64> {
    let wn = u.weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    let scale = 1.0 / (wn * (u.m() as f64).sqrt());
    theta_grid
        .iter()
        .map(|&t| (beam_pattern(u, geometry, t).norm() * scale).min(1.0))
        .collect()
}

/// Temporal matched filter with the target beam's code followed by the spatial
/// stage: each decoded sample is weighted by the target codeword's correlation
/// with the arrival vector at that angle. Leakage of beam `j` at its own angle is
/// thereby scaled by both the code correlation and the codeword correlation.
pub fn decode_spherical_gold(
    rx: &ReceivedMatrix,
    beams: &[BeamAssignment],
    geometry: &ArrayGeometry,
    target_beam: usize,
    decode_delay_chips: i64,
) -> Result<Vec<f64>> {
    let beam = beams.get(target_beam).ok_or(SimError::UnknownBeam {
        beam: target_beam,
        count: beams.len(),
    })?;
    let z = decode_temporal(rx, &beam.code, decode_delay_chips)?;
    let gain = spatial_gain(&beam.codeword, geometry, rx.theta_grid());
    Ok(z.iter().zip(&gain).map(|(v, g)| v.norm() * g).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeMode {
    TemporalOnly,
    SphericalGold,
}

impl std::fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecodeMode::TemporalOnly => "temporal-only",
            DecodeMode::SphericalGold => "spherical-gold",
        })
    }
}

/// Decoded magnitudes of `target_beam` in the given mode.
pub fn decode_beam(
    rx: &ReceivedMatrix,
    beams: &[BeamAssignment],
    geometry: &ArrayGeometry,
    target_beam: usize,
    decode_delay_chips: i64,
    mode: DecodeMode,
) -> Result<Vec<f64>> {
    match mode {
        DecodeMode::TemporalOnly => {
            let beam = beams.get(target_beam).ok_or(SimError::UnknownBeam {
                beam: target_beam,
                count: beams.len(),
            })?;
            Ok(decode_temporal(rx, &beam.code, decode_delay_chips)?
                .iter()
                .map(|v| v.norm())
                .collect())
        }
        DecodeMode::SphericalGold => {
            decode_spherical_gold(rx, beams, geometry, target_beam, decode_delay_chips)
        }
    }
}

/// Clean decoded pattern of one codeword (its own beam only, matched delay).
pub fn reference_pattern(
    u: &SphericalCodeword,
    geometry: &ArrayGeometry,
    theta_grid: &[f64],
    mode: DecodeMode,
) -> Vec<f64> {
    let pattern = theta_grid
        .iter()
        .map(|&t| beam_pattern(u, geometry, t).norm());
    match mode {
        DecodeMode::TemporalOnly => pattern.collect(),
        DecodeMode::SphericalGold => pattern
            .zip(spatial_gain(u, geometry, theta_grid))
            .map(|(p, g)| p * g)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoaEstimate {
    pub beam_index: usize,
    pub theta_hat_deg: f64,
    pub score: f64,
    pub shift_steps: i64,
}

/// Default search half-width for `aoa_estimate`, in grid steps.
pub const AOA_MAX_SHIFT: usize = 8;

/// Matches a decoded cut against each codeword's reference pattern shifted by up
/// to `max_shift` grid steps; the best normalized correlation wins, ties going to
/// the lowest beam index and then the most negative shift.
pub fn aoa_estimate(
    decoded: &[f64],
    codebook: &Codebook,
    geometry: &ArrayGeometry,
    theta_grid: &[f64],
    mode: DecodeMode,
    max_shift: usize,
) -> Result<AoaEstimate> {
    if codebook.is_empty() {
        return Err(SimError::Spatial(SpatialError::EmptyCodebook));
    }
    check_grid(theta_grid)?;
    if decoded.len() != theta_grid.len() {
        return Err(SimError::DimensionMismatch {
            rows: theta_grid.len(),
            cols: 1,
            found: decoded.len(),
        });
    }
    let step = if theta_grid.len() > 1 {
        theta_grid[1] - theta_grid[0]
    } else {
        0.0
    };
    let dn = decoded.iter().map(|v| v * v).sum::<f64>().sqrt();
    let len = decoded.len() as i64;
    let mut best: Option<AoaEstimate> = None;
    for (k, cw) in codebook.codewords().iter().enumerate() {
        let reference = reference_pattern(cw, geometry, theta_grid, mode);
        for s in -(max_shift as i64)..=max_shift as i64 {
            let (mut dot, mut rn) = (0.0, 0.0);
            for t in 0..len {
                let src = t - s;
                if (0..len).contains(&src) {
                    let r = reference[src as usize];
                    dot += decoded[t as usize] * r;
                    rn += r * r;
                }
            }
            let score = if dn > 0.0 && rn > 0.0 {
                dot / (dn * rn.sqrt())
            } else {
                0.0
            };
            if best.is_none_or(|b| score > b.score) {
                best = Some(AoaEstimate {
                    beam_index: k,
                    theta_hat_deg: cw.steer_angle_deg + s as f64 * step,
                    score,
                    shift_steps: s,
                });
            }
        }
    }
    Ok(best.expect("codebook is nonempty"))
}

/// Decoded magnitudes `[beam][delay][theta]` with clean per-beam references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedPattern {
    pub mode: DecodeMode,
    pub theta_grid: Vec<f64>,
    pub beam_angles: Vec<f64>,
    pub delays: Vec<i64>,
    pub magnitudes: Vec<Vec<Vec<f64>>>,
    pub reference: Vec<Vec<f64>>,
}

impl DecodedPattern {
    pub fn beams(&self) -> usize {
        self.beam_angles.len()
    }

    pub fn cut(&self, beam: usize, delay_index: usize) -> &[f64] {
        &self.magnitudes[beam][delay_index]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipath_taps: Option<Vec<Vec<Tap>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

/// Scenario for one sweep point: beam 0 is the undelayed reference and every
/// other beam is delayed by `delay` chips.
pub fn sweep_scenario(beams: usize, delay: i64, options: &SweepOptions) -> DelayScenario {
    let mut per_beam = vec![delay; beams];
    if let Some(first) = per_beam.first_mut() {
        *first = 0;
    }
    DelayScenario {
        per_beam_delay_chips: per_beam,
        multipath_taps: options.multipath_taps.clone(),
    }
}

/// Decode delay that matches beam `beam` in `sweep_scenario(_, delay, _)`.
pub fn matched_decode_delay(beam: usize, delay: i64) -> i64 {
    if beam == 0 {
        0
    } else {
        delay
    }
}

/// Received matrix for sweep point `delay_index`; noise uses substream `delay_index`.
pub fn sweep_capture(
    beams: &[BeamAssignment],
    geometry: &ArrayGeometry,
    theta_grid: &[f64],
    delay: i64,
    delay_index: usize,
    options: &SweepOptions,
) -> Result<ReceivedMatrix> {
    let scenario = sweep_scenario(beams.len(), delay, options);
    synth_received(
        beams,
        geometry,
        &scenario,
        theta_grid,
        options.noise.map(|n| (n, delay_index as u64)),
    )
}

pub fn delay_sweep(
    beams: &[BeamAssignment],
    geometry: &ArrayGeometry,
    theta_grid: &[f64],
    delays: &[i64],
    mode: DecodeMode,
) -> Result<DecodedPattern> {
    delay_sweep_with(
        beams,
        geometry,
        theta_grid,
        delays,
        mode,
        &SweepOptions::default(),
    )
}

/// For each delay, synthesizes the combined capture and decodes every beam at its
/// matched delay.
pub fn delay_sweep_with(
    beams: &[BeamAssignment],
    geometry: &ArrayGeometry,
    theta_grid: &[f64],
    delays: &[i64],
    mode: DecodeMode,
    options: &SweepOptions,
) -> Result<DecodedPattern> {
    let n = common_length(beams)?;
    check_grid(theta_grid)?;
    if let Some(d) = delays.iter().find(|&&d| d < 0 || d >= n as i64) {
        return Err(SimError::InvalidScenario(format!(
            "sweep delay {d} outside [0, {}]",
            n - 1
        )));
    }
    let per_delay: Vec<Vec<Vec<f64>>> = delays
        .par_iter()
        .enumerate()
        .map(|(k, &d)| {
            let rx = sweep_capture(beams, geometry, theta_grid, d, k, options)?;
            (0..beams.len())
                .map(|b| decode_beam(&rx, beams, geometry, b, matched_decode_delay(b, d), mode))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let magnitudes = (0..beams.len())
        .map(|b| per_delay.iter().map(|cuts| cuts[b].clone()).collect())
        .collect();
    let reference = beams
        .iter()
        .map(|b| reference_pattern(&b.codeword, geometry, theta_grid, mode))
        .collect();
    Ok(DecodedPattern {
        mode,
        theta_grid: theta_grid.to_vec(),
        beam_angles: beams.iter().map(|b| b.beam_angle_deg).collect(),
        delays: delays.to_vec(),
        magnitudes,
        reference,
    })
}
