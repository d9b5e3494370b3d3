//! Brute-force oracles and randomized property checks shared by the integration
//! targets. Oracles recompute everything from first principles with plain loops
//! and never call the library's correlation or pattern code.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use beamcode::codes::{
    generate_mseq, gold_family, gold_like_family, periodic_xcorr, periodic_xcorr_raw, walsh_family,
    ChipSequence, LfsrSpec,
};
use beamcode::sim::{assign_beams, decode_temporal, synth_received, theta_grid, DelayScenario};
use beamcode::spatial::{
    grid_geometry, nested_partition, optimize_partition, sparse_partition, Codebook, Taper,
};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

// ---- oracles ----

/// `sum_k a[k] b[(k + tau) mod N]`, no normalization.
pub fn oracle_xcorr_raw(a: &[i8], b: &[i8], tau: i64) -> i64 {
    let n = a.len() as i64;
    let mut acc = 0i64;
    for k in 0..n {
        let idx = ((k + tau) % n + n) % n;
        acc += a[k as usize] as i64 * b[idx as usize] as i64;
    }
    acc
}

/// Every cross-correlation value over distinct pairs and all shifts.
pub fn oracle_spectrum(seqs: &[Vec<i8>]) -> std::collections::BTreeSet<i64> {
    let mut out = std::collections::BTreeSet::new();
    for i in 0..seqs.len() {
        for j in 0..seqs.len() {
            if i == j {
                continue;
            }
            for tau in 0..seqs[i].len() as i64 {
                out.insert(oracle_xcorr_raw(&seqs[i], &seqs[j], tau));
            }
        }
    }
    out
}

/// Largest `|rho|` over distinct pairs at shift `tau`, normalized.
pub fn oracle_max_at_shift(seqs: &[Vec<i8>], tau: i64) -> f64 {
    let n = seqs[0].len() as f64;
    let mut best = 0i64;
    for i in 0..seqs.len() {
        for j in 0..seqs.len() {
            if i != j {
                best = best.max(oracle_xcorr_raw(&seqs[i], &seqs[j], tau).abs());
            }
        }
    }
    best as f64 / n
}

/// Aperiodic (zero-padded) variant, for reference only.
pub fn oracle_aperiodic_max_at_shift(seqs: &[Vec<i8>], tau: usize) -> f64 {
    let n = seqs[0].len();
    let mut best = 0i64;
    for i in 0..seqs.len() {
        for j in 0..seqs.len() {
            if i == j {
                continue;
            }
            let s: i64 = (0..n - tau)
                .map(|k| seqs[i][k] as i64 * seqs[j][k + tau] as i64)
                .sum();
            best = best.max(s.abs());
        }
    }
    best as f64 / n as f64
}

/// Sylvester Hadamard rows built by explicit doubling.
pub fn oracle_walsh(n: usize) -> Vec<Vec<i8>> {
    let mut h = vec![vec![1i8]];
    while h.len() < n {
        let k = h.len();
        let mut next = vec![vec![0i8; 2 * k]; 2 * k];
        for r in 0..k {
            for c in 0..k {
                next[r][c] = h[r][c];
                next[r][c + k] = h[r][c];
                next[r + k][c] = h[r][c];
                next[r + k][c + k] = -h[r][c];
            }
        }
        h = next;
    }
    h
}

/// Combiner output `sum_e conj(w_e) exp(j 2 pi x_e sin theta)` evaluated directly.
pub fn oracle_pattern(
    positions: &[[f64; 2]],
    support: &[usize],
    weights: &[Complex64],
    theta_deg: f64,
) -> Complex64 {
    let s = (theta_deg * PI / 180.0).sin();
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &e) in support.iter().enumerate() {
        let phase = 2.0 * PI * positions[e][0] * s;
        acc += weights[k].conj() * Complex64::new(phase.cos(), phase.sin());
    }
    acc
}

/// Received matrix `[theta][t]` straight from the model, single tap per beam.
pub fn oracle_received(
    positions: &[[f64; 2]],
    supports: &[Vec<usize>],
    weights: &[Vec<Complex64>],
    codes: &[Vec<i8>],
    delays: &[i64],
    grid: &[f64],
) -> Vec<Vec<Complex64>> {
    let n = codes[0].len() as i64;
    grid.iter()
        .map(|&th| {
            (0..n)
                .map(|t| {
                    let mut y = Complex64::new(0.0, 0.0);
                    for j in 0..codes.len() {
                        let idx = ((t - delays[j]) % n + n) % n;
                        let chip = codes[j][idx as usize] as f64;
                        y += chip * oracle_pattern(positions, &supports[j], &weights[j], th);
                    }
                    y
                })
                .collect()
        })
        .collect()
}

// ---- property checks ----

pub const CASES: u32 = 128;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn families() -> &'static [Vec<beamcode::codes::CodeFamily>; 3] {
    static CACHE: OnceLock<[Vec<beamcode::codes::CodeFamily>; 3]> = OnceLock::new();
    CACHE.get_or_init(|| {
        [
            (1..=8).map(|l| walsh_family(l).unwrap()).collect(),
            [5, 6, 7].iter().map(|&n| gold_family(n).unwrap()).collect(),
            (4..=6).map(|n| gold_like_family(n, 3).unwrap()).collect(),
        ]
    })
}

/// A sequence from one of the generators, chosen by `(which, a, b)`.
fn any_sequence(which: u8, a: u32, b: u32) -> ChipSequence {
    let [walsh, gold, gold_like] = families();
    let pick = |fams: &[beamcode::codes::CodeFamily]| {
        let f = &fams[a as usize % fams.len()];
        f.sequences[b as usize % f.len()].clone()
    };
    match which % 4 {
        0 => {
            let degree = 3 + a % 10;
            let mut spec = LfsrSpec::with_default_poly(degree).unwrap();
            spec.state = 1 + b % ((1 << degree) - 1);
            generate_mseq(&spec).unwrap()
        }
        1 => pick(walsh),
        2 => pick(gold),
        _ => pick(gold_like),
    }
}

pub fn prop_antipodality() -> Result<(), String> {
    check(
        CASES,
        (any::<u8>(), any::<u32>(), any::<u32>()),
        |(w, a, b)| {
            let s = any_sequence(w, a, b);
            prop_assert!(s.chips().iter().all(|&c| c == 1 || c == -1));
            Ok(())
        },
    )
}

pub fn prop_walsh_orthogonality() -> Result<(), String> {
    check(
        CASES,
        (1u32..=8, any::<usize>(), any::<usize>()),
        |(log2, i, j)| {
            let f = walsh_family(log2).unwrap();
            let n = f.len();
            let (i, j) = (i % n, j % n);
            prop_assume!(i != j);
            prop_assert_eq!(
                periodic_xcorr_raw(f.sequences[i].chips(), f.sequences[j].chips(), 0),
                0
            );
            prop_assert_eq!(
                oracle_xcorr_raw(f.sequences[i].chips(), f.sequences[j].chips(), 0),
                0
            );
            Ok(())
        },
    )
}

pub fn prop_shift_symmetry() -> Result<(), String> {
    let s = (
        any::<u8>(),
        any::<u32>(),
        any::<u32>(),
        any::<u32>(),
        0i64..4096,
    );
    check(CASES, s, |(w, a, b1, b2, tau)| {
        let x = any_sequence(w, a, b1);
        let y = any_sequence(w, a, b2);
        prop_assume!(x.len() == y.len());
        let n = x.len() as i64;
        let tau = tau % n;
        let ab = periodic_xcorr_raw(x.chips(), y.chips(), tau);
        let ba = periodic_xcorr_raw(y.chips(), x.chips(), (n - tau) % n);
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(ab, oracle_xcorr_raw(x.chips(), y.chips(), tau));
        prop_assert!(periodic_xcorr(&x, &y, tau).unwrap().abs() <= 1.0);
        Ok(())
    })
}

pub fn prop_partition_disjointness() -> Result<(), String> {
    let s = (
        2usize..=12,
        2usize..=12,
        1usize..=4,
        1usize..=16,
        any::<u64>(),
    );
    check(CASES, s, |(rows, cols, j, m, seed)| {
        let g = grid_geometry(rows, cols, 0.5).unwrap();
        let total = rows * cols;
        let mut parts = Vec::new();
        if j * m <= total {
            parts.push(sparse_partition(&g, j, m, seed).unwrap());
        }
        if total % j == 0 {
            parts.push(nested_partition(&g, j).unwrap());
        }
        for p in parts {
            let mut seen = vec![false; total];
            let m = p.m();
            prop_assert_eq!(p.j(), j);
            for s in p.subsets() {
                prop_assert_eq!(s.len(), m);
                for &e in s {
                    prop_assert!(e < total);
                    prop_assert!(!seen[e], "element {} used twice", e);
                    seen[e] = true;
                }
            }
        }
        Ok(())
    })
}

pub fn prop_codeword_unit_norm() -> Result<(), String> {
    let s = (
        2usize..=10,
        2usize..=10,
        1usize..=3,
        any::<u64>(),
        -60i32..=60,
        any::<bool>(),
    );
    check(CASES, s, |(rows, cols, j, seed, angle, taylor)| {
        let g = grid_geometry(rows, cols, 0.5).unwrap();
        let m = (rows * cols / j).max(1);
        let p = sparse_partition(&g, j, m, seed).unwrap();
        let taper = if taylor {
            Taper::Taylor {
                nbar: 4,
                sll_db: 30.0,
            }
        } else {
            Taper::Uniform
        };
        let angles: Vec<f64> = (0..j).map(|k| angle as f64 + 7.0 * k as f64).collect();
        let cb = Codebook::from_partition(&p, &g, &angles, taper).unwrap();
        for cw in cb.codewords() {
            let norm: f64 = cw.weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-12, "norm {}", norm);
        }
        Ok(())
    })
}

pub fn prop_optimizer_monotone() -> Result<(), String> {
    let s = (
        4usize..=8,
        4usize..=8,
        2usize..=3,
        any::<u64>(),
        0usize..150,
    );
    check(CASES, s, |(rows, cols, j, seed, iters)| {
        let g = grid_geometry(rows, cols, 0.5).unwrap();
        let m = rows * cols / (j + 1);
        let angles: Vec<f64> = (0..j).map(|k| -40.0 + 35.0 * k as f64).collect();
        let out = optimize_partition(&g, &angles, m, iters, seed, Taper::Uniform).unwrap();
        prop_assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
        let last = *out.trace.last().unwrap();
        prop_assert!((out.codebook.mu_max() - last).abs() < 1e-9);
        prop_assert!((out.trace[0] - out.initial_mu).abs() < 1e-9);
        prop_assert!(out.codebook.mu_max() > 0.0);
        Ok(())
    })
}

/// Random two-beam setup on a small grid: returns beams, geometry and code length.
fn small_scene(
    rows: usize,
    cols: usize,
    walsh: bool,
    a0: i32,
    a1: i32,
) -> (
    beamcode::spatial::ArrayGeometry,
    Vec<beamcode::sim::BeamAssignment>,
) {
    let g = grid_geometry(rows, cols, 0.5).unwrap();
    let p = sparse_partition(&g, 2, rows * cols / 2, 7).unwrap();
    let cb =
        Codebook::from_partition(&p, &g, &[a0 as f64, a1 as f64 + 0.5], Taper::Uniform).unwrap();
    let codes = if walsh {
        walsh_family(3).unwrap().sequences[2..4].to_vec()
    } else {
        gold_family(5).unwrap().sequences[..2].to_vec()
    };
    (g.clone(), assign_beams(&cb, &codes).unwrap())
}

pub fn prop_decode_linearity() -> Result<(), String> {
    let s = (
        2usize..=4,
        2usize..=4,
        any::<bool>(),
        -60i32..0,
        0i32..60,
        0i64..31,
        0i64..31,
        0i64..64,
    );
    check(CASES, s, |(rows, cols, walsh, a0, a1, d0, d1, dd)| {
        let (g, beams) = small_scene(rows, cols, walsh, a0, a1);
        let n = beams[0].code.len() as i64;
        let grid = theta_grid(-70.0, 70.0, 10.0);
        let sa = DelayScenario {
            per_beam_delay_chips: vec![d0 % n],
            multipath_taps: None,
        };
        let sb = DelayScenario {
            per_beam_delay_chips: vec![d1 % n],
            multipath_taps: None,
        };
        let ra = synth_received(&beams[..1], &g, &sa, &grid, None).unwrap();
        let rb = synth_received(&beams[1..], &g, &sb, &grid, None).unwrap();
        let sum = ra.add(&rb).unwrap();
        let za = decode_temporal(&ra, &beams[0].code, dd).unwrap();
        let zb = decode_temporal(&rb, &beams[0].code, dd).unwrap();
        let zs = decode_temporal(&sum, &beams[0].code, dd).unwrap();
        for k in 0..grid.len() {
            prop_assert!((zs[k] - za[k] - zb[k]).norm() < 1e-10);
        }
        Ok(())
    })
}

pub fn prop_delay_periodicity() -> Result<(), String> {
    let s = (
        2usize..=4,
        2usize..=4,
        any::<bool>(),
        -60i32..0,
        0i32..60,
        0i64..31,
        -64i64..64,
    );
    check(CASES, s, |(rows, cols, walsh, a0, a1, d1, dd)| {
        let (g, beams) = small_scene(rows, cols, walsh, a0, a1);
        let n = beams[0].code.len() as i64;
        let sc = DelayScenario {
            per_beam_delay_chips: vec![0, d1 % n],
            multipath_taps: None,
        };
        let grid = theta_grid(-70.0, 70.0, 10.0);
        let rx = synth_received(&beams, &g, &sc, &grid, None).unwrap();
        for b in &beams {
            let z0 = decode_temporal(&rx, &b.code, dd).unwrap();
            let z1 = decode_temporal(&rx, &b.code, dd + n).unwrap();
            prop_assert_eq!(z0, z1);
        }
        Ok(())
    })
}

pub fn prop_energy_bound() -> Result<(), String> {
    let s = (
        2usize..=4,
        2usize..=4,
        any::<bool>(),
        -60i32..0,
        0i32..60,
        0i64..31,
        0i64..31,
    );
    check(CASES, s, |(rows, cols, walsh, a0, a1, d1, dd)| {
        let (g, beams) = small_scene(rows, cols, walsh, a0, a1);
        let n = beams[0].code.len() as i64;
        let sc = DelayScenario {
            per_beam_delay_chips: vec![0, d1 % n],
            multipath_taps: None,
        };
        let grid = theta_grid(-70.0, 70.0, 5.0);
        let rx = synth_received(&beams, &g, &sc, &grid, None).unwrap();
        let z = decode_temporal(&rx, &beams[1].code, dd).unwrap();
        for (k, row) in rx.rows().enumerate() {
            let peak = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
            prop_assert!(z[k].norm() <= peak + 1e-12);
        }
        Ok(())
    })
}

/// All suites: (name, outcome).
pub fn all_properties() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("antipodality", prop_antipodality()),
        ("walsh zero-shift orthogonality", prop_walsh_orthogonality()),
        ("correlation shift symmetry", prop_shift_symmetry()),
        ("partition disjointness", prop_partition_disjointness()),
        ("codeword unit norm", prop_codeword_unit_norm()),
        ("optimizer monotonicity", prop_optimizer_monotone()),
        ("decoding linearity", prop_decode_linearity()),
        ("delay periodicity", prop_delay_periodicity()),
        ("energy bound", prop_energy_bound()),
    ]
}
