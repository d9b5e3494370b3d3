//! Greedy swap search over sparse partitions, minimizing the codebook's worst
//! inter-beam spatial leakage.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::element_response;
use super::{
    sparse_partition, ArrayGeometry, Codebook, PartitionKind, Result, SpatialError,
    SubarrayPartition, Taper, CUT_PHI_DEG,
};

/// Swaps must lower the objective by more than this to be accepted.
const MIN_IMPROVEMENT: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub partition: SubarrayPartition,
    pub codebook: Codebook,
    /// `mu_max` of the seeded starting partition.
    pub initial_mu: f64,
    /// Objective after each accepted swap, starting with the initial value.
    pub trace: Vec<f64>,
    pub evaluated: usize,
}

struct SearchState {
    j: usize,
    m: usize,
    /// `terms[e][i * j + k]`: contribution of element `e` to beam `i`'s response at angle `k`.
    terms: Vec<Vec<Complex64>>,
    amp2: Vec<f64>,
    subsets: Vec<Vec<usize>>,
    owner: Vec<Option<(usize, usize)>>,
    sums: Vec<Vec<Complex64>>,
    norm2: Vec<f64>,
}

impl SearchState {
    fn row_leak(&self, i: usize, sums: &[Complex64], norm2: f64) -> f64 {
        let scale = 1.0 / (norm2.sqrt() * (self.m as f64).sqrt());
        (0..self.j)
            .filter(|&k| k != i)
            .map(|k| sums[k].norm() * scale)
            .fold(0.0, f64::max)
    }

    fn objective(&self) -> f64 {
        (0..self.j)
            .map(|i| self.row_leak(i, &self.sums[i], self.norm2[i]))
            .fold(0.0, f64::max)
    }

    fn moved(&self, i: usize, out: usize, inc: usize) -> (Vec<Complex64>, f64) {
        let row = (0..self.j)
            .map(|k| {
                self.sums[i][k] - self.terms[out][i * self.j + k] + self.terms[inc][i * self.j + k]
            })
            .collect();
        (row, self.norm2[i] - self.amp2[out] + self.amp2[inc])
    }
}

/// Starting from `sparse_partition(seed)`, repeatedly proposes a seeded-random swap
/// of one subarray element with an element outside that subarray (another subarray
/// or the unassigned pool) and keeps it only if `mu_max` strictly decreases.
/// `iters` counts proposals.
pub fn optimize_partition(
    geometry: &ArrayGeometry,
    angles: &[f64],
    m: usize,
    iters: usize,
    seed: u64,
    taper: Taper,
) -> Result<OptimizeOutcome> {
    let j = angles.len();
    let total = geometry.len();
    if j == 0 || m == 0 || j * m > total {
        return Err(SpatialError::Infeasible { total, j, m });
    }
    let start = sparse_partition(geometry, j, m, seed)?;
    let initial = Codebook::from_partition(&start, geometry, angles, taper)?;

    let amps = taper.element_amplitudes(geometry);
    let phi = CUT_PHI_DEG.to_radians();
    let sines: Vec<f64> = angles.iter().map(|a| a.to_radians().sin()).collect();
    let terms: Vec<Vec<Complex64>> = geometry
        .positions()
        .iter()
        .zip(&amps)
        .map(|(&p, &amp)| {
            let mut t = Vec::with_capacity(j * j);
            for si in &sines {
                let steer = element_response(p, *si, phi);
                for sk in &sines {
                    t.push(amp * steer.conj() * element_response(p, *sk, phi));
                }
            }
            t
        })
        .collect();
    let amp2: Vec<f64> = amps.iter().map(|a| a * a).collect();

    let subsets = start.subsets().to_vec();
    let mut owner = vec![None; total];
    for (i, s) in subsets.iter().enumerate() {
        for (slot, &e) in s.iter().enumerate() {
            owner[e] = Some((i, slot));
        }
    }
    let sums = subsets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (0..j)
                .map(|k| s.iter().map(|&e| terms[e][i * j + k]).sum())
                .collect()
        })
        .collect();
    let norm2 = subsets
        .iter()
        .map(|s| s.iter().map(|&e| amp2[e]).sum())
        .collect();
    let mut st = SearchState {
        j,
        m,
        terms,
        amp2,
        subsets,
        owner,
        sums,
        norm2,
    };

    let mut current = st.objective();
    let mut trace = vec![current];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_5a7a);
    let outside = total - m;
    let mut evaluated = 0;
    if j > 1 || outside > 0 {
        for _ in 0..iters {
            evaluated += 1;
            let a = rng.random_range(0..j);
            let slot_a = rng.random_range(0..m);
            let e = st.subsets[a][slot_a];
            // pick the r-th element not owned by subset a
            let r = rng.random_range(0..outside);
            let f = (0..total)
                .filter(|&x| st.owner[x].is_none_or(|(o, _)| o != a))
                .nth(r)
                .expect("outside count is exact");

            let (row_a, n_a) = st.moved(a, e, f);
            let partner = st.owner[f];
            let row_b = partner.map(|(b, _)| st.moved(b, f, e));
            let mut candidate: f64 = st.row_leak(a, &row_a, n_a);
            for i in 0..j {
                if i == a {
                    continue;
                }
                let leak = match (&row_b, partner) {
                    (Some((row, n)), Some((b, _))) if b == i => st.row_leak(i, row, *n),
                    _ => st.row_leak(i, &st.sums[i], st.norm2[i]),
                };
                candidate = candidate.max(leak);
            }
            if candidate < current - MIN_IMPROVEMENT {
                st.sums[a] = row_a;
                st.norm2[a] = n_a;
                st.subsets[a][slot_a] = f;
                st.owner[f] = Some((a, slot_a));
                st.owner[e] = None;
                if let (Some((row, n)), Some((b, slot_b))) = (row_b, partner) {
                    st.sums[b] = row;
                    st.norm2[b] = n;
                    st.subsets[b][slot_b] = e;
                    st.owner[e] = Some((b, slot_b));
                }
                current = candidate;
                trace.push(current);
            }
        }
    }

    let subsets = st
        .subsets
        .into_iter()
        .map(|mut s| {
            s.sort_unstable();
            s
        })
        .collect();
    let partition = SubarrayPartition::new(subsets, PartitionKind::Sparse, total)?;
    let codebook = Codebook::from_partition(&partition, geometry, angles, taper)?;
    Ok(OptimizeOutcome {
        partition,
        codebook,
        initial_mu: initial.mu_max(),
        trace,
        evaluated,
    })
}
