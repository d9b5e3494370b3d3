use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ArrayGeometry, Result, SpatialError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionKind {
    Nested,
    Sparse,
    Custom,
}

/// `J` disjoint, equal-size element subsets; each subset drives one beam.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubarrayPartition {
    subsets: Vec<Vec<usize>>,
    kind: PartitionKind,
}

impl SubarrayPartition {
    /// Validates disjointness, index bounds and equal subset sizes against `total` elements.
    pub fn new(subsets: Vec<Vec<usize>>, kind: PartitionKind, total: usize) -> Result<Self> {
        let Some(first) = subsets.first() else {
            return Err(SpatialError::InvalidPartition("no subsets".into()));
        };
        let m = first.len();
        if m == 0 {
            return Err(SpatialError::InvalidPartition("empty subset".into()));
        }
        let mut seen = vec![false; total];
        for (k, s) in subsets.iter().enumerate() {
            if s.len() != m {
                return Err(SpatialError::InvalidPartition(format!(
                    "subset {k} has {} elements, expected {m}",
                    s.len()
                )));
            }
            for &e in s {
                if e >= total {
                    return Err(SpatialError::InvalidPartition(format!(
                        "element {e} out of range for {total} elements"
                    )));
                }
                if std::mem::replace(&mut seen[e], true) {
                    return Err(SpatialError::InvalidPartition(format!(
                        "element {e} appears in more than one subset"
                    )));
                }
            }
        }
        if kind == PartitionKind::Nested && m * subsets.len() != total {
            return Err(SpatialError::InvalidPartition(
                "nested subsets must cover the whole array".into(),
            ));
        }
        Ok(Self { subsets, kind })
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn subset(&self, i: usize) -> Option<&[usize]> {
        self.subsets.get(i).map(Vec::as_slice)
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    /// Number of subarrays `J`.
    pub fn j(&self) -> usize {
        self.subsets.len()
    }

    /// Elements per subarray `m`.
    pub fn m(&self) -> usize {
        self.subsets[0].len()
    }
}

/// Interleaved partition covering every element.
///
/// On a lattice whose column count is a multiple of `J`, element `(r, c)` goes to
/// subset `(r + c) mod J` (diagonal interleave); otherwise element `i` goes to
/// `i mod J` in row-major order, which already staggers consecutive rows.
pub fn nested_partition(geometry: &ArrayGeometry, j: usize) -> Result<SubarrayPartition> {
    let total = geometry.len();
    if j == 0 || !total.is_multiple_of(j) {
        return Err(SpatialError::NonDivisible { total, j });
    }
    let mut subsets = vec![Vec::with_capacity(total / j); j];
    for e in 0..total {
        let k = match geometry.lattice() {
            Some(l) if l.cols % j == 0 => (e / l.cols + e % l.cols) % j,
            _ => e % j,
        };
        subsets[k].push(e);
    }
    SubarrayPartition::new(subsets, PartitionKind::Nested, total)
}

/// Seeded random selection of `J` disjoint subsets of `m` elements each.
pub fn sparse_partition(
    geometry: &ArrayGeometry,
    j: usize,
    m: usize,
    seed: u64,
) -> Result<SubarrayPartition> {
    let total = geometry.len();
    if j == 0 || m == 0 || j * m > total {
        return Err(SpatialError::Infeasible { total, j, m });
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let subsets = order
        .chunks(m)
        .take(j)
        .map(|c| {
            let mut s = c.to_vec();
            s.sort_unstable();
            s
        })
        .collect();
    SubarrayPartition::new(subsets, PartitionKind::Sparse, total)
}
