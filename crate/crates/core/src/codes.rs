//! Temporal spreading codes: LFSR m-sequences, Walsh-Hadamard and Gold families,
//! and periodic correlation over integer chip shifts.
//!
//! Chips are antipodal (`+1`/`-1`, stored as `i8`). The binary-to-chip mapping is
//! `0 -> +1`, `1 -> -1`, so XOR of binary sequences is the elementwise product of
//! chip sequences.

use std::fmt;
use std::sync::atomic::{AtomicI64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error(
        "polynomial {poly:#x} is not primitive over GF(2): period {period}, expected {expected}"
    )]
    NonPrimitivePolynomial {
        poly: u32,
        period: usize,
        expected: usize,
    },
    #[error("polynomial {poly:#x} does not have degree {degree} with a nonzero constant term")]
    InvalidPolynomial { poly: u32, degree: u32 },
    #[error("LFSR initial state is all-zero")]
    ZeroState,
    #[error("{what} = {value} is out of range [{min}, {max}]")]
    SizeOutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("no preferred pair of m-sequences exists for degree {0} (n mod 4 == 0); use the gold-like family instead")]
    NoPreferredPair(u32),
    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid chip value {0}; chips must be +1 or -1")]
    InvalidChip(i64),
}

pub type Result<T> = std::result::Result<T, CodeError>;

/// Which construction produced a sequence or family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Walsh,
    Gold,
    GoldLike,
    MSequence,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyKind::Walsh => "walsh",
            FamilyKind::Gold => "gold",
            FamilyKind::GoldLike => "gold-like",
            FamilyKind::MSequence => "m-sequence",
        };
        f.write_str(s)
    }
}

/// A length-N antipodal chip sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChipSequence {
    chips: Vec<i8>,
    kind: FamilyKind,
    index: usize,
}

impl ChipSequence {
    pub fn new(chips: Vec<i8>, kind: FamilyKind, index: usize) -> Result<Self> {
        if chips.len() < 2 {
            return Err(CodeError::SizeOutOfRange {
                what: "sequence length",
                value: chips.len(),
                min: 2,
                max: usize::MAX,
            });
        }
        if let Some(&bad) = chips.iter().find(|&&c| c != 1 && c != -1) {
            return Err(CodeError::InvalidChip(bad as i64));
        }
        Ok(Self { chips, kind, index })
    }

    pub fn chips(&self) -> &[i8] {
        &self.chips
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Chip at integer time `t`, taken modulo the period.
    pub fn chip_at(&self, t: i64) -> i8 {
        self.chips[t.rem_euclid(self.chips.len() as i64) as usize]
    }
}

/// Fibonacci LFSR description.
///
/// `poly` is the feedback polynomial as a bitmask where bit `i` is the
/// coefficient of `x^i`; bit `degree` and bit 0 must be set. The register obeys
/// `s[k+n] = sum_{i<n} c_i s[k+i]` and bit `i` of `state` holds `s[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LfsrSpec {
    pub degree: u32,
    pub poly: u32,
    pub state: u32,
}

impl LfsrSpec {
    pub fn new(degree: u32, poly: u32, state: u32) -> Self {
        Self {
            degree,
            poly,
            state,
        }
    }

    /// Default primitive polynomial for `degree`, seeded with state 1.
    pub fn with_default_poly(degree: u32) -> Result<Self> {
        let poly = default_primitive_poly(degree)?;
        Ok(Self::new(degree, poly, 1))
    }
}

const DEFAULT_PRIMITIVE: [u32; 14] = [
    0xB,     // 3: x^3 + x + 1
    0x13,    // 4: x^4 + x + 1
    0x25,    // 5: x^5 + x^2 + 1
    0x43,    // 6: x^6 + x + 1
    0x83,    // 7: x^7 + x + 1
    0x11D,   // 8: x^8 + x^4 + x^3 + x^2 + 1
    0x211,   // 9: x^9 + x^4 + 1
    0x409,   // 10: x^10 + x^3 + 1
    0x805,   // 11: x^11 + x^2 + 1
    0x1053,  // 12: x^12 + x^6 + x^4 + x + 1
    0x201B,  // 13: x^13 + x^4 + x^3 + x + 1
    0x4443,  // 14: x^14 + x^10 + x^6 + x + 1
    0x8003,  // 15: x^15 + x + 1
    0x1100B, // 16: x^16 + x^12 + x^3 + x + 1
];

pub const MIN_LFSR_DEGREE: u32 = 3;
pub const MAX_LFSR_DEGREE: u32 = 16;

pub fn default_primitive_poly(degree: u32) -> Result<u32> {
    check_degree(degree)?;
    Ok(DEFAULT_PRIMITIVE[(degree - MIN_LFSR_DEGREE) as usize])
}

fn check_degree(degree: u32) -> Result<()> {
    if !(MIN_LFSR_DEGREE..=MAX_LFSR_DEGREE).contains(&degree) {
        return Err(CodeError::SizeOutOfRange {
            what: "LFSR degree",
            value: degree as usize,
            min: MIN_LFSR_DEGREE as usize,
            max: MAX_LFSR_DEGREE as usize,
        });
    }
    Ok(())
}

/// Steps the register once and returns the output bit.
#[inline]
fn lfsr_step(state: &mut u32, taps: u32, degree: u32) -> u8 {
    let out = (*state & 1) as u8;
    let fb = (*state & taps).count_ones() & 1;
    *state = (*state >> 1) | (fb << (degree - 1));
    out
}

/// Number of steps until the register returns to `state`, capped at `2^n - 1`.
fn lfsr_period(degree: u32, poly: u32, state: u32) -> usize {
    let full = (1usize << degree) - 1;
    let taps = poly & ((1 << degree) - 1);
    let mut s = state;
    for k in 1..=full {
        lfsr_step(&mut s, taps, degree);
        if s == state {
            return k;
        }
    }
    full + 1
}

/// Generates one period of the m-sequence described by `spec`.
pub fn generate_mseq(spec: &LfsrSpec) -> Result<ChipSequence> {
    let n = spec.degree;
    check_degree(n)?;
    if spec.poly >> n != 1 || spec.poly & 1 == 0 {
        return Err(CodeError::InvalidPolynomial {
            poly: spec.poly,
            degree: n,
        });
    }
    let mask = (1u32 << n) - 1;
    let state = spec.state & mask;
    if state == 0 {
        return Err(CodeError::ZeroState);
    }
    let expected = (1usize << n) - 1;
    let period = lfsr_period(n, spec.poly, state);
    if period != expected {
        return Err(CodeError::NonPrimitivePolynomial {
            poly: spec.poly,
            period,
            expected,
        });
    }
    let taps = spec.poly & mask;
    let mut s = state;
    let chips = (0..expected)
        .map(|_| {
            if lfsr_step(&mut s, taps, n) == 0 {
                1
            } else {
                -1
            }
        })
        .collect();
    ChipSequence::new(chips, FamilyKind::MSequence, 0)
}

/// All primitive polynomials of `degree`, ascending by bitmask.
pub fn primitive_polynomials(degree: u32) -> Result<Vec<u32>> {
    check_degree(degree)?;
    let expected = (1usize << degree) - 1;
    let polys: Vec<u32> = (0..1u32 << (degree - 1))
        .into_par_iter()
        .map(|mid| (1 << degree) | (mid << 1) | 1)
        .filter(|&p| lfsr_period(degree, p, 1) == expected)
        .collect();
    Ok(polys)
}

/// Unnormalized periodic correlation `sum_k a[k] b[(k + tau) mod N]`.
pub fn periodic_xcorr_raw(a: &[i8], b: &[i8], tau: i64) -> i64 {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    let shift = tau.rem_euclid(n as i64) as usize;
    let (head, tail) = b.split_at(shift);
    let mut acc = 0i64;
    for (x, y) in a.iter().zip(tail.iter().chain(head.iter())) {
        acc += (*x as i64) * (*y as i64);
    }
    acc
}

/// Unnormalized correlation profile for `tau = 0..N-1`.
pub fn xcorr_profile_raw(a: &[i8], b: &[i8]) -> Vec<i64> {
    (0..a.len() as i64)
        .map(|tau| periodic_xcorr_raw(a, b, tau))
        .collect()
}

fn check_lengths(a: &ChipSequence, b: &ChipSequence) -> Result<()> {
    if a.len() != b.len() {
        return Err(CodeError::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Normalized periodic cross-correlation `(1/N) sum_k a[k] b[(k+tau) mod N]`.
pub fn periodic_xcorr(a: &ChipSequence, b: &ChipSequence, tau: i64) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(periodic_xcorr_raw(a.chips(), b.chips(), tau) as f64 / a.len() as f64)
}

pub fn xcorr_profile(a: &ChipSequence, b: &ChipSequence) -> Result<Vec<f64>> {
    check_lengths(a, b)?;
    let n = a.len() as f64;
    Ok(xcorr_profile_raw(a.chips(), b.chips())
        .into_iter()
        .map(|v| v as f64 / n)
        .collect())
}

/// Largest `|raw correlation|` over all distinct pairs and all shifts.
pub fn worst_case_raw(seqs: &[ChipSequence]) -> i64 {
    let Some(first) = seqs.first() else {
        return 0;
    };
    let n = first.len() as i64;
    let best = AtomicI64::new(0);
    (0..seqs.len()).into_par_iter().for_each(|i| {
        for j in i + 1..seqs.len() {
            if best.load(Ordering::Relaxed) >= n {
                return;
            }
            let m = xcorr_profile_raw(seqs[i].chips(), seqs[j].chips())
                .into_iter()
                .map(i64::abs)
                .max()
                .unwrap_or(0);
            best.fetch_max(m, Ordering::Relaxed);
        }
    });
    best.into_inner()
}

/// Gold correlation magnitude `t(n) = 2^floor((n+2)/2) + 1`.
pub fn gold_t(n: u32) -> i64 {
    (1i64 << ((n + 2) / 2)) + 1
}

/// A family of equal-length sequences with its measured worst-case correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeFamily {
    pub kind: FamilyKind,
    pub length: usize,
    pub polynomials: Vec<u32>,
    pub sequences: Vec<ChipSequence>,
    /// Unnormalized worst-case `|correlation|` over distinct pairs and shifts.
    pub worst_case_raw: i64,
    pub worst_case_xcorr: f64,
}

impl CodeFamily {
    fn new(
        kind: FamilyKind,
        polynomials: Vec<u32>,
        sequences: Vec<ChipSequence>,
        worst_case_raw: i64,
    ) -> Self {
        let length = sequences.first().map_or(0, ChipSequence::len);
        Self {
            kind,
            length,
            polynomials,
            sequences,
            worst_case_raw,
            worst_case_xcorr: worst_case_raw as f64 / length as f64,
        }
    }

    /// Builds a family from externally supplied sequences, measuring its worst case.
    pub fn from_sequences(
        kind: FamilyKind,
        polynomials: Vec<u32>,
        sequences: Vec<ChipSequence>,
    ) -> Result<Self> {
        if let Some(first) = sequences.first() {
            if let Some(bad) = sequences.iter().find(|s| s.len() != first.len()) {
                return Err(CodeError::LengthMismatch(first.len(), bad.len()));
            }
        }
        let worst = worst_case_raw(&sequences);
        Ok(Self::new(kind, polynomials, sequences, worst))
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

/// Walsh-Hadamard family of size `2^log2_n` by Sylvester doubling.
pub fn walsh_family(log2_n: u32) -> Result<CodeFamily> {
    if !(1..=8).contains(&log2_n) {
        return Err(CodeError::SizeOutOfRange {
            what: "log2(N)",
            value: log2_n as usize,
            min: 1,
            max: 8,
        });
    }
    let mut h: Vec<Vec<i8>> = vec![vec![1]];
    for _ in 0..log2_n {
        let size = h.len();
        let mut next = Vec::with_capacity(2 * size);
        for row in &h {
            next.push(row.iter().chain(row.iter()).copied().collect());
        }
        for row in &h {
            next.push(row.iter().copied().chain(row.iter().map(|&c| -c)).collect());
        }
        h = next;
    }
    let sequences = h
        .into_iter()
        .enumerate()
        .map(|(i, chips)| ChipSequence::new(chips, FamilyKind::Walsh, i))
        .collect::<Result<Vec<_>>>()?;
    let worst = worst_case_raw(&sequences);
    Ok(CodeFamily::new(
        FamilyKind::Walsh,
        Vec::new(),
        sequences,
        worst,
    ))
}

fn mseq_chips(degree: u32, poly: u32) -> Result<Vec<i8>> {
    Ok(generate_mseq(&LfsrSpec::new(degree, poly, 1))?.chips)
}

/// `[a, b, a*b, a*T b, ..., a*T^{N-1} b]` where `T^k b` is `b` advanced by `k` chips.
fn xor_family(a: &[i8], b: &[i8], kind: FamilyKind) -> Vec<ChipSequence> {
    let n = a.len();
    let mut out = Vec::with_capacity(n + 2);
    out.push(ChipSequence {
        chips: a.to_vec(),
        kind,
        index: 0,
    });
    out.push(ChipSequence {
        chips: b.to_vec(),
        kind,
        index: 1,
    });
    for k in 0..n {
        let chips = (0..n).map(|i| a[i] * b[(i + k) % n]).collect();
        out.push(ChipSequence {
            chips,
            kind,
            index: k + 2,
        });
    }
    out
}

/// Max `|raw|` of the pair profile, aborting once it exceeds `limit`.
fn pair_worst_bounded(a: &[i8], b: &[i8], limit: i64) -> Option<i64> {
    let mut worst = 0;
    for tau in 0..a.len() as i64 {
        worst = worst.max(periodic_xcorr_raw(a, b, tau).abs());
        if worst > limit {
            return None;
        }
    }
    Some(worst)
}

/// Gold family for LFSR degree `n` built from the lowest preferred pair of
/// primitive polynomials. The pair's cross-correlation is checked exhaustively
/// for the three-valued spectrum `{-1, -t(n), t(n)-2}`.
pub fn gold_family(n: u32) -> Result<CodeFamily> {
    if n.is_multiple_of(4) {
        return Err(CodeError::NoPreferredPair(n));
    }
    if !(5..=12).contains(&n) {
        return Err(CodeError::SizeOutOfRange {
            what: "Gold degree",
            value: n as usize,
            min: 5,
            max: 12,
        });
    }
    let t = gold_t(n);
    let allowed = [-1, -t, t - 2];
    let polys = primitive_polynomials(n)?;
    let seqs = polys
        .iter()
        .map(|&p| mseq_chips(n, p))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            let (a, b) = (&seqs[i], &seqs[j]);
            let three_valued =
                (0..a.len() as i64).all(|tau| allowed.contains(&periodic_xcorr_raw(a, b, tau)));
            if three_valued {
                // family spectrum is the pair spectrum plus -1 (shift-and-add)
                let family = xor_family(a, b, FamilyKind::Gold);
                return Ok(CodeFamily::new(
                    FamilyKind::Gold,
                    vec![polys[i], polys[j]],
                    family,
                    t,
                ));
            }
        }
    }
    Err(CodeError::NoPreferredPair(n))
}

/// Families up to this many `members^2 * N^2` operations per polynomial pair get
/// an exhaustive member-pair matrix and greedy member selection.
const GREEDY_BUDGET: usize = 1 << 25;

struct Candidate {
    pair: (usize, usize),
    members: Vec<usize>,
    worst: i64,
}

fn greedy_select(matrix: &[Vec<i64>], count: usize) -> (Vec<usize>, i64) {
    let f = matrix.len();
    if count == 1 {
        return (vec![0], 0);
    }
    let mut best = (i64::MAX, 0, 1);
    for i in 0..f {
        for j in i + 1..f {
            if matrix[i][j] < best.0 {
                best = (matrix[i][j], i, j);
            }
        }
    }
    let mut chosen = vec![best.1, best.2];
    let mut worst = best.0;
    while chosen.len() < count {
        let (cost, k) = (0..f)
            .filter(|k| !chosen.contains(k))
            .map(|k| (chosen.iter().map(|&s| matrix[k][s]).max().unwrap_or(0), k))
            .min()
            .expect("count never exceeds family size");
        chosen.push(k);
        worst = worst.max(cost);
    }
    chosen.sort_unstable();
    (chosen, worst)
}

fn member_matrix(family: &[ChipSequence]) -> Vec<Vec<i64>> {
    let f = family.len();
    let rows: Vec<Vec<i64>> = (0..f)
        .into_par_iter()
        .map(|i| {
            (0..f)
                .map(|j| {
                    if j <= i {
                        0
                    } else {
                        xcorr_profile_raw(family[i].chips(), family[j].chips())
                            .into_iter()
                            .map(i64::abs)
                            .max()
                            .unwrap_or(0)
                    }
                })
                .collect()
        })
        .collect();
    let mut m = rows;
    for i in 0..f {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    m
}

/// Best available XOR-combination family for degree `n`, searching every pair of
/// distinct primitive polynomials. `count` members are selected to minimize the
/// worst-case cross-correlation; ties go to the lowest pair and member indices.
///
/// This is the construction used where no preferred pair exists (e.g. N = 15).
pub fn gold_like_family(n: u32, count: usize) -> Result<CodeFamily> {
    if !(4..=12).contains(&n) {
        return Err(CodeError::SizeOutOfRange {
            what: "gold-like degree",
            value: n as usize,
            min: 4,
            max: 12,
        });
    }
    let len = (1usize << n) - 1;
    let capacity = len + 2;
    if count == 0 || count > capacity {
        return Err(CodeError::SizeOutOfRange {
            what: "family count",
            value: count,
            min: 1,
            max: capacity,
        });
    }
    let polys = primitive_polynomials(n)?;
    let seqs = polys
        .iter()
        .map(|&p| mseq_chips(n, p))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..polys.len())
        .flat_map(|i| (i + 1..polys.len()).map(move |j| (i, j)))
        .collect();
    let exhaustive = capacity * capacity * len * len <= GREEDY_BUDGET;

    let candidates: Vec<Option<Candidate>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&seqs[i], &seqs[j]);
            if exhaustive {
                let family = xor_family(a, b, FamilyKind::GoldLike);
                let (members, worst) = greedy_select(&member_matrix(&family), count);
                Some(Candidate {
                    pair: (i, j),
                    members,
                    worst,
                })
            } else if count == capacity {
                let worst = pair_worst_bounded(a, b, len as i64)?.max(1);
                Some(Candidate {
                    pair: (i, j),
                    members: (0..capacity).collect(),
                    worst,
                })
            } else {
                let family = xor_family(a, b, FamilyKind::GoldLike);
                let subset: Vec<ChipSequence> = family.into_iter().take(count).collect();
                Some(Candidate {
                    pair: (i, j),
                    members: (0..count).collect(),
                    worst: worst_case_raw(&subset),
                })
            }
        })
        .collect();

    let best = candidates
        .into_iter()
        .flatten()
        .min_by_key(|c| (c.worst, c.pair))
        .ok_or(CodeError::SizeOutOfRange {
            what: "primitive polynomial count",
            value: polys.len(),
            min: 2,
            max: usize::MAX,
        })?;
    let (i, j) = best.pair;
    let family = xor_family(&seqs[i], &seqs[j], FamilyKind::GoldLike);
    let sequences = best.members.iter().map(|&k| family[k].clone()).collect();
    Ok(CodeFamily::new(
        FamilyKind::GoldLike,
        vec![polys[i], polys[j]],
        sequences,
        best.worst,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree3_mseq_has_ideal_autocorrelation() {
        let s = generate_mseq(&LfsrSpec::new(3, 0b1011, 0b001)).unwrap();
        assert_eq!(s.len(), 7);
        let profile = xcorr_profile_raw(s.chips(), s.chips());
        assert_eq!(profile, vec![7, -1, -1, -1, -1, -1, -1]);
    }

    #[test]
    fn degree5_mseq_is_balanced() {
        let s = generate_mseq(&LfsrSpec::new(5, 0b100101, 1)).unwrap();
        let minus = s.chips().iter().filter(|&&c| c == -1).count();
        assert_eq!((minus, s.len() - minus), (16, 15));
    }

    #[test]
    fn zero_state_rejected() {
        assert_eq!(
            generate_mseq(&LfsrSpec::new(3, 0b1011, 0)),
            Err(CodeError::ZeroState)
        );
    }

    #[test]
    fn non_primitive_polynomial_rejected() {
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        let err = generate_mseq(&LfsrSpec::new(4, 0b10101, 1)).unwrap_err();
        assert!(matches!(err, CodeError::NonPrimitivePolynomial { .. }));
    }

    #[test]
    fn default_table_is_primitive() {
        for n in MIN_LFSR_DEGREE..=MAX_LFSR_DEGREE {
            let spec = LfsrSpec::with_default_poly(n).unwrap();
            assert_eq!(
                generate_mseq(&spec).unwrap().len(),
                (1 << n) - 1,
                "degree {n}"
            );
        }
    }

    #[test]
    fn primitive_counts_match_totient() {
        // phi(2^n - 1) / n
        assert_eq!(primitive_polynomials(3).unwrap().len(), 2);
        assert_eq!(primitive_polynomials(4).unwrap().len(), 2);
        assert_eq!(primitive_polynomials(5).unwrap().len(), 6);
        assert_eq!(primitive_polynomials(6).unwrap().len(), 6);
        assert_eq!(primitive_polynomials(7).unwrap().len(), 18);
    }

    #[test]
    fn walsh_base_case() {
        let f = walsh_family(1).unwrap();
        assert_eq!(f.sequences[0].chips(), &[1, 1]);
        assert_eq!(f.sequences[1].chips(), &[1, -1]);
        assert_eq!(
            periodic_xcorr(&f.sequences[0], &f.sequences[1], 0).unwrap(),
            0.0
        );
    }

    #[test]
    fn walsh_out_of_range() {
        assert!(matches!(
            walsh_family(0),
            Err(CodeError::SizeOutOfRange { .. })
        ));
        assert!(matches!(
            walsh_family(9),
            Err(CodeError::SizeOutOfRange { .. })
        ));
    }

    #[test]
    fn walsh8_zero_shift_orthogonal_and_fragile() {
        let f = walsh_family(3).unwrap();
        assert_eq!(f.len(), 8);
        let mut shifted_max = 0.0f64;
        for (i, a) in f.sequences.iter().enumerate() {
            for (j, b) in f.sequences.iter().enumerate() {
                if i != j {
                    assert_eq!(periodic_xcorr_raw(a.chips(), b.chips(), 0), 0);
                    shifted_max = shifted_max.max(periodic_xcorr(a, b, 1).unwrap().abs());
                }
            }
        }
        assert!(shifted_max >= 0.75);
    }

    #[test]
    fn gold_precondition_gates() {
        assert_eq!(gold_family(4), Err(CodeError::NoPreferredPair(4)));
        assert_eq!(gold_family(8), Err(CodeError::NoPreferredPair(8)));
        assert!(matches!(
            gold_family(3),
            Err(CodeError::SizeOutOfRange { .. })
        ));
        let msg = gold_family(4).unwrap_err().to_string();
        assert!(msg.contains("gold-like"));
    }

    #[test]
    fn gold5_family_worst_case() {
        let f = gold_family(5).unwrap();
        assert_eq!(f.len(), 33);
        assert_eq!(f.length, 31);
        assert_eq!(f.worst_case_raw, 9);
        assert_eq!(worst_case_raw(&f.sequences), 9);
        assert!((f.worst_case_xcorr - 9.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn gold_like_capacity() {
        assert!(matches!(
            gold_like_family(4, 20),
            Err(CodeError::SizeOutOfRange {
                value: 20,
                max: 17,
                ..
            })
        ));
        assert!(matches!(
            gold_like_family(4, 0),
            Err(CodeError::SizeOutOfRange { .. })
        ));
    }

    #[test]
    fn gold_like_n4_pair() {
        let f = gold_like_family(4, 2).unwrap();
        assert_eq!(f.kind, FamilyKind::GoldLike);
        assert_eq!(f.len(), 2);
        assert_eq!(f.length, 15);
        assert!(f.worst_case_raw <= 9);
        assert_eq!(f.worst_case_raw, worst_case_raw(&f.sequences));
    }

    #[test]
    fn gold_like_n5_rediscovers_gold_bound() {
        let f = gold_like_family(5, 33).unwrap();
        assert_eq!(f.worst_case_raw, 9);
        assert_eq!(worst_case_raw(&f.sequences), 9);
    }

    #[test]
    fn length_mismatch() {
        let a = ChipSequence::new(vec![1, -1], FamilyKind::Walsh, 0).unwrap();
        let b = ChipSequence::new(vec![1, -1, 1], FamilyKind::Walsh, 0).unwrap();
        assert_eq!(
            periodic_xcorr(&a, &b, 0),
            Err(CodeError::LengthMismatch(2, 3))
        );
        assert!(xcorr_profile(&a, &b).is_err());
    }

    #[test]
    fn invalid_chip_rejected() {
        assert_eq!(
            ChipSequence::new(vec![1, 0, -1], FamilyKind::Walsh, 0),
            Err(CodeError::InvalidChip(0))
        );
    }

    #[test]
    fn chip_at_wraps() {
        let s = ChipSequence::new(vec![1, -1, -1], FamilyKind::MSequence, 0).unwrap();
        assert_eq!(s.chip_at(3), 1);
        assert_eq!(s.chip_at(-1), -1);
    }
}
