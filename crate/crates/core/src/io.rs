//! File formats: code families, codebooks, θ × N capture matrices, decoded
//! patterns, SLL curves and bound curves.
//!
//! Capture CSV: header `theta_deg,chip_0,...,chip_{N-1}`, one row per angle,
//! complex cells written as `re:im`. Decimal point is always `.`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{xcorr_profile_raw, ChipSequence, CodeError, CodeFamily, FamilyKind};
use crate::metrics::{BoundCurve, SllCurve, VariationStats};
use crate::sim::{AoaEstimate, DecodedPattern, ReceivedMatrix, SimError};
use crate::spatial::{
    ArrayGeometry, Codebook, PartitionKind, SpatialError, SphericalCodeword, SubarrayPartition,
    Taper,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV at line {line}: {reason}")]
    MalformedCsv { line: u64, reason: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T> = std::result::Result<T, IoError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(io_err(path))?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

// ---- code families ----

/// One sequence per row, chips as `1`/`-1`.
pub fn write_family_csv<W: Write>(family: &CodeFamily, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for s in &family.sequences {
        w.write_record(s.chips().iter().map(|c| c.to_string()))?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

pub fn read_family_csv<R: Read>(input: R, kind: FamilyKind) -> Result<Vec<ChipSequence>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    let mut width = None;
    for (index, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = line_of(&rec);
        if *width.get_or_insert(rec.len()) != rec.len() {
            return Err(IoError::MalformedCsv {
                line,
                reason: format!("{} chips, expected {}", rec.len(), width.unwrap_or(0)),
            });
        }
        let chips = rec
            .iter()
            .map(|cell| match cell {
                "1" | "+1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(IoError::MalformedCsv {
                    line,
                    reason: format!("chip '{other}' is not +1 or -1"),
                }),
            })
            .collect::<Result<Vec<i8>>>()?;
        out.push(ChipSequence::new(chips, kind, index)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub i: usize,
    pub j: usize,
    pub max_abs_raw: i64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub kind: FamilyKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub count: usize,
    pub polynomials: Vec<String>,
    pub worst_case_raw: i64,
    pub worst_case_xcorr: f64,
    pub worst_case_db: f64,
    pub sequences: Vec<Vec<i8>>,
    /// Sequence indices driving each beam, in beam order.
    #[serde(default)]
    pub assigned: Vec<usize>,
    /// Largest periodic cross-correlation magnitude for every unordered pair.
    /// Left empty above `PAIR_SUMMARY_MAX` sequences.
    #[serde(default)]
    pub pairs: Vec<PairSummary>,
}

pub const PAIR_SUMMARY_MAX: usize = 129;

impl FamilyFile {
    pub fn from_family(family: &CodeFamily) -> Self {
        let seqs = &family.sequences;
        let n = family.length;
        let limit = if seqs.len() <= PAIR_SUMMARY_MAX {
            seqs.len()
        } else {
            0
        };
        let pairs = (0..limit)
            .flat_map(|i| (i + 1..limit).map(move |j| (i, j)))
            .map(|(i, j)| {
                let raw = xcorr_profile_raw(seqs[i].chips(), seqs[j].chips())
                    .into_iter()
                    .map(i64::abs)
                    .max()
                    .unwrap_or(0);
                PairSummary {
                    i,
                    j,
                    max_abs_raw: raw,
                    max_abs: raw as f64 / n as f64,
                }
            })
            .collect();
        Self {
            kind: family.kind,
            n,
            count: seqs.len(),
            polynomials: family
                .polynomials
                .iter()
                .map(|p| format!("{p:#x}"))
                .collect(),
            worst_case_raw: family.worst_case_raw,
            worst_case_xcorr: family.worst_case_xcorr,
            worst_case_db: 20.0 * family.worst_case_xcorr.max(1e-300).log10(),
            sequences: seqs.iter().map(|s| s.chips().to_vec()).collect(),
            assigned: Vec::new(),
            pairs,
        }
    }

    pub fn with_assigned(mut self, assigned: Vec<usize>) -> Self {
        self.assigned = assigned;
        self
    }

    /// Beam codes: the assigned sequences, or the first `beams` when none are recorded.
    pub fn beam_codes(&self, beams: usize) -> Result<Vec<ChipSequence>> {
        let idx: Vec<usize> = if self.assigned.is_empty() {
            (0..beams).collect()
        } else {
            self.assigned.clone()
        };
        if idx.len() < beams || idx.iter().any(|&i| i >= self.sequences.len()) {
            return Err(IoError::DimensionMismatch(format!(
                "codes file has {} sequences ({} assigned) for {beams} beams",
                self.sequences.len(),
                self.assigned.len()
            )));
        }
        idx.iter()
            .take(beams)
            .map(|&i| Ok(ChipSequence::new(self.sequences[i].clone(), self.kind, i)?))
            .collect()
    }

    /// Rebuilds the family; the stored worst case must match the sequences.
    pub fn into_family(self) -> Result<CodeFamily> {
        let polys = self
            .polynomials
            .iter()
            .map(|p| {
                u32::from_str_radix(p.trim_start_matches("0x"), 16)
                    .map_err(|_| IoError::DimensionMismatch(format!("bad polynomial '{p}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let seqs = self
            .sequences
            .into_iter()
            .enumerate()
            .map(|(i, c)| ChipSequence::new(c, self.kind, i))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let fam = CodeFamily::from_sequences(self.kind, polys, seqs)?;
        if fam.length != self.n || fam.worst_case_raw != self.worst_case_raw {
            return Err(IoError::DimensionMismatch(format!(
                "family file claims N={} worst={} but sequences give N={} worst={}",
                self.n, self.worst_case_raw, fam.length, fam.worst_case_raw
            )));
        }
        Ok(fam)
    }
}

/// Full periodic correlation profiles of the first few sequences: rows
/// `i,j,shift,raw,normalized` for `i <= j < limit`.
pub fn write_profiles_csv<W: Write>(family: &CodeFamily, limit: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "shift", "raw", "normalized"])?;
    let k = family.sequences.len().min(limit);
    let n = family.length as f64;
    for i in 0..k {
        for j in i..k {
            let prof = xcorr_profile_raw(family.sequences[i].chips(), family.sequences[j].chips());
            for (tau, raw) in prof.iter().enumerate() {
                let norm = *raw as f64 / n;
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    tau.to_string(),
                    raw.to_string(),
                    norm.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

// ---- codebooks ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookFile {
    pub geometry: ArrayGeometry,
    pub partition_kind: PartitionKind,
    pub subsets: Vec<Vec<usize>>,
    pub angles_deg: Vec<f64>,
    pub taper: Taper,
    pub mu_max: f64,
    pub spatial_bound: f64,
    pub codewords: Vec<SphericalCodeword>,
}

impl CodebookFile {
    pub fn new(
        geometry: &ArrayGeometry,
        partition: &SubarrayPartition,
        codebook: &Codebook,
        taper: Taper,
    ) -> Self {
        Self {
            geometry: geometry.clone(),
            partition_kind: partition.kind(),
            subsets: partition.subsets().to_vec(),
            angles_deg: codebook.angles(),
            taper,
            mu_max: codebook.mu_max(),
            spatial_bound: crate::spatial::spatial_bound(partition.m()),
            codewords: codebook.codewords().to_vec(),
        }
    }

    /// Validates and rebuilds geometry, partition and codebook.
    pub fn load(self) -> Result<(ArrayGeometry, SubarrayPartition, Codebook)> {
        ArrayGeometry::new(self.geometry.positions().to_vec())?;
        let total = self.geometry.len();
        let partition = SubarrayPartition::new(self.subsets, self.partition_kind, total)?;
        for cw in &self.codewords {
            if cw.support.len() != cw.weights.len() || cw.support.iter().any(|&e| e >= total) {
                return Err(IoError::DimensionMismatch(format!(
                    "codeword {} support/weights do not fit {total} elements",
                    cw.subarray_index
                )));
            }
        }
        let codebook = Codebook::new(self.codewords, &self.geometry)?;
        Ok((self.geometry, partition, codebook))
    }
}

// ---- captures ----

pub fn format_complex(v: Complex64) -> String {
    format!("{}:{}", v.re, v.im)
}

pub fn parse_complex(cell: &str) -> Option<Complex64> {
    let (re, im) = cell.trim().split_once(':')?;
    Some(Complex64::new(
        re.trim().parse().ok()?,
        im.trim().parse().ok()?,
    ))
}

pub fn write_capture<W: Write>(rx: &ReceivedMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = std::iter::once("theta_deg".to_string())
        .chain((0..rx.n_chips()).map(|k| format!("chip_{k}")))
        .collect();
    w.write_record(&header)?;
    for (theta, row) in rx.theta_grid().iter().zip(rx.rows()) {
        w.write_record(
            std::iter::once(theta.to_string()).chain(row.iter().map(|v| format_complex(*v))),
        )?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

pub fn read_capture<R: Read>(input: R) -> Result<ReceivedMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("theta_deg") {
        return Err(IoError::MalformedCsv {
            line: 1,
            reason: "first column must be theta_deg".into(),
        });
    }
    for (k, name) in header.iter().skip(1).enumerate() {
        if name != format!("chip_{k}") {
            return Err(IoError::MalformedCsv {
                line: 1,
                reason: format!("column {} is '{name}', expected chip_{k}", k + 1),
            });
        }
    }
    let n = header.len().saturating_sub(1);
    if n == 0 {
        return Err(IoError::MalformedCsv {
            line: 1,
            reason: "no chip columns".into(),
        });
    }
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != n + 1 {
            return Err(IoError::MalformedCsv {
                line,
                reason: format!("{} cells, expected {}", rec.len(), n + 1),
            });
        }
        let theta: f64 = rec[0].parse().map_err(|_| IoError::MalformedCsv {
            line,
            reason: format!("theta '{}' is not a number", &rec[0]),
        })?;
        if grid.last().is_some_and(|&last: &f64| theta <= last) {
            return Err(IoError::MalformedCsv {
                line,
                reason: format!("theta {theta} is not increasing"),
            });
        }
        grid.push(theta);
        for (k, cell) in rec.iter().skip(1).enumerate() {
            values.push(parse_complex(cell).ok_or_else(|| IoError::MalformedCsv {
                line,
                reason: format!("chip_{k} cell '{cell}' is not re:im"),
            })?);
        }
    }
    if grid.is_empty() {
        return Err(IoError::MalformedCsv {
            line: 2,
            reason: "no data rows".into(),
        });
    }
    Ok(ReceivedMatrix::new(grid, n, values)?)
}

// ---- decoded patterns ----

/// Decoded magnitude in dB relative to the peak of the beam's clean reference,
/// floored at −60 dB.
pub fn relative_db(value: f64, reference_peak: f64) -> f64 {
    if reference_peak <= 0.0 || value <= 0.0 {
        return -crate::metrics::FLOOR_DB;
    }
    (20.0 * (value / reference_peak).log10()).max(-crate::metrics::FLOOR_DB)
}

/// Long form: `mode,beam,beam_angle_deg,delay,theta_deg,magnitude,magnitude_db`.
pub fn write_decoded_csv<W: Write>(pattern: &DecodedPattern, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mode",
        "beam",
        "beam_angle_deg",
        "delay",
        "theta_deg",
        "magnitude",
        "magnitude_db",
    ])?;
    for (b, per_delay) in pattern.magnitudes.iter().enumerate() {
        let peak = pattern.reference[b].iter().copied().fold(0.0, f64::max);
        for (d, cut) in pattern.delays.iter().zip(per_delay) {
            for (theta, v) in pattern.theta_grid.iter().zip(cut) {
                w.write_record([
                    pattern.mode.to_string(),
                    b.to_string(),
                    pattern.beam_angles[b].to_string(),
                    d.to_string(),
                    theta.to_string(),
                    v.to_string(),
                    relative_db(*v, peak).to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

pub fn write_aoa_csv<W: Write>(estimates: &[(usize, i64, AoaEstimate)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beam", "delay", "matched_beam", "theta_hat_deg", "score"])?;
    for (beam, delay, e) in estimates {
        w.write_record([
            beam.to_string(),
            delay.to_string(),
            e.beam_index.to_string(),
            e.theta_hat_deg.to_string(),
            e.score.to_string(),
        ])?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

// ---- curves ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SllFile {
    pub family: FamilyKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub curve: SllCurve,
    pub variation: VariationStats,
}

pub fn write_sll_csv<W: Write>(curve: &SllCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delay_chips", "sll_db"])?;
    for (d, v) in curve.delays.iter().zip(&curve.sll_db) {
        w.write_record([d.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

pub fn write_bound_csv<W: Write>(curve: &BoundCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "bound_db"])?;
    for (n, v) in curve.n.iter().zip(&curve.bound_db) {
        w.write_record([n.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

pub fn read_bound_csv<R: Read>(input: R) -> Result<Vec<(usize, f64)>> {
    let mut r = csv::Reader::from_reader(input);
    r.records()
        .map(|rec| {
            let rec = rec?;
            let line = line_of(&rec);
            let bad = |what: &str| IoError::MalformedCsv {
                line,
                reason: format!("bad {what}"),
            };
            let n = rec
                .get(0)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("n"))?;
            let v = rec
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("bound_db"))?;
            Ok((n, v))
        })
        .collect()
}

/// Writes `value` to `path` through a CSV writer function.
pub fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(io_err(path))
}
