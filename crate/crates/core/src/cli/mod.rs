//! Command-line front end. Each subcommand has a `cmd_*` library function that
//! does the work and returns its results; `run` parses arguments, prints the
//! data summary to stdout and maps failures to exit codes.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::codes::{self, CodeError, CodeFamily, FamilyKind};
use crate::config::{ConfigError, ExperimentConfig, PartitionMode};
use crate::io::{self, CodebookFile, FamilyFile, IoError, SllFile};
use crate::metrics::{self, BoundCurve, BoundKind, MetricsError};
use crate::report::{BoundValue, CodebookStats, CurveSummary, FamilyStats, RunReport, VERSION};
use crate::sim::{self, AoaEstimate, DecodeMode, DecodedPattern, SimError};
use crate::spatial::{
    self, grid_geometry, nested_partition, optimize_partition, sparse_partition, ArrayGeometry,
    Codebook, SpatialError, SubarrayPartition,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<CodeError> for CliError {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::NoPreferredPair(n) => {
                CliError::Config(format!("{e}; try `--family gold-like --n {n}`"))
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SpatialError> for CliError {
    fn from(e: SpatialError) -> Self {
        match e {
            SpatialError::Infeasible { .. } | SpatialError::NonDivisible { .. } => {
                CliError::Infeasible(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::MissingM
            | MetricsError::BadM
            | MetricsError::BadLength(_)
            | MetricsError::NotAscending
            | MetricsError::EmptyCurve
            | MetricsError::BadWindow(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Which tabular formats to write; `None` writes both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Outputs(pub Option<Format>);

impl Outputs {
    pub fn csv(&self) -> bool {
        self.0 != Some(Format::Json)
    }

    pub fn json(&self) -> bool {
        self.0 != Some(Format::Csv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Walsh,
    Gold,
    GoldLike,
}

impl From<FamilyArg> for FamilyKind {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Walsh => FamilyKind::Walsh,
            FamilyArg::Gold => FamilyKind::Gold,
            FamilyArg::GoldLike => FamilyKind::GoldLike,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    TemporalOnly,
    SphericalGold,
}

impl From<ModeArg> for DecodeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::TemporalOnly => DecodeMode::TemporalOnly,
            ModeArg::SphericalGold => DecodeMode::SphericalGold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    Nested,
    Sparse,
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Walsh,
    Gold,
    SphericalGold,
}

impl From<BoundArg> for BoundKind {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Walsh => BoundKind::Walsh,
            BoundArg::Gold => BoundKind::Gold,
            BoundArg::SphericalGold => BoundKind::SphericalGold,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "beamcode",
    version,
    about = "Coded multibeam isolation experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a code family with its correlation summary
    Codes(CodesArgs),
    /// Build (and optionally optimize) a subarray codebook
    Codebook(ExperimentArgs),
    /// Run a chip-delay sweep and write decoded patterns, SLL curves and a report
    Sweep(ExperimentArgs),
    /// Decode a θ × N capture matrix against a codes file and a codebook
    DecodeCapture(DecodeArgs),
    /// Nominal isolation bounds versus code length
    Bounds(BoundsArgs),
    /// Summarize a report written by `sweep`
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CodesArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// LFSR degree (gold, gold-like) or log2 N (walsh)
    #[arg(long, alias = "log2n", alias = "degree")]
    pub n: u32,
    /// Gold-like member count [default: 2^n + 1]
    #[arg(long)]
    pub count: Option<usize>,
    /// Sequences whose full correlation profiles go to profiles.csv
    #[arg(long, default_value_t = 4)]
    pub profiles: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Flags mirroring the experiment config. Values from `--config` take precedence.
#[derive(Debug, Args, Default)]
pub struct ExperimentArgs {
    /// TOML config file; its values override the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for the sparse partition, swap search and noise [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Tabular output format [default: both]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Grid rows [default: 16]
    #[arg(long)]
    pub rows: Option<usize>,
    /// Grid columns, along x [default: 8]
    #[arg(long)]
    pub cols: Option<usize>,
    /// Element pitch in wavelengths [default: 0.5]
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Beam angles in degrees, comma separated [default: -35,35]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub angles: Option<Vec<f64>>,
    /// Subarray partition [default: nested]
    #[arg(long, value_enum)]
    pub partition: Option<PartitionArg>,
    /// Elements per subarray [default: elements / beams]
    #[arg(long)]
    pub m: Option<usize>,
    /// Swap proposals for the optimized partition [default: 2000]
    #[arg(long)]
    pub iters: Option<usize>,
    /// Code family [default: gold-like]
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// LFSR degree or log2 N [default: 4]
    #[arg(long, alias = "log2n")]
    pub n: Option<u32>,
    /// First Walsh row assigned to a beam [default: 2]
    #[arg(long)]
    pub walsh_first_row: Option<usize>,
    /// Decoder [default: temporal-only]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Sweep delays in chips, comma separated [default: 0..N-1]
    #[arg(long, value_delimiter = ',')]
    pub delays: Option<Vec<i64>>,
    /// Fixed mainlobe half-width in degrees [default: first null of each beam]
    #[arg(long)]
    pub window: Option<f64>,
    /// Add white noise at this SNR [default: none]
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// θ grid start [default: -75]
    #[arg(long, allow_hyphen_values = true)]
    pub theta_start: Option<f64>,
    /// θ grid stop [default: 75]
    #[arg(long, allow_hyphen_values = true)]
    pub theta_stop: Option<f64>,
    /// θ grid step [default: 0.5]
    #[arg(long)]
    pub theta_step: Option<f64>,
}

fn set<T: Into<toml::Value>>(table: &mut toml::Table, path: &[&str], value: Option<T>) {
    let Some(value) = value else { return };
    let (last, parents) = path.split_last().expect("nonempty path");
    let mut t = table;
    for p in parents {
        t = t
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .expect("section is a table");
    }
    t.insert(last.to_string(), value.into());
}

fn int<T: TryInto<i64>>(v: Option<T>) -> Option<i64> {
    v.and_then(|x| x.try_into().ok())
}

impl ExperimentArgs {
    fn flag_layer(&self) -> toml::Table {
        let mut t = toml::Table::new();
        set(&mut t, &["seed"], int(self.seed));
        set(
            &mut t,
            &["out_dir"],
            self.out_dir
                .as_ref()
                .map(|p| p.to_string_lossy().into_owned()),
        );
        set(&mut t, &["geometry", "rows"], int(self.rows));
        set(&mut t, &["geometry", "cols"], int(self.cols));
        set(&mut t, &["geometry", "spacing"], self.spacing);
        set(&mut t, &["angles_deg"], self.angles.clone());
        set(
            &mut t,
            &["partition", "kind"],
            self.partition.map(|p| match p {
                PartitionArg::Nested => "nested",
                PartitionArg::Sparse => "sparse",
                PartitionArg::Optimized => "optimized",
            }),
        );
        set(&mut t, &["partition", "m"], int(self.m));
        set(&mut t, &["partition", "iters"], int(self.iters));
        set(
            &mut t,
            &["code", "family"],
            self.family.map(|f| FamilyKind::from(f).to_string()),
        );
        set(&mut t, &["code", "n"], int(self.n));
        set(
            &mut t,
            &["code", "walsh_first_row"],
            int(self.walsh_first_row),
        );
        set(
            &mut t,
            &["sweep", "mode"],
            self.mode.map(|m| DecodeMode::from(m).to_string()),
        );
        set(&mut t, &["sweep", "delays"], self.delays.clone());
        if let Some(w) = self.window {
            let mut win = toml::Table::new();
            win.insert("kind".into(), "fixed".into());
            win.insert("deg".into(), w.into());
            set(&mut t, &["sweep", "window"], Some(toml::Value::Table(win)));
        }
        set(&mut t, &["sweep", "snr_db"], self.snr_db);
        set(&mut t, &["theta", "start"], self.theta_start);
        set(&mut t, &["theta", "stop"], self.theta_stop);
        set(&mut t, &["theta", "step"], self.theta_step);
        t
    }

    /// Defaults, then flags, then the config file; validated.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut layers = vec![self.flag_layer()];
        if let Some(path) = &self.config {
            layers.push(ExperimentConfig::read_table(path)?);
        }
        let cfg = ExperimentConfig::layered(&layers)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// θ × N capture CSV
    #[arg(long)]
    pub capture: PathBuf,
    /// Codes file: JSON written by `codes`/`sweep`, or CSV with one beam code per row
    #[arg(long)]
    pub codes: PathBuf,
    /// Codebook JSON written by `codebook`/`sweep`
    #[arg(long)]
    pub codebook: PathBuf,
    #[arg(long, value_enum, default_value = "temporal-only")]
    pub mode: ModeArg,
    /// AoA search half-width in grid steps
    #[arg(long, default_value_t = sim::AOA_MAX_SHIFT)]
    pub max_shift: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Families, comma separated
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "walsh,gold,spherical-gold"
    )]
    pub kinds: Vec<BoundArg>,
    /// Code lengths, comma separated and ascending
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub n: Vec<usize>,
    /// Subarray size, required for spherical-gold
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// report.json, or a directory containing one
    #[arg(default_value = "out")]
    pub path: PathBuf,
}

// ---- codes ----

#[derive(Debug, Clone, Serialize)]
pub struct CodesSummary {
    pub kind: FamilyKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub count: usize,
    pub worst_case_raw: i64,
    pub worst_case_xcorr: f64,
}

pub fn build_family(family: FamilyKind, n: u32, count: Option<usize>) -> Result<CodeFamily> {
    Ok(match family {
        FamilyKind::Walsh => codes::walsh_family(n)?,
        FamilyKind::Gold => codes::gold_family(n)?,
        FamilyKind::GoldLike => {
            let cap = if (1..=16).contains(&n) {
                (1usize << n) + 1
            } else {
                0
            };
            codes::gold_like_family(n, count.unwrap_or(cap))?
        }
        FamilyKind::MSequence => {
            return Err(CliError::Config(
                "m-sequence is not a family; use gold or gold-like".into(),
            ))
        }
    })
}

pub fn cmd_codes(
    family: FamilyKind,
    n: u32,
    count: Option<usize>,
    profiles: usize,
    out_dir: &Path,
    outputs: Outputs,
) -> Result<CodeFamily> {
    let fam = build_family(family, n, count)?;
    if outputs.csv() {
        io::write_with(&out_dir.join("codes.csv"), |w| {
            io::write_family_csv(&fam, w)
        })?;
        io::write_with(&out_dir.join("profiles.csv"), |w| {
            io::write_profiles_csv(&fam, profiles, w)
        })?;
    }
    if outputs.json() {
        io::write_json(&out_dir.join("codes.json"), &FamilyFile::from_family(&fam))?;
    }
    Ok(fam)
}

// ---- codebook ----

#[derive(Debug, Clone)]
pub struct BuiltCodebook {
    pub geometry: ArrayGeometry,
    pub partition: SubarrayPartition,
    pub codebook: Codebook,
    pub stats: CodebookStats,
}

pub fn build_codebook(cfg: &ExperimentConfig) -> Result<BuiltCodebook> {
    let g = &cfg.geometry;
    let geometry = grid_geometry(g.rows, g.cols, g.spacing)?;
    let (j, m) = (cfg.j(), cfg.m());
    let taper = cfg.partition.taper;
    let mut initial_mu = None;
    let mut accepted_swaps = None;
    let (partition, codebook) = match cfg.partition.kind {
        PartitionMode::Nested | PartitionMode::Sparse => {
            let p = if cfg.partition.kind == PartitionMode::Nested {
                nested_partition(&geometry, j)?
            } else {
                sparse_partition(&geometry, j, m, cfg.seed)?
            };
            let cb = Codebook::from_partition(&p, &geometry, &cfg.angles_deg, taper)?;
            (p, cb)
        }
        PartitionMode::Optimized => {
            let out = optimize_partition(
                &geometry,
                &cfg.angles_deg,
                m,
                cfg.partition.iters,
                cfg.seed,
                taper,
            )?;
            initial_mu = Some(out.initial_mu);
            accepted_swaps = Some(out.trace.len() - 1);
            log::info!(
                "swap search: mu {:.4} -> {:.4} after {} proposals",
                out.initial_mu,
                out.codebook.mu_max(),
                out.evaluated
            );
            (out.partition, out.codebook)
        }
    };
    let bound = spatial::spatial_bound(partition.m());
    let stats = CodebookStats {
        j: partition.j(),
        m: partition.m(),
        mu_max: codebook.mu_max(),
        spatial_bound: bound,
        mu_over_bound: codebook.mu_max() / bound,
        initial_mu,
        accepted_swaps,
    };
    Ok(BuiltCodebook {
        geometry,
        partition,
        codebook,
        stats,
    })
}

pub fn cmd_codebook(cfg: &ExperimentConfig) -> Result<BuiltCodebook> {
    cfg.validate()?;
    let built = build_codebook(cfg)?;
    let out = PathBuf::from(&cfg.out_dir);
    let file = CodebookFile::new(
        &built.geometry,
        &built.partition,
        &built.codebook,
        cfg.partition.taper,
    );
    io::write_json(&out.join("codebook.json"), &file)?;
    Ok(built)
}

// ---- sweep ----

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub report: RunReport,
    pub pattern: DecodedPattern,
    pub built: BuiltCodebook,
    pub family: CodeFamily,
}

fn beam_code_indices(cfg: &ExperimentConfig) -> Vec<usize> {
    let first = if cfg.code.family == FamilyKind::Walsh {
        cfg.code.walsh_first_row
    } else {
        0
    };
    (first..first + cfg.j()).collect()
}

pub fn cmd_sweep(cfg: &ExperimentConfig, outputs: Outputs) -> Result<SweepOutput> {
    cfg.validate()?;
    let started = Instant::now();
    let out = PathBuf::from(&cfg.out_dir);
    let built = build_codebook(cfg)?;
    let (family, codes) = cfg.code.build(cfg.j())?;
    let assigned = beam_code_indices(cfg);
    let beams = sim::assign_beams(&built.codebook, &codes)?;
    let grid = cfg.theta_grid();
    let delays = cfg.delays();
    let options = cfg.sweep_options();
    let pattern = sim::delay_sweep_with(
        &beams,
        &built.geometry,
        &grid,
        &delays,
        cfg.sweep.mode,
        &options,
    )?;
    let curves = metrics::all_sll_curves(&pattern, cfg.sweep.window)?;

    io::write_with(&out.join("config.toml"), |w| {
        std::io::Write::write_all(w, cfg.to_toml().as_bytes()).map_err(|source| IoError::Io {
            path: out.join("config.toml"),
            source,
        })
    })?;
    let family_file = FamilyFile::from_family(&family).with_assigned(assigned.clone());
    io::write_json(&out.join("codes.json"), &family_file)?;
    io::write_with(&out.join("codes.csv"), |w| io::write_family_csv(&family, w))?;
    let cb_file = CodebookFile::new(
        &built.geometry,
        &built.partition,
        &built.codebook,
        cfg.partition.taper,
    );
    io::write_json(&out.join("codebook.json"), &cb_file)?;
    for (k, &d) in delays.iter().enumerate() {
        let rx = sim::sweep_capture(&beams, &built.geometry, &grid, d, k, &options)?;
        io::write_with(
            &out.join("captures").join(format!("capture_d{d}.csv")),
            |w| io::write_capture(&rx, w),
        )?;
    }
    if outputs.csv() {
        io::write_with(&out.join("decoded.csv"), |w| {
            io::write_decoded_csv(&pattern, w)
        })?;
    }
    if outputs.json() {
        io::write_json(&out.join("decoded.json"), &pattern)?;
    }

    let mut summaries = Vec::with_capacity(curves.len());
    for c in curves {
        let variation = metrics::variation(&c)?;
        let stem = format!("sll_{}_{}", c.beam_pair.0, c.beam_pair.1);
        if outputs.csv() {
            io::write_with(&out.join(format!("{stem}.csv")), |w| {
                io::write_sll_csv(&c, w)
            })?;
        }
        if outputs.json() {
            let file = SllFile {
                family: family.kind,
                n: family.length,
                m: built.partition.m(),
                curve: c.clone(),
                variation,
            };
            io::write_json(&out.join(format!("{stem}.json")), &file)?;
        }
        summaries.push(CurveSummary {
            curve: c,
            variation,
        });
    }
    let all: Vec<f64> = summaries
        .iter()
        .flat_map(|s| s.curve.sll_db.iter().copied())
        .collect();
    let overall = metrics::variation_of(&all)?;

    let m = built.partition.m();
    let mut bounds = vec![BoundValue {
        kind: family.kind.into(),
        n: family.length,
        m: None,
        bound_db: metrics::theoretical_bound(family.kind.into(), family.length, None)?,
    }];
    bounds.push(BoundValue {
        kind: BoundKind::SphericalGold,
        n: family.length,
        m: Some(m),
        bound_db: metrics::theoretical_bound(BoundKind::SphericalGold, family.length, Some(m))?,
    });

    let report = RunReport {
        tool: "beamcode".into(),
        version: VERSION.into(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        family: FamilyStats::new(&family, assigned),
        codebook: built.stats.clone(),
        curves: summaries,
        overall,
        bounds,
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    io::write_json(&out.join("report.json"), &report)?;
    Ok(SweepOutput {
        report,
        pattern,
        built,
        family,
    })
}

// ---- decode-capture ----

#[derive(Debug, Clone)]
pub struct DecodeOutput {
    pub pattern: DecodedPattern,
    /// Per beam: the delay hypothesis with the strongest cut and its AoA estimate.
    pub aoa: Vec<(usize, i64, AoaEstimate)>,
}

pub fn load_beam_codes(path: &Path, beams: usize) -> Result<Vec<codes::ChipSequence>> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let file: FamilyFile = io::read_json(path)?;
        Ok(file.beam_codes(beams)?)
    } else {
        let seqs = io::read_family_csv(io::open(path)?, FamilyKind::GoldLike)?;
        if seqs.len() < beams {
            return Err(CliError::Data(format!(
                "{}: {} codes for {beams} beams",
                path.display(),
                seqs.len()
            )));
        }
        Ok(seqs.into_iter().take(beams).collect())
    }
}

pub fn cmd_decode_capture(
    capture: &Path,
    codes_path: &Path,
    codebook_path: &Path,
    mode: DecodeMode,
    max_shift: usize,
    out_dir: &Path,
    outputs: Outputs,
) -> Result<DecodeOutput> {
    let rx = io::read_capture(io::open(capture)?)?;
    let cb_file: CodebookFile = io::read_json(codebook_path)?;
    let (geometry, _, codebook) = cb_file.load()?;
    let codes = load_beam_codes(codes_path, codebook.len())?;
    if let Some(c) = codes.iter().find(|c| c.len() != rx.n_chips()) {
        return Err(CliError::Data(format!(
            "capture has {} chips but codes have length {}",
            rx.n_chips(),
            c.len()
        )));
    }
    let beams = sim::assign_beams(&codebook, &codes)?;
    let n = rx.n_chips() as i64;
    let grid = rx.theta_grid().to_vec();
    let magnitudes = (0..beams.len())
        .map(|b| {
            (0..n)
                .map(|h| sim::decode_beam(&rx, &beams, &geometry, b, h, mode))
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let reference = beams
        .iter()
        .map(|b| sim::reference_pattern(&b.codeword, &geometry, &grid, mode))
        .collect();
    let pattern = DecodedPattern {
        mode,
        theta_grid: grid.clone(),
        beam_angles: beams.iter().map(|b| b.beam_angle_deg).collect(),
        delays: (0..n).collect(),
        magnitudes,
        reference,
    };
    let mut aoa = Vec::with_capacity(beams.len());
    for (b, cuts) in pattern.magnitudes.iter().enumerate() {
        let peak = |c: &Vec<f64>| c.iter().copied().fold(0.0, f64::max);
        let best = (0..cuts.len())
            .reduce(|a, k| {
                if peak(&cuts[k]) > peak(&cuts[a]) {
                    k
                } else {
                    a
                }
            })
            .expect("at least one delay");
        let est = sim::aoa_estimate(&cuts[best], &codebook, &geometry, &grid, mode, max_shift)?;
        aoa.push((b, best as i64, est));
    }
    if outputs.csv() {
        io::write_with(&out_dir.join("decoded.csv"), |w| {
            io::write_decoded_csv(&pattern, w)
        })?;
        io::write_with(&out_dir.join("aoa.csv"), |w| io::write_aoa_csv(&aoa, w))?;
    }
    if outputs.json() {
        io::write_json(&out_dir.join("decoded.json"), &pattern)?;
        io::write_json(&out_dir.join("aoa.json"), &aoa)?;
    }
    Ok(DecodeOutput { pattern, aoa })
}

// ---- bounds ----

pub fn cmd_bounds(
    kinds: &[BoundKind],
    n_list: &[usize],
    m: Option<usize>,
    out_dir: &Path,
    outputs: Outputs,
) -> Result<Vec<BoundCurve>> {
    if n_list.is_empty() {
        return Err(CliError::Config(
            "at least one code length is required".into(),
        ));
    }
    if kinds.is_empty() {
        return Err(CliError::Config(
            "at least one bound kind is required".into(),
        ));
    }
    let curves = kinds
        .iter()
        .map(|&k| metrics::bound_curve(k, n_list, m))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    for c in &curves {
        let stem = format!("bounds_{}", c.kind);
        if outputs.csv() {
            io::write_with(&out_dir.join(format!("{stem}.csv")), |w| {
                io::write_bound_csv(c, w)
            })?;
        }
        if outputs.json() {
            io::write_json(&out_dir.join(format!("{stem}.json")), c)?;
        }
    }
    Ok(curves)
}

// ---- report ----

pub fn cmd_report(path: &Path) -> Result<RunReport> {
    let file = if path.is_dir() {
        path.join("report.json")
    } else {
        path.to_path_buf()
    };
    Ok(io::read_json(&file)?)
}

// ---- entry point ----

fn emit_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable"));
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Codes(a) => {
            let fam = cmd_codes(
                a.family.into(),
                a.n,
                a.count,
                a.profiles,
                &a.out_dir,
                Outputs(a.format),
            )?;
            emit_json(&CodesSummary {
                kind: fam.kind,
                n: fam.length,
                count: fam.len(),
                worst_case_raw: fam.worst_case_raw,
                worst_case_xcorr: fam.worst_case_xcorr,
            });
        }
        Command::Codebook(a) => {
            let built = cmd_codebook(&a.resolve()?)?;
            emit_json(&built.stats);
        }
        Command::Sweep(a) => {
            let out = cmd_sweep(&a.resolve()?, Outputs(a.format))?;
            print_report(&out.report);
        }
        Command::DecodeCapture(a) => {
            let out = cmd_decode_capture(
                &a.capture,
                &a.codes,
                &a.codebook,
                a.mode.into(),
                a.max_shift,
                &a.out_dir,
                Outputs(a.format),
            )?;
            println!("beam,delay,matched_beam,theta_hat_deg,score");
            for (b, d, e) in &out.aoa {
                println!("{b},{d},{},{},{}", e.beam_index, e.theta_hat_deg, e.score);
            }
        }
        Command::Bounds(a) => {
            let kinds: Vec<BoundKind> = a.kinds.iter().map(|&k| k.into()).collect();
            let curves = cmd_bounds(&kinds, &a.n, a.m, &a.out_dir, Outputs(a.format))?;
            println!("kind,n,bound_db");
            for c in &curves {
                for (n, v) in c.n.iter().zip(&c.bound_db) {
                    println!("{},{n},{v}", c.kind);
                }
            }
        }
        Command::Report(a) => print_report(&cmd_report(&a.path)?),
    }
    Ok(())
}

fn print_report(r: &RunReport) {
    println!("beam,other,min_db,max_db,range_db,half_range_db");
    for s in &r.curves {
        let v = &s.variation;
        println!(
            "{},{},{:.3},{:.3},{:.3},{:.3}",
            s.curve.beam_pair.0,
            s.curve.beam_pair.1,
            v.min_db,
            v.max_db,
            v.range_db,
            v.half_range_db
        );
    }
    log::info!(
        "{} N={} worst {:.4}; mu_max {:.4} (1/sqrt(m) = {:.4}); config {}",
        r.family.kind,
        r.family.n,
        r.family.worst_case_xcorr,
        r.codebook.mu_max,
        r.codebook.spatial_bound,
        r.config_hash
    );
}

/// Parses `args` (including the program name) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_become_config() {
        let cli = Cli::try_parse_from([
            "beamcode",
            "sweep",
            "--angles",
            "-35,-15,15,35",
            "--rows",
            "16",
            "--cols",
            "16",
            "--family",
            "walsh",
            "--n",
            "4",
            "--mode",
            "spherical-gold",
        ])
        .unwrap();
        let Command::Sweep(a) = cli.command else {
            panic!()
        };
        let cfg = a.resolve().unwrap();
        assert_eq!(cfg.angles_deg, vec![-35.0, -15.0, 15.0, 35.0]);
        assert_eq!(cfg.total(), 256);
        assert_eq!(cfg.code.family, FamilyKind::Walsh);
        assert_eq!(cfg.sweep.mode, DecodeMode::SphericalGold);
    }

    #[test]
    fn config_file_wins_over_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 9\n[code]\nn = 5\nfamily = \"gold\"\n").unwrap();
        let args = ExperimentArgs {
            config: Some(path),
            seed: Some(3),
            rows: Some(8),
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.geometry.rows, 8);
        assert_eq!(cfg.code.n, 5);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["beamcode", "bounds"]), EXIT_CONFIG);
        assert_eq!(run(["beamcode", "--help"]), EXIT_OK);
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(
            run([
                "beamcode",
                "codes",
                "--family",
                "gold",
                "--n",
                "4",
                "--out-dir",
                out
            ]),
            EXIT_CONFIG
        );
        assert_eq!(
            run([
                "beamcode",
                "codebook",
                "--partition",
                "sparse",
                "--m",
                "100",
                "--out-dir",
                out
            ]),
            EXIT_INFEASIBLE
        );
        let missing = dir.path().join("nope.csv");
        assert_eq!(
            run([
                "beamcode",
                "decode-capture",
                "--capture",
                missing.to_str().unwrap(),
                "--codes",
                "x.json",
                "--codebook",
                "y.json",
            ]),
            EXIT_DATA
        );
    }

    #[test]
    fn infeasible_maps_to_four() {
        let e: CliError = SpatialError::Infeasible {
            total: 4,
            j: 2,
            m: 3,
        }
        .into();
        assert_eq!(e.exit_code(), EXIT_INFEASIBLE);
    }
}
