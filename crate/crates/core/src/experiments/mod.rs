//! Seeded experiment runners and their CSV/JSON artifacts.
//!
//! Every runner is a pure function of its [`ExperimentConfig`]: it returns
//! the file contents in memory and [`emit`] writes them, so reruns can be
//! compared byte for byte.

mod studies;
mod training;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use studies::{
    coeff_table, embedding_spectrum, haar_spectrum, qkm_curse_config, qnn_curse_config,
    run_coeff_stats, run_curse_qkm, run_curse_qnn, run_moment_check, run_spectrum, CoeffRow,
    SpectrumTrial,
};
pub use training::{
    run_qdl, run_sweep, run_wine, sweep_table, trace_rows, train_qdl_grid, train_wine_grid,
    SweepFit, SweepPoint, SweepTable, TrainingRun, SUMMARY_HEADER,
};

use crate::datasets::Connectivity;
use crate::error::{Error, Result};
use crate::qnn::Family;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Qdl,
    Wine,
    CurseQkm,
    CurseQnn,
    CoeffStats,
    Spectrum,
    MomentCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Qdl,
        ExperimentKind::Wine,
        ExperimentKind::CurseQkm,
        ExperimentKind::CurseQnn,
        ExperimentKind::CoeffStats,
        ExperimentKind::Spectrum,
        ExperimentKind::MomentCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Qdl => "qdl",
            ExperimentKind::Wine => "wine",
            ExperimentKind::CurseQkm => "curse-qkm",
            ExperimentKind::CurseQnn => "curse-qnn",
            ExperimentKind::CoeffStats => "coeff-stats",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::MomentCheck => "moment-check",
        }
    }
}

/// Input data for the spectrum experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumData {
    /// Haar states at every size in `n_list`; largest eigenvalue scaling.
    Haar,
    /// Qubit-embedded uniform features; eigenvalue bracket at `θ = 0`.
    Embedding,
}

/// Flat experiment description. Fields a kind does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_qubits: usize,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    /// FLDC block counts `L`; one training grid axis.
    pub blocks: Vec<usize>,
    /// Wine class pair (label +1, label −1).
    pub classes: (u8, u8),
    /// Generator window sizes `S`; one grid axis.
    pub window_sizes: Vec<usize>,
    /// Parameter counts `D`; one grid axis.
    pub depths: Vec<usize>,
    pub connectivity: Connectivity,
    pub family: Family,
    /// Variance of the sampled observable coefficients. `None` picks the
    /// kind's default (1, or `2^S/N` for wine and embedded data).
    pub observable_variance: Option<f64>,
    /// Explicit observable coefficients; overrides the variance.
    pub observable: Option<Vec<f64>>,
    /// `η = η₀|𝒜|/D`. `None` means `η₀ = N`.
    pub eta0: Option<f64>,
    /// `[L, factor]` pairs multiplying `η₀` for that block count.
    pub eta_block_factors: Vec<(usize, f64)>,
    pub steps: usize,
    pub record_every: usize,
    pub shots: Option<u64>,
    pub noise_std: Option<f64>,
    /// Independent circuits and data per grid point.
    pub repeats: usize,
    /// Monte Carlo trials of the curse, spectrum and moment experiments.
    pub trials: usize,
    pub ridge: f64,
    /// Heisenberg evolution time of the target.
    pub target_time: f64,
    /// Dataset sizes of the coefficient statistics.
    pub sizes: Vec<usize>,
    /// Register sizes of the Haar spectrum scan.
    pub n_list: Vec<usize>,
    pub spectrum_data: SpectrumData,
    /// Bracket slack of the eigenvalue bounds.
    pub slack: f64,
    /// Failure probability quoted in bound reports.
    pub delta: f64,
}

impl ExperimentConfig {
    /// Small defaults that finish in seconds to minutes on one core.
    pub fn desk(kind: ExperimentKind) -> ExperimentConfig {
        let base = ExperimentConfig {
            kind,
            n_qubits: 8,
            seed: 1,
            train_size: 40,
            test_size: 40,
            blocks: vec![1],
            classes: (1, 2),
            window_sizes: vec![3],
            depths: vec![160],
            connectivity: Connectivity::Cyclic,
            family: Family::Xyz,
            observable_variance: None,
            observable: None,
            eta0: None,
            eta_block_factors: vec![(8, 10.0)],
            steps: 200,
            record_every: 10,
            shots: None,
            noise_std: None,
            repeats: 1,
            trials: 50,
            ridge: 0.0,
            target_time: 1.0,
            sizes: vec![10, 20, 50, 100, 200, 500, 1000],
            n_list: vec![4, 6, 8],
            spectrum_data: SpectrumData::Haar,
            slack: 0.5,
            delta: 0.2,
        };
        match kind {
            ExperimentKind::Qdl => base,
            ExperimentKind::Wine => ExperimentConfig {
                n_qubits: 13,
                train_size: 20,
                test_size: 20,
                window_sizes: vec![2],
                depths: vec![130],
                connectivity: Connectivity::AllToAll,
                family: Family::Xy,
                ..base
            },
            ExperimentKind::CurseQkm => ExperimentConfig {
                n_qubits: 10,
                train_size: 16,
                test_size: 16,
                ..base
            },
            ExperimentKind::CurseQnn => ExperimentConfig {
                n_qubits: 6,
                train_size: 10,
                test_size: 10,
                window_sizes: vec![2],
                depths: vec![60],
                ..base
            },
            ExperimentKind::CoeffStats => ExperimentConfig {
                window_sizes: vec![1, 2, 3, 4],
                ..base
            },
            ExperimentKind::Spectrum => ExperimentConfig {
                train_size: 12,
                window_sizes: vec![2],
                depths: vec![200],
                trials: 10,
                ..base
            },
            ExperimentKind::MomentCheck => ExperimentConfig {
                n_qubits: 4,
                trials: 10_000,
                ..base
            },
        }
    }

    /// Register sizes and grids of the full-size runs (long jobs).
    pub fn full_scale(kind: ExperimentKind) -> ExperimentConfig {
        let desk = ExperimentConfig::desk(kind);
        match kind {
            ExperimentKind::Qdl => ExperimentConfig {
                n_qubits: 12,
                blocks: vec![0, 1, 2, 4, 8],
                depths: vec![240],
                repeats: 5,
                ..desk
            },
            ExperimentKind::Wine => ExperimentConfig {
                window_sizes: vec![1, 2, 3, 4],
                depths: vec![65, 91, 130, 182, 260],
                train_size: 40,
                test_size: 40,
                repeats: 5,
                ..desk
            },
            ExperimentKind::CoeffStats => ExperimentConfig {
                n_qubits: 12,
                blocks: vec![0, 1, 2, 4, 8],
                ..desk
            },
            ExperimentKind::Spectrum => ExperimentConfig {
                n_list: vec![4, 6, 8, 10, 12],
                ..desk
            },
            ExperimentKind::CurseQkm => ExperimentConfig { trials: 200, ..desk },
            ExperimentKind::CurseQnn => ExperimentConfig { trials: 200, ..desk },
            ExperimentKind::MomentCheck => ExperimentConfig { n_qubits: 6, ..desk },
        }
    }

    pub fn preset(kind: ExperimentKind, full_scale: bool) -> ExperimentConfig {
        if full_scale {
            ExperimentConfig::full_scale(kind)
        } else {
            ExperimentConfig::desk(kind)
        }
    }

    /// Overlays the top-level keys of a JSON object onto this config.
    ///
    /// A run manifest (with a `config` key) is accepted as well.
    pub fn merge_json(&self, overlay: &Value) -> Result<ExperimentConfig> {
        let overlay = match overlay.get("config") {
            Some(c) if overlay.get("files").is_some() => c,
            _ => overlay,
        };
        let Value::Object(map) = overlay else {
            return Err(Error::Parse("config must be a JSON object".into()));
        };
        let mut v = serde_json::to_value(self)?;
        for (k, x) in map {
            v[k] = x.clone();
        }
        let cfg: ExperimentConfig = serde_json::from_value(v)?;
        Ok(cfg)
    }

    /// Applies one `key=value` override; the value is read as JSON and
    /// falls back to a plain string.
    pub fn set(&self, assignment: &str) -> Result<ExperimentConfig> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected KEY=VALUE, got {assignment:?}")))?;
        let key = key.trim().replace('-', "_");
        let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().into()));
        let mut map = serde_json::Map::new();
        map.insert(key, value);
        self.merge_json(&Value::Object(map))
    }

    /// Observable variance with the kind's default filled in.
    pub fn variance_for(&self, s: usize) -> f64 {
        self.observable_variance.unwrap_or(match (self.kind, self.spectrum_data) {
            (ExperimentKind::Wine, _) | (ExperimentKind::Spectrum, SpectrumData::Embedding) => {
                (s as f64).exp2() / self.n_qubits as f64
            }
            _ => 1.0,
        })
    }

    pub fn eta0_for(&self, blocks: usize) -> f64 {
        let base = self.eta0.unwrap_or(self.n_qubits as f64);
        let factor = self
            .eta_block_factors
            .iter()
            .find(|(l, _)| *l == blocks)
            .map_or(1.0, |(_, f)| *f);
        base * factor
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_qubits == 0 {
            return bad("n_qubits must be ≥ 1".into());
        }
        let training = matches!(self.kind, ExperimentKind::Qdl | ExperimentKind::Wine);
        if training && (self.steps == 0 || self.record_every == 0 || self.repeats == 0) {
            return bad("steps, record_every and repeats must be ≥ 1".into());
        }
        if training && (self.blocks.is_empty() || self.window_sizes.is_empty() || self.depths.is_empty()) {
            return bad("blocks, window_sizes and depths must be nonempty".into());
        }
        if let Some(o) = &self.observable {
            if o.len() != self.n_qubits {
                return Err(Error::dim(self.n_qubits, o.len()));
            }
        }
        if self.kind == ExperimentKind::CoeffStats && self.sizes.is_empty() {
            return bad("sizes must be nonempty".into());
        }
        if self.kind == ExperimentKind::Spectrum && self.n_list.is_empty() {
            return bad("n_list must be nonempty".into());
        }
        Ok(())
    }
}

/// In-memory output of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    pub summary: Value,
}

/// Dispatches on `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Qdl => run_qdl(cfg),
        ExperimentKind::Wine => run_wine(cfg),
        ExperimentKind::CurseQkm => run_curse_qkm(cfg),
        ExperimentKind::CurseQnn => run_curse_qnn(cfg),
        ExperimentKind::CoeffStats => run_coeff_stats(cfg),
        ExperimentKind::Spectrum => run_spectrum(cfg),
        ExperimentKind::MomentCheck => run_moment_check(cfg),
    }
}

pub fn version() -> String {
    match option_env!("QNTK_LAB_DESCRIBE") {
        Some(d) => d.to_string(),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub files: Vec<String>,
    pub summary: Value,
}

/// Writes the artifacts, then `manifest.json` last. Returns the paths.
pub fn emit(
    dir: impl AsRef<Path>,
    cfg: &ExperimentConfig,
    artifacts: &Artifacts,
    wall_clock: Duration,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, body) in &artifacts.files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let manifest = RunManifest {
        version: version(),
        config: cfg.clone(),
        seed: cfg.seed,
        wall_clock_seconds: wall_clock.as_secs_f64(),
        files: artifacts.files.iter().map(|(n, _)| n.clone()).collect(),
        summary: artifacts.summary.clone(),
    };
    let path = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, body + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// CSV writer with `{:e}` floats and empty cells for missing values.
pub(crate) struct Csv {
    out: String,
}

pub(crate) enum Cell {
    Int(i64),
    Float(f64),
    Missing,
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Cell {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Cell {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Cell {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Cell {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Cell {
        Cell::Text(v.into())
    }
}

impl Csv {
    pub(crate) fn new(header: &str) -> Csv {
        Csv { out: format!("{header}\n") }
    }

    pub(crate) fn row(&mut self, cells: Vec<Cell>) {
        for (i, c) in cells.into_iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            match c {
                Cell::Int(v) => write!(self.out, "{v}").unwrap(),
                Cell::Float(v) => write!(self.out, "{v:e}").unwrap(),
                Cell::Missing => {}
                Cell::Text(s) => self.out.push_str(&s),
            }
        }
        self.out.push('\n');
    }

    pub(crate) fn finish(self) -> String {
        self.out
    }
}
