//! Quantum datasets: generators, labels, windows and on-disk export.

mod states;
mod target;
mod windows;
mod wine;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use states::{
    fldc_state, fldc_state_with, haar_state, haar_unitary, qubit_embed, single_letter_strings,
};
pub use target::{heisenberg_unitary, label_with_target, BlockUnitary, Target, MAX_TARGET_QUBITS};
pub use windows::{make_windows, Connectivity, WindowAssignment};
pub use wine::{parse_wine, read_wine, split_wine, WineRow, WineSplit, WINE_CSV, WINE_FEATURES};

use crate::error::{Error, Result};
use crate::rng::{self, tags};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn tag(self) -> u64 {
        match self {
            Split::Train => tags::TRAIN,
            Split::Test => tags::TEST,
        }
    }
}

/// How the states of a dataset were produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Haar,
    Fldc { blocks: usize },
    /// Qubit embedding of `x ~ U[−1, 1]^n`.
    UniformEmbedding,
    /// Bundled wine data; `n_qubits` must equal the feature count.
    Wine { classes: (u8, u8) },
    /// States supplied by the caller; cannot be regenerated.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: Generator,
    pub n_qubits: usize,
    pub size: usize,
    pub split: Split,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub states: Vec<StateVector>,
    pub labels: Vec<f64>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Wraps caller-built states.
    pub fn explicit(states: Vec<StateVector>, labels: Vec<f64>, split: Split) -> Result<Dataset> {
        let n = states.first().map_or(0, |s| s.n_qubits());
        if states.len() != labels.len() {
            return Err(Error::dim(states.len(), labels.len()));
        }
        if let Some(s) = states.iter().find(|s| s.n_qubits() != n) {
            return Err(Error::dim(n, s.n_qubits()));
        }
        Ok(Dataset {
            provenance: Provenance {
                generator: Generator::Explicit,
                n_qubits: n,
                size: states.len(),
                split,
                seed: 0,
            },
            states,
            labels,
        })
    }

    /// Generates `size` states. Sample `i` uses its own substream, so the
    /// result does not depend on the worker count. Labels start at zero.
    pub fn generate(
        generator: &Generator,
        n: usize,
        size: usize,
        split: Split,
        seed: u64,
    ) -> Result<Dataset> {
        let provenance = Provenance {
            generator: generator.clone(),
            n_qubits: n,
            size,
            split,
            seed,
        };
        let per_sample = |f: &(dyn Fn(&mut rng::Rng) -> Result<StateVector> + Sync)| {
            (0..size)
                .into_par_iter()
                .map(|i| f(&mut rng::stream(seed, &[split.tag(), i as u64])))
                .collect::<Result<Vec<_>>>()
        };
        let (states, labels) = match generator {
            Generator::Haar => (per_sample(&|r| haar_state(n, r))?, vec![0.0; size]),
            Generator::Fldc { blocks } => {
                (per_sample(&|r| fldc_state(n, *blocks, r))?, vec![0.0; size])
            }
            Generator::UniformEmbedding => (
                per_sample(&|r| {
                    let x: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..=1.0)).collect();
                    qubit_embed(&x)
                })?,
                vec![0.0; size],
            ),
            Generator::Wine { classes } => {
                if n != WINE_FEATURES {
                    return Err(Error::dim(WINE_FEATURES, n));
                }
                let rows = parse_wine(WINE_CSV)?;
                let (train, test) =
                    split_wine(&rows, *classes, size, &mut rng::stream(seed, &[tags::SPLIT]))?;
                let chosen = if split == Split::Train { train } else { test };
                let states = chosen
                    .features
                    .iter()
                    .map(|x| qubit_embed(x))
                    .collect::<Result<Vec<_>>>()?;
                (states, chosen.labels)
            }
            Generator::Explicit => {
                return Err(Error::InvalidArgument(
                    "explicit datasets cannot be generated".into(),
                ))
            }
        };
        Ok(Dataset { states, labels, provenance })
    }

    /// Rebuilds the states (and generator-defined labels) from provenance.
    pub fn regenerate(p: &Provenance) -> Result<Dataset> {
        Dataset::generate(&p.generator, p.n_qubits, p.size, p.split, p.seed)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.provenance.n_qubits
    }

    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Dataset> {
        if labels.len() != self.states.len() {
            return Err(Error::dim(self.states.len(), labels.len()));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Writes `<stem>.json` (manifest) and `<stem>.bin` (statevector blobs).
    pub fn export(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        let blob = dir.join(format!("{stem}.bin"));
        let mut w = BufWriter::new(File::create(&blob).map_err(|e| Error::io(&blob, e))?);
        for s in &self.states {
            s.write_to(&mut w).map_err(|e| Error::io(&blob, e))?;
        }
        w.flush().map_err(|e| Error::io(&blob, e))?;
        let manifest = Manifest {
            provenance: self.provenance.clone(),
            labels: self.labels.clone(),
            blob: format!("{stem}.bin"),
        };
        let path = dir.join(format!("{stem}.json"));
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &manifest)?;
        Ok(())
    }

    pub fn import(dir: impl AsRef<Path>, stem: &str) -> Result<Dataset> {
        let dir = dir.as_ref();
        let path = dir.join(format!("{stem}.json"));
        let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let m: Manifest = serde_json::from_reader(BufReader::new(f))?;
        let blob = dir.join(&m.blob);
        let mut r = BufReader::new(File::open(&blob).map_err(|e| Error::io(&blob, e))?);
        let states = (0..m.provenance.size)
            .map(|_| StateVector::read_from(&mut r))
            .collect::<Result<Vec<_>>>()?;
        if m.labels.len() != states.len() {
            return Err(Error::dim(states.len(), m.labels.len()));
        }
        Ok(Dataset { states, labels: m.labels, provenance: m.provenance })
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    provenance: Provenance,
    labels: Vec<f64>,
    blob: String,
}

/// Class-balanced wine splits, qubit-embedded (13 qubits).
pub fn load_wine(
    path: impl AsRef<Path>,
    classes: (u8, u8),
    per_split: usize,
    rng: &mut impl Rng,
) -> Result<(Dataset, Dataset)> {
    let rows = read_wine(path)?;
    let (train, test) = split_wine(&rows, classes, per_split, rng)?;
    let embed = |s: WineSplit, split| -> Result<Dataset> {
        let states = s.features.iter().map(|x| qubit_embed(x)).collect::<Result<Vec<_>>>()?;
        Dataset::explicit(states, s.labels, split)
    };
    Ok((embed(train, Split::Train)?, embed(test, Split::Test)?))
}
