//! The UCI wine recognition data.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Bundled copy of the 178-row UCI file (class, then 13 features).
pub const WINE_CSV: &str = include_str!("../../data/wine.data");

pub const WINE_FEATURES: usize = 13;

#[derive(Debug, Clone, PartialEq)]
pub struct WineRow {
    pub class: u8,
    pub features: [f64; WINE_FEATURES],
}

/// Rescaled feature vectors with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct WineSplit {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

pub fn parse_wine(text: &str) -> Result<Vec<WineRow>> {
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("wine line {}: {what}", line_no + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != WINE_FEATURES + 1 {
            return Err(bad(&format!("expected 14 fields, got {}", fields.len())));
        }
        let class: u8 = fields[0].parse().map_err(|_| bad("bad class"))?;
        if !(1..=3).contains(&class) {
            return Err(bad("class outside 1..=3"));
        }
        let mut features = [0.0; WINE_FEATURES];
        for (f, s) in features.iter_mut().zip(&fields[1..]) {
            *f = s.parse::<f64>().map_err(|_| bad(&format!("bad number {s:?}")))?;
            if !f.is_finite() {
                return Err(bad("non-finite feature"));
            }
        }
        rows.push(WineRow { class, features });
    }
    Ok(rows)
}

pub fn read_wine(path: impl AsRef<Path>) -> Result<Vec<WineRow>> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path, e))?;
    parse_wine(&text)
}

/// Keeps `classes.0` (label +1) and `classes.1` (label −1), min-max scales
/// each feature to `[−1, 1]` over the kept rows, and draws disjoint
/// class-balanced train and test splits of `per_split` rows each.
pub fn split_wine(
    rows: &[WineRow],
    classes: (u8, u8),
    per_split: usize,
    rng: &mut impl Rng,
) -> Result<(WineSplit, WineSplit)> {
    if classes.0 == classes.1 {
        return Err(Error::InvalidArgument("class pair must be distinct".into()));
    }
    if per_split == 0 || !per_split.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "per_split {per_split} must be positive and even"
        )));
    }
    let kept: Vec<&WineRow> = rows
        .iter()
        .filter(|r| r.class == classes.0 || r.class == classes.1)
        .collect();

    let mut lo = [f64::INFINITY; WINE_FEATURES];
    let mut hi = [f64::NEG_INFINITY; WINE_FEATURES];
    for r in &kept {
        for j in 0..WINE_FEATURES {
            lo[j] = lo[j].min(r.features[j]);
            hi[j] = hi[j].max(r.features[j]);
        }
    }
    let scale = |r: &WineRow| -> Vec<f64> {
        (0..WINE_FEATURES)
            .map(|j| {
                let span = hi[j] - lo[j];
                if span > 0.0 {
                    (2.0 * (r.features[j] - lo[j]) / span - 1.0).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    };

    let half = per_split / 2;
    let mut train = WineSplit { features: Vec::new(), labels: Vec::new() };
    let mut test = WineSplit { features: Vec::new(), labels: Vec::new() };
    for (class, label) in [(classes.0, 1.0), (classes.1, -1.0)] {
        let mut members: Vec<&WineRow> = kept.iter().copied().filter(|r| r.class == class).collect();
        if members.len() < 2 * half {
            return Err(Error::InvalidArgument(format!(
                "class {class} has {} rows, need {}",
                members.len(),
                2 * half
            )));
        }
        members.shuffle(rng);
        for (i, r) in members.iter().take(2 * half).enumerate() {
            let split = if i < half { &mut train } else { &mut test };
            split.features.push(scale(r));
            split.labels.push(label);
        }
    }
    Ok((train, test))
}
