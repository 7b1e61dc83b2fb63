//! Qubit windows on which variational generators act.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Connectivity {
    /// Contiguous windows on a ring, one per starting qubit.
    Cyclic,
    /// Windows drawn uniformly from all size-`s` subsets.
    AllToAll,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowAssignment {
    pub n_qubits: usize,
    pub size: usize,
    pub connectivity: Connectivity,
    pub windows: Vec<Vec<usize>>,
}

fn check(n: usize, s: usize) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::InvalidArgument(format!(
            "window size {s} outside 1..={n}"
        )));
    }
    Ok(())
}

impl WindowAssignment {
    /// The `n` windows `{q, q+1, …, q+s−1 mod n}`.
    pub fn cyclic(n: usize, s: usize) -> Result<WindowAssignment> {
        check(n, s)?;
        Ok(WindowAssignment {
            n_qubits: n,
            size: s,
            connectivity: Connectivity::Cyclic,
            windows: (0..n).map(|q| (0..s).map(|i| (q + i) % n).collect()).collect(),
        })
    }

    /// `count` windows, each a uniform random `s`-subset (sorted).
    pub fn all_to_all(n: usize, s: usize, count: usize, rng: &mut impl Rng) -> Result<WindowAssignment> {
        check(n, s)?;
        let windows = (0..count)
            .map(|_| {
                let mut w = rand::seq::index::sample(rng, n, s).into_vec();
                w.sort_unstable();
                w
            })
            .collect();
        Ok(WindowAssignment {
            n_qubits: n,
            size: s,
            connectivity: Connectivity::AllToAll,
            windows,
        })
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// Cyclic windows ignore `count` and `rng`; all-to-all draws `count` windows.
pub fn make_windows(
    n: usize,
    s: usize,
    connectivity: Connectivity,
    count: usize,
    rng: &mut impl Rng,
) -> Result<WindowAssignment> {
    match connectivity {
        Connectivity::Cyclic => WindowAssignment::cyclic(n, s),
        Connectivity::AllToAll => WindowAssignment::all_to_all(n, s, count, rng),
    }
}
