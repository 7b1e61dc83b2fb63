//! Target unitaries and label generation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, CMatrix, SymMatrix};
use crate::observable::LocalZObservable;
use crate::state::StateVector;

/// Largest register accepted for the Heisenberg target (`2^n ≤ 4096`).
pub const MAX_TARGET_QUBITS: usize = 12;

/// A unitary that is block diagonal over fixed subsets of basis states.
#[derive(Debug, Clone)]
pub struct BlockUnitary {
    n: usize,
    blocks: Vec<(Vec<usize>, CMatrix)>,
}

impl BlockUnitary {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if s.n_qubits() != self.n {
            return Err(Error::dim(self.n, s.n_qubits()));
        }
        let src = s.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
        for (idx, u) in &self.blocks {
            let local: Vec<Complex64> = idx.iter().map(|&i| src[i]).collect();
            for (&i, v) in idx.iter().zip(u.matvec(&local)?) {
                out[i] = v;
            }
        }
        StateVector::from_amplitudes(self.n, out)
    }

    pub fn to_dense(&self) -> CMatrix {
        let d = 1usize << self.n;
        let mut m = CMatrix::zeros(d);
        for (idx, u) in &self.blocks {
            for (r, &i) in idx.iter().enumerate() {
                for (c, &j) in idx.iter().enumerate() {
                    m[(i, j)] = u[(r, c)];
                }
            }
        }
        m
    }
}

/// Fixed unitary used to generate labels.
#[derive(Debug, Clone)]
pub enum Target {
    Identity(usize),
    Dense(CMatrix),
    Blocks(BlockUnitary),
}

impl Target {
    pub fn n_qubits(&self) -> usize {
        match self {
            Target::Identity(n) => *n,
            Target::Dense(u) => u.dim().trailing_zeros() as usize,
            Target::Blocks(b) => b.n_qubits(),
        }
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if s.n_qubits() != self.n_qubits() {
            return Err(Error::dim(self.n_qubits(), s.n_qubits()));
        }
        match self {
            Target::Identity(_) => Ok(s.clone()),
            Target::Dense(u) => {
                let mut out = s.clone();
                out.apply_unitary(u)?;
                Ok(out)
            }
            Target::Blocks(b) => b.apply(s),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            Target::Identity(n) => CMatrix::identity(1 << n),
            Target::Dense(u) => u.clone(),
            Target::Blocks(b) => b.to_dense(),
        }
    }
}

/// Basis states of each fixed-magnetization sector, in increasing order.
fn weight_sectors(n: usize) -> Vec<Vec<usize>> {
    let mut sectors = vec![Vec::new(); n + 1];
    for b in 0..1usize << n {
        sectors[b.count_ones() as usize].push(b);
    }
    sectors
}

/// `exp(−it Σ_{q<n−1} (X_qX_{q+1} + Y_qY_{q+1} + Z_qZ_{q+1}))`, open chain.
///
/// The chain conserves the number of `1` bits, so each sector is
/// diagonalized on its own.
pub fn heisenberg_unitary(n: usize, t: f64) -> Result<BlockUnitary> {
    if n < 2 {
        return Err(Error::InvalidArgument("Heisenberg chain needs n ≥ 2".into()));
    }
    if n > MAX_TARGET_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "Heisenberg target limited to {MAX_TARGET_QUBITS} qubits, got {n}"
        )));
    }
    let blocks = weight_sectors(n)
        .into_par_iter()
        .map(|idx| {
            let pos = |b: usize| idx.binary_search(&b).expect("sector closed");
            let mut h = SymMatrix::zeros(idx.len());
            for (r, &b) in idx.iter().enumerate() {
                let mut diag = 0.0;
                for q in 0..n - 1 {
                    let pair = 0b11 << (n - 2 - q);
                    let bits = b & pair;
                    if bits == 0 || bits == pair {
                        diag += 1.0;
                    } else {
                        diag -= 1.0;
                        // XX + YY maps |01⟩ ↔ |10⟩ with weight 2.
                        let c = pos(b ^ pair);
                        if c < r {
                            h.set(r, c, 2.0);
                        }
                    }
                }
                h.set(r, r, diag);
            }
            let eig = sym_eig(&h);
            let m = idx.len();
            let mut u = CMatrix::zeros(m);
            for (k, &lambda) in eig.values.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -t * lambda);
                for i in 0..m {
                    let vi = phase * eig.vectors[(i, k)];
                    for j in 0..m {
                        u[(i, j)] += vi * eig.vectors[(j, k)];
                    }
                }
            }
            (idx, u)
        })
        .collect();
    Ok(BlockUnitary { n, blocks })
}

/// `y_a = ⟨ψ_a|U†OU|ψ_a⟩`.
pub fn label_with_target(
    states: &[StateVector],
    target: &Target,
    obs: &LocalZObservable,
) -> Result<Vec<f64>> {
    states
        .par_iter()
        .map(|s| target.apply(s)?.expectation(obs))
        .collect()
}
