//! Random and structured state generators.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize_columns, CMatrix};
use crate::pauli::{Pauli, PauliString};
use crate::state::{FixedGate, StateVector};

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn haar_state(n: usize, rng: &mut impl Rng) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidArgument("haar_state needs n ≥ 1".into()));
    }
    let amps = (0..1usize << n).map(|_| complex_normal(rng)).collect();
    let mut s = StateVector::from_amplitudes(n, amps)?;
    s.normalize()?;
    Ok(s)
}

/// Haar-random unitary on `n` qubits: Gram–Schmidt of a Ginibre matrix.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> Result<CMatrix> {
    let d = 1usize << n;
    let g = CMatrix::from_rows(d, (0..d * d).map(|_| complex_normal(rng)).collect())?;
    orthonormalize_columns(&g)
}

/// Finite local-depth circuit state with `blocks` brick blocks and uniform
/// random angles in `[0, 2π)`.
pub fn fldc_state(n: usize, blocks: usize, rng: &mut impl Rng) -> Result<StateVector> {
    fldc_state_with(n, blocks, || rng.random_range(0.0..TAU))
}

/// Same circuit with angles supplied by `angle` (called in gate order).
pub fn fldc_state_with(
    n: usize,
    blocks: usize,
    mut angle: impl FnMut() -> f64,
) -> Result<StateVector> {
    if blocks >= 1 && n < 2 {
        return Err(Error::InvalidArgument("FLDC blocks need n ≥ 2".into()));
    }
    let mut s = StateVector::zero(n)?;
    let mut rot = |s: &mut StateVector, q: usize| -> Result<()> {
        s.apply_fixed_gate(&FixedGate::Rx { qubit: q, angle: angle() })?;
        s.apply_fixed_gate(&FixedGate::Ry { qubit: q, angle: angle() })
    };
    for q in 0..n {
        rot(&mut s, q)?;
    }
    for _ in 0..blocks {
        for q in 0..n {
            let t = (q + 1) % n;
            s.apply_fixed_gate(&FixedGate::Cz { control: q, target: t })?;
            rot(&mut s, q)?;
            rot(&mut s, t)?;
        }
    }
    Ok(s)
}

/// `⊗_n (|0⟩ + e^{iπx_n}|1⟩)/√2`, which is `exp(−iπx_n Z/2)|+⟩` up to a
/// global phase; qubit `n` has Bloch vector `(cos πx_n, sin πx_n, 0)`.
/// Dropping the phase makes `x_n = ±1` give the same amplitudes.
pub fn qubit_embed(x: &[f64]) -> Result<StateVector> {
    if let Some(v) = x.iter().find(|v| !(v.abs() <= 1.0)) {
        return Err(Error::InvalidArgument(format!("feature {v} outside [-1, 1]")));
    }
    let n = x.len();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(1.0, 0.0); 1 << n];
    for (q, &xq) in x.iter().enumerate() {
        let up = Complex64::new(h, 0.0);
        let down = Complex64::from_polar(h, PI * xq);
        let bit = n - 1 - q;
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= if b >> bit & 1 == 0 { up } else { down };
        }
    }
    StateVector::from_amplitudes(n, amps)
}

/// All single-letter strings `P_q` for every qubit.
pub fn single_letter_strings(n: usize, letter: Pauli) -> Result<Vec<PauliString>> {
    (0..n).map(|q| PauliString::single(n, q, letter)).collect()
}
