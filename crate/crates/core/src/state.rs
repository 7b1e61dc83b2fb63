//! Dense statevector simulation.
//!
//! Amplitude order: qubit 0 is the most significant bit of the basis index,
//! matching the left-to-right order of Pauli text. Pauli strings act by an
//! index permutation plus a per-amplitude phase, so no `2^N × 2^N` matrix is
//! ever formed. Norm drift is never corrected silently.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::observable::LocalZObservable;
use crate::pauli::{Pauli, PauliString};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest register the simulator will allocate.
pub const MAX_SIM_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Fixed (non-trainable) gates used by state preparation and `W_d` pre-gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum FixedGate {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Cz { control: usize, target: usize },
}

impl FixedGate {
    pub fn inverse(&self) -> FixedGate {
        match *self {
            FixedGate::Rx { qubit, angle } => FixedGate::Rx { qubit, angle: -angle },
            FixedGate::Ry { qubit, angle } => FixedGate::Ry { qubit, angle: -angle },
            cz @ FixedGate::Cz { .. } => cz,
        }
    }
}

#[inline]
fn parity_sign(x: usize) -> f64 {
    if x.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

impl StateVector {
    fn check_n(n: usize) -> Result<()> {
        if n == 0 || n > MAX_SIM_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count {n} outside 1..={MAX_SIM_QUBITS}"
            )));
        }
        Ok(())
    }

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<StateVector> {
        StateVector::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<StateVector> {
        StateVector::check_n(n)?;
        if index >= 1 << n {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Ok(StateVector { n, amps })
    }

    /// Wraps raw amplitudes. The vector is not normalized.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<StateVector> {
        StateVector::check_n(n)?;
        if amps.len() != 1 << n {
            return Err(Error::dim(1 << n, amps.len()));
        }
        Ok(StateVector { n, amps })
    }

    /// Tensor product `self ⊗ other` (self holds the leading qubits).
    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector::from_amplitudes(self.n + other.n, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Divides by the norm. Only generators call this, explicitly.
    pub fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::Undefined("cannot normalize a zero vector".into()));
        }
        for z in &mut self.amps {
            *z /= nrm;
        }
        Ok(())
    }

    fn check_pauli(&self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(Error::dim(self.n, p.n_qubits()));
        }
        Ok(())
    }

    fn check_same(&self, other: &StateVector) -> Result<()> {
        if other.n != self.n {
            return Err(Error::dim(self.n, other.n));
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::IndexOutOfRange {
                index: q,
                len: self.n,
            });
        }
        Ok(())
    }

    /// `|s⟩ ← σ_p |s⟩`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check_pauli(p)?;
        let (x, z) = (p.x_mask(), p.z_mask());
        let ph = i_pow(p.y_count());
        if x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= ph * parity_sign(b & z);
            }
            return Ok(());
        }
        for j in 0..self.amps.len() {
            let k = j ^ x;
            if j < k {
                let (aj, ak) = (self.amps[j], self.amps[k]);
                // σ|b⟩ = ph (−1)^{|b∧z|} |b⊕x⟩
                self.amps[k] = ph * parity_sign(j & z) * aj;
                self.amps[j] = ph * parity_sign(k & z) * ak;
            }
        }
        Ok(())
    }

    /// `|s⟩ ← exp(−i·angle·σ_h/2) |s⟩ = cos(angle/2)|s⟩ − i sin(angle/2) σ_h|s⟩`.
    pub fn apply_pauli_rotation(&mut self, h: &PauliString, angle: f64) -> Result<()> {
        self.check_pauli(h)?;
        let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        let (x, z) = (h.x_mask(), h.z_mask());
        let mis = -I * s * i_pow(h.y_count());
        if x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= c + mis * parity_sign(b & z);
            }
            return Ok(());
        }
        for j in 0..self.amps.len() {
            let k = j ^ x;
            if j < k {
                let (aj, ak) = (self.amps[j], self.amps[k]);
                self.amps[j] = c * aj + mis * parity_sign(k & z) * ak;
                self.amps[k] = c * ak + mis * parity_sign(j & z) * aj;
            }
        }
        Ok(())
    }

    pub fn apply_fixed_gate(&mut self, gate: &FixedGate) -> Result<()> {
        match *gate {
            FixedGate::Rx { qubit, angle } => {
                self.check_qubit(qubit)?;
                let p = PauliString::single(self.n, qubit, Pauli::X)?;
                self.apply_pauli_rotation(&p, angle)
            }
            FixedGate::Ry { qubit, angle } => {
                self.check_qubit(qubit)?;
                let p = PauliString::single(self.n, qubit, Pauli::Y)?;
                self.apply_pauli_rotation(&p, angle)
            }
            FixedGate::Cz { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(Error::InvalidArgument(
                        "CZ control equals target".into(),
                    ));
                }
                let mask = (1usize << (self.n - 1 - control)) | (1usize << (self.n - 1 - target));
                for (b, a) in self.amps.iter_mut().enumerate() {
                    if b & mask == mask {
                        *a = -*a;
                    }
                }
                Ok(())
            }
        }
    }

    /// `|s⟩ ← U|s⟩` for a dense unitary.
    pub fn apply_unitary(&mut self, u: &CMatrix) -> Result<()> {
        self.amps = u.matvec(&self.amps)?;
        Ok(())
    }

    /// `⟨Z_k⟩` for every qubit, by signed probability sums.
    pub fn z_expectations(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (b, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            for (k, o) in out.iter_mut().enumerate() {
                if b >> (self.n - 1 - k) & 1 == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        out
    }

    /// `⟨s|O|s⟩ = Σ_k o_k ⟨Z_k⟩`.
    pub fn expectation(&self, obs: &LocalZObservable) -> Result<f64> {
        if obs.n_qubits() != self.n {
            return Err(Error::dim(self.n, obs.n_qubits()));
        }
        Ok(self
            .z_expectations()
            .iter()
            .zip(obs.coeffs())
            .map(|(z, o)| z * o)
            .sum())
    }

    /// `|s⟩ ← O|s⟩` (O is diagonal in the computational basis).
    pub fn apply_observable(&mut self, obs: &LocalZObservable) -> Result<()> {
        if obs.n_qubits() != self.n {
            return Err(Error::dim(self.n, obs.n_qubits()));
        }
        let diag = obs.diagonal();
        for (a, d) in self.amps.iter_mut().zip(diag) {
            *a *= d;
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `⟨self|σ_p|other⟩` without allocating.
    pub fn pauli_matrix_element(&self, p: &PauliString, other: &StateVector) -> Result<Complex64> {
        self.check_pauli(p)?;
        self.check_same(other)?;
        let (x, z) = (p.x_mask(), p.z_mask());
        let ph = i_pow(p.y_count());
        let mut acc = ZERO;
        for (b, a) in other.amps.iter().enumerate() {
            // σ|b⟩ = ph (−1)^{|b∧z|} |b⊕x⟩
            let amp = self.amps[b ^ x].conj() * a;
            if parity_sign(b & z) > 0.0 {
                acc += amp;
            } else {
                acc -= amp;
            }
        }
        Ok(ph * acc)
    }

    /// `|⟨a|b⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `Tr[ρ σ_p] = ⟨s|σ_p|s⟩`.
    pub fn pauli_coefficient(&self, p: &PauliString) -> Result<f64> {
        Ok(self.pauli_matrix_element(p, self)?.re)
    }

    /// Writes the binary dump: little-endian `u32` qubit count, then
    /// interleaved `(re, im)` `f64` pairs.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(&(self.n as u32).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<StateVector> {
        let io = |e| Error::Parse(format!("state dump: {e}"));
        let mut head = [0u8; 4];
        r.read_exact(&mut head).map_err(io)?;
        let n = u32::from_le_bytes(head) as usize;
        StateVector::check_n(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        let mut buf = [0u8; 16];
        for _ in 0..1usize << n {
            r.read_exact(&mut buf).map_err(io)?;
            let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
            amps.push(Complex64::new(re, im));
        }
        StateVector::from_amplitudes(n, amps)
    }
}
