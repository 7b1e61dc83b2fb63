//! Variational circuits: forward pass, exact Jacobian and the tangent kernel.

mod frozen;
mod train;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use frozen::{curse_experiment_qnn, frozen_kernel_predict, AnsatzSpec, QnnCurseConfig};
pub use train::{
    train_gd, LearningRate, TraceRecord, TrainConfig, TrainingTrace, TRACE_HEADER,
};

use crate::datasets::{Connectivity, WindowAssignment};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::observable::LocalZObservable;
use crate::pauli::{Pauli, PauliString};
use crate::state::{FixedGate, StateVector};

/// Letters a generator may use on each qubit of its window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `{X, Y, Z}^⊗S`.
    Xyz,
    /// `{X, Y}^⊗S`.
    Xy,
}

impl Family {
    pub fn letters(self) -> &'static [Pauli] {
        match self {
            Family::Xyz => &[Pauli::X, Pauli::Y, Pauli::Z],
            Family::Xy => &[Pauli::X, Pauli::Y],
        }
    }
}

/// One trainable gate `exp(−iθ_d H_d/2) W_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub window: Vec<usize>,
    pub generator: PauliString,
    /// Fixed gates applied (in order) before the rotation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pre_gates: Vec<FixedGate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    pub n_qubits: usize,
    pub family: Family,
    pub gates: Vec<Gate>,
}

impl Ansatz {
    pub fn new(n_qubits: usize, family: Family, gates: Vec<Gate>) -> Result<Ansatz> {
        if gates.is_empty() {
            return Err(Error::InvalidArgument("ansatz needs at least one gate".into()));
        }
        for g in &gates {
            if g.generator.n_qubits() != n_qubits {
                return Err(Error::dim(n_qubits, g.generator.n_qubits()));
            }
            let mut support = g.generator.support();
            let mut window = g.window.clone();
            support.sort_unstable();
            window.sort_unstable();
            if support != window {
                return Err(Error::InvalidArgument(format!(
                    "generator {} is not supported exactly on window {:?}",
                    g.generator, g.window
                )));
            }
            if g.generator.letters().any(|l| l != Pauli::I && !family.letters().contains(&l)) {
                return Err(Error::InvalidArgument(format!(
                    "generator {} outside the {family:?} family",
                    g.generator
                )));
            }
        }
        Ok(Ansatz { n_qubits, family, gates })
    }

    /// Number of trainable parameters `D`.
    pub fn depth(&self) -> usize {
        self.gates.len()
    }

    fn check(&self, theta: &[f64], state: &StateVector) -> Result<()> {
        if theta.len() != self.depth() {
            return Err(Error::dim(self.depth(), theta.len()));
        }
        if state.n_qubits() != self.n_qubits {
            return Err(Error::dim(self.n_qubits, state.n_qubits()));
        }
        Ok(())
    }

    /// `V(θ)|ψ⟩`, gates applied in order `d = 1…D`.
    pub fn apply(&self, theta: &[f64], state: &StateVector) -> Result<StateVector> {
        self.check(theta, state)?;
        let mut s = state.clone();
        for (g, &t) in self.gates.iter().zip(theta) {
            for w in &g.pre_gates {
                s.apply_fixed_gate(w)?;
            }
            s.apply_pauli_rotation(&g.generator, t)?;
        }
        Ok(s)
    }
}

/// Draws generators uniformly from `family` on each window.
///
/// Gate `d` uses window `d mod |Q|`, so a cyclic assignment is laid out
/// layer by layer; a depth that is not a multiple of `|Q|` leaves the last
/// layer partial. For all-to-all assignments pass one window per gate.
pub fn sample_ansatz(
    d_total: usize,
    windows: &WindowAssignment,
    family: Family,
    rng: &mut impl Rng,
) -> Result<Ansatz> {
    if d_total == 0 {
        return Err(Error::InvalidArgument("D must be ≥ 1".into()));
    }
    if windows.is_empty() {
        return Err(Error::InvalidArgument("no windows".into()));
    }
    if windows.connectivity == Connectivity::AllToAll && windows.len() < d_total {
        log::warn!(
            "all-to-all assignment has {} windows for {d_total} gates; windows are reused",
            windows.len()
        );
    }
    let n = windows.n_qubits;
    let letters = family.letters();
    let gates = (0..d_total)
        .map(|d| {
            let window = windows.windows[d % windows.len()].clone();
            let mut h = PauliString::identity(n)?;
            for &q in &window {
                h.set(q, letters[rng.random_range(0..letters.len())]);
            }
            Ok(Gate { window, generator: h, pre_gates: Vec::new() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ansatz::new(n, family, gates)
}

/// `z = ⟨ψ|V(θ)† O V(θ)|ψ⟩`.
pub fn forward(
    ansatz: &Ansatz,
    theta: &[f64],
    state: &StateVector,
    obs: &LocalZObservable,
) -> Result<f64> {
    ansatz.apply(theta, state)?.expectation(obs)
}

/// Model outputs over a set of states.
pub fn outputs(
    ansatz: &Ansatz,
    theta: &[f64],
    states: &[StateVector],
    obs: &LocalZObservable,
) -> Result<Vec<f64>> {
    states.par_iter().map(|s| forward(ansatz, theta, s, obs)).collect()
}

fn undo_gate(g: &Gate, theta: f64, s: &mut StateVector) -> Result<()> {
    s.apply_pauli_rotation(&g.generator, -theta)?;
    for w in g.pre_gates.iter().rev() {
        s.apply_fixed_gate(&w.inverse())?;
    }
    Ok(())
}

/// Exact gradient `∂z/∂θ_d` for one input, plus the output `z`.
///
/// Adjoint sweep: with `|φ⟩ = V|ψ⟩` and `|λ⟩ = O|φ⟩`, walking back from
/// the last gate, `∂z/∂θ_d = Im⟨λ|H_d|φ⟩` before gate `d` is undone on both.
pub fn gradient(
    ansatz: &Ansatz,
    theta: &[f64],
    state: &StateVector,
    obs: &LocalZObservable,
) -> Result<(Vec<f64>, f64)> {
    if obs.n_qubits() != ansatz.n_qubits {
        return Err(Error::dim(ansatz.n_qubits, obs.n_qubits()));
    }
    let mut phi = ansatz.apply(theta, state)?;
    let mut lambda = phi.clone();
    lambda.apply_observable(obs)?;
    let z = phi.inner(&lambda)?.re;
    let mut grad = vec![0.0; ansatz.depth()];
    for d in (0..ansatz.depth()).rev() {
        let g = &ansatz.gates[d];
        grad[d] = lambda.pauli_matrix_element(&g.generator, &phi)?.im;
        if d > 0 {
            undo_gate(g, theta[d], &mut phi)?;
            undo_gate(g, theta[d], &mut lambda)?;
        }
    }
    Ok((grad, z))
}

/// `D × |𝒜|` Jacobian (column per sample) and the outputs.
pub fn jacobian(
    ansatz: &Ansatz,
    theta: &[f64],
    states: &[StateVector],
    obs: &LocalZObservable,
) -> Result<(Matrix, Vec<f64>)> {
    let cols = states
        .par_iter()
        .map(|s| gradient(ansatz, theta, s, obs))
        .collect::<Result<Vec<_>>>()?;
    let d = ansatz.depth();
    let j = Matrix::from_fn(d, states.len(), |r, c| cols[c].0[r]);
    Ok((j, cols.into_iter().map(|c| c.1).collect()))
}

/// `K = JᵀJ / D`.
pub fn qntk(j: &Matrix) -> Result<SymMatrix> {
    if j.rows() == 0 || j.cols() == 0 {
        return Err(Error::InvalidArgument("empty Jacobian".into()));
    }
    Ok(j.gram(j.rows() as f64))
}

/// `Kᵀ_{BA} = J_Bᵀ J_A / D` (rows index `ℬ`).
pub fn qntk_cross(j_test: &Matrix, j_train: &Matrix) -> Result<Matrix> {
    if j_test.rows() != j_train.rows() {
        return Err(Error::dim(j_train.rows(), j_test.rows()));
    }
    let d = j_train.rows() as f64;
    Ok(Matrix::from_fn(j_test.cols(), j_train.cols(), |b, a| {
        (0..j_train.rows()).map(|r| j_test[(r, b)] * j_train[(r, a)]).sum::<f64>() / d
    }))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::datasets::haar_state;
    use crate::linalg::sym_eig;
    use crate::rng;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn single(letter: &str) -> Ansatz {
        let h: PauliString = letter.parse().unwrap();
        Ansatz::new(1, Family::Xyz, vec![Gate { window: vec![0], generator: h, pre_gates: vec![] }])
            .unwrap()
    }

    fn plus_i() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_amplitudes(1, vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)]).unwrap()
    }

    fn z1() -> LocalZObservable {
        LocalZObservable::new(vec![1.0]).unwrap()
    }

    pub(crate) fn random_instance(n: usize, d: usize, seed: u64) -> (Ansatz, Vec<f64>, Vec<StateVector>, LocalZObservable) {
        let mut r = rng::stream(seed, &[]);
        let mut gates = Vec::new();
        while gates.len() < d {
            let s = r.random_range(1..=3usize);
            let w = WindowAssignment::all_to_all(n, s, 1, &mut r).unwrap();
            let a = sample_ansatz(1, &w, Family::Xyz, &mut r).unwrap();
            gates.extend(a.gates);
        }
        let ansatz = Ansatz::new(n, Family::Xyz, gates).unwrap();
        let theta: Vec<f64> = (0..d).map(|_| r.random_range(-PI..PI)).collect();
        let states: Vec<StateVector> = (0..3).map(|_| haar_state(n, &mut r).unwrap()).collect();
        let obs = LocalZObservable::sample(n, 1.0, &mut r).unwrap();
        (ansatz, theta, states, obs)
    }

    fn finite_difference(a: &Ansatz, theta: &[f64], s: &StateVector, o: &LocalZObservable, h: f64) -> Vec<f64> {
        (0..theta.len())
            .map(|d| {
                let mut p = theta.to_vec();
                let mut m = theta.to_vec();
                p[d] += h;
                m[d] -= h;
                (forward(a, &p, s, o).unwrap() - forward(a, &m, s, o).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn forward_examples() {
        let n = 3;
        let w = WindowAssignment::cyclic(n, 2).unwrap();
        let a = sample_ansatz(6, &w, Family::Xyz, &mut rng::stream(1, &[])).unwrap();
        let o = LocalZObservable::new(vec![0.5, -1.0, 2.0]).unwrap();
        let z = forward(&a, &[0.0; 6], &StateVector::zero(n).unwrap(), &o).unwrap();
        assert!((z - 1.5).abs() < 1e-12);

        let x = single("X");
        for t in [0.0, 0.3, 1.7, -2.9] {
            let z = forward(&x, &[t], &StateVector::zero(1).unwrap(), &z1()).unwrap();
            assert!((z - t.cos()).abs() < 1e-12);
            let zp = forward(&x, &[t + 2.0 * PI], &StateVector::zero(1).unwrap(), &z1()).unwrap();
            assert!((z - zp).abs() < 1e-12);
        }
        assert!(forward(&x, &[0.0, 1.0], &StateVector::zero(1).unwrap(), &z1()).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let x = single("X");
        let (j, _) = jacobian(&x, &[0.0], &[plus_i()], &z1()).unwrap();
        // z(θ) = sin θ on |+i⟩; central difference as oracle.
        let fd = finite_difference(&x, &[0.0], &plus_i(), &z1(), 1e-5);
        assert!((j[(0, 0)] - fd[0]).abs() < 1e-9);
        assert!((j[(0, 0)] - 1.0).abs() < 1e-12);
        let (j0, _) = jacobian(&x, &[0.0], &[StateVector::zero(1).unwrap()], &z1()).unwrap();
        assert!(j0[(0, 0)].abs() < 1e-15);

        let k = qntk(&j).unwrap();
        assert!((k.get(0, 0) - 1.0).abs() < 1e-12);
        assert_eq!(qntk(&Matrix::zeros(3, 2)).unwrap(), SymMatrix::zeros(2));
        assert!(qntk(&Matrix::zeros(0, 2)).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for seed in 0..3 {
            let (a, theta, states, o) = random_instance(6, 24, seed);
            let (j, z) = jacobian(&a, &theta, &states, &o).unwrap();
            for (c, s) in states.iter().enumerate() {
                let fd = finite_difference(&a, &theta, s, &o, 1e-5);
                for d in 0..24 {
                    assert!((j[(d, c)] - fd[d]).abs() < 1e-6, "seed {seed} d {d}");
                }
                assert!((z[c] - forward(&a, &theta, s, &o).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pre_gates_are_respected() {
        let mut r = rng::stream(4, &[]);
        let (mut a, theta, states, o) = random_instance(4, 8, 11);
        for g in &mut a.gates {
            g.pre_gates = vec![
                FixedGate::Ry { qubit: r.random_range(0..4), angle: r.random_range(-PI..PI) },
                FixedGate::Cz { control: 0, target: 3 },
            ];
        }
        let (j, _) = jacobian(&a, &theta, &states, &o).unwrap();
        let fd = finite_difference(&a, &theta, &states[0], &o, 1e-5);
        for d in 0..8 {
            assert!((j[(d, 0)] - fd[d]).abs() < 1e-6);
        }
    }

    #[test]
    fn qntk_is_psd() {
        let (a, theta, states, o) = random_instance(5, 10, 3);
        let (j, _) = jacobian(&a, &theta, &states, &o).unwrap();
        let k = qntk(&j).unwrap();
        assert!(sym_eig(&k).min() >= -1e-12);
        let kx = qntk_cross(&j, &j).unwrap();
        for i in 0..3 {
            for l in 0..3 {
                assert!((kx[(i, l)] - k.get(i, l)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ansatz_sampling() {
        let w = WindowAssignment::cyclic(12, 3).unwrap();
        let a = sample_ansatz(60, &w, Family::Xyz, &mut rng::stream(2, &[])).unwrap();
        assert_eq!(a.depth(), 60);
        assert_eq!(a.gates[13].window, vec![1, 2, 3]);
        let b = sample_ansatz(60, &w, Family::Xyz, &mut rng::stream(2, &[])).unwrap();
        assert_eq!(a, b);
        for g in &a.gates {
            assert_eq!(g.generator.weight(), 3);
        }
        let xy = sample_ansatz(20, &w, Family::Xy, &mut rng::stream(2, &[])).unwrap();
        assert!(xy.gates.iter().all(|g| g.generator.letters().all(|l| l != Pauli::Z)));
        assert!(sample_ansatz(0, &w, Family::Xy, &mut rng::stream(2, &[])).is_err());
    }

    #[test]
    fn generator_words_are_uniform() {
        let w = WindowAssignment::cyclic(2, 2).unwrap();
        let draws = 10_000;
        let a = sample_ansatz(draws, &w, Family::Xyz, &mut rng::stream(7, &[])).unwrap();
        let mut counts = std::collections::HashMap::new();
        for g in &a.gates {
            *counts.entry(g.generator).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 9);
        let p = 1.0 / 9.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - draws as f64 * p).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn invalid_ansatz_is_rejected() {
        let h: PauliString = "XZ".parse().unwrap();
        let bad_window = Gate { window: vec![0], generator: h, pre_gates: vec![] };
        assert!(Ansatz::new(2, Family::Xyz, vec![bad_window]).is_err());
        let z_in_xy = Gate { window: vec![0, 1], generator: h, pre_gates: vec![] };
        assert!(Ansatz::new(2, Family::Xy, vec![z_in_xy]).is_err());
        assert!(Ansatz::new(2, Family::Xy, vec![]).is_err());
    }
}
