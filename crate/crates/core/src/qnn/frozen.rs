//! Predictions under a fixed tangent kernel, and the random-data experiment.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{jacobian, qntk, qntk_cross, sample_ansatz, Ansatz, Family};
use crate::datasets::{
    haar_unitary, label_with_target, make_windows, Connectivity, Dataset, Generator, Split, Target,
};
use crate::error::{Error, Result};
use crate::kernel::{fit, mse_loss, summarize, CurseSummary, CurseTrial, ObservableSpec};
use crate::linalg::Matrix;
use crate::rng::{self, tags, Rng};

/// `z_ℬ(∞) = z_ℬ(0) − K̃_{ℬ𝒜} K⁻¹ r_𝒜(0)` with `K` built from `j_train`.
///
/// Both Jacobians are `D × samples`. An empty training set leaves the
/// predictions unchanged.
pub fn frozen_kernel_predict(
    j_train: &Matrix,
    j_test: &Matrix,
    z0_test: &[f64],
    r0_train: &[f64],
    ridge: f64,
) -> Result<Vec<f64>> {
    if z0_test.len() != j_test.cols() {
        return Err(Error::dim(j_test.cols(), z0_test.len()));
    }
    if r0_train.len() != j_train.cols() {
        return Err(Error::dim(j_train.cols(), r0_train.len()));
    }
    if j_train.cols() == 0 {
        return Ok(z0_test.to_vec());
    }
    let k = qntk(j_train)?;
    let w = fit(&k, r0_train, ridge)?;
    let shift = qntk_cross(j_test, j_train)?.matvec(&w)?;
    Ok(z0_test.iter().zip(&shift).map(|(z, s)| z - s).collect())
}

/// Recipe for a randomly sampled ansatz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub window_size: usize,
    pub depth: usize,
    pub connectivity: Connectivity,
    pub family: Family,
}

impl AnsatzSpec {
    pub fn build(&self, n: usize, rng: &mut Rng) -> Result<Ansatz> {
        let w = make_windows(n, self.window_size, self.connectivity, self.depth, rng)?;
        sample_ansatz(self.depth, &w, self.family, rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnnCurseConfig {
    pub n_qubits: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub trials: usize,
    pub ansatz: AnsatzSpec,
    pub observable: ObservableSpec,
    pub ridge: f64,
    pub seed: u64,
}

/// Monte Carlo check of `E L_ℬ(∞) ≥ (1 − |𝒜|/(4^N − 1)) E L_ℬ(0)` for a
/// frozen-kernel model from `θ = 0` on Haar data with Haar-target labels.
pub fn curse_experiment_qnn(cfg: &QnnCurseConfig) -> Result<CurseSummary> {
    let n = cfg.n_qubits;
    let scale = 1.0 - cfg.train_size as f64 / (((2 * n) as f64).exp2() - 1.0);
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<CurseTrial> {
            let seed = rng::mix(cfg.seed, &[tags::TRIAL, t as u64]);
            let target = Target::Dense(haar_unitary(n, &mut rng::stream(seed, &[tags::TARGET]))?);
            let obs = cfg.observable.build(n, &mut rng::stream(seed, &[tags::OBSERVABLE]))?;
            let ansatz = cfg.ansatz.build(n, &mut rng::stream(seed, &[tags::ANSATZ]))?;
            let train = Dataset::generate(&Generator::Haar, n, cfg.train_size, Split::Train, seed)?;
            let test = Dataset::generate(&Generator::Haar, n, cfg.test_size, Split::Test, seed)?;
            let y_a = label_with_target(&train.states, &target, &obs)?;
            let y_b = label_with_target(&test.states, &target, &obs)?;
            let theta = vec![0.0; ansatz.depth()];
            let (j_a, z_a) = jacobian(&ansatz, &theta, &train.states, &obs)?;
            let (j_b, z_b) = jacobian(&ansatz, &theta, &test.states, &obs)?;
            let r0_a: Vec<f64> = z_a.iter().zip(&y_a).map(|(z, y)| z - y).collect();
            let r0_b: Vec<f64> = z_b.iter().zip(&y_b).map(|(z, y)| z - y).collect();
            let z_final = frozen_kernel_predict(&j_a, &j_b, &z_b, &r0_a, cfg.ridge)?;
            let r_final: Vec<f64> = z_final.iter().zip(&y_b).map(|(z, y)| z - y).collect();
            let loss_test_initial = mse_loss(&r0_b);
            Ok(CurseTrial {
                trial: t,
                loss_train_initial: mse_loss(&r0_a),
                loss_test_initial,
                loss_test_final: mse_loss(&r_final),
                bound: scale * loss_test_initial,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(trials, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::qnn::tests::random_instance;

    /// `(JᵀJ/D)⁻¹` by Gauss–Jordan.
    fn dense_inverse(k: &SymMatrix) -> Matrix {
        let n = k.order();
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..2 * n).map(|j| if j < n { k.get(i, j) } else if j - n == i { 1.0 } else { 0.0 }).collect())
            .collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            let piv = a[c][c];
            a[c].iter_mut().for_each(|x| *x /= piv);
            for r in 0..n {
                if r != c {
                    let f = a[r][c];
                    let src = a[c].clone();
                    a[r].iter_mut().zip(&src).for_each(|(x, s)| *x -= f * s);
                }
            }
        }
        Matrix::from_fn(n, n, |i, j| a[i][n + j])
    }

    #[test]
    fn matches_explicit_inverse() {
        let (a, theta, _, o) = random_instance(4, 12, 21);
        let mut r = rng::stream(9, &[]);
        let states: Vec<_> = (0..5).map(|_| crate::datasets::haar_state(4, &mut r).unwrap()).collect();
        let (j_a, z_a) = jacobian(&a, &theta, &states[..3], &o).unwrap();
        let (j_b, z_b) = jacobian(&a, &theta, &states[3..], &o).unwrap();
        let r0: Vec<f64> = z_a.iter().map(|z| z - 0.1).collect();
        let got = frozen_kernel_predict(&j_a, &j_b, &z_b, &r0, 0.0).unwrap();
        let kinv = dense_inverse(&qntk(&j_a).unwrap());
        let kx = qntk_cross(&j_b, &j_a).unwrap();
        let expect = kx.matmul(&kinv).unwrap().matvec(&r0).unwrap();
        for b in 0..2 {
            assert!((got[b] - (z_b[b] - expect[b])).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolates_and_keeps_zero_residual() {
        let (a, theta, states, o) = random_instance(4, 12, 5);
        let (j, z) = jacobian(&a, &theta, &states, &o).unwrap();
        let y = vec![0.3, -0.2, 0.5];
        let r0: Vec<f64> = z.iter().zip(&y).map(|(z, y)| z - y).collect();
        let pred = frozen_kernel_predict(&j, &j, &z, &r0, 0.0).unwrap();
        for (p, y) in pred.iter().zip(&y) {
            assert!((p - y).abs() < 1e-9);
        }
        let same = frozen_kernel_predict(&j, &j, &z, &[0.0; 3], 0.0).unwrap();
        assert_eq!(same, z);
        let empty = frozen_kernel_predict(&Matrix::zeros(12, 0), &j, &z, &[], 0.0).unwrap();
        assert_eq!(empty, z);
        assert!(frozen_kernel_predict(&j, &j, &z[..2], &r0, 0.0).is_err());
    }

    #[test]
    fn linearized_descent_limit() {
        // Gradient descent on the model linearized at θ₀ converges to the
        // frozen prediction.
        let (a, theta, states, o) = random_instance(4, 16, 8);
        let (j_a, z_a) = jacobian(&a, &theta, &states[..2], &o).unwrap();
        let (j_b, z_b) = jacobian(&a, &theta, &states[2..], &o).unwrap();
        let y = [0.4, -0.3];
        let r0: Vec<f64> = z_a.iter().zip(&y).map(|(z, y)| z - y).collect();
        let expect = frozen_kernel_predict(&j_a, &j_b, &z_b, &r0, 0.0).unwrap();
        // ∇L = J r/|𝒜|; stable for η < 2|𝒜|/λ_max(JᵀJ).
        let eta = 2.0 / (16.0 * crate::linalg::sym_eig(&qntk(&j_a).unwrap()).max());
        let mut dtheta = vec![0.0; 16];
        for _ in 0..100_000 {
            let lin = j_a.tmatvec(&dtheta).unwrap();
            let r: Vec<f64> = r0.iter().zip(&lin).map(|(r, l)| r + l).collect();
            let g = j_a.matvec(&r).unwrap();
            for (t, g) in dtheta.iter_mut().zip(&g) {
                *t -= eta * g / 2.0;
            }
        }
        let shift = j_b.tmatvec(&dtheta).unwrap();
        for b in 0..shift.len() {
            assert!((z_b[b] + shift[b] - expect[b]).abs() < 1e-6);
        }
    }

    fn small_cfg(train: usize) -> QnnCurseConfig {
        QnnCurseConfig {
            n_qubits: 3,
            train_size: train,
            test_size: 4,
            trials: 4,
            ansatz: AnsatzSpec {
                window_size: 2,
                depth: 12,
                connectivity: Connectivity::Cyclic,
                family: Family::Xyz,
            },
            observable: ObservableSpec::Sampled { variance: 1.0 },
            ridge: 0.0,
            seed: 17,
        }
    }

    #[test]
    fn no_training_data_changes_nothing() {
        let s = curse_experiment_qnn(&small_cfg(0)).unwrap();
        for t in &s.trials {
            assert_eq!(t.loss_test_final, t.loss_test_initial);
            assert_eq!(t.bound, t.loss_test_initial);
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let a = curse_experiment_qnn(&small_cfg(3)).unwrap();
        let b = curse_experiment_qnn(&small_cfg(3)).unwrap();
        assert_eq!(a, b);
        let expect = 1.0 - 3.0 / 63.0;
        assert!((a.trials[0].bound - expect * a.trials[0].loss_test_initial).abs() < 1e-15);
    }
}
