//! Fidelity-kernel regression and its generalization algebra.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{haar_unitary, heisenberg_unitary, label_with_target, Dataset, Generator, Split, Target};
use crate::error::{Error, Result};
use crate::linalg::{dot, factor_with_ladder, Cholesky, Matrix, SymMatrix};
use crate::observable::LocalZObservable;
use crate::rng::{self, tags};
use crate::state::StateVector;
use crate::stats::{jackknife, mean_estimate, Estimate};

/// `k_{ab} = |⟨ψ_a|ψ_b⟩|²` for every row/column pair.
pub fn gram(rows: &[StateVector], cols: &[StateVector]) -> Result<Matrix> {
    let data = rows
        .par_iter()
        .map(|a| cols.iter().map(|b| a.fidelity(b)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows.len(), cols.len(), data.concat())
}

/// Square Gram matrix of one state set.
pub fn gram_sym(states: &[StateVector]) -> Result<SymMatrix> {
    let rows = states
        .par_iter()
        .enumerate()
        .map(|(i, a)| states[..=i].iter().map(|b| a.fidelity(b)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(SymMatrix::from_lower(states.len(), |i, j| rows[i][j]))
}

/// `L = ‖r‖² / (2|r|)`; zero for an empty set.
pub fn mse_loss(r: &[f64]) -> f64 {
    if r.is_empty() {
        0.0
    } else {
        dot(r, r) / (2.0 * r.len() as f64)
    }
}

/// A fitted kernel model `z(ρ) = Σ_a k(ρ_a, ρ) θ_a` trained to zero loss.
#[derive(Debug, Clone)]
pub struct KernelSystem {
    pub gram: SymMatrix,
    pub labels: Vec<f64>,
    pub theta_initial: Vec<f64>,
    pub theta: Vec<f64>,
    pub ridge: f64,
    factor: Cholesky,
}

impl KernelSystem {
    /// Fits from `θ(0) = 0`.
    pub fn fit(gram: SymMatrix, labels: Vec<f64>, ridge: f64) -> Result<KernelSystem> {
        let n = gram.order();
        KernelSystem::fit_from(gram, labels, vec![0.0; n], ridge)
    }

    /// Gradient flow from `θ(0)` converges to `θ(∞) = k⁻¹y` whatever `θ(0)`
    /// is; `θ(0)` only fixes the initial residuals.
    pub fn fit_from(
        gram: SymMatrix,
        labels: Vec<f64>,
        theta_initial: Vec<f64>,
        ridge: f64,
    ) -> Result<KernelSystem> {
        let n = gram.order();
        if labels.len() != n {
            return Err(Error::dim(n, labels.len()));
        }
        if theta_initial.len() != n {
            return Err(Error::dim(n, theta_initial.len()));
        }
        let (factor, ridge) = factor_with_ladder(&gram, ridge)?;
        let theta = factor.solve(&labels)?;
        Ok(KernelSystem { gram, labels, theta_initial, theta, ridge, factor })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `r_𝒜(0) = kθ(0) − y`.
    pub fn train_residuals_initial(&self) -> Vec<f64> {
        let z = self.gram.matvec(&self.theta_initial).expect("shape");
        z.iter().zip(&self.labels).map(|(z, y)| z - y).collect()
    }

    /// `g = k_cross k⁻¹`, one row per test point.
    pub fn metric(&self, k_cross: &Matrix) -> Result<Matrix> {
        if k_cross.cols() != self.len() {
            return Err(Error::dim(self.len(), k_cross.cols()));
        }
        let rows = (0..k_cross.rows())
            .map(|b| self.factor.solve(k_cross.row(b)))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(k_cross.rows(), self.len(), rows.concat())
    }
}

/// `θ(∞) = (k + ridge·I)⁻¹ y`, climbing the ridge ladder if needed.
pub fn fit(k: &SymMatrix, y: &[f64], ridge: f64) -> Result<Vec<f64>> {
    if y.len() != k.order() {
        return Err(Error::dim(k.order(), y.len()));
    }
    factor_with_ladder(k, ridge)?.0.solve(y)
}

/// `z = k_cross θ`.
pub fn predict(k_cross: &Matrix, theta: &[f64]) -> Result<Vec<f64>> {
    k_cross.matvec(theta)
}

/// `r_ℬ(∞) = r_ℬ(0) − k_cross k⁻¹ r_𝒜(0)`.
pub fn test_residuals_final(
    k_cross: &Matrix,
    k_train: &SymMatrix,
    r0_train: &[f64],
    r0_test: &[f64],
    ridge: f64,
) -> Result<Vec<f64>> {
    if r0_test.len() != k_cross.rows() {
        return Err(Error::dim(k_cross.rows(), r0_test.len()));
    }
    let w = fit(k_train, r0_train, ridge)?;
    let shift = k_cross.matvec(&w)?;
    Ok(r0_test.iter().zip(&shift).map(|(r, s)| r - s).collect())
}

#[derive(Debug, Clone)]
pub struct Generalization {
    /// `ℛ = L_ℬ(∞) − L_ℬ(0)` from the two-term expansion.
    pub relative_error: f64,
    pub loss_test_initial: f64,
    pub metric: Matrix,
}

/// Two-term expansion `ℛ = (1/2|ℬ|)Σ(g r_𝒜)² − (1/|ℬ|)Σ r_ℬ·(g r_𝒜)`.
pub fn relative_generalization_error(
    system: &KernelSystem,
    k_cross: &Matrix,
    test_labels: &[f64],
) -> Result<Generalization> {
    let nb = k_cross.rows();
    if test_labels.len() != nb {
        return Err(Error::dim(nb, test_labels.len()));
    }
    let g = system.metric(k_cross)?;
    let r_a = system.train_residuals_initial();
    let z_b = k_cross.matvec(&system.theta_initial)?;
    let r_b: Vec<f64> = z_b.iter().zip(test_labels).map(|(z, y)| z - y).collect();
    let gr = g.matvec(&r_a)?;
    let relative_error = if nb == 0 {
        0.0
    } else {
        dot(&gr, &gr) / (2.0 * nb as f64) - dot(&r_b, &gr) / nb as f64
    };
    Ok(Generalization {
        relative_error,
        loss_test_initial: mse_loss(&r_b),
        metric: g,
    })
}

/// Label source for the random-data experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetSpec {
    Heisenberg { time: f64 },
    /// Fresh Haar unitary per trial (dense; small registers only).
    Haar,
    Identity,
}

impl TargetSpec {
    pub fn build(&self, n: usize, rng: &mut rng::Rng) -> Result<Target> {
        Ok(match self {
            TargetSpec::Heisenberg { time } => Target::Blocks(heisenberg_unitary(n, *time)?),
            TargetSpec::Haar => Target::Dense(haar_unitary(n, rng)?),
            TargetSpec::Identity => Target::Identity(n),
        })
    }
}

/// Observable coefficients: explicit, or drawn per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Explicit(LocalZObservable),
    Sampled { variance: f64 },
}

impl ObservableSpec {
    pub fn build(&self, n: usize, rng: &mut rng::Rng) -> Result<LocalZObservable> {
        match self {
            ObservableSpec::Explicit(o) if o.n_qubits() == n => Ok(o.clone()),
            ObservableSpec::Explicit(o) => Err(Error::dim(n, o.n_qubits())),
            ObservableSpec::Sampled { variance } => LocalZObservable::sample(n, *variance, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QkmCurseConfig {
    pub n_qubits: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub trials: usize,
    pub target: TargetSpec,
    pub observable: ObservableSpec,
    pub ridge: f64,
    pub seed: u64,
}

/// Per-trial losses of the random-data experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurseTrial {
    pub trial: usize,
    pub loss_train_initial: f64,
    pub loss_test_initial: f64,
    pub loss_test_final: f64,
    /// Per-trial value of the lower-bound expression.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurseSummary {
    pub loss_test_initial: Estimate,
    pub loss_test_final: Estimate,
    pub bound: Estimate,
    /// `E L_ℬ(∞) − bound`.
    pub margin: Estimate,
    /// `(E L_ℬ(0) − E L_ℬ(∞)) / E L_ℬ(0)`.
    pub relative_improvement: Estimate,
    /// Mean over trials of `(L_ℬ(0) − L_ℬ(∞)) / L_ℬ(0)`.
    pub mean_trial_improvement: f64,
    /// `margin ≥ −2 SE`.
    pub bound_holds: bool,
    /// The training set was not smaller than the bound's size threshold.
    pub outside_regime: bool,
    pub trials: Vec<CurseTrial>,
}

pub(crate) fn summarize(trials: Vec<CurseTrial>, outside_regime: bool) -> Result<CurseSummary> {
    let recs: Vec<Vec<f64>> = trials
        .iter()
        .map(|t| vec![t.loss_test_initial, t.loss_test_final, t.bound])
        .collect();
    let col = |i: usize| -> Vec<f64> { recs.iter().map(|r| r[i]).collect() };
    let margin = jackknife(&recs, |m| m[1] - m[2])?;
    let per_trial: Vec<f64> = trials
        .iter()
        .map(|t| {
            if t.loss_test_initial > 0.0 {
                (t.loss_test_initial - t.loss_test_final) / t.loss_test_initial
            } else {
                0.0
            }
        })
        .collect();
    Ok(CurseSummary {
        loss_test_initial: mean_estimate(&col(0))?,
        loss_test_final: mean_estimate(&col(1))?,
        bound: mean_estimate(&col(2))?,
        bound_holds: margin.value >= -2.0 * margin.se,
        margin,
        relative_improvement: jackknife(&recs, |m| (m[0] - m[1]) / m[0])?,
        mean_trial_improvement: crate::stats::mean(&per_trial),
        outside_regime,
        trials,
    })
}

/// Monte Carlo check of the kernel-method bound
/// `E L_ℬ(∞) ≳ E L_ℬ(0) − (|𝒜|/2^{N−1}) E√(L_𝒜(0) L_ℬ(0))` on Haar data.
pub fn curse_experiment_qkm(cfg: &QkmCurseConfig) -> Result<CurseSummary> {
    let n = cfg.n_qubits;
    let outside = (cfg.train_size as f64) >= (n as f64 / 2.0).exp2();
    if outside {
        log::warn!(
            "|A| = {} is not below 2^(N/2) = {:.1}; the bound's regime does not apply",
            cfg.train_size,
            (n as f64 / 2.0).exp2()
        );
    }
    let shared_target = match cfg.target {
        TargetSpec::Haar => None,
        _ => Some(cfg.target.build(n, &mut rng::stream(cfg.seed, &[tags::TARGET]))?),
    };
    let scale = cfg.train_size as f64 / (n as f64 - 1.0).exp2();
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<CurseTrial> {
            let trial_seed = rng::mix(cfg.seed, &[tags::TRIAL, t as u64]);
            let target = match &shared_target {
                Some(u) => u.clone(),
                None => cfg.target.build(n, &mut rng::stream(trial_seed, &[tags::TARGET]))?,
            };
            let obs = cfg.observable.build(n, &mut rng::stream(trial_seed, &[tags::OBSERVABLE]))?;
            let train = Dataset::generate(&Generator::Haar, n, cfg.train_size, Split::Train, trial_seed)?;
            let test = Dataset::generate(&Generator::Haar, n, cfg.test_size, Split::Test, trial_seed)?;
            let y_a = label_with_target(&train.states, &target, &obs)?;
            let y_b = label_with_target(&test.states, &target, &obs)?;
            let k = gram_sym(&train.states)?;
            let k_cross = gram(&test.states, &train.states)?;
            // θ(0) = 0, so r(0) = −y.
            let r0_a: Vec<f64> = y_a.iter().map(|y| -y).collect();
            let r0_b: Vec<f64> = y_b.iter().map(|y| -y).collect();
            let (loss_train_initial, loss_test_initial) = (mse_loss(&r0_a), mse_loss(&r0_b));
            let loss_test_final = if cfg.train_size == 0 {
                loss_test_initial
            } else {
                mse_loss(&test_residuals_final(&k_cross, &k, &r0_a, &r0_b, cfg.ridge)?)
            };
            Ok(CurseTrial {
                trial: t,
                loss_train_initial,
                loss_test_initial,
                loss_test_final,
                bound: loss_test_initial - scale * (loss_train_initial * loss_test_initial).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(trials, outside)
}
