//! Plain gradient descent on the mean squared error, with diagnostics.

use std::fmt::Write as _;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{jacobian, outputs, qntk, Ansatz};
use crate::analysis::smoothness_coefficient;
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::kernel::mse_loss;
use crate::linalg::{norm2, sym_eig, Matrix};
use crate::observable::LocalZObservable;
use crate::rng::{self, tags};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum LearningRate {
    /// `η = η₀ |𝒜| / D`.
    Scaled { eta0: f64 },
    Fixed { eta: f64 },
}

impl LearningRate {
    pub fn eta(&self, n_train: usize, depth: usize) -> f64 {
        match *self {
            LearningRate::Scaled { eta0 } => eta0 * n_train as f64 / depth as f64,
            LearningRate::Fixed { eta } => eta,
        }
    }

    pub fn eta0(&self, n_train: usize, depth: usize) -> f64 {
        match *self {
            LearningRate::Scaled { eta0 } => eta0,
            LearningRate::Fixed { eta } => eta * depth as f64 / n_train as f64,
        }
    }
}

fn default_record_every() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: LearningRate,
    pub steps: usize,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Simulated measurement shots per gradient entry.
    #[serde(default)]
    pub shots: Option<u64>,
    /// Overrides the per-entry noise std derived from `shots`.
    #[serde(default)]
    pub noise_std: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub loss_train: f64,
    pub loss_test: Option<f64>,
    /// Fraction of test points with `sign(z) ≠ y`.
    pub test_error: Option<f64>,
    pub grad_norm: f64,
    pub lmin_k: f64,
    pub lmax_k: f64,
    pub theta_dist: f64,
    /// Undefined at step 0 (no displacement yet).
    pub smooth_c0: Option<f64>,
}

pub const TRACE_HEADER: &str = "step,loss_train,loss_test,test_error,grad_norm,lmin_K,lmax_K,theta_dist,smooth_C0,loss_train_rel,loss_test_rel";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<TraceRecord>,
    pub eta0: f64,
    pub eta: f64,
    pub depth: usize,
    pub window_size: usize,
    pub seed: u64,
    pub theta_final: Vec<f64>,
}

fn fmt_opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        write!(out, "{v:e}").unwrap();
    }
}

impl TrainingTrace {
    pub fn initial(&self) -> &TraceRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace has a step-0 record")
    }

    /// Final training loss relative to the initial one.
    pub fn relative_train_loss(&self) -> f64 {
        self.last().loss_train / self.initial().loss_train
    }

    /// CSV with [`TRACE_HEADER`]; relative columns divide by the step-0 values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        let l0 = self.initial().loss_train;
        let t0 = self.initial().loss_test;
        for r in &self.records {
            write!(
                out,
                "{},{:e},",
                r.step, r.loss_train
            )
            .unwrap();
            fmt_opt(&mut out, r.loss_test);
            out.push(',');
            fmt_opt(&mut out, r.test_error);
            write!(
                out,
                ",{:e},{:e},{:e},{:e},",
                r.grad_norm, r.lmin_k, r.lmax_k, r.theta_dist
            )
            .unwrap();
            fmt_opt(&mut out, r.smooth_c0);
            write!(out, ",{:e},", r.loss_train / l0).unwrap();
            fmt_opt(&mut out, r.loss_test.zip(t0).map(|(a, b)| a / b));
            out.push('\n');
        }
        out
    }
}

fn residuals(z: &[f64], y: &[f64]) -> Vec<f64> {
    z.iter().zip(y).map(|(z, y)| z - y).collect()
}

fn sign_error(z: &[f64], y: &[f64]) -> f64 {
    let wrong = z.iter().zip(y).filter(|(z, y)| **z * **y <= 0.0).count();
    wrong as f64 / z.len() as f64
}

/// `θ(t+1) = θ(t) − η ∇L_𝒜(θ(t))` from `θ(0) = 0`, with `∇L = J r / |𝒜|`.
///
/// Diagnostics are recorded at steps `0, r, 2r, …` and at the final step.
pub fn train_gd(
    ansatz: &Ansatz,
    train: &Dataset,
    test: Option<&Dataset>,
    obs: &LocalZObservable,
    cfg: &TrainConfig,
) -> Result<TrainingTrace> {
    if cfg.steps == 0 || cfg.record_every == 0 {
        return Err(Error::InvalidArgument("steps and record_every must be ≥ 1".into()));
    }
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let d = ansatz.depth();
    let na = train.len();
    let eta = cfg.learning_rate.eta(na, d);
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("learning rate {eta} must be positive")));
    }
    let noise = match (cfg.noise_std, cfg.shots) {
        (Some(s), _) => Some(s),
        (None, Some(shots)) if shots > 0 => {
            Some(obs.spectral_norm() * (2.0 / shots as f64).sqrt())
        }
        (None, Some(_)) => return Err(Error::InvalidArgument("shots must be ≥ 1".into())),
        (None, None) => None,
    }
    .filter(|s| *s > 0.0)
    .map(|s| Normal::new(0.0, s).expect("positive std"));

    let theta0 = vec![0.0; d];
    let mut theta = theta0.clone();
    let mut j_init: Option<Matrix> = None;
    let mut records = Vec::new();
    for t in 0..=cfg.steps {
        let (j, z) = jacobian(ansatz, &theta, &train.states, obs)?;
        let r = residuals(&z, &train.labels);
        let loss = mse_loss(&r);
        if !loss.is_finite() {
            return Err(Error::Diverged { step: t, loss });
        }
        let mut grad = j.matvec(&r)?;
        for g in &mut grad {
            *g /= na as f64;
        }
        if t % cfg.record_every == 0 || t == cfg.steps {
            let eig = sym_eig(&qntk(&j)?);
            let dist = norm2(&theta.iter().zip(&theta0).map(|(a, b)| a - b).collect::<Vec<_>>());
            let (loss_test, test_error) = match test {
                Some(ts) if !ts.is_empty() => {
                    let zt = outputs(ansatz, &theta, &ts.states, obs)?;
                    (
                        Some(mse_loss(&residuals(&zt, &ts.labels))),
                        Some(sign_error(&zt, &ts.labels)),
                    )
                }
                _ => (None, None),
            };
            let smooth_c0 = match &j_init {
                Some(j0) if dist > 0.0 => Some(smoothness_coefficient(&j, j0, &theta, &theta0)?),
                _ => None,
            };
            records.push(TraceRecord {
                step: t,
                loss_train: loss,
                loss_test,
                test_error,
                grad_norm: norm2(&grad),
                lmin_k: eig.min(),
                lmax_k: eig.max(),
                theta_dist: dist,
                smooth_c0,
            });
        }
        if j_init.is_none() {
            j_init = Some(j);
        }
        if t == cfg.steps {
            break;
        }
        if let Some(dist) = &noise {
            let mut r = rng::stream(cfg.seed, &[tags::NOISE, t as u64]);
            for g in &mut grad {
                *g += dist.sample(&mut r);
            }
        }
        for (th, g) in theta.iter_mut().zip(&grad) {
            *th -= eta * g;
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged { step: t + 1, loss: f64::NAN });
        }
    }
    Ok(TrainingTrace {
        records,
        eta0: cfg.learning_rate.eta0(na, d),
        eta,
        depth: d,
        window_size: ansatz.gates.iter().map(|g| g.window.len()).max().unwrap_or(0),
        seed: cfg.seed,
        theta_final: theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{Generator, Split, WindowAssignment};
    use crate::pauli::PauliString;
    use crate::qnn::{sample_ansatz, Family, Gate};
    use crate::state::StateVector;
    use num_complex::Complex64;

    fn x_gate() -> Ansatz {
        let h: PauliString = "X".parse().unwrap();
        Ansatz::new(1, Family::Xyz, vec![Gate { window: vec![0], generator: h, pre_gates: vec![] }])
            .unwrap()
    }

    fn cfg(eta0: f64, steps: usize, record_every: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: LearningRate::Scaled { eta0 },
            steps,
            record_every,
            shots: None,
            noise_std: None,
            seed: 1,
        }
    }

    fn plus_i_set(label: f64) -> Dataset {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = StateVector::from_amplitudes(1, vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)])
            .unwrap();
        Dataset::explicit(vec![s], vec![label], Split::Train).unwrap()
    }

    #[test]
    fn scalar_recursion() {
        // z(θ) = sin θ, J = cos θ ≈ 1, K ≈ 1 near 0: r(t) ≈ (1 − η₀)^t r(0).
        let y = 1e-3;
        let obs = LocalZObservable::new(vec![1.0]).unwrap();
        let tr = train_gd(&x_gate(), &plus_i_set(y), None, &obs, &cfg(0.1, 20, 1)).unwrap();
        for rec in &tr.records {
            let expect = 0.5 * (y * 0.9f64.powi(rec.step as i32)).powi(2);
            assert!((rec.loss_train - expect).abs() < 1e-3 * expect, "{rec:?}");
        }
        assert_eq!(tr.records.len(), 21);
    }

    #[test]
    fn zero_gradient_start_stays_put() {
        let data = Dataset::explicit(vec![StateVector::zero(1).unwrap()], vec![0.3], Split::Train).unwrap();
        let obs = LocalZObservable::new(vec![1.0]).unwrap();
        let tr = train_gd(&x_gate(), &data, None, &obs, &cfg(0.5, 15, 5)).unwrap();
        assert_eq!(tr.theta_final, vec![0.0]);
        assert!(tr.records.iter().all(|r| r.theta_dist == 0.0 && r.smooth_c0.is_none()));
        assert_eq!(tr.records.len(), 4);
    }

    fn small_problem() -> (Ansatz, Dataset, Dataset, LocalZObservable) {
        let n = 4;
        let w = WindowAssignment::cyclic(n, 2).unwrap();
        let a = sample_ansatz(16, &w, Family::Xyz, &mut rng::stream(3, &[])).unwrap();
        let obs = LocalZObservable::sample(n, 1.0, &mut rng::stream(3, &[tags::OBSERVABLE])).unwrap();
        let train = Dataset::generate(&Generator::Fldc { blocks: 1 }, n, 6, Split::Train, 3).unwrap();
        let test = Dataset::generate(&Generator::Fldc { blocks: 1 }, n, 4, Split::Test, 3).unwrap();
        let y: Vec<f64> = (0..6).map(|i| 0.3 * (i as f64 - 2.5)).collect();
        let yt: Vec<f64> = (0..4).map(|i| 0.2 * (i as f64 - 1.5)).collect();
        (a, train.with_labels(y).unwrap(), test.with_labels(yt).unwrap(), obs)
    }

    #[test]
    fn record_cadence_and_determinism() {
        let (a, train, test, obs) = small_problem();
        let mut c = cfg(0.5, 23, 5);
        c.shots = Some(1000);
        let t1 = train_gd(&a, &train, Some(&test), &obs, &c).unwrap();
        let t2 = train_gd(&a, &train, Some(&test), &obs, &c).unwrap();
        assert_eq!(t1.to_csv(), t2.to_csv());
        // ⌈23/5⌉ + 1 rows.
        assert_eq!(t1.records.len(), 6);
        assert_eq!(t1.to_csv().lines().count(), 7);
        assert_eq!(t1.last().step, 23);
        let steps: Vec<usize> = t1.records.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 5, 10, 15, 20, 23]);
        c.shots = None;
        let t3 = train_gd(&a, &train, Some(&test), &obs, &c).unwrap();
        assert_ne!(t1.theta_final, t3.theta_final);
    }

    #[test]
    fn gradient_bounded_by_kernel_spectrum() {
        let (a, train, test, obs) = small_problem();
        let tr = train_gd(&a, &train, Some(&test), &obs, &cfg(0.5, 10, 1)).unwrap();
        let d = a.depth() as f64;
        let na = train.len() as f64;
        for r in &tr.records {
            // ‖∇L‖² = rᵀ(JᵀJ)r/|𝒜|² ≤ (2D/|𝒜|) λ_max L.
            assert!(r.grad_norm.powi(2) <= 2.0 * d / na * r.lmax_k * r.loss_train + 1e-8);
            assert!(r.lmin_k >= -1e-12);
        }
        assert!(tr.last().loss_train < tr.initial().loss_train);
    }

    #[test]
    fn divergence_is_reported() {
        let (a, train, _, obs) = small_problem();
        // Squared residuals overflow.
        let huge = train.clone().with_labels(vec![1e300; 6]).unwrap();
        let res = train_gd(&a, &huge, None, &obs, &cfg(0.1, 5, 1));
        assert!(matches!(res, Err(Error::Diverged { step: 0, .. })), "{res:?}");
        assert!(train_gd(&a, &train, None, &obs, &cfg(0.1, 0, 1)).is_err());
        assert!(train_gd(&a, &train, None, &obs, &cfg(-0.1, 3, 1)).is_err());
    }

    #[test]
    fn learning_rate_rules() {
        let s = LearningRate::Scaled { eta0: 2.0 };
        assert_eq!(s.eta(40, 160), 0.5);
        let f = LearningRate::Fixed { eta: 0.5 };
        assert_eq!(f.eta0(40, 160), 2.0);
    }
}
