//! Monte Carlo studies: curses, coefficient statistics, spectra, moments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Artifacts, Csv, ExperimentConfig, SpectrumData};
use crate::analysis::{
    coeff_matrix, mean_statistic, initial_kernel_bracket, haar_lambda_max_bound,
    tdesign_moment_check, BoundReport, MomentCheck,
};
use crate::datasets::{Dataset, Generator, Split, WindowAssignment};
use crate::error::Result;
use crate::kernel::{curse_experiment_qkm, CurseSummary, ObservableSpec, QkmCurseConfig, TargetSpec};
use crate::observable::LocalZObservable;
use crate::qnn::{curse_experiment_qnn, jacobian, qntk, AnsatzSpec, QnnCurseConfig};
use crate::rng::{self, tags};
use crate::stats::{log_log_fit, mean, variance, LinearFit};

fn observable_spec(cfg: &ExperimentConfig, s: usize) -> Result<ObservableSpec> {
    Ok(match &cfg.observable {
        Some(o) => ObservableSpec::Explicit(LocalZObservable::new(o.clone())?),
        None => ObservableSpec::Sampled { variance: cfg.variance_for(s) },
    })
}

fn curse_artifacts(s: &CurseSummary) -> Result<Artifacts> {
    let mut csv = Csv::new("trial,loss_train_initial,loss_test_initial,loss_test_final,bound");
    for t in &s.trials {
        csv.row(vec![
            t.trial.into(),
            t.loss_train_initial.into(),
            t.loss_test_initial.into(),
            t.loss_test_final.into(),
            t.bound.into(),
        ]);
    }
    let mut summary = serde_json::to_value(s)?;
    if let Some(m) = summary.as_object_mut() {
        m.remove("trials");
    }
    Ok(Artifacts { files: vec![("trials.csv".into(), csv.finish())], summary })
}

pub fn qkm_curse_config(cfg: &ExperimentConfig) -> Result<QkmCurseConfig> {
    Ok(QkmCurseConfig {
        n_qubits: cfg.n_qubits,
        train_size: cfg.train_size,
        test_size: cfg.test_size,
        trials: cfg.trials,
        target: TargetSpec::Heisenberg { time: cfg.target_time },
        observable: observable_spec(cfg, 1)?,
        ridge: cfg.ridge,
        seed: cfg.seed,
    })
}

pub fn qnn_curse_config(cfg: &ExperimentConfig) -> Result<QnnCurseConfig> {
    let s = cfg.window_sizes.first().copied().unwrap_or(1);
    Ok(QnnCurseConfig {
        n_qubits: cfg.n_qubits,
        train_size: cfg.train_size,
        test_size: cfg.test_size,
        trials: cfg.trials,
        ansatz: AnsatzSpec {
            window_size: s,
            depth: cfg.depths.first().copied().unwrap_or(1),
            connectivity: cfg.connectivity,
            family: cfg.family,
        },
        observable: observable_spec(cfg, s)?,
        ridge: cfg.ridge,
        seed: cfg.seed,
    })
}

pub fn run_curse_qkm(cfg: &ExperimentConfig) -> Result<Artifacts> {
    curse_artifacts(&curse_experiment_qkm(&qkm_curse_config(cfg)?)?)
}

pub fn run_curse_qnn(cfg: &ExperimentConfig) -> Result<Artifacts> {
    curse_artifacts(&curse_experiment_qnn(&qnn_curse_config(cfg)?)?)
}

/// One row of the coefficient-mean table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub window_size: usize,
    pub blocks: usize,
    pub size: usize,
    /// Mean over weight-`S` rows of `|mean/SD|`.
    pub statistic: f64,
    /// Standard deviation of the per-row values.
    pub spread: f64,
    pub alpha_mean: f64,
    pub haar_reference: f64,
}

/// The `|mean/SD|` statistic of FLDC data over window sizes, block counts
/// and dataset sizes; each `(L, size)` pair gets its own states.
pub fn coeff_table(cfg: &ExperimentConfig) -> Result<Vec<CoeffRow>> {
    let n = cfg.n_qubits;
    let mut jobs = Vec::new();
    for &s in &cfg.window_sizes {
        for &l in &cfg.blocks {
            for &size in &cfg.sizes {
                jobs.push((s, l, size));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(s, l, size)| {
            let seed = rng::mix(cfg.seed, &[tags::SPLIT, l as u64, size as u64]);
            let data = Dataset::generate(&Generator::Fldc { blocks: l }, n, size, Split::Train, seed)?;
            let windows = WindowAssignment::cyclic(n, s)?;
            let st = coeff_matrix(&data.states, &windows, cfg.family)?;
            let ms = mean_statistic(&st, s)?;
            let vals: Vec<f64> = ms.per_row.iter().flatten().copied().collect();
            Ok(CoeffRow {
                window_size: s,
                blocks: l,
                size,
                statistic: ms.summary,
                spread: if vals.len() > 1 { variance(&vals).sqrt() } else { 0.0 },
                alpha_mean: mean(&st.alpha),
                haar_reference: st.haar_reference,
            })
        })
        .collect()
}

pub fn run_coeff_stats(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let rows = coeff_table(cfg)?;
    let mut csv = Csv::new("S,L,size,statistic,spread,alpha_mean,haar_reference");
    for r in &rows {
        csv.row(vec![
            r.window_size.into(),
            r.blocks.into(),
            r.size.into(),
            r.statistic.into(),
            r.spread.into(),
            r.alpha_mean.into(),
            r.haar_reference.into(),
        ]);
    }
    let mut fits = Vec::new();
    for &s in &cfg.window_sizes {
        for &l in &cfg.blocks {
            let sel: Vec<&CoeffRow> =
                rows.iter().filter(|r| r.window_size == s && r.blocks == l).collect();
            let fit: Option<LinearFit> = if sel.len() >= 2 {
                let x: Vec<f64> = sel.iter().map(|r| r.size as f64).collect();
                let y: Vec<f64> = sel.iter().map(|r| r.statistic).collect();
                log_log_fit(&x, &y).ok()
            } else {
                None
            };
            fits.push(json!({ "window_size": s, "blocks": l, "fit": fit }));
        }
    }
    Ok(Artifacts {
        files: vec![("coeff_stats.csv".into(), csv.finish())],
        summary: json!({ "fits": fits }),
    })
}

/// Kernel spectrum at `θ = 0` for one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrial {
    pub n_qubits: usize,
    pub trial: usize,
    pub report: BoundReport,
}

/// Largest kernel eigenvalue on Haar data for each size in `n_list`.
pub fn haar_spectrum(cfg: &ExperimentConfig) -> Result<Vec<SpectrumTrial>> {
    let s = cfg.window_sizes.first().copied().unwrap_or(1);
    let d = cfg.depths.first().copied().unwrap_or(1);
    let mut jobs = Vec::new();
    for &n in &cfg.n_list {
        for t in 0..cfg.trials {
            jobs.push((n, t));
        }
    }
    jobs.into_par_iter()
        .map(|(n, t)| {
            let seed = rng::mix(cfg.seed, &[tags::TRIAL, n as u64, t as u64]);
            let obs = LocalZObservable::sample(n, cfg.variance_for(s), &mut rng::stream(seed, &[tags::OBSERVABLE]))?;
            let spec = AnsatzSpec { window_size: s.min(n), depth: d, connectivity: cfg.connectivity, family: cfg.family };
            let ansatz = spec.build(n, &mut rng::stream(seed, &[tags::ANSATZ]))?;
            let data = Dataset::generate(&Generator::Haar, n, cfg.train_size, Split::Train, seed)?;
            let (j, _) = jacobian(&ansatz, &vec![0.0; d], &data.states, &obs)?;
            let report = haar_lambda_max_bound(&qntk(&j)?, &obs, cfg.train_size, cfg.delta);
            Ok(SpectrumTrial { n_qubits: n, trial: t, report })
        })
        .collect()
}

/// Kernel eigenvalue bracket at `θ = 0` on qubit-embedded uniform data.
pub fn embedding_spectrum(cfg: &ExperimentConfig) -> Result<Vec<SpectrumTrial>> {
    let n = cfg.n_qubits;
    let s = cfg.window_sizes.first().copied().unwrap_or(1);
    let d = cfg.depths.first().copied().unwrap_or(1);
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = rng::mix(cfg.seed, &[tags::TRIAL, t as u64]);
            let obs = match &cfg.observable {
                Some(o) => LocalZObservable::new(o.clone())?,
                None => LocalZObservable::sample(n, cfg.variance_for(s), &mut rng::stream(seed, &[tags::OBSERVABLE]))?,
            };
            let spec = AnsatzSpec { window_size: s, depth: d, connectivity: cfg.connectivity, family: cfg.family };
            let ansatz = spec.build(n, &mut rng::stream(seed, &[tags::ANSATZ]))?;
            let data = Dataset::generate(&Generator::UniformEmbedding, n, cfg.train_size, Split::Train, seed)?;
            let (j, _) = jacobian(&ansatz, &vec![0.0; d], &data.states, &obs)?;
            let stats = match cfg.family {
                crate::qnn::Family::Xyz => {
                    let w = WindowAssignment::cyclic(n, s)?;
                    Some(coeff_matrix(&data.states, &w, cfg.family)?)
                }
                crate::qnn::Family::Xy => None,
            };
            let report = initial_kernel_bracket(&qntk(&j)?, stats.as_ref(), &obs, cfg.family, s, cfg.slack, cfg.delta)?;
            Ok(SpectrumTrial { n_qubits: n, trial: t, report })
        })
        .collect()
}

pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let trials = match cfg.spectrum_data {
        SpectrumData::Haar => haar_spectrum(cfg)?,
        SpectrumData::Embedding => embedding_spectrum(cfg)?,
    };
    let mut csv = Csv::new("n_qubits,trial,lambda_min,lambda_max,lower,upper,pass_lower,pass_upper,vacuous");
    for t in &trials {
        let r = &t.report;
        csv.row(vec![
            t.n_qubits.into(),
            t.trial.into(),
            r.lambda_min.into(),
            r.lambda_max.into(),
            r.lower.into(),
            r.upper.into(),
            r.pass_lower.into(),
            r.pass_upper.into(),
            r.vacuous.into(),
        ]);
    }
    let mut sizes: Vec<usize> = Vec::new();
    for t in &trials {
        if !sizes.contains(&t.n_qubits) {
            sizes.push(t.n_qubits);
        }
    }
    let per_n: Vec<_> = sizes
        .into_iter()
        .map(|n| {
            let sel: Vec<&BoundReport> = trials.iter().filter(|t| t.n_qubits == n).map(|t| &t.report).collect();
            let lmax: Vec<f64> = sel.iter().map(|r| r.lambda_max).collect();
            let pass = sel.iter().filter(|r| r.pass).count() as f64 / sel.len() as f64;
            json!({ "n_qubits": n, "mean_lambda_max": mean(&lmax), "pass_fraction": pass })
        })
        .collect();
    Ok(Artifacts {
        files: vec![("spectrum.csv".into(), csv.finish())],
        summary: json!({ "data": cfg.spectrum_data, "per_n": per_n }),
    })
}

pub fn run_moment_check(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let rep = tdesign_moment_check(cfg.n_qubits, cfg.trials, cfg.seed)?;
    let mut csv = Csv::new("moment,expected_re,expected_im,mean_re,mean_im,se_re,se_im,z_score,pass");
    let row = |csv: &mut Csv, m: &MomentCheck| {
        csv.row(vec![
            m.name.as_str().into(),
            m.expected[0].into(),
            m.expected[1].into(),
            m.mean[0].into(),
            m.mean[1].into(),
            m.se[0].into(),
            m.se[1].into(),
            m.z_score.into(),
            m.pass.into(),
        ])
    };
    row(&mut csv, &rep.first);
    row(&mut csv, &rep.second);
    Ok(Artifacts {
        files: vec![("moments.csv".into(), csv.finish())],
        summary: json!({ "pass": rep.pass, "n_qubits": rep.n_qubits, "trials": rep.trials }),
    })
}
