//! Gradient-descent experiments: dynamics learning, wine, depth sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Artifacts, Csv, ExperimentConfig, ExperimentKind};
use crate::datasets::{heisenberg_unitary, label_with_target, Dataset, Generator, Split, Target};
use crate::error::{Error, Result};
use crate::observable::LocalZObservable;
use crate::qnn::{train_gd, AnsatzSpec, LearningRate, TrainConfig, TrainingTrace};
use crate::rng::{self, tags};
use crate::stats::{log_log_fit, mean, LinearFit};

/// One grid point of a training experiment and its trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRun {
    pub window_size: usize,
    pub blocks: usize,
    pub depth: usize,
    pub repeat: usize,
    pub trace: TrainingTrace,
}

impl TrainingRun {
    pub fn max_smooth_c0(&self) -> Option<f64> {
        self.trace
            .records
            .iter()
            .filter_map(|r| r.smooth_c0)
            .fold(None, |m, c| Some(m.map_or(c, |m: f64| m.max(c))))
    }

    pub fn min_test_error(&self) -> Option<f64> {
        self.trace
            .records
            .iter()
            .filter_map(|r| r.test_error)
            .fold(None, |m, c| Some(m.map_or(c, |m: f64| m.min(c))))
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    s: usize,
    blocks: usize,
    depth: usize,
    repeat: usize,
}

fn grid(cfg: &ExperimentConfig, blocks: &[usize]) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &s in &cfg.window_sizes {
        for &l in blocks {
            for &d in &cfg.depths {
                for r in 0..cfg.repeats {
                    jobs.push(Job { s, blocks: l, depth: d, repeat: r });
                }
            }
        }
    }
    jobs
}

fn repeat_seed(cfg: &ExperimentConfig, repeat: usize) -> u64 {
    rng::mix(cfg.seed, &[tags::TRIAL, repeat as u64])
}

/// Unit-variance draws per repeat, scaled to the window's variance, so runs
/// that differ only in `S` share the coefficient signs and ratios.
fn observable(cfg: &ExperimentConfig, s: usize, seed: u64) -> Result<LocalZObservable> {
    match &cfg.observable {
        Some(o) => LocalZObservable::new(o.clone()),
        None => Ok(LocalZObservable::sample(
            cfg.n_qubits,
            1.0,
            &mut rng::stream(seed, &[tags::OBSERVABLE]),
        )?
        .scaled(cfg.variance_for(s).sqrt())),
    }
}

fn train_job(
    cfg: &ExperimentConfig,
    job: Job,
    train: &Dataset,
    test: &Dataset,
    obs: &LocalZObservable,
) -> Result<TrainingRun> {
    let seed = repeat_seed(cfg, job.repeat);
    let spec = AnsatzSpec {
        window_size: job.s,
        depth: job.depth,
        connectivity: cfg.connectivity,
        family: cfg.family,
    };
    let ansatz = spec.build(
        cfg.n_qubits,
        &mut rng::stream(seed, &[tags::ANSATZ, job.s as u64, job.depth as u64]),
    )?;
    let tc = TrainConfig {
        learning_rate: LearningRate::Scaled { eta0: cfg.eta0_for(job.blocks) },
        steps: cfg.steps,
        record_every: cfg.record_every,
        shots: cfg.shots,
        noise_std: cfg.noise_std,
        seed: rng::mix(seed, &[tags::NOISE, job.s as u64, job.blocks as u64, job.depth as u64]),
    };
    let trace = train_gd(&ansatz, train, Some(test), obs, &tc)?;
    Ok(TrainingRun {
        window_size: job.s,
        blocks: job.blocks,
        depth: job.depth,
        repeat: job.repeat,
        trace,
    })
}

/// Heisenberg-target learning on FLDC data over the `(S, L, D, repeat)` grid.
pub fn train_qdl_grid(cfg: &ExperimentConfig) -> Result<Vec<TrainingRun>> {
    cfg.validate()?;
    let n = cfg.n_qubits;
    let target = Target::Blocks(heisenberg_unitary(n, cfg.target_time)?);
    grid(cfg, &cfg.blocks)
        .into_par_iter()
        .map(|job| {
            let seed = repeat_seed(cfg, job.repeat);
            let obs = observable(cfg, job.s, seed)?;
            let data_seed = rng::mix(seed, &[tags::SPLIT, job.blocks as u64]);
            let gen = Generator::Fldc { blocks: job.blocks };
            let label = |split, size| -> Result<Dataset> {
                let d = Dataset::generate(&gen, n, size, split, data_seed)?;
                let y = label_with_target(&d.states, &target, &obs)?;
                d.with_labels(y)
            };
            let train = label(Split::Train, cfg.train_size)?;
            let test = label(Split::Test, cfg.test_size)?;
            train_job(cfg, job, &train, &test, &obs)
        })
        .collect()
}

/// Wine classification over the `(S, D, repeat)` grid.
pub fn train_wine_grid(cfg: &ExperimentConfig) -> Result<Vec<TrainingRun>> {
    cfg.validate()?;
    if cfg.train_size != cfg.test_size {
        return Err(Error::InvalidArgument("wine splits must have equal sizes".into()));
    }
    let gen = Generator::Wine { classes: cfg.classes };
    grid(cfg, &[0])
        .into_par_iter()
        .map(|job| {
            let seed = repeat_seed(cfg, job.repeat);
            let obs = observable(cfg, job.s, seed)?;
            let data_seed = rng::mix(seed, &[tags::SPLIT]);
            let train = Dataset::generate(&gen, cfg.n_qubits, cfg.train_size, Split::Train, data_seed)?;
            let test = Dataset::generate(&gen, cfg.n_qubits, cfg.test_size, Split::Test, data_seed)?;
            train_job(cfg, job, &train, &test, &obs)
        })
        .collect()
}

pub const SUMMARY_HEADER: &str = "S,L,D,repeat,eta0,eta,loss_train_rel,loss_test_rel,min_test_error,lmin_K0,lmax_K0,grad_norm0,theta_dist,max_smooth_C0";

fn summary_csv(runs: &[TrainingRun]) -> String {
    let mut csv = Csv::new(SUMMARY_HEADER);
    for r in runs {
        let first = r.trace.initial();
        let last = r.trace.last();
        csv.row(vec![
            r.window_size.into(),
            r.blocks.into(),
            r.depth.into(),
            r.repeat.into(),
            r.trace.eta0.into(),
            r.trace.eta.into(),
            (last.loss_train / first.loss_train).into(),
            last.loss_test.zip(first.loss_test).map(|(a, b)| a / b).into(),
            r.min_test_error().into(),
            first.lmin_k.into(),
            first.lmax_k.into(),
            first.grad_norm.into(),
            last.theta_dist.into(),
            r.max_smooth_c0().into(),
        ]);
    }
    csv.finish()
}

/// Repeat-averaged lazy-training quantities at one depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub window_size: usize,
    pub blocks: usize,
    pub depth: usize,
    pub theta_dist: f64,
    pub max_smooth_c0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub window_size: usize,
    pub blocks: usize,
    /// Log-log fit of `‖θ(T) − θ(0)‖` against `D`; `None` for one depth.
    pub theta_dist_vs_depth: Option<LinearFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub points: Vec<SweepPoint>,
    pub fits: Vec<SweepFit>,
}

/// Groups runs by `(S, L)` and fits the depth dependence of the final
/// parameter displacement.
pub fn sweep_table(runs: &[TrainingRun]) -> Result<SweepTable> {
    let mut keys: Vec<(usize, usize)> = runs.iter().map(|r| (r.window_size, r.blocks)).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut points = Vec::new();
    let mut fits = Vec::new();
    for (s, l) in keys {
        let mut depths: Vec<usize> = runs
            .iter()
            .filter(|r| (r.window_size, r.blocks) == (s, l))
            .map(|r| r.depth)
            .collect();
        depths.sort_unstable();
        depths.dedup();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &d in &depths {
            let group: Vec<&TrainingRun> = runs
                .iter()
                .filter(|r| (r.window_size, r.blocks, r.depth) == (s, l, d))
                .collect();
            let dist = mean(&group.iter().map(|r| r.trace.last().theta_dist).collect::<Vec<_>>());
            let c0: Vec<f64> = group.iter().filter_map(|r| r.max_smooth_c0()).collect();
            points.push(SweepPoint {
                window_size: s,
                blocks: l,
                depth: d,
                theta_dist: dist,
                max_smooth_c0: (!c0.is_empty()).then(|| mean(&c0)),
            });
            xs.push(d as f64);
            ys.push(dist);
        }
        let fit = if xs.len() >= 2 { Some(log_log_fit(&xs, &ys)?) } else { None };
        fits.push(SweepFit { window_size: s, blocks: l, theta_dist_vs_depth: fit });
    }
    Ok(SweepTable { points, fits })
}

/// Runs the dynamics-learning grid and tabulates the depth dependence.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepTable> {
    if cfg.depths.is_empty() {
        return Err(Error::InvalidArgument("depth list is empty".into()));
    }
    sweep_table(&train_qdl_grid(cfg)?)
}

fn sweep_csv(t: &SweepTable) -> String {
    let mut csv = Csv::new("S,L,D,theta_dist,max_smooth_C0");
    for p in &t.points {
        csv.row(vec![
            p.window_size.into(),
            p.blocks.into(),
            p.depth.into(),
            p.theta_dist.into(),
            p.max_smooth_c0.into(),
        ]);
    }
    csv.finish()
}

fn artifacts(kind: ExperimentKind, runs: &[TrainingRun]) -> Result<Artifacts> {
    let mut files = Vec::new();
    for r in runs {
        let name = match kind {
            ExperimentKind::Wine => {
                format!("trace_S{}_D{}_r{}.csv", r.window_size, r.depth, r.repeat)
            }
            _ => format!(
                "trace_S{}_L{}_D{}_r{}.csv",
                r.window_size, r.blocks, r.depth, r.repeat
            ),
        };
        files.push((name, r.trace.to_csv()));
    }
    files.push(("summary.csv".into(), summary_csv(runs)));
    let table = sweep_table(runs)?;
    if table.points.len() > table.fits.len() {
        files.push(("sweep.csv".into(), sweep_csv(&table)));
    }
    let finals: Vec<_> = runs
        .iter()
        .map(|r| {
            json!({
                "window_size": r.window_size,
                "blocks": r.blocks,
                "depth": r.depth,
                "repeat": r.repeat,
                "relative_train_loss": r.trace.relative_train_loss(),
                "min_test_error": r.min_test_error(),
            })
        })
        .collect();
    Ok(Artifacts { files, summary: json!({ "runs": finals, "sweep": table }) })
}

pub fn run_qdl(cfg: &ExperimentConfig) -> Result<Artifacts> {
    artifacts(ExperimentKind::Qdl, &train_qdl_grid(cfg)?)
}

pub fn run_wine(cfg: &ExperimentConfig) -> Result<Artifacts> {
    artifacts(ExperimentKind::Wine, &train_wine_grid(cfg)?)
}

/// Number of rows a trace CSV has for `steps` and `every`.
pub fn trace_rows(steps: usize, every: usize) -> usize {
    steps.div_ceil(every) + 1
}
