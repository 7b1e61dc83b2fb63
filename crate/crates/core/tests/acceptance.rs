//! End-to-end acceptance checks, one test per criterion.
//!
//! Each test writes a single `criterion N: PASS|FAIL ...` line directly to
//! stdout (bypassing the harness capture) and then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qntk_lab::datasets::{haar_state, Connectivity};
use qntk_lab::experiments::{
    embedding_spectrum, haar_spectrum, run, run_sweep, train_qdl_grid, ExperimentConfig,
    ExperimentKind, SpectrumData,
};
use qntk_lab::kernel::{
    curse_experiment_qkm, gram, gram_sym, mse_loss, relative_generalization_error, KernelSystem,
    ObservableSpec, QkmCurseConfig, TargetSpec,
};
use qntk_lab::linalg::Matrix;
use qntk_lab::observable::LocalZObservable;
use qntk_lab::pauli::{pauli_product, Pauli, PauliString};
use qntk_lab::qnn::{curse_experiment_qnn, forward, jacobian, AnsatzSpec, Family, QnnCurseConfig};
use qntk_lab::rng;
use qntk_lab::stats::{linear_fit, mean, variance};
use rand::Rng as _;

fn report(id: u32, pass: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let within = elapsed <= limit;
    let verdict = if pass && within { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {id}: {verdict} ({detail}; {:.2}s of {:.0}s)\n",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(within, "criterion {id} exceeded its runtime budget");
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

type Dense = Vec<Vec<Complex64>>;

fn letter_matrix(p: Pauli) -> Dense {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    match p {
        Pauli::I => vec![vec![o, z], vec![z, o]],
        Pauli::X => vec![vec![z, o], vec![o, z]],
        Pauli::Y => vec![vec![z, -i], vec![i, z]],
        Pauli::Z => vec![vec![o, z], vec![z, -o]],
    }
}

fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Qubit 0 is the leftmost Kronecker factor.
fn dense_word(p: &PauliString) -> Dense {
    p.letters()
        .map(letter_matrix)
        .reduce(|acc, m| kron(&acc, &m))
        .unwrap()
}

#[test]
fn criterion_01_pauli_products_match_dense() {
    let start = Instant::now();
    let words: Vec<PauliString> = PauliString::all(2).unwrap().collect();
    let mut mismatches = 0;
    for p in &words {
        for q in &words {
            let prod = pauli_product(p, q).unwrap();
            let expect = dense_mul(&dense_word(p), &dense_word(q));
            let phase = prod.phase.to_complex();
            let got: Dense = dense_word(&prod.word)
                .into_iter()
                .map(|row| row.into_iter().map(|x| phase * x).collect())
                .collect();
            if got != expect {
                mismatches += 1;
            }
        }
    }
    let pairs = words.len() * words.len();
    report(
        1,
        pairs == 256 && mismatches == 0,
        start.elapsed(),
        secs(1),
        &format!("{pairs} pairs, {mismatches} mismatches"),
    );
}

#[test]
fn criterion_02_jacobian_matches_finite_differences() {
    let start = Instant::now();
    let (n, d, h) = (6, 24, 1e-5);
    let mut worst: f64 = 0.0;
    for inst in 0..20u64 {
        let mut r = rng::stream(2, &[inst]);
        let spec = AnsatzSpec {
            window_size: 1 + (inst as usize % 3),
            depth: d,
            connectivity: Connectivity::Cyclic,
            family: Family::Xyz,
        };
        let ansatz = spec.build(n, &mut r).unwrap();
        let theta: Vec<f64> = (0..d)
            .map(|_| r.random_range(-std::f64::consts::PI..=std::f64::consts::PI))
            .collect();
        let obs = LocalZObservable::sample(n, 1.0, &mut r).unwrap();
        let state = haar_state(n, &mut r).unwrap();
        let (j, _) = jacobian(&ansatz, &theta, std::slice::from_ref(&state), &obs).unwrap();
        for k in 0..d {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[k] += h;
            tm[k] -= h;
            let fd = (forward(&ansatz, &tp, &state, &obs).unwrap()
                - forward(&ansatz, &tm, &state, &obs).unwrap())
                / (2.0 * h);
            worst = worst.max((fd - j.row(k)[0]).abs());
        }
    }
    report(2, worst <= 1e-6, start.elapsed(), secs(30), &format!("max |error| {worst:.2e}"));
}

#[test]
fn criterion_03_haar_pauli_moments() {
    let start = Instant::now();
    let (n, samples) = (6, 2000);
    let states: Vec<_> = (0..samples)
        .map(|i| haar_state(n, &mut rng::stream(3, &[1, i as u64])).unwrap())
        .collect();
    let mut pick = rng::stream(3, &[2]);
    let mut strings = Vec::new();
    while strings.len() < 20 {
        let codes: Vec<u8> = (0..n).map(|_| pick.random_range(0..4u8)).collect();
        let p = PauliString::from_codes(&codes).unwrap();
        if !p.is_identity() && !strings.contains(&p) {
            strings.push(p);
        }
    }
    let expected = 1.0 / ((1u64 << n) as f64 + 1.0);
    let mut worst_z: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut failing = Vec::new();
    let mut pooled = 0.0;
    for p in &strings {
        let x: Vec<f64> = states.iter().map(|s| s.pauli_coefficient(p).unwrap()).collect();
        let var = variance(&x);
        pooled += var / strings.len() as f64;
        let z = mean(&x).abs() / (var / samples as f64).sqrt();
        let rel = (var - expected).abs() / expected;
        worst_z = worst_z.max(z);
        worst_rel = worst_rel.max(rel);
        if z > 5.0 || rel > 0.05 {
            failing.push(format!("{p} (z {z:.2}, var off {:.1}%)", 100.0 * rel));
        }
    }
    report(
        3,
        failing.is_empty(),
        start.elapsed(),
        secs(60),
        &format!(
            "worst mean z {worst_z:.2}, worst variance deviation {:.2}%, pooled deviation {:.2}%, failing [{}]",
            100.0 * worst_rel,
            100.0 * (pooled / expected - 1.0),
            failing.join(", ")
        ),
    );
}

#[test]
fn criterion_04_kernel_method_curse() {
    let start = Instant::now();
    let s = curse_experiment_qkm(&QkmCurseConfig {
        n_qubits: 10,
        train_size: 16,
        test_size: 16,
        trials: 50,
        target: TargetSpec::Heisenberg { time: 1.0 },
        observable: ObservableSpec::Sampled { variance: 1.0 },
        ridge: 0.0,
        seed: 4,
    })
    .unwrap();
    let pass = s.mean_trial_improvement <= 0.1 && s.bound_holds;
    report(
        4,
        pass,
        start.elapsed(),
        secs(300),
        &format!(
            "mean improvement {:.4}, margin {:.3e} ± {:.1e}",
            s.mean_trial_improvement, s.margin.value, s.margin.se
        ),
    );
}

#[test]
fn criterion_05_frozen_network_curse() {
    let start = Instant::now();
    let s = curse_experiment_qnn(&QnnCurseConfig {
        n_qubits: 6,
        train_size: 10,
        test_size: 10,
        trials: 50,
        ansatz: AnsatzSpec {
            window_size: 2,
            depth: 60,
            connectivity: Connectivity::Cyclic,
            family: Family::Xyz,
        },
        observable: ObservableSpec::Sampled { variance: 1.0 },
        ridge: 0.0,
        seed: 5,
    })
    .unwrap();
    report(
        5,
        s.bound_holds,
        start.elapsed(),
        secs(600),
        &format!(
            "E L_B(inf) {:.4} vs bound {:.4}, margin {:.3e} ± {:.1e}",
            s.loss_test_final.value, s.bound.value, s.margin.value, s.margin.se
        ),
    );
}

#[test]
fn criterion_06_largest_eigenvalue_scaling() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        n_list: vec![4, 6, 8],
        train_size: 12,
        window_sizes: vec![2],
        depths: vec![200],
        // The coefficient draw dominates the spread at N=4; ten trials leave
        // the ratio of means with ~50% relative noise.
        trials: 200,
        observable_variance: Some(1.0),
        spectrum_data: SpectrumData::Haar,
        seed: 6,
        ..ExperimentConfig::desk(ExperimentKind::Spectrum)
    };
    let trials = haar_spectrum(&cfg).unwrap();
    let mean_max = |n: usize| {
        let v: Vec<f64> = trials.iter().filter(|t| t.n_qubits == n).map(|t| t.report.lambda_max).collect();
        mean(&v)
    };
    let ratios = [mean_max(4) / mean_max(6), mean_max(6) / mean_max(8)];
    let ratios_ok = ratios.iter().all(|r| (2.5..=6.0).contains(r));
    let top: Vec<_> = trials.iter().filter(|t| t.n_qubits == 8).collect();
    let under = top.iter().filter(|t| t.report.pass_upper).count();
    report(
        6,
        ratios_ok && under == top.len(),
        start.elapsed(),
        secs(600),
        &format!(
            "ratios {:.2}, {:.2}; N=8 under 2x leading term in {under}/{}",
            ratios[0],
            ratios[1],
            top.len()
        ),
    );
}

#[test]
fn criterion_07_embedded_data_bracket() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        n_qubits: 8,
        train_size: 16,
        window_sizes: vec![3],
        depths: vec![2000],
        connectivity: Connectivity::AllToAll,
        family: Family::Xy,
        trials: 25,
        slack: 0.5,
        observable_variance: None,
        spectrum_data: SpectrumData::Embedding,
        seed: 7,
        ..ExperimentConfig::desk(ExperimentKind::Spectrum)
    };
    let trials = embedding_spectrum(&cfg).unwrap();
    let passed = trials.iter().filter(|t| t.report.pass).count();
    report(
        7,
        trials.len() == 25 && passed * 5 >= trials.len() * 4,
        start.elapsed(),
        secs(900),
        &format!("bracket held in {passed}/{}", trials.len()),
    );
}

fn qdl_config() -> ExperimentConfig {
    ExperimentConfig {
        n_qubits: 8,
        blocks: vec![1],
        window_sizes: vec![3],
        depths: vec![160],
        steps: 200,
        record_every: 10,
        seed: 8,
        ..ExperimentConfig::desk(ExperimentKind::Qdl)
    }
}

#[test]
fn criterion_08_linear_convergence() {
    let start = Instant::now();
    let cfg = ExperimentConfig { window_sizes: vec![1, 3], ..qdl_config() };
    let runs = train_qdl_grid(&cfg).unwrap();
    let run = |s: usize| runs.iter().find(|r| r.window_size == s).unwrap();
    let main = &run(3).trace;
    let (x, y): (Vec<f64>, Vec<f64>) = main
        .records
        .iter()
        .filter(|r| (10..=100).contains(&r.step))
        .map(|r| (r.step as f64, r.loss_train.ln()))
        .unzip();
    let fit = linear_fit(&x, &y).unwrap();
    let final_rel = main.relative_train_loss();
    let control = run(1).trace.relative_train_loss();
    report(
        8,
        final_rel <= 1e-2 && fit.r_squared >= 0.9 && control >= 1e-1,
        start.elapsed(),
        secs(1200),
        &format!(
            "S=3 relative loss {final_rel:.2e}, R² {:.3}; S=1 relative loss {control:.3}",
            fit.r_squared
        ),
    );
}

#[test]
fn criterion_09_structure_separation() {
    let start = Instant::now();
    let cfg = ExperimentConfig { blocks: vec![0, 8], ..qdl_config() };
    let runs = train_qdl_grid(&cfg).unwrap();
    let run = |l: usize| &runs.iter().find(|r| r.blocks == l).unwrap().trace;
    let improvement = |l: usize| {
        let t = run(l);
        let (a, b) = (t.initial().loss_test.unwrap(), t.last().loss_test.unwrap());
        (a - b) / a
    };
    let ratio = run(0).initial().lmin_k / run(8).initial().lmin_k;
    let (i0, i8) = (improvement(0), improvement(8));
    report(
        9,
        ratio >= 3.0 && i0 > i8,
        start.elapsed(),
        secs(1800),
        &format!("λ_min ratio {ratio:.2}; test improvement L=0 {i0:.3}, L=8 {i8:.3}"),
    );
}

#[test]
fn criterion_10_lazy_training() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        window_sizes: vec![4],
        depths: vec![60, 120, 240, 480],
        ..qdl_config()
    };
    let table = run_sweep(&cfg).unwrap();
    let fit = table.fits[0].theta_dist_vs_depth.unwrap();
    report(
        10,
        (-0.8..=-0.2).contains(&fit.slope),
        start.elapsed(),
        secs(1800),
        &format!("log-log slope {:.3} (R² {:.3})", fit.slope, fit.r_squared),
    );
}

/// Gauss–Jordan inverse, independent of the library's Cholesky path.
fn inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
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
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

#[test]
fn criterion_11_generalization_identity() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for inst in 0..10u64 {
        let mut r = rng::stream(11, &[inst]);
        let n = 4;
        let train: Vec<_> = (0..5).map(|_| haar_state(n, &mut r).unwrap()).collect();
        let test: Vec<_> = (0..3).map(|_| haar_state(n, &mut r).unwrap()).collect();
        let y_a: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let y_b: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let theta0: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let k = gram_sym(&train).unwrap();
        let kx: Matrix = gram(&test, &train).unwrap();
        let system = KernelSystem::fit_from(k.clone(), y_a.clone(), theta0.clone(), 0.0).unwrap();
        let expansion = relative_generalization_error(&system, &kx, &y_b).unwrap().relative_error;

        // Direct: z_B(0) = k_BA θ(0), z_B(∞) = k_BA k⁻¹ y_A.
        let dense: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|j| k.get(i, j)).collect()).collect();
        let kinv = inverse(&dense);
        let theta_inf: Vec<f64> = (0..5).map(|i| (0..5).map(|j| kinv[i][j] * y_a[j]).sum()).collect();
        let z0 = kx.matvec(&theta0).unwrap();
        let z_inf = kx.matvec(&theta_inf).unwrap();
        let r0: Vec<f64> = z0.iter().zip(&y_b).map(|(z, y)| z - y).collect();
        let r_inf: Vec<f64> = z_inf.iter().zip(&y_b).map(|(z, y)| z - y).collect();
        let direct = mse_loss(&r_inf) - mse_loss(&r0);
        worst = worst.max((expansion - direct).abs());
    }
    report(11, worst <= 1e-10, start.elapsed(), secs(1), &format!("max |difference| {worst:.2e}"));
}

/// Every kind at a size that keeps the whole sweep to seconds.
fn determinism_configs() -> Vec<ExperimentConfig> {
    ExperimentKind::ALL
        .iter()
        .map(|&kind| {
            let desk = ExperimentConfig::desk(kind);
            match kind {
                ExperimentKind::Qdl => ExperimentConfig {
                    n_qubits: 5,
                    train_size: 6,
                    test_size: 6,
                    blocks: vec![0, 1],
                    depths: vec![20],
                    steps: 12,
                    record_every: 5,
                    repeats: 2,
                    shots: Some(1000),
                    ..desk
                },
                ExperimentKind::Wine => ExperimentConfig {
                    train_size: 4,
                    test_size: 4,
                    depths: vec![8],
                    steps: 3,
                    record_every: 2,
                    ..desk
                },
                ExperimentKind::CurseQkm => ExperimentConfig { n_qubits: 6, trials: 6, train_size: 4, test_size: 4, ..desk },
                ExperimentKind::CurseQnn => ExperimentConfig { n_qubits: 4, trials: 6, ..desk },
                ExperimentKind::CoeffStats => ExperimentConfig { n_qubits: 5, sizes: vec![10, 20], ..desk },
                ExperimentKind::Spectrum => ExperimentConfig { n_list: vec![3, 4], trials: 3, depths: vec![30], ..desk },
                ExperimentKind::MomentCheck => ExperimentConfig { n_qubits: 2, trials: 200, ..desk },
            }
        })
        .collect()
}

#[test]
fn criterion_12_byte_identical_reruns() {
    let start = Instant::now();
    let pool = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
    let mut differing = Vec::new();
    let mut files = 0;
    for cfg in determinism_configs() {
        let first = run(&cfg).unwrap();
        let again = run(&cfg).unwrap();
        let single = pool(1).install(|| run(&cfg)).unwrap();
        let quad = pool(4).install(|| run(&cfg)).unwrap();
        files += first.files.len();
        if first.files.is_empty() || first != again || first.files != single.files || first.files != quad.files {
            differing.push(cfg.kind.name());
        }
    }
    report(
        12,
        differing.is_empty(),
        start.elapsed(),
        secs(600),
        &format!("{files} files across {} kinds, differing: {differing:?}", ExperimentKind::ALL.len()),
    );
}
