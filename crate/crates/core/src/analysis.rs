//! Pauli-coefficient statistics, kernel spectrum bounds, smoothness and
//! Haar moment self-tests.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{haar_unitary, WindowAssignment};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, sym_eig, CMatrix, Matrix, SymMatrix};
use crate::observable::LocalZObservable;
use crate::pauli::{Pauli, PauliString};
use crate::qnn::Family;
use crate::rng::{self, tags};
use crate::state::StateVector;
use crate::stats::{mean, variance};

pub const POWER_ITERATIONS: usize = 200;
pub const POWER_TOL: f64 = 1e-8;

/// Pauli coefficients `Tr[σ_i ρ_a]` of a dataset with per-row statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffStats {
    pub n_qubits: usize,
    pub strings: Vec<PauliString>,
    /// How many windows produced each string.
    pub multiplicity: Vec<usize>,
    /// Rows index strings, columns index samples.
    #[serde(skip)]
    pub matrix: Option<Matrix>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    /// Unbiased variance estimate per row.
    pub alpha: Vec<f64>,
    /// Rows with zero spread; left out of whitening.
    pub constant_rows: Vec<usize>,
    /// Extremes of `‖A'_{:,a}‖ / √rows` over samples, `A'` whitened by `alpha`.
    pub whitened_min: f64,
    pub whitened_max: f64,
    /// Haar value of every row variance, `1/(2^N + 1)`.
    pub haar_reference: f64,
}

impl CoeffStats {
    pub fn alpha_min(&self) -> f64 {
        self.whitened_alphas().fold(f64::INFINITY, f64::min)
    }

    pub fn alpha_max(&self) -> f64 {
        self.whitened_alphas().fold(f64::NEG_INFINITY, f64::max)
    }

    fn whitened_alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.alpha
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.constant_rows.contains(i))
            .map(|(_, a)| *a)
    }
}

/// Window strings with letters from `family` on every window qubit.
///
/// For `{X,Y,Z}` the all-`Z` word is dropped (it commutes with the
/// observable), leaving `3^S − 1` words per window; `{X,Y}` gives `2^S`.
/// Strings shared by overlapping windows appear once with a multiplicity.
pub fn bracket_index_set(
    windows: &WindowAssignment,
    family: Family,
) -> Result<(Vec<PauliString>, Vec<usize>)> {
    let letters = family.letters();
    let s = windows.size;
    let words = letters.len().pow(s as u32);
    let mut counts: BTreeMap<PauliString, usize> = BTreeMap::new();
    let mut order = Vec::new();
    for w in &windows.windows {
        for code in 0..words {
            let mut p = PauliString::identity(windows.n_qubits)?;
            let mut c = code;
            for &q in w {
                p.set(q, letters[c % letters.len()]);
                c /= letters.len();
            }
            if family == Family::Xyz && w.iter().all(|&q| p.get(q) == Pauli::Z) {
                continue;
            }
            let e = counts.entry(p).or_insert(0);
            if *e == 0 {
                order.push(p);
            }
            *e += 1;
        }
    }
    let mult = order.iter().map(|p| counts[p]).collect();
    Ok((order, mult))
}

/// Coefficient matrix over the index set of [`bracket_index_set`].
pub fn coeff_matrix(
    states: &[StateVector],
    windows: &WindowAssignment,
    family: Family,
) -> Result<CoeffStats> {
    let (strings, mult) = bracket_index_set(windows, family)?;
    coeff_stats(states, strings, mult)
}

/// Coefficient statistics over an explicit list of strings.
pub fn coeff_stats(
    states: &[StateVector],
    strings: Vec<PauliString>,
    multiplicity: Vec<usize>,
) -> Result<CoeffStats> {
    if strings.is_empty() {
        return Err(Error::InvalidArgument("empty index set".into()));
    }
    if multiplicity.len() != strings.len() {
        return Err(Error::dim(strings.len(), multiplicity.len()));
    }
    if states.len() < 2 {
        return Err(Error::InvalidArgument("coefficient statistics need ≥ 2 samples".into()));
    }
    let n = states[0].n_qubits();
    let rows = strings
        .par_iter()
        .map(|p| states.iter().map(|s| s.pauli_coefficient(p)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    let m: Vec<f64> = rows.iter().map(|r| mean(r)).collect();
    let alpha: Vec<f64> = rows.iter().map(|r| variance(r)).collect();
    let sd: Vec<f64> = alpha.iter().map(|a| a.sqrt()).collect();
    // Spread below round-off counts as constant.
    let constant_rows: Vec<usize> = (0..strings.len()).filter(|&i| !(alpha[i] > 1e-24)).collect();

    let weight: f64 = (0..strings.len())
        .filter(|i| !constant_rows.contains(i))
        .map(|i| multiplicity[i] as f64)
        .sum();
    let (mut lo, mut hi) = (f64::NAN, f64::NAN);
    if weight > 0.0 {
        let norms: Vec<f64> = (0..states.len())
            .map(|a| {
                let sq: f64 = (0..strings.len())
                    .filter(|i| !constant_rows.contains(i))
                    .map(|i| multiplicity[i] as f64 * rows[i][a] * rows[i][a] / alpha[i])
                    .sum();
                (sq / weight).sqrt()
            })
            .collect();
        lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
        hi = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    let matrix = Matrix::from_fn(strings.len(), states.len(), |i, a| rows[i][a]);
    Ok(CoeffStats {
        n_qubits: n,
        strings,
        multiplicity,
        matrix: Some(matrix),
        mean: m,
        sd,
        alpha,
        constant_rows,
        whitened_min: lo,
        whitened_max: hi,
        haar_reference: 1.0 / ((n as f64).exp2() + 1.0),
    })
}

/// Per-row `|mean / SD|`, the signature of a nonzero coefficient mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanStatistic {
    /// `None` for constant rows.
    pub per_row: Vec<Option<f64>>,
    /// Average over non-constant rows of the requested weight.
    pub summary: f64,
    pub rows_used: usize,
    pub constant_rows: Vec<usize>,
}

pub fn mean_statistic(stats: &CoeffStats, weight: usize) -> Result<MeanStatistic> {
    let per_row: Vec<Option<f64>> = (0..stats.strings.len())
        .map(|i| {
            if stats.constant_rows.contains(&i) {
                None
            } else {
                Some((stats.mean[i] / stats.sd[i]).abs())
            }
        })
        .collect();
    let used: Vec<f64> = per_row
        .iter()
        .zip(&stats.strings)
        .filter(|(_, p)| p.weight() == weight)
        .filter_map(|(v, _)| *v)
        .collect();
    if used.is_empty() {
        return Err(Error::Undefined(format!("no non-constant rows of weight {weight}")));
    }
    Ok(MeanStatistic {
        summary: mean(&used),
        rows_used: used.len(),
        per_row,
        constant_rows: stats.constant_rows.clone(),
    })
}

/// Empirical kernel eigenvalues against a bound bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub quantity: String,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Bracket before slack; `None` where the statement gives no side.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub parameters: BTreeMap<String, f64>,
    /// Slack used for `pass`.
    pub k: f64,
    /// Smallest slack that would bracket the empirical values.
    pub k_fitted: f64,
    pub delta: f64,
    pub pass_lower: bool,
    pub pass_upper: bool,
    pub pass: bool,
    /// The lower side is zero and says nothing.
    pub vacuous: bool,
}

fn bracket_report(
    quantity: &str,
    k_mat: &SymMatrix,
    lower: Option<f64>,
    upper: Option<f64>,
    k: f64,
    delta: f64,
    parameters: BTreeMap<String, f64>,
) -> BoundReport {
    let eig = sym_eig(k_mat);
    let (lmin, lmax) = (eig.min(), eig.max());
    let need_lo = lower.filter(|l| *l > 0.0).map_or(0.0, |l| 1.0 - lmin / l);
    let need_hi = upper.filter(|u| *u > 0.0).map_or(0.0, |u| lmax / u - 1.0);
    let pass_lower = lower.is_none_or(|l| lmin >= (1.0 - k) * l);
    let pass_upper = upper.is_none_or(|u| lmax <= (1.0 + k) * u);
    BoundReport {
        quantity: quantity.into(),
        lambda_min: lmin,
        lambda_max: lmax,
        lower,
        upper,
        parameters,
        k,
        k_fitted: need_lo.max(need_hi).max(0.0),
        delta,
        pass_lower,
        pass_upper,
        pass: pass_lower && pass_upper,
        vacuous: lower == Some(0.0),
    }
}

/// Largest kernel eigenvalue on Haar data against `‖O‖_F²/4^N`.
///
/// `pass` means `λ_max ≤ 2 ‖O‖_F²/4^N`. The reported constant `C` is the
/// one that makes `λ_max = (‖O‖_F²/4^N)(1 + C|𝒜|√ln|𝒜| / (2^N δ))` exact.
pub fn haar_lambda_max_bound(
    k: &SymMatrix,
    obs: &LocalZObservable,
    size_a: usize,
    delta: f64,
) -> BoundReport {
    let n = obs.n_qubits();
    let leading = obs.frobenius_norm_sq() / (2.0 * n as f64).exp2();
    let mut params = BTreeMap::new();
    params.insert("leading".into(), leading);
    params.insert("n_qubits".into(), n as f64);
    params.insert("size_a".into(), size_a as f64);
    params.insert("frobenius_sq".into(), obs.frobenius_norm_sq());
    let mut r = bracket_report("lambda_max_haar", k, None, Some(leading), 1.0, delta, params);
    let spread = size_a as f64 * (size_a as f64).ln().max(0.0).sqrt();
    let c = if leading > 0.0 && spread > 0.0 {
        (r.lambda_max / leading - 1.0) * (n as f64).exp2() * delta / spread
    } else {
        f64::NAN
    };
    r.parameters.insert("fitted_c".into(), c);
    r
}

/// Eigenvalues of `K(0)` against the coefficient-statistics bracket.
///
/// `{X,Y,Z}`: `(1−k)Δ_S α_min A'²_min ≤ λ ≤ (1+k)‖O‖₂² α_max A'²_max`.
/// `{X,Y}` (qubit-embedded data): `(1−k)Δ_S/2^S ≤ λ ≤ (1+k)‖O‖₂²/2^S`.
pub fn initial_kernel_bracket(
    k0: &SymMatrix,
    stats: Option<&CoeffStats>,
    obs: &LocalZObservable,
    family: Family,
    s: usize,
    k: f64,
    delta: f64,
) -> Result<BoundReport> {
    let delta_s = obs.delta_s(s)?;
    let norm2 = obs.spectral_norm().powi(2);
    let mut params = BTreeMap::new();
    params.insert("delta_s".into(), delta_s);
    params.insert("spectral_norm_sq".into(), norm2);
    params.insert("window_size".into(), s as f64);
    let (lower, upper) = match family {
        Family::Xyz => {
            let st = stats.ok_or_else(|| {
                Error::InvalidArgument("the {X,Y,Z} bracket needs coefficient statistics".into())
            })?;
            let (amin, amax) = (st.alpha_min(), st.alpha_max());
            params.insert("alpha_min".into(), amin);
            params.insert("alpha_max".into(), amax);
            params.insert("whitened_min".into(), st.whitened_min);
            params.insert("whitened_max".into(), st.whitened_max);
            (
                delta_s * amin * st.whitened_min.powi(2),
                norm2 * amax * st.whitened_max.powi(2),
            )
        }
        Family::Xy => {
            let w = (s as f64).exp2();
            (delta_s / w, norm2 / w)
        }
    };
    if delta_s == 0.0 {
        log::warn!("Δ_S = 0: the lower bracket is vacuous");
    }
    Ok(bracket_report("lambda_k0", k0, Some(lower), Some(upper), k, delta, params))
}

/// `C₀ = (‖J_now − J_init‖₂ / (√D ‖θ_now − θ_init‖₂))²`.
pub fn smoothness_coefficient(
    j_now: &Matrix,
    j_init: &Matrix,
    theta_now: &[f64],
    theta_init: &[f64],
) -> Result<f64> {
    if theta_now.len() != theta_init.len() {
        return Err(Error::dim(theta_init.len(), theta_now.len()));
    }
    if j_now.rows() != theta_now.len() {
        return Err(Error::dim(theta_now.len(), j_now.rows()));
    }
    let diff = j_now.sub(j_init)?;
    let dtheta: f64 = theta_now
        .iter()
        .zip(theta_init)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if dtheta == 0.0 {
        return Err(Error::Undefined("smoothness needs a nonzero parameter displacement".into()));
    }
    let sigma = spectral_norm(&diff, POWER_ITERATIONS, POWER_TOL);
    Ok((sigma / ((theta_now.len() as f64).sqrt() * dtheta)).powi(2))
}

/// Monte Carlo mean of a complex trace against its Haar value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub name: String,
    pub expected: [f64; 2],
    pub mean: [f64; 2],
    pub se: [f64; 2],
    /// Largest `|mean − expected| / se` over real and imaginary parts.
    pub z_score: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n_qubits: usize,
    pub trials: usize,
    pub first: MomentCheck,
    pub second: MomentCheck,
    pub pass: bool,
}

/// Operators the moment identities are evaluated on.
#[derive(Debug, Clone)]
pub struct MomentOperators {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub d: CMatrix,
}

impl MomentOperators {
    /// Independent Ginibre matrices scaled to unit entry variance.
    pub fn random(n: usize, rng: &mut impl Rng) -> Result<MomentOperators> {
        let dim = 1usize << n;
        let mut draw = || {
            CMatrix::from_rows(
                dim,
                (0..dim * dim)
                    .map(|_| {
                        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
                            / std::f64::consts::SQRT_2
                    })
                    .collect(),
            )
        };
        Ok(MomentOperators { a: draw()?, b: draw()?, c: draw()?, d: draw()? })
    }
}

fn trace_product(ms: &[&CMatrix]) -> Result<Complex64> {
    let mut acc = ms[0].clone();
    for m in &ms[1..] {
        acc = acc.matmul(m)?;
    }
    Ok(acc.trace())
}

/// Haar values of `E Tr[W A W† B]` and `E Tr[W A W† B W C W† D]`.
pub fn haar_moments(ops: &MomentOperators) -> Result<(Complex64, Complex64)> {
    let MomentOperators { a, b, c, d } = ops;
    let dim = a.dim() as f64;
    let first = a.trace() * b.trace() / dim;
    let tr_ac = trace_product(&[a, c])?;
    let tr_bd = trace_product(&[b, d])?;
    let second = (a.trace() * c.trace() * tr_bd + tr_ac * b.trace() * d.trace())
        / (dim * dim - 1.0)
        - (tr_ac * tr_bd + a.trace() * b.trace() * c.trace() * d.trace())
            / (dim * (dim * dim - 1.0));
    Ok((first, second))
}

fn check(name: &str, samples: &[Complex64], expected: Complex64, sigmas: f64) -> MomentCheck {
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let n = samples.len() as f64;
    let mean_ = [mean(&re), mean(&im)];
    let se = [(variance(&re) / n).sqrt(), (variance(&im) / n).sqrt()];
    let exp = [expected.re, expected.im];
    let z = (0..2)
        .map(|i| {
            let gap = (mean_[i] - exp[i]).abs();
            // An exact identity has zero spread; compare to round-off.
            let scale = se[i].max(1e-9 * (1.0 + exp[i].abs()));
            gap / scale
        })
        .fold(0.0, f64::max);
    MomentCheck {
        name: name.into(),
        expected: exp,
        mean: mean_,
        se,
        z_score: z,
        pass: z <= sigmas,
    }
}

pub const MAX_MOMENT_QUBITS: usize = 6;

/// Checks both Haar trace identities on the given operators to 5σ.
pub fn moment_check_with(
    ops: &MomentOperators,
    trials: usize,
    seed: u64,
) -> Result<MomentReport> {
    let dim = ops.a.dim();
    let n = dim.trailing_zeros() as usize;
    if n > MAX_MOMENT_QUBITS || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "moment check takes at most {MAX_MOMENT_QUBITS} qubits"
        )));
    }
    if trials < 2 {
        return Err(Error::InvalidArgument("moment check needs ≥ 2 trials".into()));
    }
    let (e1, e2) = haar_moments(ops)?;
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(Complex64, Complex64)> {
            let w = haar_unitary(n, &mut rng::stream(seed, &[tags::TRIAL, t as u64]))?;
            let wd = w.adjoint();
            let waw = w.matmul(&ops.a)?.matmul(&wd)?;
            let wcw = w.matmul(&ops.c)?.matmul(&wd)?;
            let first = waw.matmul(&ops.b)?.trace();
            let second = trace_product(&[&waw, &ops.b, &wcw, &ops.d])?;
            Ok((first, second))
        })
        .collect::<Result<Vec<_>>>()?;
    let s1: Vec<Complex64> = samples.iter().map(|s| s.0).collect();
    let s2: Vec<Complex64> = samples.iter().map(|s| s.1).collect();
    let first = check("first_moment", &s1, e1, 5.0);
    let second = check("second_moment", &s2, e2, 5.0);
    Ok(MomentReport {
        n_qubits: n,
        trials,
        pass: first.pass && second.pass,
        first,
        second,
    })
}

/// [`moment_check_with`] on random fixed operators drawn from `seed`.
pub fn tdesign_moment_check(n: usize, trials: usize, seed: u64) -> Result<MomentReport> {
    if n == 0 || n > MAX_MOMENT_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "moment check takes 1..={MAX_MOMENT_QUBITS} qubits"
        )));
    }
    let ops = MomentOperators::random(n, &mut rng::stream(seed, &[tags::OBSERVABLE]))?;
    moment_check_with(&ops, trials, seed)
}
