//! The observable family `O = Σ_k o_k Z_k`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `O = Σ_k o_k Z_k`. Serialized as a plain JSON array of coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocalZObservable {
    coeffs: Vec<f64>,
}

/// Upper limit on sign patterns enumerated by [`LocalZObservable::delta_s`].
pub const DELTA_PATTERN_LIMIT: u64 = 1_000_000;

impl LocalZObservable {
    pub fn new(coeffs: Vec<f64>) -> Result<LocalZObservable> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("observable needs ≥ 1 qubit".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(LocalZObservable { coeffs })
    }

    /// `o_k` i.i.d. `N(0, variance)`.
    pub fn sample(n: usize, variance: f64, rng: &mut impl Rng) -> Result<LocalZObservable> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "variance {variance} must be positive"
            )));
        }
        let normal = Normal::new(0.0, variance.sqrt()).expect("valid normal");
        LocalZObservable::new((0..n).map(|_| normal.sample(rng)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scaled(&self, c: f64) -> LocalZObservable {
        LocalZObservable {
            coeffs: self.coeffs.iter().map(|o| o * c).collect(),
        }
    }

    /// `‖O‖₂ = Σ_k |o_k|`; all `Z_k` commute and the all-aligned basis state
    /// attains the sum.
    pub fn spectral_norm(&self) -> f64 {
        self.coeffs.iter().map(|o| o.abs()).sum()
    }

    /// `‖O‖_F² = 2^N Σ_k o_k²`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        (self.n_qubits() as f64).exp2() * self.coeffs.iter().map(|o| o * o).sum::<f64>()
    }

    /// Diagonal of `O` in the computational basis (qubit 0 = MSB).
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.n_qubits();
        (0..1usize << n)
            .map(|b| {
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, o)| if b >> (n - 1 - k) & 1 == 0 { *o } else { -*o })
                    .sum()
            })
            .collect()
    }

    /// `Δ_S = min (gᵀo)²` over `g ∈ {0,±1}^N` with `1 ≤ |supp g| ≤ s`, by
    /// exhaustive enumeration (supports by increasing size, lexicographic;
    /// stops at an exact zero).
    pub fn delta_s(&self, s: usize) -> Result<f64> {
        let n = self.n_qubits();
        if s == 0 || s > n {
            return Err(Error::InvalidArgument(format!("S={s} outside 1..={n}")));
        }
        let count: u64 = (1..=s).map(|w| binomial(n, w) << w).sum();
        if count > DELTA_PATTERN_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "Δ_S with N={n}, S={s} needs {count} patterns (limit {DELTA_PATTERN_LIMIT})"
            )));
        }
        let mut best = f64::INFINITY;
        for w in 1..=s {
            let mut support: Vec<usize> = (0..w).collect();
            loop {
                // The overall sign does not change the square; fix the first to +.
                for signs in 0..(1u32 << (w - 1)) {
                    let mut acc = self.coeffs[support[0]];
                    for (i, &q) in support.iter().enumerate().skip(1) {
                        if signs >> (i - 1) & 1 == 0 {
                            acc += self.coeffs[q];
                        } else {
                            acc -= self.coeffs[q];
                        }
                    }
                    let v = acc * acc;
                    if v < best {
                        best = v;
                        if best == 0.0 {
                            return Ok(0.0);
                        }
                    }
                }
                if !next_combination(&mut support, n) {
                    break;
                }
            }
        }
        Ok(best)
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Advances `c` to the next `k`-subset of `0..n` in lexicographic order.
pub(crate) fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn obs(c: &[f64]) -> LocalZObservable {
        LocalZObservable::new(c.to_vec()).unwrap()
    }

    /// Independent enumeration over all 3^N vectors g.
    fn delta_oracle(o: &[f64], s: usize) -> f64 {
        let n = o.len();
        let mut best = f64::INFINITY;
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let mut nnz = 0;
            let mut acc = 0.0;
            for &ok in o {
                let g = (c % 3) as i32 - 1;
                c /= 3;
                if g != 0 {
                    nnz += 1;
                    acc += g as f64 * ok;
                }
            }
            if (1..=s).contains(&nnz) {
                best = best.min(acc * acc);
            }
        }
        best
    }

    #[test]
    fn delta_examples() {
        assert_eq!(obs(&[1.0, 1.0]).delta_s(2).unwrap(), 0.0);
        assert_eq!(obs(&[1.0, 2.0, 4.0]).delta_s(1).unwrap(), 1.0);
        assert_eq!(obs(&[1.0, 2.0, 4.0]).delta_s(2).unwrap(), 1.0);
        assert!(obs(&[1.0, 2.0]).delta_s(0).is_err());
        assert!(obs(&[1.0, 2.0]).delta_s(3).is_err());
    }

    #[test]
    fn delta_matches_full_enumeration() {
        let mut r = rng::stream(5, &[]);
        for trial in 0..10 {
            let o = LocalZObservable::sample(6, 1.0, &mut r).unwrap();
            for s in 1..=6 {
                let a = o.delta_s(s).unwrap();
                let b = delta_oracle(o.coeffs(), s);
                assert!((a - b).abs() <= 1e-12 * b.max(1.0), "trial {trial} s {s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn delta_invariants() {
        let mut r = rng::stream(6, &[]);
        let o = LocalZObservable::sample(7, 1.0, &mut r).unwrap();
        let min_sq = o.coeffs().iter().map(|c| c * c).fold(f64::INFINITY, f64::min);
        assert_eq!(o.delta_s(1).unwrap(), min_sq);
        let mut prev = f64::INFINITY;
        for s in 1..=7 {
            let d = o.delta_s(s).unwrap();
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn delta_rejects_huge_enumerations() {
        let o = obs(&[1.5; 24]);
        assert!(o.delta_s(4).is_ok());
        assert!(o.delta_s(8).is_err());
    }

    #[test]
    fn norms_against_dense_diagonal() {
        let o = obs(&[0.5, -2.0, 1.25, 0.1]);
        let d = o.diagonal();
        let max_abs = d.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!((max_abs - o.spectral_norm()).abs() < 1e-12);
        let fro: f64 = d.iter().map(|x| x * x).sum();
        assert!((fro - o.frobenius_norm_sq()).abs() < 1e-12);
        assert!(d.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_and_validated() {
        let a = LocalZObservable::sample(5, 1.0, &mut rng::stream(1, &[])).unwrap();
        let b = LocalZObservable::sample(5, 1.0, &mut rng::stream(1, &[])).unwrap();
        assert_eq!(a, b);
        assert!(LocalZObservable::sample(5, 0.0, &mut rng::stream(1, &[])).is_err());
    }

    #[test]
    fn sampling_moments() {
        let mut r = rng::stream(9, &[]);
        for (n, var) in [(12usize, 1.0), (13, 8.0 / 13.0)] {
            let draws = 10_000 / n + 1;
            let xs: Vec<f64> = (0..draws)
                .flat_map(|_| LocalZObservable::sample(n, var, &mut r).unwrap().coeffs)
                .collect();
            let m = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / m;
            let m2 = xs.iter().map(|x| x * x).sum::<f64>() / m;
            assert!(mean.abs() < 5.0 * (var / m).sqrt());
            // Var(x²) = 2 var² for a centered normal.
            assert!((m2 - var).abs() < 5.0 * (2.0 * var * var / m).sqrt());
        }
    }

    #[test]
    fn json_is_a_plain_array() {
        let o = obs(&[1.0, -0.5]);
        assert_eq!(serde_json::to_string(&o).unwrap(), "[1.0,-0.5]");
        let back: LocalZObservable = serde_json::from_str("[1.0,-0.5]").unwrap();
        assert_eq!(back, o);
    }
}
