//! Exact algebra of N-qubit Pauli strings.
//!
//! A [`PauliString`] packs one 2-bit code per qubit (`0=I, 1=X, 2=Y, 3=Z`)
//! into a `u64`, so strings of up to 32 qubits multiply in O(1) word
//! operations. Phases are the exact fourth roots of unity, never floats.
//!
//! Text form is `"IXYZ"` with qubit 0 leftmost. The same qubit is the most
//! significant bit of a computational-basis index (see [`PauliString::x_mask`]).

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 32;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_code(code: u8) -> Pauli {
        match code & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    fn letter(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }
}

/// A fourth root of unity, stored as the exponent of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_power(k: u8) -> Phase {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    /// Exponent `k` with `phase = i^k`.
    pub fn power(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn conj(self) -> Phase {
        Phase::from_power(4 - self.power())
    }

    pub fn neg(self) -> Phase {
        Phase::from_power(self.power() + 2)
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_power(self.power() + rhs.power())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::PlusOne => "+1",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-1",
            Phase::MinusI => "-i",
        })
    }
}

/// N-qubit Pauli word without phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    codes: u64,
}

impl PauliString {
    /// The identity string on `n` qubits.
    pub fn identity(n: usize) -> Result<PauliString> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count {n} outside 1..={MAX_QUBITS}"
            )));
        }
        Ok(PauliString {
            n: n as u8,
            codes: 0,
        })
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<PauliString> {
        let mut p = PauliString::identity(letters.len())?;
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        Ok(p)
    }

    /// Builds a string from raw codes `0..=3`.
    pub fn from_codes(codes: &[u8]) -> Result<PauliString> {
        if let Some(&bad) = codes.iter().find(|&&c| c > 3) {
            return Err(Error::InvalidArgument(format!("Pauli code {bad} > 3")));
        }
        let letters: Vec<Pauli> = codes.iter().map(|&c| Pauli::from_code(c)).collect();
        PauliString::from_letters(&letters)
    }

    /// A string that is `letter` on qubit `q` and identity elsewhere.
    pub fn single(n: usize, q: usize, letter: Pauli) -> Result<PauliString> {
        let mut p = PauliString::identity(n)?;
        if q >= n {
            return Err(Error::IndexOutOfRange { index: q, len: n });
        }
        p.set(q, letter);
        Ok(p)
    }

    /// Enumerates all `4^n` strings in base-4 order (qubit 0 most significant).
    pub fn all(n: usize) -> Result<impl Iterator<Item = PauliString>> {
        PauliString::identity(n)?;
        if n > 16 {
            return Err(Error::InvalidArgument(format!(
                "refusing to enumerate 4^{n} strings"
            )));
        }
        Ok((0..(1u64 << (2 * n))).map(move |index| {
            let mut p = PauliString {
                n: n as u8,
                codes: 0,
            };
            for q in 0..n {
                let c = (index >> (2 * (n - 1 - q))) & 3;
                p.set(q, Pauli::from_code(c as u8));
            }
            p
        }))
    }

    pub fn n_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_code(((self.codes >> (2 * q)) & 3) as u8)
    }

    pub fn set(&mut self, q: usize, letter: Pauli) {
        debug_assert!(q < self.n_qubits());
        self.codes = (self.codes & !(3u64 << (2 * q))) | ((letter.code() as u64) << (2 * q));
    }

    pub fn letters(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n_qubits()).map(move |q| self.get(q))
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters().filter(|&l| l != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.codes == 0
    }

    /// Qubits where the string is not the identity.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits())
            .filter(|&q| self.get(q) != Pauli::I)
            .collect()
    }

    /// Basis-index mask of qubits carrying X or Y (these flip bits).
    pub fn x_mask(&self) -> usize {
        self.mask_where(|l| matches!(l, Pauli::X | Pauli::Y))
    }

    /// Basis-index mask of qubits carrying Z or Y (these contribute signs).
    pub fn z_mask(&self) -> usize {
        self.mask_where(|l| matches!(l, Pauli::Z | Pauli::Y))
    }

    pub fn y_count(&self) -> usize {
        self.letters().filter(|&l| l == Pauli::Y).count()
    }

    fn mask_where(&self, pred: impl Fn(Pauli) -> bool) -> usize {
        let n = self.n_qubits();
        (0..n)
            .filter(|&q| pred(self.get(q)))
            .fold(0usize, |m, q| m | (1usize << (n - 1 - q)))
    }

    /// Whether the two strings commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.anticommuting_qubits(other).is_multiple_of(2)
    }

    fn anticommuting_qubits(&self, other: &PauliString) -> usize {
        (0..self.n_qubits().min(other.n_qubits()))
            .filter(|&q| {
                let (a, b) = (self.get(q), other.get(q));
                a != Pauli::I && b != Pauli::I && a != b
            })
            .count()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<PauliString> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' | 'i' => Ok(Pauli::I),
                'X' | 'x' => Ok(Pauli::X),
                'Y' | 'y' => Ok(Pauli::Y),
                'Z' | 'z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("invalid Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::from_letters(&letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A Pauli word with an exact phase: `phase · σ_word`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub word: PauliString,
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}){}", self.phase, self.word)
    }
}

/// An integer multiple of a phased Pauli word, e.g. a commutator `2i·Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaledPauli {
    pub scale: i32,
    pub pauli: PhasedPauli,
}

/// Product of two single-qubit Paulis: `σ_a σ_b = phase · σ_c`.
pub fn letter_product(a: Pauli, b: Pauli) -> (Phase, Pauli) {
    use Pauli::*;
    match (a, b) {
        (I, p) | (p, I) => (Phase::PlusOne, p),
        (p, q) if p == q => (Phase::PlusOne, I),
        (X, Y) => (Phase::PlusI, Z),
        (Y, Z) => (Phase::PlusI, X),
        (Z, X) => (Phase::PlusI, Y),
        (Y, X) => (Phase::MinusI, Z),
        (Z, Y) => (Phase::MinusI, X),
        (X, Z) => (Phase::MinusI, Y),
        _ => unreachable!(),
    }
}

/// Exact product `σ_p σ_q`.
pub fn pauli_product(p: &PauliString, q: &PauliString) -> Result<PhasedPauli> {
    if p.n != q.n {
        return Err(Error::dim(p.n_qubits(), q.n_qubits()));
    }
    // The letter of the product is the XOR of the codes in the (x,z)-symplectic
    // picture; with codes 1,2,3 for X,Y,Z, XOR of codes gives it directly.
    let word = PauliString {
        n: p.n,
        codes: p.codes ^ q.codes,
    };
    let phase = (0..p.n_qubits()).fold(Phase::PlusOne, |acc, k| {
        acc * letter_product(p.get(k), q.get(k)).0
    });
    Ok(PhasedPauli { phase, word })
}

/// Entry of the single-qubit multiplication tensor `B_{ijk}` defined by
/// `σ_i σ_j = Σ_k B_{ijk} σ_k`. `None` stands for an exact zero.
pub type StructureEntry = Option<Phase>;

/// The `4×4×4` tensor with `B[i][j][k]` the coefficient of `σ_k` in `σ_i σ_j`.
pub fn structure_tensor() -> [[[StructureEntry; 4]; 4]; 4] {
    let mut b = [[[None; 4]; 4]; 4];
    for i in Pauli::ALL {
        for j in Pauli::ALL {
            let (phase, k) = letter_product(i, j);
            b[i as usize][j as usize][k as usize] = Some(phase);
        }
    }
    b
}

/// The tensor reshaped to a `4×16` matrix: row `k`, column `4i + j`.
pub fn structure_matrix() -> [[StructureEntry; 16]; 4] {
    let b = structure_tensor();
    let mut m = [[None; 16]; 4];
    for (i, bi) in b.iter().enumerate() {
        for (j, bij) in bi.iter().enumerate() {
            for (k, &e) in bij.iter().enumerate() {
                m[k][4 * i + j] = e;
            }
        }
    }
    m
}

/// `[Z_k, σ_p]`, which is zero when `p_k ∈ {I, Z}` and `2 Z_k σ_p` otherwise.
pub fn commutator_with_local_z(k: usize, p: &PauliString) -> Result<Option<ScaledPauli>> {
    let n = p.n_qubits();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    if matches!(p.get(k), Pauli::I | Pauli::Z) {
        return Ok(None);
    }
    let zk = PauliString::single(n, k, Pauli::Z)?;
    let pauli = pauli_product(&zk, p)?;
    Ok(Some(ScaledPauli { scale: 2, pauli }))
}
