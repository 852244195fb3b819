//! Signed Pauli strings in packed symplectic form.
//!
//! A string is `i^phase * P_0 ⊗ P_1 ⊗ ...` where the letter on qubit `q` is read
//! from the bit pair `(x_q, z_q)`: `(0,0)=I`, `(1,0)=X`, `(1,1)=Y`, `(0,1)=Z`.
//! `Y` is the actual Pauli Y, not `XZ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_len, QheError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Index `j` of `σ_j` with σ_0 = I, σ_1 = X, σ_2 = Y, σ_3 = Z.
    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_index(j: usize) -> Self {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][j & 3]
    }

    pub fn letter(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.index()]
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

#[inline]
fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    pub fn from_paulis(ps: &[Pauli]) -> Self {
        let mut s = Self::identity(ps.len());
        for (q, &p) in ps.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// Builds from x/z bit slices with phase `i^phase`.
    pub fn from_bits(xs: &[bool], zs: &[bool], phase: u8) -> Result<Self> {
        check_len(xs.len(), zs.len())?;
        let mut s = Self::identity(xs.len());
        for q in 0..xs.len() {
            s.set(q, Pauli::from_bits(xs[q], zs[q]));
        }
        s.phase = phase & 3;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Exponent `k` of the global factor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, k: u8) -> Self {
        self.phase = k & 3;
        self
    }

    pub fn set_phase(&mut self, k: u8) {
        self.phase = k & 3;
    }

    pub fn negate(mut self) -> Self {
        self.phase = (self.phase + 2) & 3;
        self
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (xb, zb) = p.bits();
        let (w, b) = (q / 64, q % 64);
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn eq_up_to_phase(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// Only `Z`/`I` letters.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let mut par = 0u32;
        for i in 0..self.x.len().min(other.x.len()) {
            par ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        par == 0
    }

    /// `self · other`, with the phase tracked exactly in Z4.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        check_len(self.n, other.n)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let mut e = self.phase as i64 + other.phase as i64;
        let mut x = self.x.clone();
        let mut z = self.z.clone();
        for i in 0..x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            let plus = (y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2);
            let minus = (y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
            e += plus.count_ones() as i64 - minus.count_ones() as i64;
            x[i] ^= x2;
            z[i] ^= z2;
        }
        PauliString { n: self.n, x, z, phase: e.rem_euclid(4) as u8 }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut s = Self::identity(self.n + other.n);
        for q in 0..self.n {
            s.set(q, self.get(q));
        }
        for q in 0..other.n {
            s.set(self.n + q, other.get(q));
        }
        s.phase = (self.phase + other.phase) & 3;
        s
    }

    /// Places this string on `positions` of an `n`-qubit register.
    pub fn embed(&self, n: usize, positions: &[usize]) -> Result<Self> {
        check_len(self.n, positions.len())?;
        let mut s = Self::identity(n);
        for (q, &p) in positions.iter().enumerate() {
            if p >= n {
                return Err(QheError::QubitOutOfRange { index: p, n });
            }
            s.set(p, self.get(q));
        }
        s.phase = self.phase;
        Ok(s)
    }

    /// Letters on `positions`, phase kept.
    pub fn restrict(&self, positions: &[usize]) -> Self {
        let mut s = Self::identity(positions.len());
        for (q, &p) in positions.iter().enumerate() {
            s.set(q, self.get(p));
        }
        s.phase = self.phase;
        s
    }

    /// Enumerates all `4^n` unsigned strings in little-endian base-4 order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        let count = 1usize << (2 * n);
        (0..count).map(move |mut idx| {
            let mut s = PauliString::identity(n);
            for q in 0..n {
                s.set(q, Pauli::from_index(idx & 3));
                idx >>= 2;
            }
            s
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{sign}")?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for PauliString {
    type Err = QheError;

    /// Accepts an optional sign prefix (`+`, `-`, `+i`, `-i`, `i`) then letters.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else {
            (0, s)
        };
        if rest.is_empty() {
            return Err(QheError::Parse { line: 0, msg: format!("empty Pauli string '{s}'") });
        }
        let mut ps = Vec::with_capacity(rest.len());
        for c in rest.chars() {
            ps.push(match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => {
                    return Err(QheError::Parse { line: 0, msg: format!("bad Pauli letter '{other}'") })
                }
            });
        }
        Ok(PauliString::from_paulis(&ps).with_phase(phase))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_table() {
        assert_eq!(p("X").multiply(&p("Y")).unwrap(), p("+iZ"));
        assert_eq!(p("Y").multiply(&p("Z")).unwrap(), p("+iX"));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), p("+iY"));
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("Y").multiply(&p("Y")).unwrap(), p("I"));
        assert_eq!(p("X").multiply(&p("I")).unwrap(), p("X"));
    }

    #[test]
    fn parse_display_roundtrip() {
        for s in ["+XYZI", "-iZZ", "+iI", "-X"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn wide_strings_cross_word_boundary() {
        let mut a = PauliString::identity(130);
        a.set(0, Pauli::X);
        a.set(64, Pauli::Z);
        a.set(129, Pauli::Y);
        let mut b = PauliString::identity(130);
        b.set(64, Pauli::X);
        assert!(!a.commutes_with(&b));
        let c = a.multiply(&b).unwrap();
        assert_eq!(c.get(64), Pauli::Y);
        assert_eq!(c.phase(), 1);
        assert_eq!(a.weight(), 3);
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(p("XX").multiply(&p("X")).is_err());
    }
}
