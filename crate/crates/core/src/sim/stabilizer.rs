//! Stabilizer states, pure or mixed: `ρ = 2^-n Π (I + g)` over independent,
//! commuting Hermitian generators `g`.

use rand::{Rng, RngCore};

use crate::clifford::{CliffordOp, Gate};
use crate::error::{check_len, QheError, Result};
use crate::pauli::{Pauli, PauliString};
use crate::sim::dense::{pauli_matrix, CMatrix, DensityMatrix};

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerState {
    n: usize,
    gens: Vec<PauliString>,
}

fn bit(v: &[u64], i: usize) -> bool {
    (v[i / 64] >> (i % 64)) & 1 == 1
}

fn flip(v: &mut [u64], i: usize) {
    v[i / 64] ^= 1 << (i % 64);
}

impl StabilizerState {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        let gens = (0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect();
        StabilizerState { n, gens }
    }

    /// Computational basis state with the given bits.
    pub fn basis(bits: &[bool]) -> Self {
        let n = bits.len();
        let gens = bits
            .iter()
            .enumerate()
            .map(|(q, &b)| {
                let z = PauliString::single(n, q, Pauli::Z);
                if b {
                    z.negate()
                } else {
                    z
                }
            })
            .collect();
        StabilizerState { n, gens }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        StabilizerState { n, gens: Vec::new() }
    }

    /// Builds from generators after checking they are Hermitian, commute and
    /// are independent.
    pub fn from_generators(n: usize, gens: Vec<PauliString>) -> Result<Self> {
        let mut st = StabilizerState::maximally_mixed(n);
        for g in gens {
            check_len(n, g.n_qubits())?;
            if !g.is_hermitian() {
                return Err(QheError::InvalidArgument(format!("generator {g} is not Hermitian")));
            }
            if let Some(h) = st.gens.iter().find(|h| !h.commutes_with(&g)) {
                return Err(QheError::InvalidArgument(format!("generators {h} and {g} anticommute")));
            }
            if st.decompose(&g).is_some() {
                return Err(QheError::InvalidArgument(format!("generator {g} is dependent")));
            }
            st.gens.push(g);
        }
        Ok(st)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.gens
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn is_pure(&self) -> bool {
        self.gens.len() == self.n
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.check(self.n)?;
        for s in &mut self.gens {
            g.conjugate_in_place(s);
        }
        Ok(())
    }

    pub fn apply_clifford(&mut self, c: &CliffordOp) -> Result<()> {
        check_len(self.n, c.n_qubits())?;
        for s in &mut self.gens {
            *s = c.conjugate(s)?;
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        check_len(self.n, p.n_qubits())?;
        for s in &mut self.gens {
            if !s.commutes_with(p) {
                *s = s.clone().negate();
            }
        }
        Ok(())
    }

    /// Finds generator indices whose product equals `p` up to phase.
    fn decompose(&self, p: &PauliString) -> Option<Vec<usize>> {
        let n = self.n;
        let r = self.gens.len();
        let cw = r.div_ceil(64).max(1);
        let row_of = |s: &PauliString| -> Vec<u64> {
            let mut v = s.x_words().to_vec();
            v.extend_from_slice(s.z_words());
            v
        };
        let mut rows: Vec<(Vec<u64>, Vec<u64>)> = self
            .gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let mut c = vec![0u64; cw];
                flip(&mut c, i);
                (row_of(g), c)
            })
            .collect();
        let xw = p.x_words().len();
        let col_index = |k: usize| if k < n { k } else { xw * 64 + (k - n) };
        let mut target = row_of(p);
        let mut combo = vec![0u64; cw];
        let mut pivot_row = 0;
        for k in 0..2 * n {
            let c = col_index(k);
            let Some(pr) = (pivot_row..rows.len()).find(|&i| bit(&rows[i].0, c)) else {
                continue;
            };
            rows.swap(pivot_row, pr);
            let (prow, pcombo) = rows[pivot_row].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != pivot_row && bit(&row.0, c) {
                    row.0.iter_mut().zip(&prow).for_each(|(a, b)| *a ^= b);
                    row.1.iter_mut().zip(&pcombo).for_each(|(a, b)| *a ^= b);
                }
            }
            if bit(&target, c) {
                target.iter_mut().zip(&prow).for_each(|(a, b)| *a ^= b);
                combo.iter_mut().zip(&pcombo).for_each(|(a, b)| *a ^= b);
            }
            pivot_row += 1;
        }
        if target.iter().any(|&w| w != 0) {
            return None;
        }
        Some((0..r).filter(|&i| bit(&combo, i)).collect())
    }

    fn product(&self, idx: &[usize]) -> PauliString {
        let mut acc = PauliString::identity(self.n);
        for &i in idx {
            acc = acc.mul_unchecked(&self.gens[i]);
        }
        acc
    }

    /// `Some(v)` if `⟨p⟩ = v ∈ {±1}` deterministically, `None` if the outcome is
    /// uniformly random.
    pub fn expectation_sign(&self, p: &PauliString) -> Result<Option<bool>> {
        check_len(self.n, p.n_qubits())?;
        if !p.is_hermitian() {
            return Err(QheError::InvalidArgument(format!("{p} is not Hermitian")));
        }
        if self.gens.iter().any(|g| !g.commutes_with(p)) {
            return Ok(None);
        }
        Ok(self.decompose(p).map(|idx| {
            let prod = self.product(&idx);
            // true means eigenvalue -1
            prod.phase() != p.phase()
        }))
    }

    /// Projects onto outcome `outcome` (false = +1) and returns its probability.
    pub fn project_pauli(&mut self, p: &PauliString, outcome: bool) -> Result<f64> {
        check_len(self.n, p.n_qubits())?;
        if !p.is_hermitian() {
            return Err(QheError::InvalidArgument(format!("{p} is not Hermitian")));
        }
        let signed = if outcome { p.clone().negate() } else { p.clone() };
        if let Some(j) = self.gens.iter().position(|g| !g.commutes_with(p)) {
            let gj = self.gens[j].clone();
            for (k, g) in self.gens.iter_mut().enumerate() {
                if k != j && !g.commutes_with(p) {
                    *g = g.mul_unchecked(&gj);
                }
            }
            self.gens[j] = signed;
            return Ok(0.5);
        }
        match self.decompose(p) {
            Some(idx) => {
                let minus = self.product(&idx).phase() != p.phase();
                if minus == outcome {
                    Ok(1.0)
                } else {
                    Err(QheError::ZeroProbability)
                }
            }
            None => {
                self.gens.push(signed);
                Ok(0.5)
            }
        }
    }

    pub fn measure_pauli(&mut self, p: &PauliString, rng: &mut dyn RngCore) -> Result<(bool, f64)> {
        let outcome = match self.expectation_sign(p)? {
            Some(v) => v,
            None => rng.gen(),
        };
        let prob = self.project_pauli(p, outcome)?;
        Ok((outcome, prob))
    }

    pub fn measure_z(&mut self, q: usize, rng: &mut dyn RngCore) -> Result<bool> {
        if q >= self.n {
            return Err(QheError::QubitOutOfRange { index: q, n: self.n });
        }
        Ok(self.measure_pauli(&PauliString::single(self.n, q, Pauli::Z), rng)?.0)
    }

    /// Fully depolarizes qubit `q`: keeps the subgroup acting trivially on it.
    pub fn depolarize(&mut self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(QheError::QubitOutOfRange { index: q, n: self.n });
        }
        for use_x in [true, false] {
            let has = |g: &PauliString| if use_x { g.x_bit(q) } else { g.z_bit(q) };
            if let Some(j) = self.gens.iter().position(has) {
                let pivot = self.gens.remove(j);
                for g in &mut self.gens {
                    if has(g) {
                        *g = g.mul_unchecked(&pivot);
                    }
                }
            }
        }
        Ok(())
    }

    /// Appends `k` fresh qubits in `|0⟩`.
    pub fn extend(&mut self, k: usize) {
        let n = self.n + k;
        let positions: Vec<usize> = (0..self.n).collect();
        let mut gens: Vec<PauliString> =
            self.gens.iter().map(|g| g.embed(n, &positions).expect("in range")).collect();
        gens.extend((self.n..n).map(|q| PauliString::single(n, q, Pauli::Z)));
        self.n = n;
        self.gens = gens;
    }

    pub fn tensor(&self, other: &StabilizerState) -> StabilizerState {
        let n = self.n + other.n;
        let left: Vec<usize> = (0..self.n).collect();
        let right: Vec<usize> = (self.n..n).collect();
        let mut gens: Vec<PauliString> = self.gens.iter().map(|g| g.embed(n, &left).expect("in range")).collect();
        gens.extend(other.gens.iter().map(|g| g.embed(n, &right).expect("in range")));
        StabilizerState { n, gens }
    }

    /// Reduced state on `keep`, in the listed order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<StabilizerState> {
        let mut st = self.clone();
        for q in 0..self.n {
            if !keep.contains(&q) {
                st.depolarize(q)?;
            }
        }
        for &q in keep {
            if q >= self.n {
                return Err(QheError::QubitOutOfRange { index: q, n: self.n });
            }
        }
        let gens = st.gens.iter().map(|g| g.restrict(keep)).collect();
        Ok(StabilizerState { n: keep.len(), gens })
    }

    /// Relabels qubits: old qubit `q` becomes `perm[q]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<StabilizerState> {
        check_len(self.n, perm.len())?;
        let gens = self.gens.iter().map(|g| g.embed(self.n, perm)).collect::<Result<Vec<_>>>()?;
        Ok(StabilizerState { n: self.n, gens })
    }

    /// Same density operator: equal rank and every generator of `other` lies in
    /// this group with the same sign.
    pub fn same_state(&self, other: &StabilizerState) -> bool {
        self.n == other.n
            && self.rank() == other.rank()
            && other.gens.iter().all(|g| matches!(self.expectation_sign(g), Ok(Some(false))))
    }

    /// `{"n_qubits": n, "generators": ["+XX", ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n_qubits": self.n,
            "generators": self.gens.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::check_cap(self.n)?;
        let dim = 1usize << self.n;
        let mut m = CMatrix::identity(dim, dim);
        let half = Complex64::new(0.5, 0.0);
        for g in &self.gens {
            let proj = (CMatrix::identity(dim, dim) + pauli_matrix(g)?) * half;
            m = proj * m;
        }
        let scale = Complex64::new(1.0 / (1u64 << (self.n - self.gens.len())) as f64, 0.0);
        DensityMatrix::from_matrix(m * scale)
    }
}
