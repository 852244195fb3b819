//! Pure state vectors. Used for trajectory runs of protocols that carry
//! non-stabilizer resources (magic states) and exceed the dense cap. Maximally
//! mixed inputs are unravelled by sampling a random Pauli per trajectory.

use num_complex::Complex64;
use rand::{Rng, RngCore};

use crate::clifford::Gate;
use crate::error::{check_len, QheError, Result};
use crate::pauli::PauliString;
use crate::sim::dense::DensityMatrix;

/// Largest register a trajectory may hold (2^24 amplitudes, 256 MiB).
pub const STATEVEC_CAP: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn apply_gate_amps(a: &mut [Complex64], g: &Gate) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match *g {
        Gate::H(q) => {
            let m = 1usize << q;
            for i in 0..a.len() {
                if i & m == 0 {
                    let (u, v) = (a[i], a[i | m]);
                    a[i] = (u + v) * h;
                    a[i | m] = (u - v) * h;
                }
            }
        }
        Gate::S(q) => phase_amps(a, q, I),
        Gate::Z(q) => phase_amps(a, q, -ONE),
        Gate::X(q) => {
            let m = 1usize << q;
            for i in 0..a.len() {
                if i & m == 0 {
                    a.swap(i, i | m);
                }
            }
        }
        Gate::Y(q) => {
            let m = 1usize << q;
            for i in 0..a.len() {
                if i & m == 0 {
                    let (u, v) = (a[i], a[i | m]);
                    a[i] = -I * v;
                    a[i | m] = I * u;
                }
            }
        }
        Gate::Cnot(c, t) => {
            let (mc, mt) = (1usize << c, 1usize << t);
            for i in 0..a.len() {
                if i & mc != 0 && i & mt == 0 {
                    a.swap(i, i | mt);
                }
            }
        }
        Gate::Cz(c, t) => {
            let m = (1usize << c) | (1usize << t);
            for (i, x) in a.iter_mut().enumerate() {
                if i & m == m {
                    *x = -*x;
                }
            }
        }
        Gate::Swap(p, q) => {
            let (mp, mq) = (1usize << p, 1usize << q);
            for i in 0..a.len() {
                if i & mp != 0 && i & mq == 0 {
                    a.swap(i, (i & !mp) | mq);
                }
            }
        }
    }
}

pub(crate) fn phase_amps(a: &mut [Complex64], q: usize, ph: Complex64) {
    let m = 1usize << q;
    for (i, x) in a.iter_mut().enumerate() {
        if i & m != 0 {
            *x *= ph;
        }
    }
}

/// `P|ψ⟩` for a signed Pauli string, qubit q on bit q of the index.
pub(crate) fn apply_pauli_amps(a: &[Complex64], p: &PauliString) -> Vec<Complex64> {
    let n = p.n_qubits();
    let mut xm = 0usize;
    let mut zm = 0usize;
    let mut ny = 0u32;
    for q in 0..n {
        if p.x_bit(q) {
            xm |= 1 << q;
        }
        if p.z_bit(q) {
            zm |= 1 << q;
        }
        if p.x_bit(q) && p.z_bit(q) {
            ny += 1;
        }
    }
    let base = I.powu((p.phase() as u32 + ny) % 4);
    let mut out = vec![ZERO; a.len()];
    for (i, &x) in a.iter().enumerate() {
        let sign = if (i & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        out[i ^ xm] = base * sign * x;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self> {
        if n > STATEVEC_CAP {
            return Err(QheError::OracleCapExceeded { n, cap: STATEVEC_CAP });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n || n > STATEVEC_CAP {
            return Err(QheError::InvalidArgument("amplitude count must be a power of two".into()));
        }
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(QheError::InvalidArgument(format!("state not normalized (norm² = {norm})")));
        }
        Ok(StateVector { n, amps })
    }

    /// Haar-ish random state from complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut g = || -> f64 { rng.sample(rand_distr::StandardNormal) };
        let mut amps: Vec<Complex64> = (0..1usize << n).map(|_| Complex64::new(g(), g())).collect();
        let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|c| *c /= norm);
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.check(self.n)?;
        apply_gate_amps(&mut self.amps, g);
        Ok(())
    }

    /// `T` (or `T†` when `dagger`).
    pub fn apply_t(&mut self, q: usize, dagger: bool) -> Result<()> {
        if q >= self.n {
            return Err(QheError::QubitOutOfRange { index: q, n: self.n });
        }
        let s = if dagger { -1.0 } else { 1.0 };
        phase_amps(&mut self.amps, q, Complex64::from_polar(1.0, s * std::f64::consts::FRAC_PI_4));
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        check_len(self.n, p.n_qubits())?;
        self.amps = apply_pauli_amps(&self.amps, p);
        Ok(())
    }

    /// Appends `k` qubits in |0⟩ at the high end.
    pub fn extend(&mut self, k: usize) -> Result<()> {
        if self.n + k > STATEVEC_CAP {
            return Err(QheError::OracleCapExceeded { n: self.n + k, cap: STATEVEC_CAP });
        }
        self.amps.resize(1 << (self.n + k), ZERO);
        self.n += k;
        Ok(())
    }

    /// Drops qubits `n..`, which must already be in |0⟩.
    pub fn truncate(&mut self, n: usize) -> Result<()> {
        if n > self.n {
            return Err(QheError::QubitOutOfRange { index: n, n: self.n });
        }
        let tail: f64 = self.amps[1 << n..].iter().map(|a| a.norm_sqr()).sum();
        if tail > 1e-12 {
            return Err(QheError::InvalidArgument("dropped qubits are not in |0⟩".into()));
        }
        self.amps.truncate(1 << n);
        self.n = n;
        Ok(())
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n + other.n;
        if n > STATEVEC_CAP {
            return Err(QheError::OracleCapExceeded { n, cap: STATEVEC_CAP });
        }
        let mut amps = vec![ZERO; 1 << n];
        for (j, b) in other.amps.iter().enumerate() {
            for (i, a) in self.amps.iter().enumerate() {
                amps[i | (j << self.n)] = a * b;
            }
        }
        Ok(StateVector { n, amps })
    }

    /// Probability of the +1 eigenspace of a Hermitian Pauli.
    pub fn prob_plus(&self, p: &PauliString) -> Result<f64> {
        check_len(self.n, p.n_qubits())?;
        if !p.is_hermitian() {
            return Err(QheError::InvalidArgument(format!("{p} is not Hermitian")));
        }
        let pp = apply_pauli_amps(&self.amps, p);
        let ev: f64 = self.amps.iter().zip(&pp).map(|(a, b)| (a.conj() * b).re).sum();
        Ok(((1.0 + ev) / 2.0).clamp(0.0, 1.0))
    }

    /// Projects onto outcome `outcome` (false = +1). Returns its probability.
    pub fn project_pauli(&mut self, p: &PauliString, outcome: bool) -> Result<f64> {
        let plus = self.prob_plus(p)?;
        let prob = if outcome { 1.0 - plus } else { plus };
        if prob < 1e-12 {
            return Err(QheError::ZeroProbability);
        }
        let pp = apply_pauli_amps(&self.amps, p);
        let s = if outcome { -1.0 } else { 1.0 };
        let norm = (4.0 * prob).sqrt();
        for (a, b) in self.amps.iter_mut().zip(pp) {
            *a = (*a + b * s) / norm;
        }
        Ok(prob)
    }

    pub fn measure_pauli(&mut self, p: &PauliString, rng: &mut dyn RngCore) -> Result<(bool, f64)> {
        let plus = self.prob_plus(p)?;
        let outcome = rng.gen::<f64>() >= plus;
        let prob = self.project_pauli(p, outcome)?;
        Ok((outcome, prob))
    }

    /// One trajectory of the fully depolarizing channel on `q`.
    pub fn depolarize(&mut self, q: usize, rng: &mut dyn RngCore) -> Result<()> {
        let k = rng.gen_range(0..4);
        let g = [None, Some(Gate::X(q)), Some(Gate::Y(q)), Some(Gate::Z(q))][k];
        if let Some(g) = g {
            self.apply_gate(&g)?;
        }
        Ok(())
    }

    /// Reduced density matrix on `keep`, in the listed order.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let k = keep.len();
        DensityMatrix::check_cap(k)?;
        for &q in keep {
            if q >= self.n {
                return Err(QheError::QubitOutOfRange { index: q, n: self.n });
            }
        }
        let dim = 1usize << k;
        let keep_mask: usize = keep.iter().map(|&q| 1usize << q).sum();
        let local = |i: usize| -> usize { keep.iter().enumerate().map(|(j, &q)| ((i >> q) & 1) << j).sum() };
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        // Group amplitudes by the traced-out bits.
        let mut groups: std::collections::HashMap<usize, Vec<(usize, Complex64)>> = Default::default();
        for (i, &a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                groups.entry(i & !keep_mask).or_default().push((local(i), a));
            }
        }
        for list in groups.values() {
            for &(r, a) in list {
                for &(c, b) in list {
                    m[(r, c)] += a * b.conj();
                }
            }
        }
        DensityMatrix::from_matrix(m)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let keep: Vec<usize> = (0..self.n).collect();
        self.reduced_density(&keep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_state_parities() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_gate(&Gate::H(0)).unwrap();
        s.apply_gate(&Gate::Cnot(0, 1)).unwrap();
        assert!((s.prob_plus(&"ZZ".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.prob_plus(&"XX".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.prob_plus(&"-YY".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.prob_plus(&"ZI".parse().unwrap()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measurement_collapses() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = StateVector::zero(1).unwrap();
        s.apply_gate(&Gate::H(0)).unwrap();
        let (o, p) = s.measure_pauli(&"Z".parse().unwrap(), &mut rng).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let again = s.prob_plus(&"Z".parse().unwrap()).unwrap();
        assert!((again - if o { 0.0 } else { 1.0 }).abs() < 1e-12);
    }

    #[test]
    fn reduced_state_of_product() {
        let mut s = StateVector::zero(3).unwrap();
        s.apply_gate(&Gate::X(1)).unwrap();
        let r = s.reduced_density(&[1]).unwrap();
        assert!((r.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    }
}
