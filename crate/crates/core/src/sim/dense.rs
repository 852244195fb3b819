//! Exact dense density matrices for small registers (n ≤ 6).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::clifford::{CliffordOp, Gate};
use crate::error::{check_len, QheError, Result};
use crate::pauli::PauliString;
use crate::sim::statevec::{apply_gate_amps, apply_pauli_amps, phase_amps};

pub const DENSE_CAP: usize = 6;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Unitary elements the dense backend can apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DenseOp {
    Gate(Gate),
    T(usize),
    Tdg(usize),
}

fn apply_op_amps(a: &mut [Complex64], op: &DenseOp) {
    match op {
        DenseOp::Gate(g) => apply_gate_amps(a, g),
        DenseOp::T(q) => phase_amps(a, *q, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        DenseOp::Tdg(q) => phase_amps(a, *q, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
    }
}

/// Matrix of a gate sequence (first element applied first).
pub fn unitary(n: usize, ops: &[DenseOp]) -> Result<CMatrix> {
    DensityMatrix::check_cap(n)?;
    let dim = 1usize << n;
    let mut u = CMatrix::zeros(dim, dim);
    let mut col = vec![ZERO; dim];
    for j in 0..dim {
        col.iter_mut().for_each(|c| *c = ZERO);
        col[j] = ONE;
        for op in ops {
            apply_op_amps(&mut col, op);
        }
        for i in 0..dim {
            u[(i, j)] = col[i];
        }
    }
    Ok(u)
}

pub fn clifford_unitary(c: &CliffordOp) -> Result<CMatrix> {
    let ops: Vec<DenseOp> = c.gates().iter().map(|g| DenseOp::Gate(*g)).collect();
    unitary(c.n_qubits(), &ops)
}

pub fn pauli_matrix(p: &PauliString) -> Result<CMatrix> {
    let n = p.n_qubits();
    DensityMatrix::check_cap(n)?;
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    let mut col = vec![ZERO; dim];
    for j in 0..dim {
        col.iter_mut().for_each(|c| *c = ZERO);
        col[j] = ONE;
        let out = apply_pauli_amps(&col, p);
        for i in 0..dim {
            m[(i, j)] = out[i];
        }
    }
    Ok(m)
}

/// Distance between unitary channels: `sqrt(1 - |tr(U†V)/d|²)`, the trace
/// distance of their Choi states. Insensitive to global phase.
pub fn unitary_channel_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let d = u.nrows() as f64;
    let ov = (u.adjoint() * v).trace() / d;
    (1.0 - ov.norm_sqr()).max(0.0).sqrt()
}

/// Trace norm of a Hermitian matrix.
pub fn hermitian_trace_norm(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().map(|e| e.abs()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: CMatrix,
}

#[derive(Serialize)]
struct DenseJson {
    n_qubits: usize,
    rows: Vec<Vec<[f64; 2]>>,
}

impl DensityMatrix {
    pub fn check_cap(n: usize) -> Result<()> {
        if n > DENSE_CAP {
            Err(QheError::OracleCapExceeded { n, cap: DENSE_CAP })
        } else {
            Ok(())
        }
    }

    /// Wraps a matrix after checking trace, Hermiticity and positivity.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || !dim.is_power_of_two() {
            return Err(QheError::InvalidArgument("density matrix must be square with 2^n rows".into()));
        }
        let n = dim.trailing_zeros() as usize;
        Self::check_cap(n)?;
        let rho = DensityMatrix { n, m };
        rho.validate()?;
        Ok(rho)
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.m.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(QheError::InvalidArgument(format!("trace {tr} != 1")));
        }
        let herm = (&self.m - self.m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(QheError::InvalidArgument(format!("not Hermitian ({herm:e})")));
        }
        let min_eig = self.m.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(QheError::InvalidArgument(format!("not PSD (min eigenvalue {min_eig:e})")));
        }
        Ok(())
    }

    pub fn zero_state(n: usize) -> Result<Self> {
        Self::check_cap(n)?;
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        m[(0, 0)] = ONE;
        Ok(DensityMatrix { n, m })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        Self::check_cap(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(QheError::InvalidArgument(format!("basis index {index} >= {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Ok(DensityMatrix { n, m })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        Self::check_cap(n)?;
        let dim = 1usize << n;
        Ok(DensityMatrix { n, m: CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0) })
    }

    pub fn from_pure(amps: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amps);
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(QheError::InvalidArgument(format!("state not normalized ({norm})")));
        }
        let m = &v * v.adjoint();
        Self::from_matrix(m)
    }

    /// Random full-rank mixed state, `AA†/tr(AA†)` with Gaussian `A`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Self::check_cap(n)?;
        let dim = 1usize << n;
        let mut g = || -> f64 { rng.sample(rand_distr::StandardNormal) };
        let a = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(g(), g()));
        let m = &a * a.adjoint();
        let tr = m.trace();
        Ok(DensityMatrix { n, m: m / tr })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn apply_unitary(&mut self, u: &CMatrix) -> Result<()> {
        check_len(self.m.nrows(), u.nrows())?;
        self.m = u * &self.m * u.adjoint();
        Ok(())
    }

    pub fn apply_op(&mut self, op: &DenseOp) -> Result<()> {
        if let DenseOp::Gate(g) = op {
            g.check(self.n)?;
        }
        let u = unitary(self.n, std::slice::from_ref(op))?;
        self.apply_unitary(&u)
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        self.apply_op(&DenseOp::Gate(*g))
    }

    pub fn apply_t(&mut self, q: usize, dagger: bool) -> Result<()> {
        if q >= self.n {
            return Err(QheError::QubitOutOfRange { index: q, n: self.n });
        }
        self.apply_op(&if dagger { DenseOp::Tdg(q) } else { DenseOp::T(q) })
    }

    pub fn apply_clifford(&mut self, c: &CliffordOp) -> Result<()> {
        check_len(self.n, c.n_qubits())?;
        let u = clifford_unitary(c)?;
        self.apply_unitary(&u)
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        check_len(self.n, p.n_qubits())?;
        let u = pauli_matrix(p)?;
        self.apply_unitary(&u)
    }

    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        check_len(self.n, p.n_qubits())?;
        Ok((pauli_matrix(p)? * &self.m).trace().re)
    }

    /// Projects onto the `outcome` eigenspace of a Hermitian Pauli (false = +1).
    pub fn project_pauli(&mut self, p: &PauliString, outcome: bool) -> Result<f64> {
        check_len(self.n, p.n_qubits())?;
        if !p.is_hermitian() {
            return Err(QheError::InvalidArgument(format!("{p} is not Hermitian")));
        }
        let dim = 1usize << self.n;
        let s = if outcome { -0.5 } else { 0.5 };
        let proj = CMatrix::identity(dim, dim) * Complex64::new(0.5, 0.0) + pauli_matrix(p)? * Complex64::new(s, 0.0);
        let post = &proj * &self.m * &proj;
        let prob = post.trace().re;
        if prob < 1e-12 {
            return Err(QheError::ZeroProbability);
        }
        self.m = post / Complex64::new(prob, 0.0);
        Ok(prob)
    }

    pub fn measure_pauli(&mut self, p: &PauliString, rng: &mut dyn RngCore) -> Result<(bool, f64)> {
        let plus = ((1.0 + self.expectation(p)?) / 2.0).clamp(0.0, 1.0);
        let outcome = rng.gen::<f64>() >= plus;
        let prob = self.project_pauli(p, outcome)?;
        Ok((outcome, prob))
    }

    /// Fully depolarizing channel on qubit `q`.
    pub fn depolarize(&mut self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(QheError::QubitOutOfRange { index: q, n: self.n });
        }
        let mut acc = CMatrix::zeros(self.m.nrows(), self.m.ncols());
        for g in [None, Some(Gate::X(q)), Some(Gate::Y(q)), Some(Gate::Z(q))] {
            let mut r = self.clone();
            if let Some(g) = g {
                r.apply_gate(&g)?;
            }
            acc += r.m;
        }
        self.m = acc * Complex64::new(0.25, 0.0);
        Ok(())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let n = self.n + other.n;
        Self::check_cap(n)?;
        // qubit q of self stays on bit q; other's qubits sit above.
        Ok(DensityMatrix { n, m: other.m.kronecker(&self.m) })
    }

    /// Partial trace keeping `keep` in the listed order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        Ok(DensityMatrix { n: keep.len(), m: partial_trace_matrix(&self.m, self.n, keep)? })
    }

    /// Relabels qubits: old qubit `q` becomes qubit `perm[q]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<DensityMatrix> {
        Ok(DensityMatrix { n: self.n, m: permute_matrix(&self.m, self.n, perm)? })
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        check_len(self.n, other.n)?;
        Ok((0.5 * hermitian_trace_norm(&(&self.m - &other.m))).clamp(0.0, 1.0))
    }

    /// Largest entrywise deviation, for exact-equality checks.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.m - &other.m).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows = (0..self.m.nrows())
            .map(|r| (0..self.m.ncols()).map(|c| [self.m[(r, c)].re, self.m[(r, c)].im]).collect())
            .collect();
        serde_json::to_value(DenseJson { n_qubits: self.n, rows }).expect("plain data")
    }
}

/// Partial trace of an arbitrary operator on `n` qubits.
pub fn partial_trace_matrix(m: &CMatrix, n: usize, keep: &[usize]) -> Result<CMatrix> {
    for &q in keep {
        if q >= n {
            return Err(QheError::QubitOutOfRange { index: q, n });
        }
    }
    let dim = 1usize << keep.len();
    let keep_mask: usize = keep.iter().map(|&q| 1usize << q).sum();
    let local = |i: usize| -> usize { keep.iter().enumerate().map(|(j, &q)| ((i >> q) & 1) << j).sum() };
    let full = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..full {
        for c in 0..full {
            if r & !keep_mask == c & !keep_mask {
                out[(local(r), local(c))] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Relabels qubits of an operator: old qubit `q` becomes `perm[q]`.
pub fn permute_matrix(m: &CMatrix, n: usize, perm: &[usize]) -> Result<CMatrix> {
    check_len(n, perm.len())?;
    let map = |i: usize| -> usize { (0..n).map(|q| ((i >> q) & 1) << perm[q]).sum() };
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            out[(map(r), map(c))] = m[(r, c)];
        }
    }
    Ok(out)
}

pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    a.trace_distance(b)
}
