//! Reference linear algebra for tests, built from explicit 2×2 matrices and
//! Kronecker products. Qubit 0 is the least significant index bit.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qhe_lab::clifford::Gate;
use qhe_lab::{Pauli, PauliString};

pub type M = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn m2(a: [[Complex64; 2]; 2]) -> M {
    M::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}

pub fn eye(n: usize) -> M {
    M::identity(1 << n, 1 << n)
}

pub fn pauli1(p: Pauli) -> M {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => m2([[o, z], [z, o]]),
        Pauli::X => m2([[z, o], [o, z]]),
        Pauli::Y => m2([[z, -i], [i, z]]),
        Pauli::Z => m2([[o, z], [z, -o]]),
    }
}

pub fn hadamard() -> M {
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    m2([[h, h], [h, -h]])
}

pub fn phase(theta: f64) -> M {
    m2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, theta)]])
}

/// `ops[q]` acts on qubit `q`.
pub fn kron_list(ops: &[M]) -> M {
    let mut out = M::identity(1, 1);
    for op in ops {
        out = op.kronecker(&out);
    }
    out
}

pub fn on(n: usize, q: usize, op: &M) -> M {
    let ops: Vec<M> = (0..n).map(|k| if k == q { op.clone() } else { eye(1) }).collect();
    kron_list(&ops)
}

pub fn pauli(p: &PauliString) -> M {
    let ops: Vec<M> = (0..p.n_qubits()).map(|q| pauli1(p.get(q))).collect();
    kron_list(&ops) * c(0.0, 1.0).powu(p.phase() as u32)
}

fn projector(bit: bool) -> M {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    if bit { m2([[z, z], [z, o]]) } else { m2([[o, z], [z, z]]) }
}

fn controlled(n: usize, ctl: usize, tgt: usize, u: &M) -> M {
    let mut a: Vec<M> = (0..n).map(|_| eye(1)).collect();
    a[ctl] = projector(false);
    let mut b: Vec<M> = (0..n).map(|_| eye(1)).collect();
    b[ctl] = projector(true);
    b[tgt] = u.clone();
    kron_list(&a) + kron_list(&b)
}

pub fn gate(n: usize, g: &Gate) -> M {
    match *g {
        Gate::H(q) => on(n, q, &hadamard()),
        Gate::S(q) => on(n, q, &phase(std::f64::consts::FRAC_PI_2)),
        Gate::X(q) => on(n, q, &pauli1(Pauli::X)),
        Gate::Y(q) => on(n, q, &pauli1(Pauli::Y)),
        Gate::Z(q) => on(n, q, &pauli1(Pauli::Z)),
        Gate::Cnot(a, b) => controlled(n, a, b, &pauli1(Pauli::X)),
        Gate::Cz(a, b) => controlled(n, a, b, &pauli1(Pauli::Z)),
        Gate::Swap(a, b) => {
            let c1 = controlled(n, a, b, &pauli1(Pauli::X));
            let c2 = controlled(n, b, a, &pauli1(Pauli::X));
            &c1 * &c2 * &c1
        }
    }
}

pub fn t_gate(n: usize, q: usize) -> M {
    on(n, q, &phase(std::f64::consts::FRAC_PI_4))
}

/// Product of gates, first gate applied first.
pub fn circuit(n: usize, gates: &[Gate]) -> M {
    gates.iter().fold(eye(n), |acc, g| gate(n, g) * acc)
}

pub fn ket_to_rho(psi: &[Complex64]) -> M {
    let v = nalgebra::DVector::from_column_slice(psi);
    &v * v.adjoint()
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace_distance(a: &M, b: &M) -> f64 {
    let d = a - b;
    let h = (&d + d.adjoint()) * c(0.5, 0.0);
    h.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>() / 2.0
}

/// `½‖·‖₁` distance between unitary channels via their Choi states.
pub fn channel_distance(u: &M, v: &M) -> f64 {
    let d = u.nrows() as f64;
    let ov = (u.adjoint() * v).trace() / d;
    (1.0 - ov.norm_sqr()).max(0.0).sqrt()
}

pub fn n_choose_k(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
