//! Clifford operations as tableaux that remember the gate list they came from.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, QheError, Result};
use crate::pauli::{Pauli, PauliString};

/// Elementary gate set. Every Clifford here decomposes into these.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => vec![q],
            Gate::Cnot(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => vec![a, b],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::Cnot(..) => "CNOT",
            Gate::Cz(..) => "CZ",
            Gate::Swap(..) => "SWAP",
        }
    }

    /// Same gate with qubit indices passed through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::X(q) => Gate::X(f(q)),
            Gate::Y(q) => Gate::Y(f(q)),
            Gate::Z(q) => Gate::Z(f(q)),
            Gate::Cnot(a, b) => Gate::Cnot(f(a), f(b)),
            Gate::Cz(a, b) => Gate::Cz(f(a), f(b)),
            Gate::Swap(a, b) => Gate::Swap(f(a), f(b)),
        }
    }

    /// Gate sequence for the inverse. Only S is not self-inverse.
    pub fn inverse(&self) -> Vec<Gate> {
        match *self {
            Gate::S(q) => vec![Gate::S(q), Gate::S(q), Gate::S(q)],
            g => vec![g],
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(QheError::QubitOutOfRange { index: q, n });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(QheError::InvalidArgument(format!("{} on repeated qubit {}", self.name(), qs[0])));
        }
        Ok(())
    }

    /// Conjugates `p` in place: `p <- g p g†`.
    pub fn conjugate_in_place(&self, p: &mut PauliString) {
        let flip = |p: &mut PauliString| p.set_phase(p.phase() + 2);
        match *self {
            Gate::H(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && z {
                    flip(p);
                }
                p.set(q, Pauli::from_bits(z, x));
            }
            Gate::S(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && z {
                    flip(p);
                }
                p.set(q, Pauli::from_bits(x, z ^ x));
            }
            Gate::X(q) => {
                if p.z_bit(q) {
                    flip(p);
                }
            }
            Gate::Y(q) => {
                if p.x_bit(q) ^ p.z_bit(q) {
                    flip(p);
                }
            }
            Gate::Z(q) => {
                if p.x_bit(q) {
                    flip(p);
                }
            }
            Gate::Cnot(a, b) => {
                let (xa, za, xb, zb) = (p.x_bit(a), p.z_bit(a), p.x_bit(b), p.z_bit(b));
                if xa && zb && (xb == za) {
                    flip(p);
                }
                p.set(a, Pauli::from_bits(xa, za ^ zb));
                p.set(b, Pauli::from_bits(xb ^ xa, zb));
            }
            Gate::Cz(a, b) => {
                Gate::H(b).conjugate_in_place(p);
                Gate::Cnot(a, b).conjugate_in_place(p);
                Gate::H(b).conjugate_in_place(p);
            }
            Gate::Swap(a, b) => {
                let (pa, pb) = (p.get(a), p.get(b));
                p.set(a, pb);
                p.set(b, pa);
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => write!(f, "{} {}", self.name(), q),
            Gate::Cnot(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => write!(f, "{} {} {}", self.name(), a, b),
        }
    }
}

/// An n-qubit Clifford. `images[2q]` is `U X_q U†`, `images[2q+1]` is `U Z_q U†`.
#[derive(Clone, PartialEq, Eq)]
pub struct CliffordOp {
    n: usize,
    images: Vec<PauliString>,
    gates: Vec<Gate>,
}

impl fmt::Debug for CliffordOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CliffordOp").field("n", &self.n).field("images", &self.images).finish()
    }
}

impl CliffordOp {
    pub fn identity(n: usize) -> Self {
        let mut images = Vec::with_capacity(2 * n);
        for q in 0..n {
            images.push(PauliString::single(n, q, Pauli::X));
            images.push(PauliString::single(n, q, Pauli::Z));
        }
        CliffordOp { n, images, gates: Vec::new() }
    }

    pub fn from_gates(n: usize, gates: &[Gate]) -> Result<Self> {
        let mut c = Self::identity(n);
        for g in gates {
            c.push(*g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn image_x(&self, q: usize) -> &PauliString {
        &self.images[2 * q]
    }

    pub fn image_z(&self, q: usize) -> &PauliString {
        &self.images[2 * q + 1]
    }

    /// Appends a gate applied after the current operation.
    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.check(self.n)?;
        for img in &mut self.images {
            g.conjugate_in_place(img);
        }
        self.gates.push(g);
        Ok(())
    }

    /// `U p U†`.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        check_len(self.n, p.n_qubits())?;
        Ok(self.conjugate_unchecked(p))
    }

    fn conjugate_unchecked(&self, p: &PauliString) -> PauliString {
        // p = i^(k + #Y) prod_q X_q^x Z_q^z, in the order X0 Z0 X1 Z1 ...
        let mut ny = 0u8;
        let mut acc = PauliString::identity(self.n);
        for q in 0..self.n {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            if x && z {
                ny = (ny + 1) & 3;
            }
            if x {
                acc = acc.mul_unchecked(&self.images[2 * q]);
            }
            if z {
                acc = acc.mul_unchecked(&self.images[2 * q + 1]);
            }
        }
        let ph = (acc.phase() + p.phase() + ny) & 3;
        acc.with_phase(ph)
    }

    /// `U† p U`.
    pub fn conjugate_inverse(&self, p: &PauliString) -> Result<PauliString> {
        self.inverse().conjugate(p)
    }

    /// `c2 ∘ c1`: apply `c1` first.
    pub fn compose(c2: &CliffordOp, c1: &CliffordOp) -> Result<CliffordOp> {
        check_len(c1.n, c2.n)?;
        let images = c1.images.iter().map(|p| c2.conjugate_unchecked(p)).collect();
        let mut gates = c1.gates.clone();
        gates.extend_from_slice(&c2.gates);
        Ok(CliffordOp { n: c1.n, images, gates })
    }

    pub fn then(&self, next: &CliffordOp) -> Result<CliffordOp> {
        Self::compose(next, self)
    }

    pub fn inverse(&self) -> CliffordOp {
        let gates: Vec<Gate> = self.gates.iter().rev().flat_map(|g| g.inverse()).collect();
        CliffordOp::from_gates(self.n, &gates).expect("gates already validated")
    }

    pub fn tensor(a: &CliffordOp, b: &CliffordOp) -> CliffordOp {
        let n = a.n + b.n;
        let mut gates = a.gates.clone();
        gates.extend(b.gates.iter().map(|g| g.remap(|q| q + a.n)));
        CliffordOp::from_gates(n, &gates).expect("indices in range")
    }

    /// Places this operation on `positions` of an `n`-qubit register.
    pub fn embed(&self, n: usize, positions: &[usize]) -> Result<CliffordOp> {
        check_len(self.n, positions.len())?;
        for &p in positions {
            if p >= n {
                return Err(QheError::QubitOutOfRange { index: p, n });
            }
        }
        let gates: Vec<Gate> = self.gates.iter().map(|g| g.remap(|q| positions[q])).collect();
        CliffordOp::from_gates(n, &gates)
    }

    /// Images are Hermitian and obey the canonical commutation pattern.
    pub fn is_valid_symplectic(&self) -> bool {
        if self.images.iter().any(|p| !p.is_hermitian() || p.is_identity_up_to_phase()) {
            return false;
        }
        for i in 0..2 * self.n {
            for j in (i + 1)..2 * self.n {
                let expect_anti = i / 2 == j / 2;
                if self.images[i].commutes_with(&self.images[j]) == expect_anti {
                    return false;
                }
            }
        }
        true
    }

    /// Same tableau, ignoring how it was built.
    pub fn same_action(&self, other: &CliffordOp) -> bool {
        self.n == other.n && self.images == other.images
    }

    /// Tableau images in the order X0 Z0 X1 Z1 ...
    pub fn images(&self) -> &[PauliString] {
        &self.images
    }

    /// Builds a Clifford from its tableau, synthesizing a gate list.
    pub fn from_tableau(images: Vec<PauliString>) -> Result<CliffordOp> {
        if images.len() % 2 != 0 {
            return Err(QheError::InvalidArgument("tableau needs an even number of images".into()));
        }
        let n = images.len() / 2;
        for p in &images {
            check_len(n, p.n_qubits())?;
        }
        let target = CliffordOp { n, images, gates: Vec::new() };
        if !target.is_valid_symplectic() {
            return Err(QheError::InvalidArgument("tableau is not symplectic".into()));
        }
        let w = reduce_to_identity(&target)?;
        let gates: Vec<Gate> = w.iter().rev().flat_map(|g| g.inverse()).collect();
        let out = CliffordOp::from_gates(n, &gates)?;
        debug_assert!(out.same_action(&target));
        Ok(out)
    }

    /// Uniformly random n-qubit Clifford, deterministic for a seeded rng.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordOp {
        let mut gates = Vec::new();
        // Random Pauli layer first fixes uniform signs on every image.
        for q in 0..n {
            match rng.gen_range(0..4) {
                1 => gates.push(Gate::X(q)),
                2 => gates.push(Gate::Y(q)),
                3 => gates.push(Gate::Z(q)),
                _ => {}
            }
        }
        let mut layers: Vec<Vec<Gate>> = Vec::with_capacity(n);
        for i in 0..n {
            let k = n - i;
            let a = loop {
                let a = random_pauli(k, rng);
                if !a.is_identity_up_to_phase() {
                    break a;
                }
            };
            let b = loop {
                let b = random_pauli(k, rng);
                if !b.commutes_with(&a) {
                    break b;
                }
            };
            let positions: Vec<usize> = (i..n).collect();
            let a = a.embed(n, &positions).expect("in range");
            let b = b.embed(n, &positions).expect("in range");
            let mut pair = [a, b];
            let w = sweep_pair(&mut pair, i, n);
            // V_i = W_i^{-1} sends X_i, Z_i to the sampled pair.
            layers.push(w.iter().rev().flat_map(|g| g.inverse()).collect());
        }
        for layer in layers.into_iter().rev() {
            gates.extend(layer);
        }
        CliffordOp::from_gates(n, &gates).expect("valid gates")
    }
}

pub(crate) fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliString {
    let mut p = PauliString::identity(n);
    for q in 0..n {
        p.set(q, Pauli::from_index(rng.gen_range(0..4)));
    }
    p
}

/// Gates taking the anticommuting pair (A, B), supported on qubits >= i,
/// to (±X_i, ±Z_i). The pair is updated in place.
fn sweep_pair(pair: &mut [PauliString; 2], i: usize, n: usize) -> Vec<Gate> {
    let mut out = Vec::new();
    let mut apply = |g: Gate, pair: &mut [PauliString; 2], out: &mut Vec<Gate>| {
        g.conjugate_in_place(&mut pair[0]);
        g.conjugate_in_place(&mut pair[1]);
        out.push(g);
    };

    clear_z(0, pair, i, n, &mut out, &mut apply);
    let support: Vec<usize> = (i..n).filter(|&q| pair[0].x_bit(q)).collect();
    let surv = support[0];
    for &q in &support[1..] {
        apply(Gate::Cnot(surv, q), pair, &mut out);
    }
    if surv != i {
        apply(Gate::Swap(surv, i), pair, &mut out);
    }

    let b_done = |p: &PauliString| (0..n).all(|q| if q == i { p.get(q) == Pauli::Z } else { p.get(q) == Pauli::I });
    if !b_done(&pair[1]) {
        apply(Gate::H(i), pair, &mut out);
        clear_z(1, pair, i, n, &mut out, &mut apply);
        let rest: Vec<usize> = ((i + 1)..n).filter(|&q| pair[1].x_bit(q)).collect();
        for q in rest {
            apply(Gate::Cnot(i, q), pair, &mut out);
        }
        apply(Gate::H(i), pair, &mut out);
    }
    out
}

fn clear_z(
    which: usize,
    pair: &mut [PauliString; 2],
    i: usize,
    n: usize,
    out: &mut Vec<Gate>,
    apply: &mut impl FnMut(Gate, &mut [PauliString; 2], &mut Vec<Gate>),
) {
    for q in i..n {
        match pair[which].get(q) {
            Pauli::Y => apply(Gate::S(q), pair, out),
            Pauli::Z => apply(Gate::H(q), pair, out),
            _ => {}
        }
    }
}

/// Gate list W with W ∘ target = identity.
fn reduce_to_identity(target: &CliffordOp) -> Result<Vec<Gate>> {
    let n = target.n;
    let mut cur = target.images.clone();
    let mut w = Vec::new();
    for i in 0..n {
        let mut pair = [cur[2 * i].clone(), cur[2 * i + 1].clone()];
        let gates = sweep_pair(&mut pair, i, n);
        for g in &gates {
            for img in cur.iter_mut() {
                g.conjugate_in_place(img);
            }
        }
        w.extend(gates);
    }
    for q in 0..n {
        if cur[2 * q].phase() == 2 {
            w.push(Gate::Z(q));
        }
        if cur[2 * q + 1].phase() == 2 {
            w.push(Gate::X(q));
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn h_and_cnot_images() {
        let h = CliffordOp::from_gates(1, &[Gate::H(0)]).unwrap();
        assert_eq!(h.conjugate(&p("X")).unwrap(), p("Z"));
        assert_eq!(h.conjugate(&p("Y")).unwrap(), p("-Y"));
        let cx = CliffordOp::from_gates(2, &[Gate::Cnot(0, 1)]).unwrap();
        assert_eq!(cx.conjugate(&p("XI")).unwrap(), p("XX"));
        assert_eq!(cx.conjugate(&p("IZ")).unwrap(), p("ZZ"));
        assert_eq!(cx.conjugate(&p("YI")).unwrap(), p("YX"));
        assert_eq!(cx.conjugate(&p("XZ")).unwrap(), p("-YY"));
    }

    #[test]
    fn s_squared_is_z() {
        let ss = CliffordOp::from_gates(1, &[Gate::S(0), Gate::S(0)]).unwrap();
        let z = CliffordOp::from_gates(1, &[Gate::Z(0)]).unwrap();
        assert!(ss.same_action(&z));
    }

    #[test]
    fn single_qubit_group_has_24_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..2000 {
            let c = CliffordOp::random(1, &mut rng);
            seen.insert(format!("{:?}", c.images()));
        }
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn synthesis_reproduces_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..6 {
            for _ in 0..20 {
                let c = CliffordOp::random(n, &mut rng);
                let d = CliffordOp::from_tableau(c.images().to_vec()).unwrap();
                assert!(d.same_action(&c));
            }
        }
    }

    #[test]
    fn inverse_undoes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = CliffordOp::random(4, &mut rng);
        let id = CliffordOp::compose(&c.inverse(), &c).unwrap();
        assert!(id.same_action(&CliffordOp::identity(4)));
    }

    #[test]
    fn bad_gate_rejected() {
        assert!(CliffordOp::from_gates(2, &[Gate::Cnot(0, 2)]).is_err());
        assert!(CliffordOp::from_gates(2, &[Gate::Cz(1, 1)]).is_err());
    }
}
