//! Displacement-key encryption of continuous-variable modes.
//!
//! Conventions, fixed here and nowhere else:
//! - quadratures are ordered `(x_1..x_n, p_1..p_n)`;
//! - `α = (x + i p)/√2`;
//! - `D(x, p) = exp(i(p·x̂ − x·p̂))` shifts `(x̂, p̂)` by `(x, p)`;
//! - a Gaussian unitary `G` acts on quadratures as `r ↦ S r + c`, and the
//!   transported key `d′` satisfies `G·D(d) = D(d′)·G`, i.e. `d′ = S d`.
//!
//! A passive network with mode matrix `U` has `S = [[Re U, −Im U], [Im U, Re U]]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{check_len, QheError, Result};
use crate::pauli::Pauli;

const SYMPLECTIC_TOL: f64 = 1e-10;

/// Per-mode phase-space shift.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisplacementVec {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl DisplacementVec {
    pub fn zero(n: usize) -> Self {
        DisplacementVec { x: vec![0.0; n], p: vec![0.0; n] }
    }

    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        check_len(x.len(), p.len())?;
        if x.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(QheError::InvalidArgument("displacement entries must be finite".into()));
        }
        Ok(DisplacementVec { x, p })
    }

    pub fn from_complex(alpha: &[Complex64]) -> Result<Self> {
        let s = std::f64::consts::SQRT_2;
        Self::new(alpha.iter().map(|a| a.re * s).collect(), alpha.iter().map(|a| a.im * s).collect())
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        self.x.iter().zip(&self.p).map(|(&x, &p)| Complex64::new(x * s, p * s)).collect()
    }

    pub fn n_modes(&self) -> usize {
        self.x.len()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.n_modes(), self.x.iter().chain(&self.p).copied())
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(QheError::InvalidArgument("phase-space vector has odd length".into()));
        }
        let n = v.len() / 2;
        Self::new(v.rows(0, n).iter().copied().collect(), v.rows(n, n).iter().copied().collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len(self.n_modes(), other.n_modes())?;
        Self::from_vector(&(self.to_vector() + other.to_vector()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.to_vector() - other.to_vector()).amax()
    }
}

/// Standard symplectic form `Ω = [[0, I], [−I, 0]]`.
pub fn omega(n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        w[(i, n + i)] = 1.0;
        w[(n + i, i)] = -1.0;
    }
    w
}

/// `ω(a, b) = a_x·b_p − a_p·b_x`.
pub fn symplectic_form(a: &DisplacementVec, b: &DisplacementVec) -> Result<f64> {
    check_len(a.n_modes(), b.n_modes())?;
    Ok((0..a.n_modes()).map(|i| a.x[i] * b.p[i] - a.p[i] * b.x[i]).sum())
}

/// Angle `φ` with `D(a)·D(b) = e^{iφ}·D(b)·D(a)`; equals `−ω(a, b)`.
pub fn commutation_phase(a: &DisplacementVec, b: &DisplacementVec) -> Result<f64> {
    Ok(-symplectic_form(a, b)?)
}

/// Affine phase-space map `r ↦ S r + c` of a Gaussian unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticOp {
    s: DMatrix<f64>,
    c: DVector<f64>,
}

impl SymplecticOp {
    pub fn new(s: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        if !s.is_square() || s.nrows() % 2 != 0 {
            return Err(QheError::InvalidArgument("symplectic matrix must be 2n×2n".into()));
        }
        check_len(s.nrows(), c.len())?;
        let w = omega(s.nrows() / 2);
        let residual = (s.transpose() * &w * &s - &w).amax();
        if residual > SYMPLECTIC_TOL {
            return Err(QheError::NotSymplectic(residual));
        }
        Ok(SymplecticOp { s, c })
    }

    pub fn identity(n: usize) -> Self {
        SymplecticOp { s: DMatrix::identity(2 * n, 2 * n), c: DVector::zeros(2 * n) }
    }

    /// Passive network from its unitary mode matrix.
    pub fn passive(u: &DMatrix<Complex64>) -> Result<Self> {
        let n = u.nrows();
        if !u.is_square() || (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n)).camax() > SYMPLECTIC_TOL {
            return Err(QheError::InvalidArgument("mode matrix is not unitary".into()));
        }
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = u[(i, j)];
                s[(i, j)] = z.re;
                s[(i, n + j)] = -z.im;
                s[(n + i, j)] = z.im;
                s[(n + i, n + j)] = z.re;
            }
        }
        Self::new(s, DVector::zeros(2 * n))
    }

    /// Mode matrix of a beamsplitter: `α_i ↦ cos θ·α_i − sin θ·α_j`,
    /// `α_j ↦ sin θ·α_i + cos θ·α_j`.
    pub fn beamsplitter_matrix(n: usize, i: usize, j: usize, theta: f64) -> DMatrix<Complex64> {
        let mut u = DMatrix::<Complex64>::identity(n, n);
        let (c, s) = (theta.cos(), theta.sin());
        u[(i, i)] = c.into();
        u[(i, j)] = (-s).into();
        u[(j, i)] = s.into();
        u[(j, j)] = c.into();
        u
    }

    pub fn phase_matrix(n: usize, i: usize, theta: f64) -> DMatrix<Complex64> {
        let mut u = DMatrix::<Complex64>::identity(n, n);
        u[(i, i)] = Complex64::from_polar(1.0, theta);
        u
    }

    /// Single-mode squeezer `S(r e^{iθ})`: `α ↦ α cosh r − α* e^{iθ} sinh r`.
    pub fn squeezer(n: usize, k: usize, r: f64, theta: f64) -> Self {
        let (ch, sh) = (r.cosh(), r.sinh());
        let (c2, s2) = (theta.cos(), theta.sin());
        let mut s = DMatrix::identity(2 * n, 2 * n);
        s[(k, k)] = ch - sh * c2;
        s[(k, n + k)] = -sh * s2;
        s[(n + k, k)] = -sh * s2;
        s[(n + k, n + k)] = ch + sh * c2;
        SymplecticOp { s, c: DVector::zeros(2 * n) }
    }

    pub fn displacement(d: &DisplacementVec) -> Self {
        let n = d.n_modes();
        SymplecticOp { s: DMatrix::identity(2 * n, 2 * n), c: d.to_vector() }
    }

    pub fn n_modes(&self) -> usize {
        self.s.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.c
    }

    /// Orthogonal as well as symplectic: photon-number preserving.
    pub fn is_passive(&self) -> bool {
        let n2 = self.s.nrows();
        (self.s.transpose() * &self.s - DMatrix::<f64>::identity(n2, n2)).amax() < SYMPLECTIC_TOL
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &SymplecticOp) -> Result<SymplecticOp> {
        check_len(self.n_modes(), next.n_modes())?;
        Ok(SymplecticOp { s: &next.s * &self.s, c: &next.s * &self.c + &next.c })
    }

    /// `S⁻¹ = −Ω Sᵀ Ω`.
    pub fn inverse_matrix(&self) -> DMatrix<f64> {
        let w = omega(self.n_modes());
        -(&w * self.s.transpose() * &w)
    }

    pub fn apply_point(&self, r: &DVector<f64>) -> DVector<f64> {
        &self.s * r + &self.c
    }

    /// `d′ = S d`.
    pub fn transport(&self, key: &DisplacementVec) -> Result<DisplacementVec> {
        check_len(self.n_modes(), key.n_modes())?;
        DisplacementVec::from_vector(&(&self.s * key.to_vector()))
    }
}

/// Key through a passive network: `β = U α`.
pub fn transport_key_linear(u: &SymplecticOp, key: &DisplacementVec) -> Result<DisplacementVec> {
    if !u.is_passive() {
        return Err(QheError::InvalidArgument("network is not passive".into()));
    }
    u.transport(key)
}

/// `γ = α cosh r + α* e^{iθ} sinh r`, the relation `D(α)·S(z) = S(z)·D(γ)`.
/// Transport forward through a squeezer is the same map at `−r`.
pub fn transport_key_squeezer(r: f64, theta: f64, alpha: Complex64) -> Complex64 {
    alpha * r.cosh() + alpha.conj() * Complex64::from_polar(1.0, theta) * r.sinh()
}

/// One layer of a Gaussian circuit.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum GaussianLayer {
    Bs { i: usize, j: usize, theta: f64 },
    Ps { i: usize, theta: f64 },
    Sms { i: usize, r: f64, theta: f64 },
    Disp { i: usize, x: f64, p: f64 },
}

impl GaussianLayer {
    fn modes(&self) -> Vec<usize> {
        match *self {
            GaussianLayer::Bs { i, j, .. } => vec![i, j],
            GaussianLayer::Ps { i, .. } | GaussianLayer::Sms { i, .. } | GaussianLayer::Disp { i, .. } => vec![i],
        }
    }

    pub fn to_symplectic(&self, n: usize) -> Result<SymplecticOp> {
        Ok(match *self {
            GaussianLayer::Bs { i, j, theta } => SymplecticOp::passive(&SymplecticOp::beamsplitter_matrix(n, i, j, theta))?,
            GaussianLayer::Ps { i, theta } => SymplecticOp::passive(&SymplecticOp::phase_matrix(n, i, theta))?,
            GaussianLayer::Sms { i, r, theta } => SymplecticOp::squeezer(n, i, r, theta),
            GaussianLayer::Disp { i, x, p } => {
                let mut d = DisplacementVec::zero(n);
                d.x[i] = x;
                d.p[i] = p;
                SymplecticOp::displacement(&d)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianCircuit {
    n: usize,
    layers: Vec<GaussianLayer>,
}

impl GaussianCircuit {
    pub fn new(n: usize, layers: Vec<GaussianLayer>) -> Result<Self> {
        for l in &layers {
            let ms = l.modes();
            if let Some(&bad) = ms.iter().find(|&&m| m >= n) {
                return Err(QheError::QubitOutOfRange { index: bad, n });
            }
            if ms.len() == 2 && ms[0] == ms[1] {
                return Err(QheError::InvalidArgument("beamsplitter needs two distinct modes".into()));
            }
            let finite = match *l {
                GaussianLayer::Bs { theta, .. } | GaussianLayer::Ps { theta, .. } => theta.is_finite(),
                GaussianLayer::Sms { r, theta, .. } => r.is_finite() && theta.is_finite(),
                GaussianLayer::Disp { x, p, .. } => x.is_finite() && p.is_finite(),
            };
            if !finite {
                return Err(QheError::InvalidArgument(format!("non-finite parameter in {l:?}")));
            }
        }
        Ok(GaussianCircuit { n, layers })
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[GaussianLayer] {
        &self.layers
    }

    pub fn to_symplectic(&self) -> Result<SymplecticOp> {
        self.layers
            .iter()
            .try_fold(SymplecticOp::identity(self.n), |acc, l| acc.then(&l.to_symplectic(self.n)?))
    }

    /// Random layers with squeezing `|r| ≤ 1`.
    pub fn random<R: Rng + ?Sized>(n: usize, depth: usize, rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(depth);
        for _ in 0..depth {
            let i = rng.gen_range(0..n);
            let theta = rng.gen_range(-PI..PI);
            let kind = if n >= 2 { rng.gen_range(0..4) } else { rng.gen_range(1..4) };
            layers.push(match kind {
                0 => {
                    let j = (i + rng.gen_range(1..n)) % n;
                    GaussianLayer::Bs { i, j, theta }
                }
                1 => GaussianLayer::Ps { i, theta },
                2 => GaussianLayer::Sms { i, r: rng.gen_range(-1.0..1.0), theta },
                _ => GaussianLayer::Disp { i, x: rng.gen_range(-1.0..1.0), p: rng.gen_range(-1.0..1.0) },
            });
        }
        GaussianCircuit { n, layers }
    }
}

impl fmt::Display for GaussianCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MODES {}", self.n)?;
        for l in &self.layers {
            match l {
                GaussianLayer::Bs { i, j, theta } => writeln!(f, "BS {i} {j} {theta}")?,
                GaussianLayer::Ps { i, theta } => writeln!(f, "PS {i} {theta}")?,
                GaussianLayer::Sms { i, r, theta } => writeln!(f, "SMS {i} {r} {theta}")?,
                GaussianLayer::Disp { i, x, p } => writeln!(f, "DISP {i} {x} {p}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for GaussianCircuit {
    type Err = QheError;

    /// `BS i j θ`, `PS i θ`, `SMS i r θ`, `DISP i x p`; an optional leading
    /// `MODES n`, otherwise the mode count is the largest index plus one.
    fn from_str(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut layers = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let ln = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: String| QheError::Parse { line: ln, msg };
            let int = |k: usize| -> Result<usize> {
                let t = toks.get(k).ok_or_else(|| bad("missing mode index".into()))?;
                t.parse().map_err(|_| bad(format!("bad mode index '{t}'")))
            };
            let real = |k: usize| -> Result<f64> {
                let t = toks.get(k).ok_or_else(|| bad("missing parameter".into()))?;
                t.parse().map_err(|_| bad(format!("bad number '{t}'")))
            };
            let (layer, arity) = match toks[0].to_ascii_uppercase().as_str() {
                "MODES" => {
                    if declared.is_some() || !layers.is_empty() {
                        return Err(bad("MODES must come first".into()));
                    }
                    declared = Some(int(1)?);
                    continue;
                }
                "BS" => (GaussianLayer::Bs { i: int(1)?, j: int(2)?, theta: real(3)? }, 4),
                "PS" => (GaussianLayer::Ps { i: int(1)?, theta: real(2)? }, 3),
                "SMS" => (GaussianLayer::Sms { i: int(1)?, r: real(2)?, theta: real(3)? }, 4),
                "DISP" => (GaussianLayer::Disp { i: int(1)?, x: real(2)?, p: real(3)? }, 4),
                other => return Err(bad(format!("unknown layer '{other}'"))),
            };
            if toks.len() != arity {
                return Err(bad("wrong number of fields".into()));
            }
            layers.push(layer);
        }
        let inferred = layers.iter().flat_map(|l| l.modes()).max().map(|m| m + 1);
        let n = declared.or(inferred).ok_or(QheError::Parse { line: 0, msg: "empty circuit without MODES".into() })?;
        GaussianCircuit::new(n, layers)
    }
}

/// Sequential transport through the layers using the complex-amplitude
/// formulas; displacements leave the key unchanged.
pub fn transport_key_gaussian(circuit: &GaussianCircuit, key: &DisplacementVec) -> Result<DisplacementVec> {
    check_len(circuit.n_modes(), key.n_modes())?;
    let mut a = key.to_complex();
    for l in circuit.layers() {
        match *l {
            GaussianLayer::Bs { i, j, theta } => {
                let (c, s) = (theta.cos(), theta.sin());
                let (ai, aj) = (a[i], a[j]);
                a[i] = ai * c - aj * s;
                a[j] = ai * s + aj * c;
            }
            GaussianLayer::Ps { i, theta } => a[i] *= Complex64::from_polar(1.0, theta),
            GaussianLayer::Sms { i, r, theta } => a[i] = transport_key_squeezer(-r, theta, a[i]),
            GaussianLayer::Disp { .. } => {}
        }
    }
    DisplacementVec::from_complex(&a)
}

/// Largest deviation between `G∘D(d)` and `D(d′)∘G` as affine maps, probed
/// at the origin and the unit vectors.
pub fn commutation_residual(g: &SymplecticOp, key: &DisplacementVec, transported: &DisplacementVec) -> Result<f64> {
    check_len(g.n_modes(), key.n_modes())?;
    check_len(g.n_modes(), transported.n_modes())?;
    let n2 = 2 * g.n_modes();
    let d = key.to_vector();
    let d2 = transported.to_vector();
    let mut worst: f64 = 0.0;
    for k in 0..=n2 {
        let mut r = DVector::zeros(n2);
        if k < n2 {
            r[k] = 1.0;
        }
        let lhs = g.apply_point(&(&r + &d));
        let rhs = g.apply_point(&r) + &d2;
        worst = worst.max((lhs - rhs).amax());
    }
    Ok(worst)
}

/// Nullifiers `n̂ = Σ α_k x̂_k` and `n̂ = Σ β_k p̂_k` with entries in {−1, 0, 1}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NullifierSet {
    n: usize,
    x_type: Vec<Vec<i8>>,
    p_type: Vec<Vec<i8>>,
}

impl NullifierSet {
    pub fn new(n: usize, x_type: Vec<Vec<i8>>, p_type: Vec<Vec<i8>>) -> Result<Self> {
        for v in x_type.iter().chain(&p_type) {
            check_len(n, v.len())?;
            if v.iter().any(|c| !(-1..=1).contains(c)) {
                return Err(QheError::InvalidArgument("nullifier coefficients must be in {−1, 0, 1}".into()));
            }
        }
        Ok(NullifierSet { n, x_type, p_type })
    }

    /// Coefficient vectors over `(x, p)`.
    pub fn vectors(&self) -> Vec<DVector<f64>> {
        let n = self.n;
        let mut out = Vec::new();
        for v in &self.x_type {
            out.push(DVector::from_fn(2 * n, |k, _| if k < n { v[k] as f64 } else { 0.0 }));
        }
        for v in &self.p_type {
            out.push(DVector::from_fn(2 * n, |k, _| if k >= n { v[k - n] as f64 } else { 0.0 }));
        }
        out
    }
}

/// Nullifier coefficients after `u`: `c′ = S^{−T} c`.
pub fn nullifier_transport(nulls: &NullifierSet, u: &SymplecticOp) -> Result<Vec<DVector<f64>>> {
    check_len(nulls.n, u.n_modes())?;
    let sit = u.inverse_matrix().transpose();
    Ok(nulls.vectors().iter().map(|c| &sit * c).collect())
}

/// Shift of a nullifier's value under the key, `c·d`. A c-number, so the
/// client can remove it from any measured nullifier.
pub fn nullifier_offset(c: &DVector<f64>, key: &DisplacementVec) -> Result<f64> {
    check_len(c.len(), 2 * key.n_modes())?;
    Ok(c.dot(&key.to_vector()))
}

/// GKP logical Pauli as a single-mode shift: `X ↦ (α, 0)`,
/// `Z ↦ (0, 2π/(nα))`, `Y ↦` their sum.
pub fn gkp_logical_to_displacement(pauli: Pauli, n: u32, alpha: f64) -> Result<DisplacementVec> {
    if !(alpha > 0.0) || n < 2 {
        return Err(QheError::InvalidArgument("need α > 0 and n ≥ 2".into()));
    }
    let (x, z) = pauli.bits();
    let px = if x { alpha } else { 0.0 };
    let pp = if z { 2.0 * PI / (n as f64 * alpha) } else { 0.0 };
    DisplacementVec::new(vec![px], vec![pp])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn squeezer_values() {
        let g = transport_key_squeezer(2f64.ln(), 0.0, Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(g.re, 2.0, epsilon = 1e-12);
        let g = transport_key_squeezer(2f64.ln(), 0.0, Complex64::new(0.0, 1.0));
        assert_abs_diff_eq!(g.im, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(g.re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn squeezer_matrix_matches_formula() {
        let s = SymplecticOp::squeezer(1, 0, 0.7, 0.3);
        let a = Complex64::new(0.4, -1.1);
        let key = DisplacementVec::from_complex(&[a]).unwrap();
        let got = s.transport(&key).unwrap().to_complex()[0];
        let want = transport_key_squeezer(-0.7, 0.3, a);
        assert!((got - want).norm() < 1e-12);
        assert!(SymplecticOp::new(s.matrix().clone(), DVector::zeros(2)).is_ok());
    }

    #[test]
    fn text_roundtrip() {
        let c: GaussianCircuit = "BS 0 1 0.5\nSMS 1 0.2 0\nDISP 0 1 2\n".parse().unwrap();
        assert_eq!(c.n_modes(), 2);
        let back: GaussianCircuit = c.to_string().parse().unwrap();
        assert_eq!(back, c);
        assert!("BS 0 0 1".parse::<GaussianCircuit>().is_err());
    }
}
