//! Scheme algebra: keys, encryption maps, the homomorphism `φ`, key transport
//! `f(κ, C)`, decryption, composition, security `Δ` and the check that
//! encoding commutes with encryption.
//!
//! Conventions:
//! - `transport_key(κ, C)` is `f(κ, C)`, defined by `Encr_κ ∘ C = φ(C) ∘ Encr_f`.
//! - The decryption key after the server runs `φ(C)` is `f(κ, C⁻¹)`, so that
//!   `φ(C) ∘ Encr_κ = Encr_{f(κ,C⁻¹)} ∘ C`.

use num_complex::Complex64;
use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::clifford::{CliffordOp, Gate};
use crate::error::{check_len, QheError, Result};
use crate::pauli::{Pauli, PauliString};
use crate::perm_key::PermKey;
use crate::sim::dense::{
    clifford_unitary, partial_trace_matrix, permute_matrix, unitary_channel_distance, CMatrix, DensityMatrix,
};
use crate::sim::Backend;

/// Sweeps larger than this fall back to sampling.
pub const EXACT_SWEEP_LIMIT: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SchemeKey {
    Trivial,
    Pauli(PauliString),
    Perm(PermKey),
    Tuple(Vec<SchemeKey>),
}

impl SchemeKey {
    pub fn as_pauli(&self) -> Option<&PauliString> {
        match self {
            SchemeKey::Pauli(p) => Some(p),
            _ => None,
        }
    }
}

/// SWAP sequence moving the content of qubit `q` to `perm[q]`.
pub fn transpositions(perm: &[usize]) -> Result<Vec<(usize, usize)>> {
    let n = perm.len();
    let mut inv = vec![usize::MAX; n];
    for (q, &p) in perm.iter().enumerate() {
        if p >= n || inv[p] != usize::MAX {
            return Err(QheError::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
        inv[p] = q;
    }
    // holder[pos] = original qubit currently at pos; where[o] = its position.
    let mut holder: Vec<usize> = (0..n).collect();
    let mut place: Vec<usize> = (0..n).collect();
    let mut swaps = Vec::new();
    for t in 0..n {
        let o = inv[t];
        let p = place[o];
        if p != t {
            swaps.push((p, t));
            let other = holder[t];
            holder.swap(p, t);
            place[o] = t;
            place[other] = p;
        }
    }
    Ok(swaps)
}

/// `Encr(ρ) = U (ρ ⊗ |0…0⟩⟨0…0| ⊗ I/2^k) U†`, with the three input factors
/// placed on `plain_at`, `zero_at` and `mixed_at` of the cipher register.
#[derive(Clone, Debug)]
pub struct EncryptionMap {
    n_cipher: usize,
    plain_at: Vec<usize>,
    zero_at: Vec<usize>,
    mixed_at: Vec<usize>,
    unitary: CliffordOp,
}

impl EncryptionMap {
    pub fn new(plain_at: Vec<usize>, zero_at: Vec<usize>, mixed_at: Vec<usize>, unitary: CliffordOp) -> Result<Self> {
        let n_cipher = unitary.n_qubits();
        let mut seen = vec![false; n_cipher];
        for &q in plain_at.iter().chain(&zero_at).chain(&mixed_at) {
            if q >= n_cipher {
                return Err(QheError::QubitOutOfRange { index: q, n: n_cipher });
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(QheError::InvalidArgument(format!("cipher qubit {q} assigned twice")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(QheError::InvalidArgument("cipher register not fully assigned".into()));
        }
        Ok(EncryptionMap { n_cipher, plain_at, zero_at, mixed_at, unitary })
    }

    pub fn identity(n: usize) -> Self {
        EncryptionMap { n_cipher: n, plain_at: (0..n).collect(), zero_at: vec![], mixed_at: vec![], unitary: CliffordOp::identity(n) }
    }

    pub fn pauli(p: &PauliString) -> Self {
        let n = p.n_qubits();
        let gates: Vec<Gate> = (0..n)
            .filter_map(|q| match p.get(q) {
                Pauli::I => None,
                Pauli::X => Some(Gate::X(q)),
                Pauli::Y => Some(Gate::Y(q)),
                Pauli::Z => Some(Gate::Z(q)),
            })
            .collect();
        let unitary = CliffordOp::from_gates(n, &gates).expect("in range");
        EncryptionMap { unitary, ..Self::identity(n) }
    }

    pub fn n_cipher(&self) -> usize {
        self.n_cipher
    }

    pub fn n_plain(&self) -> usize {
        self.plain_at.len()
    }

    pub fn plain_at(&self) -> &[usize] {
        &self.plain_at
    }

    pub fn zero_at(&self) -> &[usize] {
        &self.zero_at
    }

    pub fn mixed_at(&self) -> &[usize] {
        &self.mixed_at
    }

    pub fn unitary(&self) -> &CliffordOp {
        &self.unitary
    }

    /// Old-to-new qubit map from the input order (plain, zero, mixed).
    fn input_layout(&self) -> Vec<usize> {
        self.plain_at.iter().chain(&self.zero_at).chain(&self.mixed_at).copied().collect()
    }

    /// Places this map on a larger register at `offset`.
    pub fn shifted(&self, offset: usize, n_total: usize) -> Result<EncryptionMap> {
        let positions: Vec<usize> = (offset..offset + self.n_cipher).collect();
        let sh = |v: &[usize]| v.iter().map(|q| q + offset).collect::<Vec<_>>();
        Ok(EncryptionMap {
            n_cipher: n_total,
            plain_at: sh(&self.plain_at),
            zero_at: sh(&self.zero_at),
            mixed_at: sh(&self.mixed_at),
            unitary: self.unitary.embed(n_total, &positions)?,
        })
    }

    /// The map applied to an arbitrary operator on the plain register.
    pub fn apply_operator(&self, op: &CMatrix) -> Result<CMatrix> {
        check_len(1 << self.n_plain(), op.nrows())?;
        DensityMatrix::check_cap(self.n_cipher)?;
        let mut full = op.clone();
        let mut zero = CMatrix::zeros(2, 2);
        zero[(0, 0)] = Complex64::new(1.0, 0.0);
        let mixed = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        for _ in &self.zero_at {
            full = zero.kronecker(&full);
        }
        for _ in &self.mixed_at {
            full = mixed.kronecker(&full);
        }
        let placed = permute_matrix(&full, self.n_cipher, &self.input_layout())?;
        let u = clifford_unitary(&self.unitary)?;
        Ok(&u * placed * u.adjoint())
    }

    pub fn encrypt_dense(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::from_matrix(self.apply_operator(rho.matrix())?)
    }

    /// Inverse unitary, then trace out everything but the plain positions.
    pub fn decrypt_operator(&self, op: &CMatrix) -> Result<CMatrix> {
        check_len(1 << self.n_cipher, op.nrows())?;
        let u = clifford_unitary(&self.unitary)?;
        let back = u.adjoint() * op * &u;
        partial_trace_matrix(&back, self.n_cipher, &self.plain_at)
    }

    pub fn decrypt_dense(&self, sigma: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::from_matrix(self.decrypt_operator(sigma.matrix())?)
    }

    /// Encrypts a backend register holding exactly the plain qubits. Mixed
    /// inputs come from the backend's depolarizing channel (sampled on
    /// trajectory backends).
    pub fn encrypt_backend<B: Backend + ?Sized>(&self, b: &mut B, rng: &mut dyn RngCore) -> Result<()> {
        check_len(self.n_plain(), b.n_qubits())?;
        b.append_zero(self.n_cipher - self.n_plain())?;
        for (p, t) in transpositions(&self.input_layout())? {
            b.apply_gate(&Gate::Swap(p, t))?;
        }
        for &q in &self.mixed_at {
            b.depolarize(q, rng)?;
        }
        b.apply_clifford(&self.unitary)
    }

    /// Undoes the unitary; the plaintext then sits on `plain_at`.
    pub fn decrypt_backend<B: Backend + ?Sized>(&self, b: &mut B) -> Result<()> {
        b.apply_clifford(&self.unitary.inverse())
    }
}

/// A homomorphic encryption scheme `(S, K, A, φ, Encr_K)`.
pub trait Scheme: Send + Sync {
    fn name(&self) -> String;
    fn plain_qubits(&self) -> usize;
    fn cipher_qubits(&self) -> usize;
    /// `None` when the key space is not finite.
    fn key_count(&self) -> Option<u128>;
    fn enumerate_keys(&self) -> Result<Vec<SchemeKey>>;
    fn sample_key(&self, rng: &mut dyn RngCore) -> SchemeKey;
    fn encryption(&self, key: &SchemeKey) -> Result<EncryptionMap>;
    /// Membership in the allowed computations `A`.
    fn allows(&self, c: &CliffordOp) -> Result<()>;
    /// `φ(C)` on the cipher register.
    fn lift(&self, c: &CliffordOp) -> Result<CliffordOp>;
    /// `f(κ, C)`.
    fn transport_key(&self, key: &SchemeKey, c: &CliffordOp) -> Result<SchemeKey>;
    /// Keys are Pauli frames and `φ` is the identity.
    fn is_pauli_family(&self) -> bool {
        false
    }
}

/// The singleton-key scheme.
#[derive(Clone, Debug)]
pub struct TrivialScheme {
    pub n: usize,
}

impl Scheme for TrivialScheme {
    fn name(&self) -> String {
        format!("trivial[{}]", self.n)
    }
    fn plain_qubits(&self) -> usize {
        self.n
    }
    fn cipher_qubits(&self) -> usize {
        self.n
    }
    fn key_count(&self) -> Option<u128> {
        Some(1)
    }
    fn enumerate_keys(&self) -> Result<Vec<SchemeKey>> {
        Ok(vec![SchemeKey::Trivial])
    }
    fn sample_key(&self, _rng: &mut dyn RngCore) -> SchemeKey {
        SchemeKey::Trivial
    }
    fn encryption(&self, key: &SchemeKey) -> Result<EncryptionMap> {
        match key {
            SchemeKey::Trivial => Ok(EncryptionMap::identity(self.n)),
            SchemeKey::Pauli(p) if p.is_identity_up_to_phase() => Ok(EncryptionMap::identity(self.n)),
            SchemeKey::Pauli(p) => {
                check_len(self.n, p.n_qubits())?;
                Ok(EncryptionMap::pauli(p))
            }
            other => Err(QheError::InvalidArgument(format!("key {other:?} does not belong to {}", self.name()))),
        }
    }
    fn allows(&self, c: &CliffordOp) -> Result<()> {
        check_len(self.n, c.n_qubits())
    }
    fn lift(&self, c: &CliffordOp) -> Result<CliffordOp> {
        self.allows(c)?;
        Ok(c.clone())
    }
    fn transport_key(&self, key: &SchemeKey, c: &CliffordOp) -> Result<SchemeKey> {
        self.allows(c)?;
        match key {
            SchemeKey::Pauli(p) => Ok(SchemeKey::Pauli(c.conjugate_inverse(p)?.with_phase(0))),
            k => Ok(k.clone()),
        }
    }
    fn is_pauli_family(&self) -> bool {
        true
    }
}

/// `(1/|K|) Σ_κ Encr_κ(ρ)`; terms are computed in parallel and summed in key order.
pub fn ciphertext_average(scheme: &dyn Scheme, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_len(scheme.plain_qubits(), rho.n_qubits())?;
    let keys = enumerate_checked(scheme)?;
    DensityMatrix::check_cap(scheme.cipher_qubits())?;
    average_over(scheme, &keys, rho)
}

fn enumerate_checked(scheme: &dyn Scheme) -> Result<Vec<SchemeKey>> {
    match scheme.key_count() {
        None => Err(QheError::NotEnumerable(scheme.name())),
        Some(k) if k > EXACT_SWEEP_LIMIT => {
            Err(QheError::NotEnumerable(format!("{} has {k} keys, above the exact-sweep limit", scheme.name())))
        }
        Some(_) => scheme.enumerate_keys(),
    }
}

fn average_over(scheme: &dyn Scheme, keys: &[SchemeKey], rho: &DensityMatrix) -> Result<DensityMatrix> {
    let terms: Vec<CMatrix> = keys
        .par_iter()
        .map(|k| scheme.encryption(k)?.apply_operator(rho.matrix()))
        .collect::<Result<_>>()?;
    let mut acc = CMatrix::zeros(terms[0].nrows(), terms[0].ncols());
    for t in &terms {
        acc += t;
    }
    DensityMatrix::from_matrix(acc / Complex64::new(keys.len() as f64, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMethod {
    ExactSweep,
    Sampled,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecurityReport {
    pub delta: f64,
    pub method: SweepMethod,
    pub key_count: u128,
    /// Indices into the input set of the pair attaining `delta`.
    pub witness_pair: (usize, usize),
}

/// `Δ = max ½‖Encr(ρ) − Encr(ρ′)‖₁` over input pairs, by full key sweep.
pub fn security_delta(scheme: &dyn Scheme, inputs: &[DensityMatrix]) -> Result<SecurityReport> {
    if inputs.is_empty() {
        return Err(QheError::InvalidArgument("empty input set".into()));
    }
    let keys = enumerate_checked(scheme)?;
    let avgs = inputs.iter().map(|r| average_over(scheme, &keys, r)).collect::<Result<Vec<_>>>()?;
    let (delta, witness_pair) = max_pairwise(&avgs)?;
    Ok(SecurityReport { delta, method: SweepMethod::ExactSweep, key_count: keys.len() as u128, witness_pair })
}

/// Same as [`security_delta`] over `samples` random keys (labelled as sampled).
pub fn security_delta_sampled(
    scheme: &dyn Scheme,
    inputs: &[DensityMatrix],
    samples: usize,
    rng: &mut dyn RngCore,
) -> Result<SecurityReport> {
    if inputs.is_empty() || samples == 0 {
        return Err(QheError::InvalidArgument("empty input set or zero samples".into()));
    }
    let keys: Vec<SchemeKey> = (0..samples).map(|_| scheme.sample_key(rng)).collect();
    let avgs = inputs.iter().map(|r| average_over(scheme, &keys, r)).collect::<Result<Vec<_>>>()?;
    let (delta, witness_pair) = max_pairwise(&avgs)?;
    Ok(SecurityReport { delta, method: SweepMethod::Sampled, key_count: samples as u128, witness_pair })
}

fn max_pairwise(avgs: &[DensityMatrix]) -> Result<(f64, (usize, usize))> {
    let mut best = (0.0, (0, 0));
    for i in 0..avgs.len() {
        for j in (i + 1)..avgs.len() {
            let d = avgs[i].trace_distance(&avgs[j])?;
            if d > best.0 {
                best = (d, (i, j));
            }
        }
    }
    Ok(best)
}

/// `Decr_{κ,C}`: the adjoint of the encryption under the output key. `γ` of the
/// composition rule is the identity for every scheme built here.
#[derive(Clone, Debug)]
pub struct Decryption {
    pub key: SchemeKey,
    pub map: EncryptionMap,
    /// Gates in the decryption circuit, for compactness accounting.
    pub gate_count: usize,
}

impl Decryption {
    pub fn apply_dense(&self, sigma: &DensityMatrix) -> Result<DensityMatrix> {
        self.map.decrypt_dense(sigma)
    }
}

pub fn derive_decryption(scheme: &dyn Scheme, key: &SchemeKey, c: &CliffordOp) -> Result<Decryption> {
    scheme.allows(c)?;
    let out = scheme.transport_key(key, &c.inverse())?;
    let map = scheme.encryption(&out)?;
    let gate_count = map.unitary().gate_count();
    Ok(Decryption { key: out, map, gate_count })
}

/// Full client/server round trip on the dense oracle; returns the trace
/// distance between the decrypted output and `CρC†`.
pub fn roundtrip_dense(scheme: &dyn Scheme, key: &SchemeKey, c: &CliffordOp, rho: &DensityMatrix) -> Result<f64> {
    let enc = scheme.encryption(key)?;
    let mut sigma = enc.encrypt_dense(rho)?;
    sigma.apply_clifford(&scheme.lift(c)?)?;
    let out = derive_decryption(scheme, key, c)?.apply_dense(&sigma)?;
    let mut want = rho.clone();
    want.apply_clifford(c)?;
    out.trace_distance(&want)
}

/// `lift(c1 ∘ c2)` against `lift(c1) ∘ lift(c2)`, compared tableau-exactly.
pub fn check_homomorphism(scheme: &dyn Scheme, c1: &CliffordOp, c2: &CliffordOp) -> Result<bool> {
    let joint = scheme.lift(&CliffordOp::compose(c1, c2)?)?;
    let split = CliffordOp::compose(&scheme.lift(c1)?, &scheme.lift(c2)?)?;
    Ok(joint.same_action(&split))
}

/// Product scheme of independent components on consecutive plain blocks.
pub struct ComposedScheme {
    components: Vec<Box<dyn Scheme>>,
}

pub fn compose_schemes(components: Vec<Box<dyn Scheme>>) -> Result<ComposedScheme> {
    if components.is_empty() {
        return Err(QheError::InvalidArgument("no components".into()));
    }
    if components.iter().any(|c| c.plain_qubits() == 0) {
        return Err(QheError::InvalidArgument("component with no qubits".into()));
    }
    Ok(ComposedScheme { components })
}

impl ComposedScheme {
    pub fn components(&self) -> &[Box<dyn Scheme>] {
        &self.components
    }

    fn plain_offsets(&self) -> Vec<usize> {
        offsets(self.components.iter().map(|c| c.plain_qubits()))
    }

    fn cipher_offsets(&self) -> Vec<usize> {
        offsets(self.components.iter().map(|c| c.cipher_qubits()))
    }

    fn all_pauli(&self) -> bool {
        self.components.iter().all(|c| c.is_pauli_family())
    }

    fn tuple<'a>(&self, key: &'a SchemeKey) -> Result<&'a [SchemeKey]> {
        match key {
            SchemeKey::Tuple(ks) if ks.len() == self.components.len() => Ok(ks),
            other => Err(QheError::InvalidArgument(format!("expected a {}-tuple key, got {other:?}", self.components.len()))),
        }
    }

    /// Whole-register Pauli frame of a key, for Pauli-family compositions.
    fn frame(&self, key: &SchemeKey) -> Result<PauliString> {
        if let SchemeKey::Pauli(p) = key {
            check_len(self.plain_qubits(), p.n_qubits())?;
            return Ok(p.clone());
        }
        let n = self.plain_qubits();
        let mut out = PauliString::identity(n);
        for ((comp, k), off) in self.components.iter().zip(self.tuple(key)?).zip(self.plain_offsets()) {
            if let SchemeKey::Pauli(p) = k {
                let pos: Vec<usize> = (off..off + comp.plain_qubits()).collect();
                out = out.multiply(&p.embed(n, &pos)?)?;
            }
        }
        Ok(out.with_phase(0))
    }

    /// Splits `c` into per-component Cliffords when no gate crosses blocks.
    fn factorize(&self, c: &CliffordOp) -> Result<Vec<CliffordOp>> {
        check_len(self.plain_qubits(), c.n_qubits())?;
        let offs = self.plain_offsets();
        let block = |q: usize| offs.iter().rposition(|&o| o <= q).expect("offset 0 exists");
        let mut parts: Vec<Vec<Gate>> = vec![Vec::new(); self.components.len()];
        for g in c.gates() {
            let qs = g.qubits();
            let b = block(qs[0]);
            if qs.iter().any(|&q| block(q) != b) {
                return Err(QheError::NotAllowed(format!("{g} crosses scheme components")));
            }
            parts[b].push(g.remap(|q| q - offs[b]));
        }
        parts
            .iter()
            .zip(&self.components)
            .map(|(gs, comp)| CliffordOp::from_gates(comp.plain_qubits(), gs))
            .collect()
    }
}

fn offsets(sizes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut acc = 0;
    sizes
        .map(|s| {
            let o = acc;
            acc += s;
            o
        })
        .collect()
}

impl Scheme for ComposedScheme {
    fn name(&self) -> String {
        let names: Vec<String> = self.components.iter().map(|c| c.name()).collect();
        names.join(" ⊗ ")
    }
    fn plain_qubits(&self) -> usize {
        self.components.iter().map(|c| c.plain_qubits()).sum()
    }
    fn cipher_qubits(&self) -> usize {
        self.components.iter().map(|c| c.cipher_qubits()).sum()
    }
    fn key_count(&self) -> Option<u128> {
        self.components.iter().try_fold(1u128, |acc, c| acc.checked_mul(c.key_count()?))
    }
    fn enumerate_keys(&self) -> Result<Vec<SchemeKey>> {
        let mut out: Vec<Vec<SchemeKey>> = vec![Vec::new()];
        for comp in &self.components {
            let ks = comp.enumerate_keys()?;
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    ks.iter().map(move |k| {
                        let mut v = prefix.clone();
                        v.push(k.clone());
                        v
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(SchemeKey::Tuple).collect())
    }
    fn sample_key(&self, rng: &mut dyn RngCore) -> SchemeKey {
        SchemeKey::Tuple(self.components.iter().map(|c| c.sample_key(rng)).collect())
    }
    fn encryption(&self, key: &SchemeKey) -> Result<EncryptionMap> {
        if self.all_pauli() {
            return Ok(EncryptionMap::pauli(&self.frame(key)?));
        }
        let n = self.cipher_qubits();
        let mut plain_at = Vec::new();
        let mut zero_at = Vec::new();
        let mut mixed_at = Vec::new();
        let mut unitary = CliffordOp::identity(n);
        for ((comp, k), off) in self.components.iter().zip(self.tuple(key)?).zip(self.cipher_offsets()) {
            let m = comp.encryption(k)?.shifted(off, n)?;
            plain_at.extend_from_slice(m.plain_at());
            zero_at.extend_from_slice(m.zero_at());
            mixed_at.extend_from_slice(m.mixed_at());
            unitary = unitary.then(m.unitary())?;
        }
        EncryptionMap::new(plain_at, zero_at, mixed_at, unitary)
    }
    fn allows(&self, c: &CliffordOp) -> Result<()> {
        if self.all_pauli() {
            return check_len(self.plain_qubits(), c.n_qubits());
        }
        for (part, comp) in self.factorize(c)?.iter().zip(&self.components) {
            comp.allows(part)?;
        }
        Ok(())
    }
    fn lift(&self, c: &CliffordOp) -> Result<CliffordOp> {
        self.allows(c)?;
        if self.all_pauli() {
            return Ok(c.clone());
        }
        let n = self.cipher_qubits();
        let mut out = CliffordOp::identity(n);
        for ((part, comp), off) in self.factorize(c)?.iter().zip(&self.components).zip(self.cipher_offsets()) {
            let pos: Vec<usize> = (off..off + comp.cipher_qubits()).collect();
            out = out.then(&comp.lift(part)?.embed(n, &pos)?)?;
        }
        Ok(out)
    }
    fn transport_key(&self, key: &SchemeKey, c: &CliffordOp) -> Result<SchemeKey> {
        self.allows(c)?;
        if self.all_pauli() {
            // The transported frame can leave K* (e.g. spread onto trivially
            // keyed qubits); it stays a Pauli frame.
            return Ok(SchemeKey::Pauli(c.conjugate_inverse(&self.frame(key)?)?.with_phase(0)));
        }
        let parts = self.factorize(c)?;
        let ks = self.tuple(key)?;
        let out = self
            .components
            .iter()
            .zip(ks)
            .zip(&parts)
            .map(|((comp, k), part)| comp.transport_key(k, part))
            .collect::<Result<Vec<_>>>()?;
        Ok(SchemeKey::Tuple(out))
    }
    fn is_pauli_family(&self) -> bool {
        self.all_pauli()
    }
}

/// Outcome of checking that encoding commutes with encryption.
#[derive(Clone, Debug, Serialize)]
pub struct QecCommutation {
    pub holds: bool,
    /// `λ` with `Encr_κ ∘ Enc = φ(Enc) ∘ Encr_λ`.
    pub lambda: SchemeKey,
    /// Channel distance of the two sides (dense oracle).
    pub channel_distance: f64,
    /// `f(f(κ, L(C)), Enc) == f(λ, C)` for every supplied `C`.
    pub key_relation_holds: bool,
}

/// Checks `Encr_κ ∘ Enc = φ(Enc) ∘ Encr_λ` with `λ = f(κ, Enc)`, and the key
/// relation `f(f(κ, L(C)), Enc) = f(λ, C)` with `L(C) = Enc C Enc†` for each
/// test computation.
pub fn check_qec_commutation(
    scheme: &dyn Scheme,
    enc: &CliffordOp,
    key: &SchemeKey,
    computations: &[CliffordOp],
) -> Result<QecCommutation> {
    scheme.allows(enc).map_err(|e| QheError::NotAllowed(format!("encoder not in the allowed set: {e}")))?;
    let lambda = scheme.transport_key(key, enc)?;
    let e_kappa = scheme.encryption(key)?;
    let e_lambda = scheme.encryption(&lambda)?;
    let channel_distance = if e_kappa.mixed_at().is_empty() && e_kappa.zero_at().is_empty() {
        let lhs = clifford_unitary(&CliffordOp::compose(e_kappa.unitary(), enc)?)?;
        let rhs = clifford_unitary(&CliffordOp::compose(&scheme.lift(enc)?, e_lambda.unitary())?)?;
        unitary_channel_distance(&lhs, &rhs)
    } else {
        let n = scheme.plain_qubits();
        let u_enc = clifford_unitary(enc)?;
        let phi = clifford_unitary(&scheme.lift(enc)?)?;
        let dim = 1usize << n;
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let mut e = CMatrix::zeros(dim, dim);
                e[(i, j)] = Complex64::new(1.0, 0.0);
                let lhs = e_kappa.apply_operator(&(&u_enc * &e * u_enc.adjoint()))?;
                let rhs = &phi * e_lambda.apply_operator(&e)? * phi.adjoint();
                worst = worst.max((lhs - rhs).iter().map(|c| c.norm()).fold(0.0, f64::max));
            }
        }
        worst
    };
    let mut key_relation_holds = true;
    for c in computations {
        let lc = CliffordOp::compose(&CliffordOp::compose(enc, c)?, &enc.inverse())?;
        let lhs = scheme.transport_key(&scheme.transport_key(key, &lc)?, enc)?;
        let rhs = scheme.transport_key(&lambda, c)?;
        key_relation_holds &= lhs == rhs;
    }
    Ok(QecCommutation { holds: channel_distance < 1e-10 && key_relation_holds, lambda, channel_distance, key_relation_holds })
}
