//! Pauli-key encryption.
//!
//! The key is a Pauli string `K`; the ciphertext is `KρK†`. Cliffords are run
//! verbatim by the server and the client tracks `K ↦ CKC†`. T gates are
//! teleported in through encrypted magic states with one classical round.

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::circuit::{Circuit, Element};
use crate::clifford::{CliffordOp, Gate};
use crate::error::{check_len, QheError, Result};
use crate::pauli::{Pauli, PauliString};
use crate::protocol::transcript::{Role, Transcript};
use crate::qec::StabilizerCode;
use crate::qhe::{compose_schemes, ComposedScheme, EncryptionMap, Scheme, SchemeKey, TrivialScheme};
use crate::sim::{Backend, StateVector};

/// Uniform key; `z_only` restricts to `{I, Z}` letters.
pub fn random_key<R: Rng + ?Sized>(n: usize, z_only: bool, rng: &mut R) -> PauliString {
    let xs: Vec<bool> = (0..n).map(|_| !z_only && rng.gen()).collect();
    let zs: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    PauliString::from_bits(&xs, &zs, 0).expect("matching lengths")
}

pub fn encrypt<B: Backend + ?Sized>(key: &PauliString, state: &mut B) -> Result<()> {
    check_len(state.n_qubits(), key.n_qubits())?;
    state.apply_pauli(key)
}

pub fn decrypt<B: Backend + ?Sized>(key: &PauliString, state: &mut B) -> Result<()> {
    encrypt(key, state)
}

/// Key after running `c` on the ciphertext: `C·K = K′·C`, so `K′ = CKC†`.
pub fn transport_key(key: &PauliString, c: &CliffordOp) -> Result<PauliString> {
    Ok(transport_key_with_phase(key, c)?.0)
}

/// As [`transport_key`], also returning the dropped phase as a power of `i`.
pub fn transport_key_with_phase(key: &PauliString, c: &CliffordOp) -> Result<(PauliString, u8)> {
    let img = c.conjugate(key)?;
    let phase = (img.phase() + 4 - key.phase()) % 4;
    Ok((img.with_phase(0), phase))
}

fn transport_gate(key: &mut PauliString, g: &Gate) {
    g.conjugate_in_place(key);
    key.set_phase(0);
}

#[derive(Clone, Debug)]
pub struct PauliScheme {
    pub n: usize,
    /// Keys drawn from `{I, Z}^n`; only diagonal gates are allowed.
    pub z_only: bool,
}

impl PauliScheme {
    pub fn new(n: usize) -> Self {
        PauliScheme { n, z_only: false }
    }

    pub fn z_only(n: usize) -> Self {
        PauliScheme { n, z_only: true }
    }

    fn key<'a>(&self, key: &'a SchemeKey) -> Result<&'a PauliString> {
        let p = key
            .as_pauli()
            .ok_or_else(|| QheError::InvalidArgument(format!("{key:?} is not a Pauli key")))?;
        check_len(self.n, p.n_qubits())?;
        Ok(p)
    }
}

impl Scheme for PauliScheme {
    fn name(&self) -> String {
        if self.z_only {
            format!("pauli-z[{}]", self.n)
        } else {
            format!("pauli[{}]", self.n)
        }
    }
    fn plain_qubits(&self) -> usize {
        self.n
    }
    fn cipher_qubits(&self) -> usize {
        self.n
    }
    fn key_count(&self) -> Option<u128> {
        let per = if self.z_only { 2u128 } else { 4 };
        per.checked_pow(self.n as u32)
    }
    fn enumerate_keys(&self) -> Result<Vec<SchemeKey>> {
        let all = PauliString::all(self.n);
        Ok(if self.z_only {
            all.filter(|p| p.is_diagonal()).map(SchemeKey::Pauli).collect()
        } else {
            all.map(SchemeKey::Pauli).collect()
        })
    }
    fn sample_key(&self, rng: &mut dyn RngCore) -> SchemeKey {
        SchemeKey::Pauli(random_key(self.n, self.z_only, rng))
    }
    fn encryption(&self, key: &SchemeKey) -> Result<EncryptionMap> {
        Ok(EncryptionMap::pauli(self.key(key)?))
    }
    fn allows(&self, c: &CliffordOp) -> Result<()> {
        check_len(self.n, c.n_qubits())?;
        if self.z_only {
            if let Some(g) = c.gates().iter().find(|g| !is_diagonal(g)) {
                return Err(QheError::NotAllowed(format!("{g} is not diagonal")));
            }
        }
        Ok(())
    }
    fn lift(&self, c: &CliffordOp) -> Result<CliffordOp> {
        self.allows(c)?;
        Ok(c.clone())
    }
    fn transport_key(&self, key: &SchemeKey, c: &CliffordOp) -> Result<SchemeKey> {
        self.allows(c)?;
        Ok(SchemeKey::Pauli(c.conjugate_inverse(self.key(key)?)?.with_phase(0)))
    }
    fn is_pauli_family(&self) -> bool {
        true
    }
}

fn is_diagonal(g: &Gate) -> bool {
    matches!(g, Gate::S(_) | Gate::Z(_) | Gate::Cz(..))
}

/// Encrypted `|T⟩ = T|+⟩` ancillas, each under its own single-qubit key.
#[derive(Clone, Debug)]
pub struct MagicStateResource {
    keys: Vec<Pauli>,
    used: usize,
}

impl MagicStateResource {
    pub fn new<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Self {
        let keys = (0..count).map(|_| Pauli::from_index(rng.gen_range(0..4))).collect();
        MagicStateResource { keys, used: 0 }
    }

    pub fn with_keys(keys: Vec<Pauli>) -> Self {
        MagicStateResource { keys, used: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.keys.len() - self.used
    }

    fn take(&mut self) -> Result<Pauli> {
        let k = *self
            .keys
            .get(self.used)
            .ok_or_else(|| QheError::Exhausted(format!("all {} magic states consumed", self.keys.len())))?;
        self.used += 1;
        Ok(k)
    }
}

/// Classical record of one T injection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TInjection {
    /// Server's measurement of the magic qubit.
    pub outcome: bool,
    /// Client's instruction to apply `S` afterwards.
    pub correction: bool,
}

/// Teleports `T` onto `target` of an encrypted register.
///
/// With data key `X^a Z^b` on `target` and magic key `X^c Z^d`, the server's
/// CNOT(target → magic) and Z measurement with outcome `o` leave
/// `X^a Z^{b⊕d} T^{±1}` on the plaintext, `T†` exactly when `o⊕c⊕a = 1`.
/// The client sends that bit; the server applies `S` when it is set, after
/// which the key is `X^a Z^{b⊕d⊕(bit·a)}`. The bit is padded by `c`, so it is
/// uniform to the server.
pub fn inject_t_gate<B: Backend + ?Sized>(
    state: &mut B,
    key: &mut PauliString,
    target: usize,
    magic: &mut MagicStateResource,
    transcript: &mut Transcript,
    rng: &mut dyn RngCore,
) -> Result<TInjection> {
    let n = state.n_qubits();
    check_len(n, key.n_qubits())?;
    if target >= n {
        return Err(QheError::QubitOutOfRange { index: target, n });
    }
    let idx = magic.used;
    let mk = magic.take()?;
    let (c, d) = mk.bits();
    state.append_zero(1)?;
    state.apply_gate(&Gate::H(n))?;
    state.apply_t(n, false)?;
    state.apply_pauli(&PauliString::single(n + 1, n, mk))?;
    transcript.handoff(Role::Client, format!("t{idx}.magic"), 1);

    state.apply_gate(&Gate::Cnot(target, n))?;
    let outcome = state.measure_z(n, rng)?;
    state.truncate(n, rng)?;
    transcript.classical(Role::Server, format!("t{idx}.outcome"), &[outcome]);

    let a = key.x_bit(target);
    let correction = outcome ^ c ^ a;
    transcript.classical(Role::Client, format!("t{idx}.correction"), &[correction]);
    if correction {
        state.apply_gate(&Gate::S(target))?;
    }
    let z = key.z_bit(target) ^ d ^ (correction && a);
    key.set(target, Pauli::from_bits(a, z));
    Ok(TInjection { outcome, correction })
}

/// Outcome of evaluating a circuit on ciphertext.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    /// Key that decrypts the output.
    pub final_key: PauliString,
    pub injections: Vec<TInjection>,
    /// Decrypted bits of `M` elements, by label.
    pub measurements: Vec<(String, bool)>,
    pub warnings: Vec<String>,
}

/// T count above which decryption stops being compact.
pub fn t_budget(n: usize) -> usize {
    (n.max(1) as f64).log2().ceil() as usize
}

/// Runs `circuit` on an encrypted register. Clifford gates go through
/// verbatim; T gates consume magic states; measurements are decrypted by the
/// client (`X` component of the key). Classically controlled Paulis are
/// folded into the key by the client and never touch the server.
pub fn homomorphic_eval<B: Backend + ?Sized>(
    circuit: &Circuit,
    state: &mut B,
    key: &PauliString,
    magic: &mut MagicStateResource,
    transcript: &mut Transcript,
    rng: &mut dyn RngCore,
) -> Result<EvalReport> {
    check_len(circuit.n_qubits(), state.n_qubits())?;
    check_len(circuit.n_qubits(), key.n_qubits())?;
    let mut key = key.clone();
    let mut report = EvalReport { final_key: key.clone(), injections: vec![], measurements: vec![], warnings: vec![] };
    let t = circuit.t_count();
    if t > magic.remaining() {
        return Err(QheError::Exhausted(format!("{t} T gates but {} magic states", magic.remaining())));
    }
    if t > t_budget(circuit.n_qubits()) {
        report.warnings.push(format!(
            "{t} T gates exceed the compact budget of {} for {} qubits",
            t_budget(circuit.n_qubits()),
            circuit.n_qubits()
        ));
    }
    for e in circuit.elements() {
        match e {
            Element::Gate(g) => {
                state.apply_gate(g)?;
                transport_gate(&mut key, g);
            }
            Element::T(q) => report.injections.push(inject_t_gate(state, &mut key, *q, magic, transcript, rng)?),
            Element::Measure { qubit, bit } => {
                let raw = state.measure_z(*qubit, rng)?;
                transcript.classical(Role::Server, format!("m.{bit}"), &[raw]);
                // post-measurement state is |raw⟩ = X^{x}|plain⟩; the Z part is now irrelevant
                let plain = raw ^ key.x_bit(*qubit);
                key.set(*qubit, Pauli::from_bits(key.x_bit(*qubit), false));
                report.measurements.push((bit.clone(), plain));
            }
            Element::CPauli { bit, pauli, qubit } => {
                let fired = report
                    .measurements
                    .iter()
                    .find(|(b, _)| b == bit)
                    .map(|&(_, v)| v)
                    .ok_or_else(|| QheError::InvalidArgument(format!("bit '{bit}' not measured")))?;
                if fired {
                    let mut p = key.get(*qubit).bits();
                    let (x, z) = pauli.bits();
                    p = (p.0 ^ x, p.1 ^ z);
                    key.set(*qubit, Pauli::from_bits(p.0, p.1));
                }
            }
        }
    }
    report.final_key = key;
    Ok(report)
}

/// Pauli-key data encoded into a stabilizer code after encryption. The
/// pre-encoding layer is the product of the data scheme with a trivially
/// keyed scheme on the code's `n−k` ancillas, so the key becomes a logical
/// Pauli and the server can run syndrome rounds without the client.
pub struct EncodedPauliScheme {
    base: ComposedScheme,
    code: StabilizerCode,
}

pub fn compose_with_stabilizer_code(scheme: PauliScheme, code: &StabilizerCode) -> Result<EncodedPauliScheme> {
    check_len(code.k(), scheme.n)?;
    let mut parts: Vec<Box<dyn Scheme>> = vec![Box::new(scheme)];
    if code.n() > code.k() {
        parts.push(Box::new(TrivialScheme { n: code.n() - code.k() }));
    }
    Ok(EncodedPauliScheme { base: compose_schemes(parts)?, code: code.clone() })
}

impl EncodedPauliScheme {
    pub fn base(&self) -> &ComposedScheme {
        &self.base
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    fn data_key(&self, key: &SchemeKey) -> Result<PauliString> {
        let k = self.code.k();
        let frame = match key {
            SchemeKey::Pauli(p) => p.clone(),
            SchemeKey::Tuple(ks) => ks
                .first()
                .and_then(|k| k.as_pauli())
                .cloned()
                .ok_or_else(|| QheError::InvalidArgument(format!("{key:?} has no data key")))?,
            other => return Err(QheError::InvalidArgument(format!("{other:?} is not a Pauli key"))),
        };
        Ok(frame.restrict(&(0..k).collect::<Vec<_>>()))
    }

    fn wrap(&self, data: PauliString) -> SchemeKey {
        let mut ks = vec![SchemeKey::Pauli(data)];
        if self.code.n() > self.code.k() {
            ks.push(SchemeKey::Trivial);
        }
        SchemeKey::Tuple(ks)
    }
}

impl Scheme for EncodedPauliScheme {
    fn name(&self) -> String {
        format!("{} ∘ {}", self.code.name(), self.base.name())
    }
    fn plain_qubits(&self) -> usize {
        self.code.k()
    }
    fn cipher_qubits(&self) -> usize {
        self.code.n()
    }
    fn key_count(&self) -> Option<u128> {
        self.base.key_count()
    }
    fn enumerate_keys(&self) -> Result<Vec<SchemeKey>> {
        self.base.enumerate_keys()
    }
    fn sample_key(&self, rng: &mut dyn RngCore) -> SchemeKey {
        self.base.sample_key(rng)
    }
    fn encryption(&self, key: &SchemeKey) -> Result<EncryptionMap> {
        let (k, n) = (self.code.k(), self.code.n());
        let pre = self.base.encryption(key)?;
        EncryptionMap::new((0..k).collect(), (k..n).collect(), vec![], pre.unitary().then(self.code.encoder())?)
    }
    fn allows(&self, c: &CliffordOp) -> Result<()> {
        self.code.logical_lift(c).map(|_| ())
    }
    fn lift(&self, c: &CliffordOp) -> Result<CliffordOp> {
        self.code.logical_lift(c)
    }
    fn transport_key(&self, key: &SchemeKey, c: &CliffordOp) -> Result<SchemeKey> {
        self.allows(c)?;
        Ok(self.wrap(c.conjugate_inverse(&self.data_key(key)?)?.with_phase(0)))
    }
}

/// Result of measuring a stabilizer through an encrypted ancilla.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizerOutcome {
    pub raw: bool,
    /// `raw ⊕ P_c`; equals the plaintext syndrome.
    pub corrected: bool,
}

/// Gates realizing controlled-`K` from `control`: CNOT for X, CZ for Z and
/// `S·CNOT·S†` on the target for Y.
pub fn controlled_pauli_gates(k: &PauliString, control: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    for q in k.support() {
        match k.get(q) {
            Pauli::X => gates.push(Gate::Cnot(control, q)),
            Pauli::Z => gates.push(Gate::Cz(control, q)),
            Pauli::Y => {
                gates.extend([Gate::S(q), Gate::S(q), Gate::S(q)]);
                gates.push(Gate::Cnot(control, q));
                gates.push(Gate::S(q));
            }
            Pauli::I => {}
        }
    }
    gates
}

/// Measures Hermitian `K` on the register with an ancilla prepared as
/// `Encr_{κa}(|+⟩)`: controlled-K, `H`, Z measurement. The correction bit
/// `P_c` is the ancilla key's Z component, plus the commutation sign of `K`
/// with the data key when the client supplies it.
pub fn encrypted_stabilizer_measurement<B: Backend + ?Sized>(
    state: &mut B,
    k: &PauliString,
    ancilla_key: Pauli,
    data_key: Option<&PauliString>,
    rng: &mut dyn RngCore,
) -> Result<StabilizerOutcome> {
    let n = state.n_qubits();
    check_len(n, k.n_qubits())?;
    if !k.is_hermitian() {
        return Err(QheError::InvalidArgument(format!("{k} is not Hermitian")));
    }
    state.append_zero(1)?;
    state.apply_gate(&Gate::H(n))?;
    state.apply_pauli(&PauliString::single(n + 1, n, ancilla_key))?;
    for g in controlled_pauli_gates(k, n) {
        state.apply_gate(&g)?;
    }
    if k.phase() == 2 {
        state.apply_gate(&Gate::Z(n))?;
    }
    state.apply_gate(&Gate::H(n))?;
    let raw = state.measure_z(n, rng)?;
    state.truncate(n, rng)?;
    let mut pc = ancilla_key.bits().1;
    if let Some(dk) = data_key {
        check_len(n, dk.n_qubits())?;
        pc ^= !dk.commutes_with(k);
    }
    Ok(StabilizerOutcome { raw, corrected: raw ^ pc })
}

/// Exact and sampled output distribution of an IQP circuit.
#[derive(Clone, Debug, Serialize)]
pub struct IqpDistribution {
    /// `probabilities[y]` with qubit `q` as bit `q` of `y`.
    pub probabilities: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Samples `y` from `|⟨y|H^{⊗n} C H^{⊗n}|x⟩|²`. With `z_key`, the input is
/// encrypted as `Z^k H^{⊗n}|x⟩`; the server's outputs are `y ⊕ k` and the
/// client XORs `k` back, so decrypted counts follow the plain distribution.
pub fn iqp_distribution(
    circuit: &Circuit,
    x: &[bool],
    n_samples: usize,
    z_key: Option<&[bool]>,
    rng: &mut dyn RngCore,
) -> Result<IqpDistribution> {
    let n = circuit.n_qubits();
    check_len(n, x.len())?;
    let mut sv = StateVector::zero(n)?;
    for q in 0..n {
        if x[q] {
            sv.apply_gate(&Gate::X(q))?;
        }
        sv.apply_gate(&Gate::H(q))?;
    }
    let mask: usize = match z_key {
        Some(k) => {
            check_len(n, k.len())?;
            let zs = PauliString::from_bits(&vec![false; n], k, 0)?;
            sv.apply_pauli(&zs)?;
            (0..n).filter(|&q| k[q]).map(|q| 1 << q).sum()
        }
        None => 0,
    };
    for e in circuit.elements() {
        match e {
            Element::Gate(g) if is_diagonal(g) => sv.apply_gate(g)?,
            Element::T(q) => sv.apply_t(*q, false)?,
            other => return Err(QheError::NotAllowed(format!("{other:?} is not diagonal"))),
        }
    }
    for q in 0..n {
        sv.apply_gate(&Gate::H(q))?;
    }
    let server: Vec<f64> = sv.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    let mut probabilities = vec![0.0; server.len()];
    for (y, &p) in server.iter().enumerate() {
        probabilities[y ^ mask] = p;
    }
    let mut counts = vec![0usize; server.len()];
    if n_samples > 0 {
        let dist = WeightedIndex::new(&server).map_err(|e| QheError::InvalidArgument(e.to_string()))?;
        for _ in 0..n_samples {
            counts[dist.sample(rng) ^ mask] += 1;
        }
    }
    Ok(IqpDistribution { probabilities, counts })
}
