//! Permutation-key encryption.
//!
//! A data qubit is spread over `m` columns with `m−1` maximally mixed helpers,
//! `m` further maximally mixed filler columns are appended, and the `2m`
//! columns of every row are shuffled by one secret permutation. Cliffords act
//! transversally, so the key never changes under computation.
//!
//! Column layout before shuffling: column 0 holds the logical qubit, columns
//! `1..m` the spreading helpers, columns `m..2m` the filler. After shuffling,
//! logical column `c` of row `r` sits on qubit `r·2m + π(c)`.
//!
//! For odd `m` the spread images are `X ↦ X^{⊗m}` and `Z ↦ Z^{⊗m}` on the
//! data columns, so a row's logical Z value is the parity of its data-column
//! bits.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::factorial::ln_binomial;

use crate::clifford::{CliffordOp, Gate};
use crate::error::{check_len, QheError, Result};
use crate::pauli::{Pauli, PauliString};
use crate::qec::StabilizerCode;
use crate::protocol::transcript::{Role, Transcript};
use crate::qhe::{transpositions, EncryptionMap, Scheme, SchemeKey};
use crate::sim::dense::DensityMatrix;
use crate::sim::Backend;

/// Permutation `π` of the `2m` columns; `perm[c]` is where logical column `c` goes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermKey {
    perm: Vec<usize>,
}

impl PermKey {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        if perm.is_empty() || perm.len() % 2 != 0 {
            return Err(QheError::InvalidArgument(format!("permutation length {} is not 2m", perm.len())));
        }
        transpositions(&perm)?;
        Ok(PermKey { perm })
    }

    pub fn identity(m: usize) -> Self {
        PermKey { perm: (0..2 * m).collect() }
    }

    /// Uniform key by Fisher–Yates.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..2 * m).collect();
        perm.shuffle(rng);
        PermKey { perm }
    }

    pub fn m(&self) -> usize {
        self.perm.len() / 2
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse(&self) -> PermKey {
        let mut inv = vec![0; self.perm.len()];
        for (c, &p) in self.perm.iter().enumerate() {
            inv[p] = c;
        }
        PermKey { perm: inv }
    }

    /// Physical columns holding spread data, ascending.
    pub fn data_columns(&self) -> Vec<usize> {
        let mut cols = self.perm[..self.m()].to_vec();
        cols.sort_unstable();
        cols
    }

    /// Parity of the data-column bits of a measured row.
    pub fn parity(&self, bits: &[bool]) -> Result<bool> {
        check_len(self.perm.len(), bits.len())?;
        Ok(self.perm[..self.m()].iter().fold(false, |acc, &c| acc ^ bits[c]))
    }

    /// SWAPs realizing the shuffle on one row starting at `offset`.
    pub fn swap_gates(&self, offset: usize) -> Vec<Gate> {
        transpositions(&self.perm)
            .expect("validated permutation")
            .into_iter()
            .map(|(a, b)| Gate::Swap(offset + a, offset + b))
            .collect()
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.perm.len()];
        let mut out = Vec::new();
        for s in 0..self.perm.len() {
            if seen[s] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut c = s;
            while !seen[c] {
                seen[c] = true;
                cyc.push(c);
                c = self.perm[c];
            }
            out.push(cyc);
        }
        out
    }

    /// All `(2m)!` keys in lexicographic order.
    pub fn all(m: usize) -> Vec<PermKey> {
        use itertools::Itertools;
        (0..2 * m).permutations(2 * m).map(|perm| PermKey { perm }).collect()
    }
}

/// Cycle notation with fixed points, e.g. `(0 2)(1)(3)`.
impl fmt::Display for PermKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cyc in self.cycles() {
            let items: Vec<String> = cyc.iter().map(|c| c.to_string()).collect();
            write!(f, "({})", items.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for PermKey {
    type Err = QheError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| QheError::Parse { line: 0, msg: format!("{msg} in key '{s}'") };
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| bad("expected '('"))?;
            let end = body.find(')').ok_or_else(|| bad("unclosed cycle"))?;
            let cyc = body[..end]
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| bad("bad column")))
                .collect::<Result<Vec<_>>>()?;
            if cyc.is_empty() {
                return Err(bad("empty cycle"));
            }
            cycles.push(cyc);
            rest = body[end + 1..].trim_start();
        }
        let n: usize = cycles.iter().map(|c| c.len()).sum();
        let mut perm = vec![usize::MAX; n];
        for cyc in &cycles {
            for (i, &c) in cyc.iter().enumerate() {
                if c >= n || perm[c] != usize::MAX {
                    return Err(bad("columns must cover 0..2m exactly once"));
                }
                perm[c] = cyc[(i + 1) % cyc.len()];
            }
        }
        PermKey::new(perm)
    }
}

impl Serialize for PermKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PermKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `√(2^r / C(2m, m))`, evaluated in log space.
pub fn security_bound(r: u64, m: u64) -> f64 {
    security_bound_log2(r, m).exp2()
}

pub fn security_bound_log2(r: u64, m: u64) -> f64 {
    0.5 * (r as f64 - ln_binomial(2 * m, m) / std::f64::consts::LN_2)
}

/// SWAPs needed to undo the shuffle on `rows` rows.
pub fn decryption_complexity(key: &PermKey, rows: usize) -> usize {
    rows * (key.perm.len() - key.cycles().len())
}

/// The `2m − 2` CNOTs spreading column `offset` over `offset..offset+m`.
pub fn spread_gates(m: usize, offset: usize) -> Vec<Gate> {
    let mut g: Vec<Gate> = (1..m).map(|k| Gate::Cnot(offset, offset + k)).collect();
    g.extend((1..m).map(|k| Gate::Cnot(offset + k, offset)));
    g
}

/// Dense spreading of one qubit into `m` columns with `m−1` mixed helpers.
pub fn spread_qubit(rho: &DensityMatrix, m: usize) -> Result<DensityMatrix> {
    check_len(1, rho.n_qubits())?;
    if m == 0 {
        return Err(QheError::InvalidArgument("m must be positive".into()));
    }
    let u = CliffordOp::from_gates(m, &spread_gates(m, 0))?;
    EncryptionMap::new(vec![0], vec![], (1..m).collect(), u)?.encrypt_dense(rho)
}

/// Whether a gate acts logically when applied to every column.
/// Spreading maps `Z` to `Z^{⊗m}` for every `m`, but `X` to `X^{⊗m}` only for
/// odd `m` (for even `m` the image skips column 0). CNOT copies each column's
/// letters onto the same column and is fine either way; CZ turns the `X`
/// image into `Z` on those columns and so needs odd `m`.
pub fn transversal_ok(g: &Gate, m: usize) -> Result<()> {
    match g {
        Gate::H(_) | Gate::X(_) | Gate::Y(_) | Gate::Cz(..) if m % 2 == 0 => {
            Err(QheError::NotAllowed(format!("transversal {} needs odd m (m = {m})", g.name())))
        }
        Gate::S(_) if m % 4 != 1 => Err(QheError::NotAllowed(format!("transversal S needs m ≡ 1 mod 4 (m = {m})"))),
        _ => Ok(()),
    }
}

/// Logical states the client can prepare on an ancilla row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    /// `T|+⟩`; not a stabilizer state.
    Magic,
}

impl RowState {
    fn prep<B: Backend + ?Sized>(self, b: &mut B, q: usize) -> Result<()> {
        match self {
            RowState::Zero => Ok(()),
            RowState::One => b.apply_gate(&Gate::X(q)),
            RowState::Plus => b.apply_gate(&Gate::H(q)),
            RowState::Minus => {
                b.apply_gate(&Gate::X(q))?;
                b.apply_gate(&Gate::H(q))
            }
            RowState::PlusI => {
                b.apply_gate(&Gate::H(q))?;
                b.apply_gate(&Gate::S(q))
            }
            RowState::Magic => {
                b.apply_gate(&Gate::H(q))?;
                b.apply_t(q, false)
            }
        }
    }

    fn prep_gates(self, q: usize) -> Result<Vec<Gate>> {
        Ok(match self {
            RowState::Zero => vec![],
            RowState::One => vec![Gate::X(q)],
            RowState::Plus => vec![Gate::H(q)],
            RowState::Minus => vec![Gate::X(q), Gate::H(q)],
            RowState::PlusI => vec![Gate::H(q), Gate::S(q)],
            RowState::Magic => return Err(QheError::NonClifford("magic row in a Clifford encryption map".into())),
        })
    }
}

/// Scheme view: `data_rows` plaintext qubits plus fixed encrypted ancilla rows.
#[derive(Clone, Debug)]
pub struct PermScheme {
    pub m: usize,
    pub data_rows: usize,
    pub aux: Vec<RowState>,
}

impl PermScheme {
    pub fn new(m: usize, data_rows: usize) -> Self {
        PermScheme { m, data_rows, aux: Vec::new() }
    }

    pub fn with_aux(m: usize, data_rows: usize, aux: Vec<RowState>) -> Self {
        PermScheme { m, data_rows, aux }
    }

    fn rows(&self) -> usize {
        self.data_rows + self.aux.len()
    }

    fn key<'a>(&self, key: &'a SchemeKey) -> Result<&'a PermKey> {
        match key {
            SchemeKey::Perm(k) if k.m() == self.m => Ok(k),
            other => Err(QheError::InvalidArgument(format!("{other:?} is not a key for m = {}", self.m))),
        }
    }
}

impl Scheme for PermScheme {
    fn name(&self) -> String {
        format!("perm[m={},rows={}+{}]", self.m, self.data_rows, self.aux.len())
    }
    fn plain_qubits(&self) -> usize {
        self.data_rows
    }
    fn cipher_qubits(&self) -> usize {
        self.rows() * 2 * self.m
    }
    fn key_count(&self) -> Option<u128> {
        (1..=2 * self.m as u128).try_fold(1u128, |a, b| a.checked_mul(b))
    }
    fn enumerate_keys(&self) -> Result<Vec<SchemeKey>> {
        Ok(PermKey::all(self.m).into_iter().map(SchemeKey::Perm).collect())
    }
    fn sample_key(&self, rng: &mut dyn RngCore) -> SchemeKey {
        SchemeKey::Perm(PermKey::random(self.m, rng))
    }
    fn encryption(&self, key: &SchemeKey) -> Result<EncryptionMap> {
        let k = self.key(key)?;
        let w = 2 * self.m;
        let n = self.cipher_qubits();
        let plain_at: Vec<usize> = (0..self.data_rows).map(|r| r * w).collect();
        let zero_at: Vec<usize> = (self.data_rows..self.rows()).map(|r| r * w).collect();
        let mixed_at: Vec<usize> = (0..n).filter(|q| q % w != 0).collect();
        let mut gates = Vec::new();
        for (j, st) in self.aux.iter().enumerate() {
            gates.extend(st.prep_gates((self.data_rows + j) * w)?);
        }
        for r in 0..self.rows() {
            gates.extend(spread_gates(self.m, r * w));
        }
        for r in 0..self.rows() {
            gates.extend(k.swap_gates(r * w));
        }
        EncryptionMap::new(plain_at, zero_at, mixed_at, CliffordOp::from_gates(n, &gates)?)
    }
    fn allows(&self, c: &CliffordOp) -> Result<()> {
        check_len(self.data_rows, c.n_qubits())?;
        c.gates().iter().try_for_each(|g| transversal_ok(g, self.m))
    }
    fn lift(&self, c: &CliffordOp) -> Result<CliffordOp> {
        self.allows(c)?;
        let w = 2 * self.m;
        let gates: Vec<Gate> =
            c.gates().iter().flat_map(|g| (0..w).map(move |col| g.remap(|r| r * w + col))).collect();
        CliffordOp::from_gates(self.cipher_qubits(), &gates)
    }
    fn transport_key(&self, key: &SchemeKey, c: &CliffordOp) -> Result<SchemeKey> {
        self.allows(c)?;
        self.key(key)?;
        Ok(key.clone())
    }
}

/// What a row slot currently holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowRole {
    Data,
    Magic,
    Phase,
    Pauli,
    Syndrome,
}

/// Server-held register of encrypted rows. Freed slots are reset to `|0⟩`
/// and reused, so measured rows cost no simulation width.
pub struct SpreadRegister<B> {
    m: usize,
    backend: B,
    slots: Vec<Option<RowRole>>,
    ancilla_rows: usize,
}

impl<B: Backend> SpreadRegister<B> {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn width(&self) -> usize {
        2 * self.m
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn backend_mut(&mut self) -> &mut B {
        &mut self.backend
    }

    pub fn into_backend(self) -> B {
        self.backend
    }

    /// Encrypted ancilla rows handed to the server so far; the `r` of the
    /// security bound.
    pub fn ancilla_rows(&self) -> usize {
        self.ancilla_rows
    }

    pub fn role(&self, row: usize) -> Option<RowRole> {
        self.slots.get(row).copied().flatten()
    }

    pub fn qubit(&self, row: usize, col: usize) -> usize {
        row * 2 * self.m + col
    }

    fn live(&self, row: usize) -> Result<()> {
        match self.role(row) {
            Some(_) => Ok(()),
            None => Err(QheError::ProtocolViolation(format!("row {row} is not live"))),
        }
    }

    fn alloc(&mut self, role: RowRole) -> Result<usize> {
        if let Some(i) = self.slots.iter().position(|s| s.is_none()) {
            self.slots[i] = Some(role);
            return Ok(i);
        }
        self.backend.append_zero(2 * self.m)?;
        self.slots.push(Some(role));
        Ok(self.slots.len() - 1)
    }

    /// Applies a row-level gate (indices are rows) to every column.
    pub fn transversal_gate(&mut self, g: &Gate) -> Result<()> {
        for &r in &g.qubits() {
            self.live(r)?;
        }
        let w = 2 * self.m;
        for col in 0..w {
            self.backend.apply_gate(&g.remap(|r| r * w + col))?;
        }
        Ok(())
    }

    /// Applies `c` transversally, its qubit `i` acting on row `rows[i]`.
    pub fn transversal_clifford(&mut self, c: &CliffordOp, rows: &[usize]) -> Result<()> {
        check_len(c.n_qubits(), rows.len())?;
        for g in c.gates() {
            transversal_ok(g, self.m)?;
            self.transversal_gate(&g.remap(|q| rows[q]))?;
        }
        Ok(())
    }

    /// Z-measures every column of a row, frees it, and returns the `2m` bits.
    pub fn measure_row(&mut self, row: usize, rng: &mut dyn RngCore) -> Result<Vec<bool>> {
        self.live(row)?;
        let mut bits = Vec::with_capacity(2 * self.m);
        for col in 0..2 * self.m {
            let q = self.qubit(row, col);
            let b = self.backend.measure_z(q, rng)?;
            if b {
                self.backend.apply_gate(&Gate::X(q))?;
            }
            bits.push(b);
        }
        self.slots[row] = None;
        Ok(bits)
    }

    /// Drops a row without revealing anything.
    pub fn discard_row(&mut self, row: usize, rng: &mut dyn RngCore) -> Result<()> {
        self.measure_row(row, rng).map(|_| ())
    }

    /// Row-level Pauli on every column (logical Pauli, up to filler noise).
    pub fn transversal_pauli(&mut self, row: usize, p: Pauli) -> Result<()> {
        let g = match p {
            Pauli::I => return Ok(()),
            Pauli::X => Gate::X(row),
            Pauli::Y => Gate::Y(row),
            Pauli::Z => Gate::Z(row),
        };
        transversal_ok(&g, self.m)?;
        self.transversal_gate(&g)
    }
}

/// The key holder. Quantum actions are limited to preparing and encrypting
/// rows and undoing the shuffle on returned rows.
pub struct PermClient {
    key: PermKey,
    t_count: usize,
    syndrome_count: usize,
}

impl PermClient {
    pub fn new(key: PermKey) -> Self {
        PermClient { key, t_count: 0, syndrome_count: 0 }
    }

    pub fn key(&self) -> &PermKey {
        &self.key
    }

    /// Depolarizes the non-logical columns, spreads and shuffles a row whose
    /// logical qubit sits on column 0.
    fn encrypt_row<B: Backend>(&self, reg: &mut SpreadRegister<B>, row: usize, rng: &mut dyn RngCore) -> Result<()> {
        let m = self.key.m();
        let base = reg.qubit(row, 0);
        for col in 1..2 * m {
            reg.backend.depolarize(base + col, rng)?;
        }
        for g in spread_gates(m, base).iter().chain(&self.key.swap_gates(base)) {
            reg.backend.apply_gate(g)?;
        }
        Ok(())
    }

    /// Encrypts a backend holding `s` plaintext qubits into `s` data rows.
    pub fn encrypt_data<B: Backend>(&self, mut backend: B, rng: &mut dyn RngCore) -> Result<SpreadRegister<B>> {
        let s = backend.n_qubits();
        let w = 2 * self.key.m();
        backend.append_zero(s * w - s)?;
        let layout: Vec<usize> = (0..s)
            .map(|i| i * w)
            .chain((0..s * w).filter(|q| q % w != 0))
            .collect();
        for (a, b) in transpositions(&layout)? {
            backend.apply_gate(&Gate::Swap(a, b))?;
        }
        let mut reg = SpreadRegister { m: self.key.m(), backend, slots: vec![Some(RowRole::Data); s], ancilla_rows: 0 };
        for row in 0..s {
            self.encrypt_row(&mut reg, row, rng)?;
        }
        Ok(reg)
    }

    /// Prepares, encrypts and hands over one ancilla row.
    pub fn prepare_row<B: Backend>(
        &self,
        reg: &mut SpreadRegister<B>,
        state: RowState,
        role: RowRole,
        rng: &mut dyn RngCore,
    ) -> Result<usize> {
        let row = reg.alloc(role)?;
        let q = reg.qubit(row, 0);
        state.prep(&mut reg.backend, q)?;
        self.encrypt_row(reg, row, rng)?;
        reg.ancilla_rows += 1;
        Ok(row)
    }

    /// Undoes shuffle and spreading on a returned row; the data then sits on
    /// the returned qubit index.
    pub fn decrypt_row<B: Backend>(&self, reg: &mut SpreadRegister<B>, row: usize) -> Result<usize> {
        reg.live(row)?;
        let base = reg.qubit(row, 0);
        let mut gates = spread_gates(self.key.m(), base);
        gates.extend(self.key.swap_gates(base));
        for g in gates.iter().rev() {
            reg.backend.apply_gate(g)?;
        }
        Ok(base)
    }

    fn pair<B: Backend>(
        &self,
        reg: &mut SpreadRegister<B>,
        states: [RowState; 2],
        role: RowRole,
        want: usize,
        rng: &mut dyn RngCore,
    ) -> Result<([usize; 2], usize)> {
        let flip: bool = rng.gen();
        let order = if flip { [states[1], states[0]] } else { states };
        let rows = [self.prepare_row(reg, order[0], role, rng)?, self.prepare_row(reg, order[1], role, rng)?];
        let label = usize::from(flip) ^ want;
        Ok((rows, label))
    }
}

/// Success flag of a probabilistic T gate, with the rows it used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TOutcome {
    pub success: bool,
}

/// Magic-state teleportation without corrections: `T` when the decoded
/// parity is 0, `T†` otherwise, each with probability 1/2.
pub fn t_gate_probabilistic<B: Backend>(
    reg: &mut SpreadRegister<B>,
    client: &mut PermClient,
    data_row: usize,
    transcript: &mut Transcript,
    rng: &mut dyn RngCore,
) -> Result<TOutcome> {
    let t = client.t_count;
    client.t_count += 1;
    let w = reg.width();
    let magic = client.prepare_row(reg, RowState::Magic, RowRole::Magic, rng)?;
    transcript.handoff(Role::Client, format!("t{t}.magic"), w);
    reg.transversal_gate(&Gate::Cnot(data_row, magic))?;
    let bits = reg.measure_row(magic, rng)?;
    transcript.classical(Role::Server, format!("t{t}.magic_bits"), &bits);
    Ok(TOutcome { success: !client.key.parity(&bits)? })
}

/// Deterministic T gate with classical interaction.
///
/// 1. Teleport through a magic row; the client decodes parity `o`
///    (`T` if 0, `T†` if 1).
/// 2. The client hands over `|+⟩` and `|+i⟩` rows in random order and names
///    `|+i⟩` iff `o = 1`. Teleporting through it applies `S` or `S†` by a
///    second parity `o₂`; through `|+⟩` it applies the identity.
/// 3. The residual `Z^{o·o₂}` is applied by [`conditional_pauli`].
///
/// Every label is uniform because pair order is secret.
pub fn t_gate_deterministic<B: Backend>(
    reg: &mut SpreadRegister<B>,
    client: &mut PermClient,
    data_row: usize,
    transcript: &mut Transcript,
    rng: &mut dyn RngCore,
) -> Result<()> {
    let t = client.t_count;
    let w = reg.width();
    let o = !t_gate_probabilistic(reg, client, data_row, transcript, rng)?.success;

    let (rows, label) = client.pair(reg, [RowState::Plus, RowState::PlusI], RowRole::Phase, usize::from(o), rng)?;
    transcript.handoff(Role::Client, format!("t{t}.phase_pair"), 2 * w);
    transcript.classical(Role::Client, format!("t{t}.phase_label"), &[label == 1]);
    reg.transversal_gate(&Gate::Cnot(data_row, rows[label]))?;
    let bits = reg.measure_row(rows[label], rng)?;
    reg.discard_row(rows[1 - label], rng)?;
    transcript.classical(Role::Server, format!("t{t}.phase_bits"), &bits);
    let o2 = client.key.parity(&bits)?;

    conditional_pauli(reg, client, data_row, Pauli::Z, o && o2, &format!("t{t}.pauli"), transcript, rng)
}

/// Applies `p` (X or Z) to `row` iff `bit`, without telling the server `bit`.
/// For X the client names the `|bit⟩` row of a shuffled `|0⟩/|1⟩` pair, used
/// as control of a transversal CNOT. For Z it names `|−⟩` or `|+⟩` from a
/// shuffled pair, used as CNOT target; the kickback is `Z^{bit}`. Only CNOT
/// is involved, so this works for every `m`.
pub fn conditional_pauli<B: Backend>(
    reg: &mut SpreadRegister<B>,
    client: &PermClient,
    row: usize,
    p: Pauli,
    bit: bool,
    slot: &str,
    transcript: &mut Transcript,
    rng: &mut dyn RngCore,
) -> Result<()> {
    let w = reg.width();
    let states = match p {
        Pauli::X => [RowState::Zero, RowState::One],
        Pauli::Z => [RowState::Plus, RowState::Minus],
        other => return Err(QheError::InvalidArgument(format!("conditional {other:?} not supported"))),
    };
    let (rows, label) = client.pair(reg, states, RowRole::Pauli, usize::from(bit), rng)?;
    transcript.handoff(Role::Client, format!("{slot}.pair"), 2 * w);
    transcript.classical(Role::Client, format!("{slot}.label"), &[label == 1]);
    if p == Pauli::X {
        reg.transversal_gate(&Gate::Cnot(rows[label], row))?;
    } else {
        reg.transversal_gate(&Gate::Cnot(row, rows[label]))?;
    }
    reg.discard_row(rows[0], rng)?;
    reg.discard_row(rows[1], rng)
}

/// Measures a CSS stabilizer (all-X or all-Z letters over data rows) through
/// an encrypted ancilla row. The server sends the `2m` bits; the client's
/// parity is the syndrome. With `correction = Some((row, P))` the client then
/// has `P` applied to `row` iff the syndrome is 1.
pub fn encrypted_syndrome_protocol<B: Backend>(
    reg: &mut SpreadRegister<B>,
    client: &mut PermClient,
    stabilizer: &[(usize, Pauli)],
    correction: Option<(usize, Pauli)>,
    transcript: &mut Transcript,
    rng: &mut dyn RngCore,
) -> Result<bool> {
    let idx = client.syndrome_count;
    client.syndrome_count += 1;
    let kind = stabilizer_kind(stabilizer)?;
    let w = reg.width();
    let anc = match kind {
        Pauli::Z => {
            let anc = client.prepare_row(reg, RowState::Zero, RowRole::Syndrome, rng)?;
            for &(r, _) in stabilizer {
                reg.transversal_gate(&Gate::Cnot(r, anc))?;
            }
            anc
        }
        _ => {
            if reg.m() % 2 == 0 {
                return Err(QheError::NotAllowed("X-type syndrome needs odd m".into()));
            }
            let anc = client.prepare_row(reg, RowState::Plus, RowRole::Syndrome, rng)?;
            for &(r, _) in stabilizer {
                reg.transversal_gate(&Gate::Cnot(anc, r))?;
            }
            reg.transversal_gate(&Gate::H(anc))?;
            anc
        }
    };
    transcript.handoff(Role::Client, format!("s{idx}.ancilla"), w);
    let bits = reg.measure_row(anc, rng)?;
    transcript.classical(Role::Server, format!("s{idx}.bits"), &bits);
    let parity = client.key.parity(&bits)?;
    if let Some((row, p)) = correction {
        conditional_pauli(reg, client, row, p, parity, &format!("s{idx}.fix"), transcript, rng)?;
    }
    Ok(parity)
}

/// Inner stabilizer code on rows, spread column-wise by the outer layer.
/// A logical `P` of the inner code becomes `P_1^{⊗m} ⊗ … ⊗ P_n^{⊗m}` on the
/// data columns.
#[derive(Clone, Debug)]
pub struct ConcatenatedCode {
    inner: StabilizerCode,
    m: usize,
}

pub fn build_concatenated_code(inner: &StabilizerCode, m: usize) -> Result<ConcatenatedCode> {
    if m == 0 {
        return Err(QheError::InvalidArgument("m must be positive".into()));
    }
    for g in inner.generators() {
        let letters: Vec<(usize, Pauli)> = g.support().into_iter().map(|q| (q, g.get(q))).collect();
        stabilizer_kind(&letters)?;
    }
    Ok(ConcatenatedCode { inner: inner.clone(), m })
}

impl ConcatenatedCode {
    pub fn inner(&self) -> &StabilizerCode {
        &self.inner
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> usize {
        self.inner.n()
    }

    /// Replaces every letter on row `r` by that letter on each data column.
    pub fn spread_pauli(&self, p: &PauliString, key: &PermKey) -> Result<PauliString> {
        check_len(self.inner.n(), p.n_qubits())?;
        if key.m() != self.m {
            return Err(QheError::InvalidArgument("key has a different m".into()));
        }
        let w = 2 * self.m;
        let mut out = PauliString::identity(self.rows() * w);
        for r in p.support() {
            for &c in &key.perm()[..self.m] {
                out.set(r * w + c, p.get(r));
            }
        }
        Ok(out)
    }

    pub fn logical_x(&self, key: &PermKey) -> Result<PauliString> {
        self.spread_pauli(&self.inner.logical_x()[0], key)
    }

    pub fn logical_z(&self, key: &PermKey) -> Result<PauliString> {
        self.spread_pauli(&self.inner.logical_z()[0], key)
    }

    /// Client side: inner encoding of a `k`-qubit plaintext, then row
    /// encryption.
    pub fn encode_and_encrypt<B: Backend>(
        &self,
        mut plain: B,
        client: &PermClient,
        rng: &mut dyn RngCore,
    ) -> Result<SpreadRegister<B>> {
        self.inner.encode(&mut plain)?;
        client.encrypt_data(plain, rng)
    }

    /// One encrypted QEC round: every generator is measured through its own
    /// ancilla row, the client decodes, and every (row, X/Z) slot receives a
    /// conditional Pauli whether or not it is needed, so the message pattern
    /// is fixed.
    pub fn correction_round<B: Backend>(
        &self,
        reg: &mut SpreadRegister<B>,
        client: &mut PermClient,
        transcript: &mut Transcript,
        rng: &mut dyn RngCore,
    ) -> Result<(Vec<bool>, PauliString)> {
        let mut syndrome = Vec::new();
        for g in self.inner.generators() {
            let letters: Vec<(usize, Pauli)> = g.support().into_iter().map(|q| (q, g.get(q))).collect();
            syndrome.push(encrypted_syndrome_protocol(reg, client, &letters, None, transcript, rng)?);
        }
        let fix = self.inner.lookup_decode(&syndrome)?;
        let idx = client.syndrome_count;
        for r in 0..self.rows() {
            let (x, z) = fix.get(r).bits();
            conditional_pauli(reg, client, r, Pauli::X, x, &format!("q{idx}.r{r}.x"), transcript, rng)?;
            conditional_pauli(reg, client, r, Pauli::Z, z, &format!("q{idx}.r{r}.z"), transcript, rng)?;
        }
        Ok((syndrome, fix))
    }
}

fn stabilizer_kind(stabilizer: &[(usize, Pauli)]) -> Result<Pauli> {
    let first = stabilizer.first().ok_or_else(|| QheError::InvalidArgument("empty stabilizer".into()))?.1;
    if first == Pauli::Y || first == Pauli::I || stabilizer.iter().any(|&(_, p)| p != first) {
        return Err(QheError::NotAllowed("only all-X or all-Z stabilizers are measured under this key".into()));
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::StabilizerState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn key_text_roundtrip() {
        let k = PermKey::new(vec![2, 0, 1, 3]).unwrap();
        assert_eq!(k.to_string(), "(0 2 1)(3)");
        assert_eq!("(0 2 1)(3)".parse::<PermKey>().unwrap(), k);
        assert!("(0 1)(1 2)".parse::<PermKey>().is_err());
        assert!(PermKey::new(vec![0, 1, 2]).is_err());
    }

    #[test]
    fn spread_images_are_uniform_tensor_powers() {
        for m in [1, 3, 5, 7] {
            let v = CliffordOp::from_gates(m, &spread_gates(m, 0)).unwrap();
            let all = |p: Pauli| PauliString::from_paulis(&vec![p; m]);
            assert_eq!(v.conjugate(&PauliString::single(m, 0, Pauli::X)).unwrap(), all(Pauli::X));
            assert_eq!(v.conjugate(&PauliString::single(m, 0, Pauli::Z)).unwrap(), all(Pauli::Z));
        }
    }

    #[test]
    fn bound_values() {
        assert!((security_bound(0, 1) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((security_bound(1, 2) - (2.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert!((security_bound(0, 20) - (1.0 / 137_846_528_820f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn swap_counts() {
        assert_eq!(decryption_complexity(&PermKey::identity(3), 5), 0);
        assert_eq!(decryption_complexity(&PermKey::new(vec![1, 0, 2, 3]).unwrap(), 3), 3);
        let cycle = PermKey::new(vec![1, 2, 3, 4, 5, 6, 7, 0]).unwrap();
        assert_eq!(decryption_complexity(&cycle, 2), 14);
    }

    #[test]
    fn repetition_syndrome_on_stabilizer_backend() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut client = PermClient::new(PermKey::random(3, &mut rng));
        let plain = StabilizerState::zero(3);
        let mut reg = client.encrypt_data(plain, &mut rng).unwrap();
        let mut tr = Transcript::new();
        reg.transversal_pauli(1, Pauli::X).unwrap();
        let s01 = encrypted_syndrome_protocol(&mut reg, &mut client, &[(0, Pauli::Z), (1, Pauli::Z)], None, &mut tr, &mut rng)
            .unwrap();
        let s12 = encrypted_syndrome_protocol(&mut reg, &mut client, &[(1, Pauli::Z), (2, Pauli::Z)], None, &mut tr, &mut rng)
            .unwrap();
        assert_eq!((s01, s12), (true, true));
        assert_eq!(reg.ancilla_rows(), 2);
    }
}
