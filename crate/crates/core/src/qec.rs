//! Stabilizer codes: encoders, syndrome extraction, lookup decoding and
//! logical lifts of Cliffords.
//!
//! Encoders put logical qubit `i` on physical qubit `i` and ancillas on
//! `k..n`; the encoder maps `X_i, Z_i` to the logical operators and `Z_{k+j}`
//! into the stabilizer group.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::clifford::{CliffordOp, Gate};
use crate::error::{check_len, QheError, Result};
use crate::pauli::{Pauli, PauliString};
use crate::pauli_key::encrypted_stabilizer_measurement;
use crate::sim::{Backend, StabilizerState};

/// Which single-qubit errors the decoder table covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorModel {
    X,
    Z,
    All,
}

impl ErrorModel {
    fn letters(self) -> &'static [Pauli] {
        match self {
            ErrorModel::X => &[Pauli::X],
            ErrorModel::Z => &[Pauli::Z],
            ErrorModel::All => &[Pauli::X, Pauli::Y, Pauli::Z],
        }
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    k: usize,
    distance: Option<usize>,
    generators: Vec<PauliString>,
    logical_x: Vec<PauliString>,
    logical_z: Vec<PauliString>,
    encoder: CliffordOp,
    errors: ErrorModel,
    table: Vec<(Vec<bool>, PauliString)>,
}

impl StabilizerCode {
    /// Validates the invariants and builds the decoder table. Without an
    /// encoder one is synthesized from the generators and logicals.
    pub fn new(
        name: impl Into<String>,
        generators: Vec<PauliString>,
        logical_x: Vec<PauliString>,
        logical_z: Vec<PauliString>,
        encoder: Option<CliffordOp>,
        distance: Option<usize>,
        errors: ErrorModel,
    ) -> Result<Self> {
        let n = logical_x
            .first()
            .ok_or_else(|| QheError::InvalidArgument("code needs at least one logical qubit".into()))?
            .n_qubits();
        let k = logical_x.len();
        check_len(k, logical_z.len())?;
        check_len(n - k, generators.len())?;
        for p in generators.iter().chain(&logical_x).chain(&logical_z) {
            check_len(n, p.n_qubits())?;
            if !p.is_hermitian() {
                return Err(QheError::InvalidArgument(format!("{p} is not Hermitian")));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(QheError::InvalidArgument(format!("generators {a} and {b} anticommute")));
                }
            }
            for l in logical_x.iter().chain(&logical_z) {
                if !a.commutes_with(l) {
                    return Err(QheError::InvalidArgument(format!("logical {l} anticommutes with {a}")));
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                let anti = !logical_x[i].commutes_with(&logical_z[j]);
                if anti != (i == j) {
                    return Err(QheError::InvalidArgument(format!("logical pair ({i}, {j}) has wrong commutation")));
                }
                if i < j && (!logical_x[i].commutes_with(&logical_x[j]) || !logical_z[i].commutes_with(&logical_z[j])) {
                    return Err(QheError::InvalidArgument("logical operators of different qubits anticommute".into()));
                }
            }
        }
        let group = StabilizerState::from_generators(n, generators.clone())?;
        if group.rank() != n - k {
            return Err(QheError::InvalidArgument("generators are not independent".into()));
        }
        let encoder = match encoder {
            Some(e) => e,
            None => encoder_from_stabilizers(&generators, &logical_x, &logical_z)?,
        };
        check_len(n, encoder.n_qubits())?;
        let mut code = StabilizerCode {
            name: name.into(),
            n,
            k,
            distance,
            generators,
            logical_x,
            logical_z,
            encoder,
            errors,
            table: Vec::new(),
        };
        code.check_encoder()?;
        code.table = code.build_table();
        Ok(code)
    }

    /// Three-qubit bit-flip code.
    pub fn repetition() -> Self {
        let p = |s: &str| s.parse::<PauliString>().expect("literal");
        let enc = CliffordOp::from_gates(3, &[Gate::Cnot(0, 1), Gate::Cnot(0, 2)]).expect("literal");
        StabilizerCode::new("repetition", vec![p("ZZI"), p("IZZ")], vec![p("XXX")], vec![p("ZII")], Some(enc), Some(3), ErrorModel::X)
            .expect("valid code")
    }

    /// Three-qubit phase-flip code: the repetition code in the X basis.
    pub fn phase_flip() -> Self {
        let p = |s: &str| s.parse::<PauliString>().expect("literal");
        let enc = CliffordOp::from_gates(3, &[Gate::Cnot(0, 1), Gate::Cnot(0, 2), Gate::H(0), Gate::H(1), Gate::H(2)])
            .expect("literal");
        StabilizerCode::new("phase_flip", vec![p("XXI"), p("IXX")], vec![p("ZZZ")], vec![p("XII")], Some(enc), Some(3), ErrorModel::Z)
            .expect("valid code")
    }

    /// Steane [[7,1,3]] code from the Hamming parity checks.
    pub fn steane() -> Self {
        let rows = ["1010101", "0110011", "0001111"];
        let mut gens = Vec::new();
        for letter in ['X', 'Z'] {
            for r in rows {
                let s: String = r.chars().map(|c| if c == '1' { letter } else { 'I' }).collect();
                gens.push(s.parse::<PauliString>().expect("literal"));
            }
        }
        let lx: PauliString = "XXXXXXX".parse().expect("literal");
        let lz: PauliString = "ZZZZZZZ".parse().expect("literal");
        StabilizerCode::new("steane", gens, vec![lx], vec![lz], None, Some(3), ErrorModel::All).expect("valid code")
    }

    /// One qubit, no redundancy.
    pub fn trivial() -> Self {
        let p = |s: &str| s.parse::<PauliString>().expect("literal");
        StabilizerCode::new("trivial", vec![], vec![p("X")], vec![p("Z")], Some(CliffordOp::identity(1)), Some(1), ErrorModel::All)
            .expect("valid code")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "repetition" | "rep3" => Ok(Self::repetition()),
            "phase_flip" | "phase3" => Ok(Self::phase_flip()),
            "steane" | "steane7" => Ok(Self::steane()),
            "trivial" => Ok(Self::trivial()),
            other => Err(QheError::InvalidArgument(format!("unknown code '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn distance(&self) -> Option<usize> {
        self.distance
    }
    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }
    pub fn logical_x(&self) -> &[PauliString] {
        &self.logical_x
    }
    pub fn logical_z(&self) -> &[PauliString] {
        &self.logical_z
    }
    pub fn encoder(&self) -> &CliffordOp {
        &self.encoder
    }
    pub fn error_model(&self) -> ErrorModel {
        self.errors
    }

    /// Correctable weight `⌊(d−1)/2⌋`, at least 1 when `d` is unknown.
    pub fn correctable_weight(&self) -> usize {
        self.distance.map_or(1, |d| (d.max(1) - 1) / 2)
    }

    /// The code space as a stabilizer group over `blocks` copies.
    fn group(&self, blocks: usize) -> Result<StabilizerState> {
        let n = self.n * blocks;
        let mut gens = Vec::new();
        for b in 0..blocks {
            let pos: Vec<usize> = (b * self.n..(b + 1) * self.n).collect();
            for g in &self.generators {
                gens.push(g.embed(n, &pos)?);
            }
        }
        StabilizerState::from_generators(n, gens)
    }

    fn check_encoder(&self) -> Result<()> {
        let group = self.group(1)?;
        for j in self.k..self.n {
            let img = self.encoder.image_z(j);
            if group.expectation_sign(img)? != Some(false) {
                return Err(QheError::InvalidArgument(format!("encoder image {img} of Z{j} is not a stabilizer")));
            }
        }
        for i in 0..self.k {
            if !equal_mod(&group, self.encoder.image_x(i), &self.logical_x[i])?
                || !equal_mod(&group, self.encoder.image_z(i), &self.logical_z[i])?
            {
                return Err(QheError::InvalidArgument(format!("encoder does not map qubit {i} onto the logicals")));
            }
        }
        Ok(())
    }

    /// Syndrome bits of a Pauli error (`true` = anticommutes).
    pub fn syndrome_of(&self, e: &PauliString) -> Result<Vec<bool>> {
        check_len(self.n, e.n_qubits())?;
        Ok(self.generators.iter().map(|g| !g.commutes_with(e)).collect())
    }

    fn build_table(&self) -> Vec<(Vec<bool>, PauliString)> {
        let mut table: Vec<(Vec<bool>, PauliString)> = vec![(vec![false; self.generators.len()], PauliString::identity(self.n))];
        let letters = self.errors.letters();
        for w in 1..=self.correctable_weight() {
            for qs in (0..self.n).combinations(w) {
                for ls in std::iter::repeat(letters.iter()).take(w).multi_cartesian_product() {
                    let mut e = PauliString::identity(self.n);
                    for (&q, &&l) in qs.iter().zip(&ls) {
                        e.set(q, l);
                    }
                    let s = self.syndrome_of(&e).expect("sized");
                    if !table.iter().any(|(t, _)| *t == s) {
                        table.push((s, e));
                    }
                }
            }
        }
        table
    }

    pub fn table(&self) -> &[(Vec<bool>, PauliString)] {
        &self.table
    }

    /// Minimal-weight correction for a syndrome.
    pub fn lookup_decode(&self, syndrome: &[bool]) -> Result<PauliString> {
        check_len(self.generators.len(), syndrome.len())?;
        self.table
            .iter()
            .find(|(s, _)| s == syndrome)
            .map(|(_, e)| e.clone())
            .ok_or_else(|| QheError::Uncorrectable(syndrome.to_vec()))
    }

    /// Appends `n−k` ancillas in `|0⟩` to a `k`-qubit state and encodes.
    pub fn encode<B: Backend + ?Sized>(&self, state: &mut B) -> Result<()> {
        check_len(self.k, state.n_qubits())?;
        state.append_zero(self.n - self.k)?;
        state.apply_clifford(&self.encoder)
    }

    /// Maps a logical Pauli string over `blocks` code blocks (`k = 1`) to a
    /// physical Pauli, keeping the phase.
    pub fn physical_pauli(&self, logical: &PauliString) -> Result<PauliString> {
        self.require_k1()?;
        let blocks = logical.n_qubits();
        let n = self.n * blocks;
        let mut out = PauliString::identity(n).with_phase(logical.phase());
        for b in 0..blocks {
            let pos: Vec<usize> = (b * self.n..(b + 1) * self.n).collect();
            let (x, z) = logical.get(b).bits();
            if x {
                out = out.multiply(&self.logical_x[0].embed(n, &pos)?)?;
            }
            if z {
                out = out.multiply(&self.logical_z[0].embed(n, &pos)?)?;
            }
            if x && z {
                // Y = iXZ
                let ph = (out.phase() + 1) % 4;
                out = out.with_phase(ph);
            }
        }
        Ok(out)
    }

    fn require_k1(&self) -> Result<()> {
        if self.k != 1 {
            return Err(QheError::InvalidArgument(format!("{} encodes {} qubits; only k = 1 is supported here", self.name, self.k)));
        }
        Ok(())
    }

    /// Physical Clifford `L(C)` for a logical Clifford on `C.n_qubits()`
    /// blocks, built gate by gate from transversal candidates and verified
    /// against the stabilizer group.
    pub fn logical_lift(&self, c: &CliffordOp) -> Result<CliffordOp> {
        self.require_k1()?;
        let blocks = c.n_qubits();
        let n = self.n * blocks;
        let mut gates = Vec::new();
        for g in c.gates() {
            gates.extend(self.lift_gate(g, blocks)?);
        }
        let lifted = CliffordOp::from_gates(n, &gates)?;
        if !self.verify_lift(c, &lifted)? {
            return Err(QheError::NotAllowed(format!("lift of the circuit is not logical for {}", self.name)));
        }
        Ok(lifted)
    }

    fn lift_gate(&self, g: &Gate, blocks: usize) -> Result<Vec<Gate>> {
        let n = self.n;
        let q = |b: usize, i: usize| b * n + i;
        let pauli_gates = |p: &PauliString, b: usize| -> Vec<Gate> {
            p.support()
                .into_iter()
                .map(|i| match p.get(i) {
                    Pauli::X => Gate::X(q(b, i)),
                    Pauli::Y => Gate::Y(q(b, i)),
                    _ => Gate::Z(q(b, i)),
                })
                .collect()
        };
        let trans = |f: &dyn Fn(usize) -> Vec<Gate>| -> Vec<Gate> { (0..n).flat_map(f).collect() };
        let candidates: Vec<Vec<Gate>> = match *g {
            Gate::X(b) => vec![pauli_gates(&self.logical_x[0], b)],
            Gate::Z(b) => vec![pauli_gates(&self.logical_z[0], b)],
            Gate::Y(b) => vec![[pauli_gates(&self.logical_z[0], b), pauli_gates(&self.logical_x[0], b)].concat()],
            Gate::H(b) => vec![trans(&|i| vec![Gate::H(q(b, i))])],
            Gate::S(b) => vec![
                trans(&|i| vec![Gate::S(q(b, i))]),
                trans(&|i| vec![Gate::S(q(b, i)), Gate::S(q(b, i)), Gate::S(q(b, i))]),
            ],
            Gate::Cnot(a, b) => vec![trans(&|i| vec![Gate::Cnot(q(a, i), q(b, i))])],
            Gate::Cz(a, b) => vec![trans(&|i| vec![Gate::Cz(q(a, i), q(b, i))])],
            Gate::Swap(a, b) => vec![trans(&|i| vec![Gate::Swap(q(a, i), q(b, i))])],
        };
        let logical = CliffordOp::from_gates(blocks, &[*g])?;
        for cand in candidates {
            let phys = CliffordOp::from_gates(n * blocks, &cand)?;
            if self.verify_lift(&logical, &phys)? {
                return Ok(cand);
            }
        }
        Err(QheError::NotAllowed(format!("{g} has no transversal lift for {}", self.name)))
    }

    /// `L·S·L†` stays in the group and `L·P̄·L† = \overline{CPC†}` modulo the
    /// group, signs included, for every logical `P`.
    pub fn verify_lift(&self, c: &CliffordOp, lifted: &CliffordOp) -> Result<bool> {
        let blocks = c.n_qubits();
        check_len(self.n * blocks, lifted.n_qubits())?;
        let group = self.group(blocks)?;
        for g in group.generators() {
            if group.expectation_sign(&lifted.conjugate(g)?)? != Some(false) {
                return Ok(false);
            }
        }
        for b in 0..blocks {
            for p in [Pauli::X, Pauli::Z] {
                let lp = PauliString::single(blocks, b, p);
                let want = self.physical_pauli(&c.conjugate(&lp)?)?;
                let got = lifted.conjugate(&self.physical_pauli(&lp)?)?;
                if !equal_mod(&group, &got, &want)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Parses the line-based code file format:
    ///
    /// ```text
    /// name repetition
    /// stabilizer ZZI
    /// stabilizer IZZ
    /// logical_x XXX
    /// logical_z ZII
    /// encoder CNOT 0 1
    /// encoder CNOT 0 2
    /// distance 3
    /// errors x
    /// ```
    pub fn from_text(text: &str) -> Result<Self> {
        let mut name = String::from("custom");
        let (mut gens, mut lx, mut lz, mut enc) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut distance = None;
        let mut errors = ErrorModel::All;
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let bad = |msg: String| QheError::Parse { line: ln, msg };
            let pauli = |s: &str| s.parse::<PauliString>().map_err(|e| bad(e.to_string()));
            match head {
                "name" => name = rest.to_string(),
                "stabilizer" => gens.push(pauli(rest)?),
                "logical_x" => lx.push(pauli(rest)?),
                "logical_z" => lz.push(pauli(rest)?),
                "encoder" => enc.push(rest.to_string()),
                "distance" => distance = Some(rest.parse().map_err(|_| bad(format!("bad distance '{rest}'")))?),
                "errors" => {
                    errors = match rest {
                        "x" => ErrorModel::X,
                        "z" => ErrorModel::Z,
                        "all" => ErrorModel::All,
                        o => return Err(bad(format!("bad error model '{o}'"))),
                    }
                }
                o => return Err(bad(format!("unknown directive '{o}'"))),
            }
        }
        let n = lx.first().map(|p| p.n_qubits()).ok_or(QheError::Parse { line: 0, msg: "no logical_x".into() })?;
        let encoder = if enc.is_empty() {
            None
        } else {
            let circ: Circuit = format!("QUBITS {n}\n{}", enc.join("\n")).parse()?;
            Some(circ.to_clifford()?)
        };
        Self::new(name, gens, lx, lz, encoder, distance, errors)
    }
}

impl fmt::Display for StabilizerCode {
    /// Writes the code file format; the encoder gate list is always included.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name {}", self.name)?;
        for g in &self.generators {
            writeln!(f, "stabilizer {g}")?;
        }
        for p in &self.logical_x {
            writeln!(f, "logical_x {p}")?;
        }
        for p in &self.logical_z {
            writeln!(f, "logical_z {p}")?;
        }
        for g in self.encoder.gates() {
            writeln!(f, "encoder {g}")?;
        }
        if let Some(d) = self.distance {
            writeln!(f, "distance {d}")?;
        }
        let e = match self.errors {
            ErrorModel::X => "x",
            ErrorModel::Z => "z",
            ErrorModel::All => "all",
        };
        writeln!(f, "errors {e}")
    }
}

impl FromStr for StabilizerCode {
    type Err = QheError;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

/// `a = b` up to multiplication by a + element of `group`.
fn equal_mod(group: &StabilizerState, a: &PauliString, b: &PauliString) -> Result<bool> {
    if !a.commutes_with(b) {
        return Ok(false);
    }
    let q = a.multiply(b)?;
    if !q.is_hermitian() {
        return Ok(false);
    }
    Ok(group.expectation_sign(&q)? == Some(false))
}

/// Symplectic form `⟨a, b⟩` over GF(2).
fn symp(a: &PauliString, b: &PauliString) -> bool {
    !a.commutes_with(b)
}

/// Solves `A·v = t` over GF(2); rows of `A` are bit vectors.
fn solve_gf2(a: &[Vec<bool>], t: &[bool]) -> Option<Vec<bool>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<bool>> = a.iter().zip(t).map(|(r, &b)| [r.clone(), vec![b]].concat()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| m[r][col]) else { continue };
        m.swap(row, p);
        for r in 0..m.len() {
            if r != row && m[r][col] {
                let src = m[row].clone();
                for (x, y) in m[r].iter_mut().zip(src) {
                    *x ^= y;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| r[cols]) {
        return None;
    }
    let mut v = vec![false; cols];
    for (r, &c) in pivots.iter().enumerate() {
        v[c] = m[r][cols];
    }
    Some(v)
}

/// Encoder with `X_i, Z_i ↦` logicals for `i < k` and `Z_{k+j} ↦ S_j`.
/// Destabilizers are solved for linearly, then made to commute pairwise.
pub fn encoder_from_stabilizers(
    generators: &[PauliString],
    logical_x: &[PauliString],
    logical_z: &[PauliString],
) -> Result<CliffordOp> {
    let k = logical_x.len();
    let n = logical_x.first().map(|p| p.n_qubits()).ok_or_else(|| QheError::InvalidArgument("no logicals".into()))?;
    let r = generators.len();
    check_len(n - k, r)?;
    let constraints: Vec<&PauliString> = generators.iter().chain(logical_x).chain(logical_z).collect();
    // ⟨D, P⟩ = Σ d_x·P_z + d_z·P_x; unknowns ordered (d_x, d_z).
    let rows: Vec<Vec<bool>> = constraints
        .iter()
        .map(|p| (0..n).map(|q| p.z_bit(q)).chain((0..n).map(|q| p.x_bit(q))).collect())
        .collect();
    let mut destab = Vec::with_capacity(r);
    for j in 0..r {
        let t: Vec<bool> = (0..constraints.len()).map(|i| i == j).collect();
        let v = solve_gf2(&rows, &t).ok_or_else(|| QheError::InvalidArgument("stabilizers are dependent".into()))?;
        destab.push(PauliString::from_bits(&v[..n], &v[n..], 0)?.with_phase(0));
    }
    for l in 0..r {
        for j in 0..l {
            if symp(&destab[j], &destab[l]) {
                destab[l] = destab[l].multiply(&generators[j])?;
            }
        }
        let p = destab[l].phase() & 2;
        destab[l].set_phase(p);
    }
    let mut images = Vec::with_capacity(2 * n);
    for i in 0..k {
        images.push(logical_x[i].clone());
        images.push(logical_z[i].clone());
    }
    for j in 0..r {
        images.push(destab[j].clone());
        images.push(generators[j].clone());
    }
    CliffordOp::from_tableau(images)
}

/// Fresh ancillas available for syndrome rounds.
#[derive(Clone, Debug)]
pub struct AncillaSupply {
    remaining: usize,
}

impl AncillaSupply {
    pub fn new(count: usize) -> Self {
        AncillaSupply { remaining: count }
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    fn take(&mut self) -> Result<()> {
        if self.remaining == 0 {
            return Err(QheError::Exhausted("syndrome ancillas".into()));
        }
        self.remaining -= 1;
        Ok(())
    }
}

/// Measures every generator of the block at `offset` with one ancilla each.
pub fn extract_syndrome<B: Backend + ?Sized>(
    state: &mut B,
    code: &StabilizerCode,
    offset: usize,
    supply: &mut AncillaSupply,
    rng: &mut dyn RngCore,
) -> Result<Vec<bool>> {
    let n = state.n_qubits();
    if offset + code.n > n {
        return Err(QheError::QubitOutOfRange { index: offset + code.n - 1, n });
    }
    let pos: Vec<usize> = (offset..offset + code.n).collect();
    let mut out = Vec::with_capacity(code.generators.len());
    for g in &code.generators {
        supply.take()?;
        let k = g.embed(n, &pos)?;
        out.push(encrypted_stabilizer_measurement(state, &k, Pauli::I, None, rng)?.corrected);
    }
    Ok(out)
}

/// Extract, decode and apply the correction on one block.
pub fn correct_block<B: Backend + ?Sized>(
    state: &mut B,
    code: &StabilizerCode,
    offset: usize,
    supply: &mut AncillaSupply,
    rng: &mut dyn RngCore,
) -> Result<(Vec<bool>, PauliString)> {
    let s = extract_syndrome(state, code, offset, supply, rng)?;
    let fix = code.lookup_decode(&s)?;
    let n = state.n_qubits();
    state.apply_pauli(&fix.embed(n, &(offset..offset + code.n).collect::<Vec<_>>())?)?;
    Ok((s, fix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shipped_codes_validate() {
        for c in [StabilizerCode::repetition(), StabilizerCode::phase_flip(), StabilizerCode::steane(), StabilizerCode::trivial()] {
            let back: StabilizerCode = c.to_string().parse().unwrap();
            assert_eq!(back.generators(), c.generators());
            assert!(back.encoder().same_action(c.encoder()));
        }
    }

    #[test]
    fn repetition_table() {
        let c = StabilizerCode::repetition();
        assert_eq!(c.lookup_decode(&[true, false]).unwrap(), "XII".parse().unwrap());
        assert_eq!(c.lookup_decode(&[true, true]).unwrap(), "IXI".parse().unwrap());
        assert!(c.lookup_decode(&[false, false]).unwrap().is_identity_up_to_phase());
    }

    #[test]
    fn steane_single_errors_recovered() {
        let code = StabilizerCode::steane();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for q in 0..7 {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut st = StabilizerState::zero(1);
                st.apply_gate(&Gate::H(0)).unwrap();
                code.encode(&mut st).unwrap();
                let clean = st.clone();
                st.apply_pauli(&PauliString::single(7, q, p)).unwrap();
                let mut supply = AncillaSupply::new(6);
                correct_block(&mut st, &code, 0, &mut supply, &mut rng).unwrap();
                assert!(st.same_state(&clean), "{p:?} on {q}");
            }
        }
    }

    #[test]
    fn steane_transversal_gates_lift() {
        let code = StabilizerCode::steane();
        for g in [Gate::H(0), Gate::S(0), Gate::X(0), Gate::Y(0)] {
            code.logical_lift(&CliffordOp::from_gates(1, &[g]).unwrap()).unwrap();
        }
        code.logical_lift(&CliffordOp::from_gates(2, &[Gate::Cnot(0, 1)]).unwrap()).unwrap();
        assert!(StabilizerCode::repetition().logical_lift(&CliffordOp::from_gates(1, &[Gate::H(0)]).unwrap()).is_err());
    }
}
