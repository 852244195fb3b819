//! End-to-end client/server sessions that record every exchanged message.

use std::path::PathBuf;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::transcript::{Role, Transcript};
use crate::circuit::{Circuit, Element};
use crate::clifford::Gate;
use crate::error::{check_len, QheError, Result};
use crate::pauli::{Pauli, PauliString};
use crate::pauli_key::{
    decrypt, encrypt, encrypted_stabilizer_measurement, homomorphic_eval, random_key, transport_key,
    MagicStateResource,
};
use crate::perm_key::{t_gate_deterministic, transversal_ok, PermClient, PermKey};
use crate::qec::StabilizerCode;
use crate::sim::{Backend, DensityMatrix, StateVector};

/// Things a party may try to do during a session.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Prepare,
    Encrypt,
    Decrypt,
    Measure,
    /// Applying a gate of the computation.
    Compute,
    RequestKey,
}

/// Role guard. The client only prepares, encrypts, decrypts and measures;
/// the server computes and measures but never sees key material.
#[derive(Clone, Debug)]
pub struct Party {
    role: Role,
    actions: usize,
}

impl Party {
    pub fn client() -> Self {
        Party { role: Role::Client, actions: 0 }
    }

    pub fn server() -> Self {
        Party { role: Role::Server, actions: 0 }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn act(&mut self, a: Action) -> Result<()> {
        use Action::*;
        let ok = match self.role {
            Role::Client => matches!(a, Prepare | Encrypt | Decrypt | Measure),
            Role::Server => matches!(a, Compute | Measure),
        };
        if !ok {
            return Err(QheError::ProtocolViolation(format!("{:?} may not {:?}", self.role, a)));
        }
        self.actions += 1;
        Ok(())
    }
}

/// Which scheme a session runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionScheme {
    /// Pauli one-time pad; T gates by magic-state injection.
    Pauli,
    /// Permutation key on `2m`-qubit rows; T gates by the deterministic
    /// three-step protocol.
    Perm { m: usize },
    /// Broken on purpose: the client sends its key in clear and the server
    /// reports a raw Z readout of the ciphertext before computing. Only
    /// useful as an audit canary; its output is not the circuit's.
    Leaky,
}

#[derive(Clone, Debug)]
pub struct SessionResult {
    /// Decrypted output on the circuit's qubits.
    pub output: DensityMatrix,
    /// Plaintext evaluation of the same circuit.
    pub expected: DensityMatrix,
    pub transcript: Transcript,
}

impl SessionResult {
    pub fn error(&self) -> Result<f64> {
        self.output.trace_distance(&self.expected)
    }
}

/// Product state from one character per qubit: `0 1 + - i` (`i` is `|+i⟩`).
pub fn product_state(spec: &str) -> Result<StateVector> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(QheError::InvalidArgument("empty plaintext".into()));
    }
    let n = spec.chars().count();
    let mut s = StateVector::zero(n)?;
    for (q, c) in spec.chars().enumerate() {
        let gates: &[Gate] = match c {
            '0' => &[],
            '1' => &[Gate::X(q)],
            '+' => &[Gate::H(q)],
            '-' => &[Gate::X(q), Gate::H(q)],
            'i' => &[Gate::H(q), Gate::S(q)],
            other => return Err(QheError::InvalidArgument(format!("unknown plaintext symbol '{other}'"))),
        };
        for g in gates {
            s.apply_gate(g)?;
        }
    }
    Ok(s)
}

fn unitary_only(circuit: &Circuit) -> Result<()> {
    for e in circuit.elements() {
        if matches!(e, Element::Measure { .. } | Element::CPauli { .. }) {
            return Err(QheError::NotAllowed("sessions run unitary circuits only".into()));
        }
    }
    Ok(())
}

/// Plaintext reference output.
pub fn plain_output(plaintext: &StateVector, circuit: &Circuit) -> Result<DensityMatrix> {
    check_len(circuit.n_qubits(), plaintext.n_qubits())?;
    unitary_only(circuit)?;
    let mut s = plaintext.clone();
    for e in circuit.elements() {
        match e {
            Element::Gate(g) => s.apply_gate(g)?,
            Element::T(q) => s.apply_t(*q, false)?,
            _ => unreachable!(),
        }
    }
    s.to_density()
}

/// Runs one session of `circuit` on `plaintext`.
pub fn run_session(
    scheme: SessionScheme,
    plaintext: &StateVector,
    circuit: &Circuit,
    rng: &mut dyn RngCore,
) -> Result<SessionResult> {
    let expected = plain_output(plaintext, circuit)?;
    let mut transcript = Transcript::new();
    let output = match scheme {
        SessionScheme::Pauli => pauli_session(plaintext, circuit, false, &mut transcript, rng)?,
        SessionScheme::Leaky => pauli_session(plaintext, circuit, true, &mut transcript, rng)?,
        SessionScheme::Perm { m } => perm_session(m, plaintext, circuit, &mut transcript, rng)?,
    };
    Ok(SessionResult { output, expected, transcript })
}

fn pauli_session(
    plaintext: &StateVector,
    circuit: &Circuit,
    leak: bool,
    transcript: &mut Transcript,
    rng: &mut dyn RngCore,
) -> Result<DensityMatrix> {
    let n = circuit.n_qubits();
    let (mut client, mut server) = (Party::client(), Party::server());
    let key = random_key(n, false, rng);
    let magic_keys = (0..circuit.t_count()).map(|_| Pauli::from_bits(rng.gen(), rng.gen())).collect();
    let mut magic = MagicStateResource::with_keys(magic_keys);

    let mut state = plaintext.clone();
    client.act(Action::Prepare)?;
    client.act(Action::Encrypt)?;
    encrypt(&key, &mut state)?;
    transcript.handoff(Role::Client, "data", n);
    if leak {
        let bits: Vec<bool> = (0..n).flat_map(|q| [key.x_bit(q), key.z_bit(q)]).collect();
        transcript.classical(Role::Client, "leak.key", &bits);
    }

    if leak {
        server.act(Action::Measure)?;
        let raw: Vec<bool> = (0..n).map(|q| state.measure_z(q, rng)).collect::<Result<_>>()?;
        transcript.classical(Role::Server, "leak.raw", &raw);
    }
    server.act(Action::Compute)?;
    let report = homomorphic_eval(circuit, &mut state, &key, &mut magic, transcript, rng)?;
    transcript.handoff(Role::Server, "result", n);

    client.act(Action::Decrypt)?;
    decrypt(&report.final_key, &mut state)?;
    state.to_density()
}

fn perm_session(
    m: usize,
    plaintext: &StateVector,
    circuit: &Circuit,
    transcript: &mut Transcript,
    rng: &mut dyn RngCore,
) -> Result<DensityMatrix> {
    let n = circuit.n_qubits();
    for e in circuit.elements() {
        if let Element::Gate(g) = e {
            transversal_ok(g, m)?;
        }
    }
    let (mut client_guard, mut server) = (Party::client(), Party::server());
    let mut client = PermClient::new(PermKey::random(m, rng));
    client_guard.act(Action::Prepare)?;
    client_guard.act(Action::Encrypt)?;
    let mut reg = client.encrypt_data(plaintext.clone(), rng)?;
    transcript.handoff(Role::Client, "data", n * 2 * m);

    for e in circuit.elements() {
        server.act(Action::Compute)?;
        match e {
            Element::Gate(g) => reg.transversal_gate(g)?,
            Element::T(q) => t_gate_deterministic(&mut reg, &mut client, *q, transcript, rng)?,
            _ => unitary_only(circuit)?,
        }
    }
    transcript.handoff(Role::Server, "result", n * 2 * m);

    client_guard.act(Action::Decrypt)?;
    let qubits: Vec<usize> = (0..n).map(|row| client.decrypt_row(&mut reg, row)).collect::<Result<_>>()?;
    reg.backend().reduced_density(&qubits)
}

/// One error-correction session: the client encrypts a logical state, the
/// server encodes it, suffers `error`, measures every stabilizer through
/// client-encrypted ancillas and corrects. For each generator the server
/// reports the raw bit and the client answers with the correction `P_c`.
#[derive(Clone, Debug)]
pub struct SyndromeSession {
    pub result: SessionResult,
    pub syndrome: Vec<bool>,
    pub correction: PauliString,
}

pub fn run_syndrome_session(
    code: &StabilizerCode,
    plaintext: &StateVector,
    error: Option<&PauliString>,
    rng: &mut dyn RngCore,
) -> Result<SyndromeSession> {
    let k = code.k();
    let n = code.n();
    check_len(k, plaintext.n_qubits())?;
    if let Some(e) = error {
        check_len(n, e.n_qubits())?;
    }
    let mut transcript = Transcript::new();
    let (mut client, mut server) = (Party::client(), Party::server());
    let key = random_key(k, false, rng);
    let mut state = plaintext.clone();
    client.act(Action::Encrypt)?;
    encrypt(&key, &mut state)?;
    transcript.handoff(Role::Client, "data", k);

    server.act(Action::Compute)?;
    code.encode(&mut state)?;
    let padded = key.embed(n, &(0..k).collect::<Vec<_>>())?;
    // client-side key tracking through the encoder
    let lifted = transport_key(&padded, code.encoder())?;
    if let Some(e) = error {
        state.apply_pauli(e)?;
    }

    let mut syndrome = Vec::with_capacity(code.generators().len());
    for (i, g) in code.generators().iter().enumerate() {
        client.act(Action::Prepare)?;
        let ak = Pauli::from_bits(rng.gen(), rng.gen());
        transcript.handoff(Role::Client, format!("s{i}.ancilla"), 1);
        server.act(Action::Measure)?;
        let out = encrypted_stabilizer_measurement(&mut state, g, ak, Some(&lifted), rng)?;
        transcript.classical(Role::Server, format!("s{i}.raw"), &[out.raw]);
        let pc = out.raw ^ out.corrected;
        transcript.classical(Role::Client, format!("s{i}.pc"), &[pc]);
        syndrome.push(out.raw ^ pc);
    }
    server.act(Action::Compute)?;
    let correction = code.lookup_decode(&syndrome)?;
    state.apply_pauli(&correction)?;
    state.apply_clifford(&code.encoder().inverse())?;
    Backend::truncate(&mut state, k, rng)?;
    transcript.handoff(Role::Server, "result", k);

    client.act(Action::Decrypt)?;
    decrypt(&key, &mut state)?;
    let expected = plaintext.to_density()?;
    Ok(SyndromeSession {
        result: SessionResult { output: state.to_density()?, expected, transcript },
        syndrome,
        correction,
    })
}

/// Parameters of a batch of sessions, read from JSON.
///
/// ```json
/// {"scheme": {"kind": "perm", "m": 1}, "circuit": "t.qc",
///  "plaintexts": ["0", "1"], "seed": 7, "samples": 1000}
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub scheme: SessionScheme,
    pub circuit: PathBuf,
    pub plaintexts: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    super::audit::MIN_AUDIT_SAMPLES
}

impl SessionConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| QheError::Parse { line: e.line(), msg: e.to_string() })
    }

    /// Loads the config and the circuit it names (relative to the config file).
    pub fn load(path: &std::path::Path) -> Result<(Self, Circuit)> {
        let text = std::fs::read_to_string(path).map_err(|e| QheError::InvalidArgument(format!("{}: {e}", path.display())))?;
        let cfg = Self::from_json(&text)?;
        let cpath = path.parent().map(|d| d.join(&cfg.circuit)).unwrap_or_else(|| cfg.circuit.clone());
        let ctext =
            std::fs::read_to_string(&cpath).map_err(|e| QheError::InvalidArgument(format!("{}: {e}", cpath.display())))?;
        Ok((cfg, ctext.parse()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::MessageKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn client_cannot_compute_and_server_cannot_ask_for_keys() {
        assert!(matches!(Party::client().act(Action::Compute), Err(QheError::ProtocolViolation(_))));
        assert!(matches!(Party::server().act(Action::RequestKey), Err(QheError::ProtocolViolation(_))));
        assert!(Party::server().act(Action::Compute).is_ok());
    }

    #[test]
    fn pauli_hadamard_session() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c: Circuit = "QUBITS 1\nH 0\n".parse().unwrap();
        let r = run_session(SessionScheme::Pauli, &product_state("0").unwrap(), &c, &mut rng).unwrap();
        assert!(r.error().unwrap() < 1e-9);
        assert_eq!(r.transcript.count(MessageKind::QuantumHandoff), 2);
        assert_eq!(r.transcript.count(MessageKind::ClassicalBits), 0);
    }
}
