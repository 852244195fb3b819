use qhe_lab::protocol::*;
use qhe_lab::qec::StabilizerCode;
use qhe_lab::sim::StateVector;
use qhe_lab::{Circuit, PauliString, QheError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circ(text: &str) -> Circuit {
    text.parse().unwrap()
}

fn states(specs: &[&str]) -> Vec<StateVector> {
    specs.iter().map(|s| product_state(s).unwrap()).collect()
}

#[test]
fn pauli_session_with_t_is_correct() {
    let c = circ("QUBITS 2\nH 0\nT 0\nCNOT 0 1\nT 1\nH 1\n");
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = run_session(SessionScheme::Pauli, &product_state("0+").unwrap(), &c, &mut rng).unwrap();
        assert!(r.error().unwrap() < 1e-9);
        assert_eq!(r.transcript.count(MessageKind::ClassicalBits), 4);
    }
}

#[test]
fn perm_deterministic_t_messages() {
    let c = circ("QUBITS 1\nH 0\nT 0\n");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = run_session(SessionScheme::Perm { m: 1 }, &product_state("0").unwrap(), &c, &mut rng).unwrap();
    assert!(r.error().unwrap() < 1e-9);
    let t = &r.transcript;
    let magic = t.messages().iter().find(|m| m.slot == "t0.magic_bits").unwrap();
    assert_eq!((magic.sender, magic.bits.len()), (Role::Server, 2));
    let label = t.messages().iter().find(|m| m.slot == "t0.phase_label").unwrap();
    assert_eq!((label.sender, label.bits.len()), (Role::Client, 1));
}

#[test]
fn perm_clifford_session_m5() {
    let c = circ("QUBITS 1\nH 0\nZ 0\n");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let r = run_session(SessionScheme::Perm { m: 5 }, &product_state("+").unwrap(), &c, &mut rng).unwrap();
    assert!(r.error().unwrap() < 1e-9);
}

#[test]
fn perm_rejects_hadamard_for_even_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let e = run_session(SessionScheme::Perm { m: 2 }, &product_state("0").unwrap(), &circ("QUBITS 1\nH 0\n"), &mut rng);
    assert!(matches!(e, Err(QheError::NotAllowed(_))));
}

#[test]
fn syndrome_session_sends_corrections() {
    let code = StabilizerCode::steane();
    let e: PauliString = "IIYIIII".parse().unwrap();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = run_syndrome_session(&code, &product_state("i").unwrap(), Some(&e), &mut rng).unwrap();
        assert!(s.result.error().unwrap() < 1e-9);
        assert_eq!(s.syndrome, code.syndrome_of(&e).unwrap());
        let pcs = s.result.transcript.messages().iter().filter(|m| m.slot.ends_with(".pc")).count();
        assert_eq!(pcs, 6);
    }
}

#[test]
fn transcripts_are_deterministic_under_seed() {
    let c = circ("QUBITS 1\nH 0\nT 0\nH 0\n");
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        run_session(SessionScheme::Perm { m: 1 }, &product_state("1").unwrap(), &c, &mut rng).unwrap().transcript.to_jsonl()
    };
    assert_eq!(run(11), run(11));
}

#[test]
fn jsonl_survives_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c = circ("QUBITS 1\nT 0\n");
    let t = run_session(SessionScheme::Pauli, &product_state("+").unwrap(), &c, &mut rng).unwrap().transcript;
    assert_eq!(Transcript::from_jsonl(&t.to_jsonl()).unwrap(), t);
}

#[test]
fn honest_audits_stay_below_threshold() {
    let c = circ("QUBITS 1\nH 0\nT 0\nH 0\n");
    let pts = states(&["0", "1"]);
    for scheme in [SessionScheme::Pauli, SessionScheme::Perm { m: 1 }] {
        let r = audit_scheme(scheme, &c, &pts, MIN_AUDIT_SAMPLES, 5).unwrap();
        eprintln!("{scheme:?}: {:?}", r.worst());
        assert!(r.max_tv < 0.05, "{scheme:?}: {:?}", r.worst());
    }
}

#[test]
fn leaky_canary_is_flagged() {
    let c = circ("QUBITS 1\nH 0\nH 0\n");
    let r = audit_scheme(SessionScheme::Leaky, &c, &states(&["0", "1"]), MIN_AUDIT_SAMPLES, 5).unwrap();
    let w = r.worst().unwrap();
    assert!(w.tv > 0.95 && r.max_tv > 0.9, "{w:?}");
    assert_eq!(w.view, "leak.key+leak.raw");
}

#[test]
fn audit_needs_enough_sessions() {
    let e = audit_scheme(SessionScheme::Pauli, &circ("QUBITS 1\nH 0\n"), &states(&["0", "1"]), 50, 1);
    assert!(matches!(e, Err(QheError::InsufficientSamples { got: 50, need: 1000 })));
}

#[test]
fn session_config_parses() {
    let cfg = SessionConfig::from_json(r#"{"scheme":{"kind":"perm","m":3},"circuit":"h.qc","plaintexts":["0","1"]}"#).unwrap();
    assert_eq!(cfg.scheme, SessionScheme::Perm { m: 3 });
    assert_eq!(cfg.samples, MIN_AUDIT_SAMPLES);
    assert!(SessionConfig::from_json("{").is_err());
}
