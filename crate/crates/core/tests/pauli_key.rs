mod common;

use common::*;
use qhe_lab::clifford::{CliffordOp, Gate};
use qhe_lab::pauli_key::*;
use qhe_lab::protocol::{MessageKind, Transcript};
use qhe_lab::qec::StabilizerCode;
use qhe_lab::qhe::{roundtrip_dense, Scheme};
use qhe_lab::sim::{DensityMatrix, StateVector};
use qhe_lab::{Circuit, Pauli, PauliString, QheError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rho_of(sv: &StateVector) -> M {
    ket_to_rho(sv.amplitudes())
}

#[test]
fn t_injection_every_key_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let plain = StateVector::random(2, &mut rng).unwrap();
    let psi = nalgebra::DVector::from_column_slice(plain.amplitudes());
    let want = ket_to_rho((t_gate(2, 1) * psi).as_slice());
    for data in PauliString::all(2) {
        for mk in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            for _ in 0..4 {
                let mut sv = plain.clone();
                encrypt(&data, &mut sv).unwrap();
                let mut key = data.clone();
                let mut magic = MagicStateResource::with_keys(vec![mk]);
                let mut tr = Transcript::new();
                inject_t_gate(&mut sv, &mut key, 1, &mut magic, &mut tr, &mut rng).unwrap();
                decrypt(&key, &mut sv).unwrap();
                assert!(trace_distance(&rho_of(&sv), &want) < 1e-10, "data {data} magic {mk:?}");
                assert_eq!(key.get(0), data.get(0));
                assert_eq!(tr.count(MessageKind::ClassicalBits), 2);
                assert_eq!(magic.remaining(), 0);
            }
        }
    }
}

#[test]
fn magic_states_run_out() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let c: Circuit = "QUBITS 1\nT 0\nT 0\n".parse().unwrap();
    let mut sv = StateVector::zero(1).unwrap();
    let mut magic = MagicStateResource::new(1, &mut rng);
    let e = homomorphic_eval(&c, &mut sv, &PauliString::identity(1), &mut magic, &mut Transcript::new(), &mut rng);
    assert!(matches!(e, Err(QheError::Exhausted(_))));
}

#[test]
fn eval_clifford_t_matches_reference() {
    let text = "QUBITS 3\nH 0\nT 0\nCNOT 0 1\nS 2\nH 2\nT 2\nCZ 1 2\nT 1\nH 1\n";
    let c: Circuit = text.parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let plain = StateVector::random(3, &mut rng).unwrap();
    let mut u = eye(3);
    for e in c.elements() {
        u = match e {
            qhe_lab::Element::Gate(g) => gate(3, g) * u,
            qhe_lab::Element::T(q) => t_gate(3, *q) * u,
            _ => unreachable!(),
        };
    }
    let psi = nalgebra::DVector::from_column_slice(plain.amplitudes());
    let want = ket_to_rho((u * psi).as_slice());
    for _ in 0..30 {
        let key = random_key(3, false, &mut rng);
        let mut sv = plain.clone();
        encrypt(&key, &mut sv).unwrap();
        let mut magic = MagicStateResource::new(3, &mut rng);
        let rep = homomorphic_eval(&c, &mut sv, &key, &mut magic, &mut Transcript::new(), &mut rng).unwrap();
        decrypt(&rep.final_key, &mut sv).unwrap();
        assert!(trace_distance(&rho_of(&sv), &want) < 1e-10);
        assert_eq!(rep.injections.len(), 3);
        assert!(rep.warnings.iter().any(|w| w.contains("budget")));
    }
}

#[test]
fn measurement_and_classical_control() {
    // Bell pair, measure qubit 0, undo the correlation on qubit 1
    let c: Circuit = "QUBITS 2\nH 0\nCNOT 0 1\nM 0 -> a\nCPAULI a X 1\n".parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut seen = [false; 2];
    for _ in 0..40 {
        let key = random_key(2, false, &mut rng);
        let mut sv = StateVector::zero(2).unwrap();
        encrypt(&key, &mut sv).unwrap();
        let mut magic = MagicStateResource::new(0, &mut rng);
        let rep = homomorphic_eval(&c, &mut sv, &key, &mut magic, &mut Transcript::new(), &mut rng).unwrap();
        decrypt(&rep.final_key, &mut sv).unwrap();
        let a = rep.measurements[0].1;
        seen[usize::from(a)] = true;
        let p1 = sv.amplitudes()[2].norm_sqr() + sv.amplitudes()[3].norm_sqr();
        assert!(p1 < 1e-12);
        let p0 = sv.amplitudes()[1].norm_sqr() + sv.amplitudes()[3].norm_sqr();
        assert!((p0 - f64::from(u8::from(a))).abs() < 1e-12);
    }
    assert_eq!(seen, [true, true]);
}

#[test]
fn t_budget_is_log_n() {
    assert_eq!(t_budget(1), 0);
    assert_eq!(t_budget(2), 1);
    assert_eq!(t_budget(5), 3);
    assert_eq!(t_budget(8), 3);
}

#[test]
fn controlled_pauli_gates_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let mut k = PauliString::identity(3);
        for q in 0..3 {
            k.set(q, Pauli::from_index(rand::Rng::gen_range(&mut rng, 0..4)));
        }
        let kmat = pauli(&k);
        // ancilla is qubit 3, the most significant bit
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        let p0 = on(4, 3, &m2([[o, z], [z, z]]));
        let p1 = on(4, 3, &m2([[z, z], [z, o]]));
        let want = &p0 + &p1 * eye(1).kronecker(&kmat);
        let got = circuit(4, &controlled_pauli_gates(&k, 3));
        assert!(max_abs(&(&got - &want)) < 1e-12, "{k}");
    }
}

fn eigenstate(n: usize, bits: usize, hadamards: &[usize]) -> StateVector {
    let mut sv = StateVector::zero(n).unwrap();
    for q in 0..n {
        if bits >> q & 1 == 1 {
            sv.apply_gate(&Gate::X(q)).unwrap();
        }
    }
    for &q in hadamards {
        sv.apply_gate(&Gate::H(q)).unwrap();
    }
    sv
}

#[test]
fn encrypted_stabilizer_measurement_reports_plain_syndrome() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let zz: PauliString = "ZZI".parse().unwrap();
    let xx: PauliString = "IXX".parse().unwrap();
    // |01⟩ on qubits 0,1 is a −1 eigenstate of ZZ; H|1⟩⊗H|0⟩ on 1,2 is −1 for XX
    let cases = [(zz.clone(), eigenstate(3, 0b001, &[]), true), (zz, eigenstate(3, 0b011, &[]), false), (xx.clone(), eigenstate(3, 0b010, &[1, 2]), true), (xx, eigenstate(3, 0, &[1, 2]), false)];
    for (k, plain, syndrome) in cases {
        for _ in 0..16 {
            let data_key = random_key(3, false, &mut rng);
            let ak = Pauli::from_index(rand::Rng::gen_range(&mut rng, 0..4));
            let mut sv = plain.clone();
            encrypt(&data_key, &mut sv).unwrap();
            let out = encrypted_stabilizer_measurement(&mut sv, &k, ak, Some(&data_key), &mut rng).unwrap();
            assert_eq!(out.corrected, syndrome, "{k} key {data_key} ancilla {ak:?}");
            assert_eq!(sv.n_qubits(), 3);
        }
    }
    let mut sv = StateVector::zero(1).unwrap();
    let anti = PauliString::from_bits(&[true], &[false], 1).unwrap();
    assert!(encrypted_stabilizer_measurement(&mut sv, &anti, Pauli::I, None, &mut rng).is_err());
}

/// `|⟨y|H C H|x⟩|²` from the reference matrices.
fn iqp_reference(c: &Circuit, x: usize) -> Vec<f64> {
    let n = c.n_qubits();
    let hn = (0..n).fold(eye(n), |acc, q| gate(n, &Gate::H(q)) * acc);
    let mut u = eye(n);
    for e in c.elements() {
        u = match e {
            qhe_lab::Element::Gate(g) => gate(n, g) * u,
            qhe_lab::Element::T(q) => t_gate(n, *q) * u,
            _ => unreachable!(),
        };
    }
    let full = &hn * u * &hn;
    (0..1 << n).map(|y| full[(y, x)].norm_sqr()).collect()
}

#[test]
fn iqp_matches_reference_with_and_without_key() {
    let c: Circuit = "QUBITS 3\nT 0\nCZ 0 1\nS 2\nT 1\nCZ 1 2\nZ 0\nT 2\n".parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for x in [0b000usize, 0b101, 0b110] {
        let bits: Vec<bool> = (0..3).map(|q| x >> q & 1 == 1).collect();
        let want = iqp_reference(&c, x);
        let plain = iqp_distribution(&c, &bits, 0, None, &mut rng).unwrap();
        let keyed = iqp_distribution(&c, &bits, 20_000, Some(&[true, false, true]), &mut rng).unwrap();
        for y in 0..8 {
            assert!((plain.probabilities[y] - want[y]).abs() < 1e-12);
            assert!((keyed.probabilities[y] - want[y]).abs() < 1e-12);
            let freq = keyed.counts[y] as f64 / 20_000.0;
            assert!((freq - want[y]).abs() < 0.02, "y={y} {freq} vs {}", want[y]);
        }
    }
    let bad: Circuit = "QUBITS 1\nH 0\n".parse().unwrap();
    assert!(matches!(iqp_distribution(&bad, &[false], 1, None, &mut rng), Err(QheError::NotAllowed(_))));
}

#[test]
fn encoded_scheme_roundtrips_on_repetition_code() {
    let code = StabilizerCode::repetition();
    let scheme = compose_with_stabilizer_code(PauliScheme::new(1), &code).unwrap();
    assert_eq!((scheme.plain_qubits(), scheme.cipher_qubits()), (1, 3));
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let rho = DensityMatrix::random(1, &mut rng).unwrap();
    for gates in [vec![], vec![Gate::X(0)], vec![Gate::Z(0), Gate::X(0)], vec![Gate::Y(0)]] {
        let cl = CliffordOp::from_gates(1, &gates).unwrap();
        for key in scheme.enumerate_keys().unwrap() {
            assert!(roundtrip_dense(&scheme, &key, &cl, &rho).unwrap() < 1e-10);
        }
    }
    let h = CliffordOp::from_gates(1, &[Gate::H(0)]).unwrap();
    assert!(matches!(scheme.allows(&h), Err(QheError::NotAllowed(_))));
}

#[test]
fn pauli_scheme_keys() {
    assert_eq!(PauliScheme::new(3).key_count(), Some(64));
    assert_eq!(PauliScheme::z_only(3).key_count(), Some(8));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let k = random_key(4, true, &mut rng);
        assert!((0..4).all(|q| !k.x_bit(q)));
    }
}
