mod common;

use common::*;
use proptest::prelude::*;
use qhe_lab::clifford::Gate;
use qhe_lab::perm_key::*;
use qhe_lab::protocol::{MessageKind, Transcript};
use qhe_lab::qec::StabilizerCode;
use qhe_lab::qhe::security_delta;
use qhe_lab::sim::{DensityMatrix, StabilizerState, StateVector};
use qhe_lab::{Pauli, PauliString, QheError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bound_oracle(r: u32, m: u64) -> f64 {
    (2f64.powi(r as i32) / n_choose_k(2 * m, m) as f64).sqrt()
}

#[test]
fn bound_values() {
    assert!((security_bound(0, 1) - 0.70711).abs() < 5e-6);
    assert!((security_bound(1, 2) - 0.57735).abs() < 5e-6);
    assert!((security_bound(0, 20) / 2.6934e-6 - 1.0).abs() < 1e-4);
    for m in 1..=30u64 {
        for r in 0..6u32 {
            let want = bound_oracle(r, m);
            assert!((security_bound(r as u64, m) / want - 1.0).abs() < 1e-10, "r={r} m={m}");
        }
    }
    // log form stays finite where the binomial overflows f64
    assert!(security_bound_log2(0, 2000).is_finite());
}

#[test]
fn exact_sweep_respects_bound() {
    let inputs = vec![
        DensityMatrix::basis(1, 0).unwrap(),
        DensityMatrix::basis(1, 1).unwrap(),
        DensityMatrix::from_pure(&[c(1.0, 0.0), c(1.0, 0.0)].map(|z| z / 2f64.sqrt())).unwrap(),
    ];
    for m in [1u64, 2] {
        let rep = security_delta(&PermScheme::new(m as usize, 1), &inputs).unwrap();
        assert!(rep.delta <= security_bound(0, m) + 1e-12, "m={m}: {}", rep.delta);
        assert_eq!(rep.key_count, (1..=2 * m as u128).product::<u128>());
    }
}

#[test]
fn spread_qubit_carries_logical_paulis() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let rho = DensityMatrix::random(1, &mut rng).unwrap();
    for m in 1..=4usize {
        let spread = spread_qubit(&rho, m).unwrap();
        let zs = PauliString::from_bits(&vec![false; m], &vec![true; m], 0).unwrap();
        let z1: PauliString = "Z".parse().unwrap();
        assert!((spread.expectation(&zs).unwrap() - rho.expectation(&z1).unwrap()).abs() < 1e-12);
        let xs = PauliString::from_bits(&vec![true; m], &vec![false; m], 0).unwrap();
        let x1: PauliString = "X".parse().unwrap();
        let got = spread.expectation(&xs).unwrap();
        if m % 2 == 1 {
            assert!((got - rho.expectation(&x1).unwrap()).abs() < 1e-12);
        } else {
            assert!(got.abs() < 1e-12);
        }
    }
    assert!(spread_qubit(&rho, 0).is_err());
}

#[test]
fn transversal_rules() {
    assert!(transversal_ok(&Gate::Cnot(0, 1), 2).is_ok());
    assert!(transversal_ok(&Gate::Cz(0, 1), 3).is_ok());
    assert!(matches!(transversal_ok(&Gate::Cz(0, 1), 4), Err(QheError::NotAllowed(_))));
    assert!(transversal_ok(&Gate::Z(0), 2).is_ok());
    assert!(transversal_ok(&Gate::H(0), 3).is_ok());
    assert!(matches!(transversal_ok(&Gate::X(0), 2), Err(QheError::NotAllowed(_))));
    assert!(transversal_ok(&Gate::S(0), 5).is_ok());
    assert!(transversal_ok(&Gate::S(0), 3).is_err());
}

#[test]
fn decryption_swap_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in 1..6 {
        let k = PermKey::random(m, &mut rng);
        let swaps = k.swap_gates(0).len();
        assert_eq!(decryption_complexity(&k, 1), swaps);
        assert_eq!(decryption_complexity(&k, 4), 4 * swaps);
        assert!(swaps < 2 * m);
    }
}

fn data_density(reg: &mut SpreadRegister<StateVector>, client: &PermClient, row: usize) -> M {
    let q = client.decrypt_row(reg, row).unwrap();
    let d = reg.backend().reduced_density(&[q]).unwrap();
    d.matrix().clone()
}

#[test]
fn deterministic_t_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for m in [1usize, 2] {
        for _ in 0..25 {
            let plain = StateVector::random(1, &mut rng).unwrap();
            let psi = nalgebra::DVector::from_column_slice(plain.amplitudes());
            let want = ket_to_rho((t_gate(1, 0) * psi).as_slice());
            let mut client = PermClient::new(PermKey::random(m, &mut rng));
            let mut reg = client.encrypt_data(plain, &mut rng).unwrap();
            let mut tr = Transcript::new();
            t_gate_deterministic(&mut reg, &mut client, 0, &mut tr, &mut rng).unwrap();
            assert_eq!(tr.count(MessageKind::ClassicalBits), 4);
            let got = data_density(&mut reg, &client, 0);
            assert!(trace_distance(&got, &want) < 1e-10, "m={m}");
        }
    }
}

#[test]
fn probabilistic_t_succeeds_half_the_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let runs = 2000;
    let mut wins = 0;
    let plus = qhe_lab::protocol::product_state("+").unwrap();
    let want_t = ket_to_rho((t_gate(1, 0) * nalgebra::DVector::from_column_slice(plus.amplitudes())).as_slice());
    let want_tdg = {
        let tdg = t_gate(1, 0).adjoint();
        ket_to_rho((tdg * nalgebra::DVector::from_column_slice(plus.amplitudes())).as_slice())
    };
    for _ in 0..runs {
        let mut client = PermClient::new(PermKey::random(1, &mut rng));
        let mut reg = client.encrypt_data(plus.clone(), &mut rng).unwrap();
        let out = t_gate_probabilistic(&mut reg, &mut client, 0, &mut Transcript::new(), &mut rng).unwrap();
        let got = data_density(&mut reg, &client, 0);
        let want = if out.success { &want_t } else { &want_tdg };
        assert!(trace_distance(&got, want) < 1e-10);
        wins += usize::from(out.success);
    }
    let rate = wins as f64 / runs as f64;
    assert!((rate - 0.5).abs() < 0.04, "{rate}");
}

fn row_bits(reg: &mut SpreadRegister<StabilizerState>, client: &PermClient, rows: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    (0..rows)
        .map(|r| {
            let q = client.decrypt_row(reg, r).unwrap();
            reg.backend_mut().measure_z(q, rng).unwrap()
        })
        .collect()
}

#[test]
fn concatenated_repetition_corrects_row_flips() {
    let inner = StabilizerCode::repetition();
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for m in [1usize, 3] {
        let code = build_concatenated_code(&inner, m).unwrap();
        for logical in [false, true] {
            for bad in 0..3 {
                let mut client = PermClient::new(PermKey::random(m, &mut rng));
                let mut plain = StabilizerState::zero(1);
                if logical {
                    plain.apply_gate(&Gate::X(0)).unwrap();
                }
                let mut reg = code.encode_and_encrypt(plain, &client, &mut rng).unwrap();
                reg.transversal_pauli(bad, Pauli::X).unwrap();
                let mut tr = Transcript::new();
                let (syn, fix) = code.correction_round(&mut reg, &mut client, &mut tr, &mut rng).unwrap();
                let err = PauliString::single(3, bad, Pauli::X);
                assert_eq!(syn, inner.syndrome_of(&err).unwrap());
                assert_eq!(fix, err);
                // every (row, X/Z) slot gets a label, whether used or not
                let labels = tr.messages().iter().filter(|msg| msg.slot.ends_with(".label")).count();
                assert_eq!(labels, 6);
                assert_eq!(row_bits(&mut reg, &client, 3, &mut rng), vec![logical; 3]);
            }
        }
    }
    assert!(build_concatenated_code(&StabilizerCode::by_name("steane").unwrap(), 1).is_ok());
}

#[test]
fn concatenated_logicals_sit_on_data_columns() {
    let code = build_concatenated_code(&StabilizerCode::repetition(), 2).unwrap();
    let key = PermKey::new(vec![2, 0, 3, 1]).unwrap();
    let lz = code.logical_z(&key).unwrap();
    assert_eq!(lz.n_qubits(), 12);
    let want: Vec<usize> = code.inner().logical_z()[0].support().iter().flat_map(|r| [r * 4, r * 4 + 2]).collect();
    assert_eq!(lz.support(), want);
}

fn arb_key() -> impl Strategy<Value = PermKey> {
    (1usize..6).prop_flat_map(|m| Just((0..2 * m).collect::<Vec<_>>()).prop_shuffle()).prop_map(|p| PermKey::new(p).unwrap())
}

proptest! {
    #[test]
    fn cycle_notation_roundtrips(k in arb_key()) {
        let text = k.to_string();
        let back: PermKey = text.parse().unwrap();
        prop_assert_eq!(&back, &k);
        let cols: usize = k.cycles().iter().map(Vec::len).sum();
        prop_assert_eq!(cols, 2 * k.m());
    }

    #[test]
    fn inverse_undoes_key(k in arb_key()) {
        let inv = k.inverse();
        for c in 0..2 * k.m() {
            prop_assert_eq!(inv.perm()[k.perm()[c]], c);
        }
        prop_assert_eq!(k.data_columns().len(), k.m());
    }
}

#[test]
fn malformed_keys() {
    for s in ["(0 1", "(0 0)", "(0)(2)", "()", "0 1", "(0 1 2)"] {
        assert!(s.parse::<PermKey>().is_err(), "{s}");
    }
}

#[test]
fn conditional_paulis_for_even_and_odd_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for m in [1usize, 2, 3] {
        for p in [Pauli::X, Pauli::Z] {
            for bit in [false, true] {
                let plain = StateVector::random(1, &mut rng).unwrap();
                let psi = nalgebra::DVector::from_column_slice(plain.amplitudes());
                let u = if bit { pauli1(p) } else { eye(1) };
                let want = ket_to_rho((u * psi).as_slice());
                let client = PermClient::new(PermKey::random(m, &mut rng));
                let mut reg = client.encrypt_data(plain, &mut rng).unwrap();
                conditional_pauli(&mut reg, &client, 0, p, bit, "c", &mut Transcript::new(), &mut rng).unwrap();
                let got = data_density(&mut reg, &client, 0);
                assert!(trace_distance(&got, &want) < 1e-10, "m={m} {p:?} {bit}");
            }
        }
    }
}
