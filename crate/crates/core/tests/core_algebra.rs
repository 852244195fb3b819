mod common;

use common::*;
use proptest::prelude::*;
use qhe_lab::circuit::Circuit;
use qhe_lab::clifford::{CliffordOp, Gate};
use qhe_lab::{Pauli, PauliString};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(0usize..4, n), 0u8..4)
        .prop_map(|(v, ph)| PauliString::from_paulis(&v.into_iter().map(Pauli::from_index).collect::<Vec<_>>()).with_phase(ph))
}

fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
    (0usize..8, 0..n, 0..n).prop_filter_map("distinct qubits", move |(k, a, b)| {
        let two = k >= 5;
        if two && a == b {
            return None;
        }
        Some(match k {
            0 => Gate::H(a),
            1 => Gate::S(a),
            2 => Gate::X(a),
            3 => Gate::Y(a),
            4 => Gate::Z(a),
            5 => Gate::Cnot(a, b),
            6 => Gate::Cz(a, b),
            _ => Gate::Swap(a, b),
        })
    })
}

#[test]
fn single_gate_conjugations() {
    let x: PauliString = "+X".parse().unwrap();
    let z: PauliString = "+Z".parse().unwrap();
    let h = CliffordOp::from_gates(1, &[Gate::H(0)]).unwrap();
    assert_eq!(h.conjugate(&x).unwrap(), z);
    let s = CliffordOp::from_gates(1, &[Gate::S(0)]).unwrap();
    assert_eq!(s.conjugate(&x).unwrap(), "+Y".parse().unwrap());
    let cx = CliffordOp::from_gates(2, &[Gate::Cnot(0, 1)]).unwrap();
    assert_eq!(cx.conjugate(&"+XI".parse().unwrap()).unwrap(), "+XX".parse().unwrap());
    assert_eq!(cx.conjugate(&"+IZ".parse().unwrap()).unwrap(), "+ZZ".parse().unwrap());
}

#[test]
fn parse_and_display() {
    for s in ["+XZ", "-iY", "+I", "iXYZ"] {
        let p: PauliString = s.parse().unwrap();
        let back: PauliString = p.to_string().parse().unwrap();
        assert_eq!(p, back);
    }
    assert!("+XQ".parse::<PauliString>().is_err());
    let p: PauliString = "-iY".parse().unwrap();
    assert_eq!(p.phase(), 3);
}

#[test]
fn pauli_group_enumeration() {
    assert_eq!(PauliString::all(2).count(), 16);
    assert_eq!(PauliString::all(3).filter(|p| p.is_diagonal()).count(), 8);
}

#[test]
fn circuit_text_roundtrip() {
    let text = "QUBITS 3\nH 0\nCNOT 0 1\nT 2\nCZ 1 2\nM 0 -> a\nCPAULI a X 2\nSWAP 0 2\n";
    let c: Circuit = text.parse().unwrap();
    assert_eq!(c.t_count(), 1);
    let again: Circuit = c.to_string().parse().unwrap();
    assert_eq!(again.to_string(), c.to_string());
    assert!("QUBITS 2\nCNOT 0 0\n".parse::<Circuit>().is_err());
    assert!("QUBITS 1\nH 3\n".parse::<Circuit>().is_err());
}

#[test]
fn random_cliffords_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 1..=3 {
        for _ in 0..20 {
            let c = CliffordOp::random(n, &mut rng);
            assert!(c.is_valid_symplectic());
            let u = circuit(n, c.gates());
            for p in PauliString::all(n) {
                let want = &u * pauli(&p) * u.adjoint();
                assert!(max_abs(&(pauli(&c.conjugate(&p).unwrap()) - want)) < 1e-12);
            }
        }
    }
}

proptest! {
    #[test]
    fn multiply_matches_matrices(a in arb_pauli(3), b in arb_pauli(3)) {
        let ab = a.multiply(&b).unwrap();
        prop_assert!(max_abs(&(pauli(&ab) - pauli(&a) * pauli(&b))) < 1e-12);
        let comm = max_abs(&(pauli(&a) * pauli(&b) - pauli(&b) * pauli(&a))) < 1e-12;
        prop_assert_eq!(a.commutes_with(&b), comm);
    }

    #[test]
    fn multiply_is_associative(a in arb_pauli(4), b in arb_pauli(4), c in arb_pauli(4)) {
        let l = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let r = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn conjugation_matches_dense(gates in prop::collection::vec(arb_gate(3), 0..15), p in arb_pauli(3)) {
        let c = CliffordOp::from_gates(3, &gates).unwrap();
        let u = circuit(3, &gates);
        let want = &u * pauli(&p) * u.adjoint();
        prop_assert!(max_abs(&(pauli(&c.conjugate(&p).unwrap()) - &want)) < 1e-12);
        let back = c.conjugate_inverse(&c.conjugate(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn compose_and_inverse(g1 in prop::collection::vec(arb_gate(3), 0..10), g2 in prop::collection::vec(arb_gate(3), 0..10), p in arb_pauli(3)) {
        let c1 = CliffordOp::from_gates(3, &g1).unwrap();
        let c2 = CliffordOp::from_gates(3, &g2).unwrap();
        let both = CliffordOp::compose(&c2, &c1).unwrap();
        prop_assert_eq!(both.conjugate(&p).unwrap(), c2.conjugate(&c1.conjugate(&p).unwrap()).unwrap());
        prop_assert!(c1.then(&c1.inverse()).unwrap().same_action(&CliffordOp::identity(3)));
        let rebuilt = CliffordOp::from_tableau(c1.images().to_vec()).unwrap();
        prop_assert!(rebuilt.same_action(&c1));
    }

    #[test]
    fn embed_restrict(p in arb_pauli(2)) {
        let e = p.embed(4, &[3, 1]).unwrap();
        prop_assert_eq!(e.restrict(&[3, 1]), p.clone());
        prop_assert_eq!(e.weight(), p.weight());
    }
}
