//! Simulation backends behind one trait so protocols can run on any of them.
//!
//! - [`StabilizerState`]: Clifford-only, scales to hundreds of qubits.
//! - [`DensityMatrix`]: exact, n ≤ 6, used as the oracle.
//! - [`StateVector`]: pure-state trajectories, n ≤ 24, for T-gate protocols.

pub mod dense;
pub mod stabilizer;
pub mod statevec;

use std::collections::BTreeMap;

use rand::RngCore;
use serde::Serialize;

use crate::circuit::{Circuit, Element};
use crate::clifford::{CliffordOp, Gate};
use crate::error::{check_len, QheError, Result};
use crate::pauli::{Pauli, PauliString};

pub use dense::DensityMatrix;
pub use stabilizer::StabilizerState;
pub use statevec::StateVector;

pub trait Backend {
    fn n_qubits(&self) -> usize;
    fn apply_gate(&mut self, g: &Gate) -> Result<()>;
    /// `T` or `T†`; unsupported on the stabilizer backend.
    fn apply_t(&mut self, q: usize, dagger: bool) -> Result<()>;
    fn apply_pauli(&mut self, p: &PauliString) -> Result<()>;
    /// Projective measurement of a Hermitian Pauli. Returns the outcome
    /// (false = +1) and its probability.
    fn measure_pauli(&mut self, p: &PauliString, rng: &mut dyn RngCore) -> Result<(bool, f64)>;
    fn project_pauli(&mut self, p: &PauliString, outcome: bool) -> Result<f64>;
    /// Fully depolarizing channel. Trajectory backends sample a random Pauli.
    fn depolarize(&mut self, q: usize, rng: &mut dyn RngCore) -> Result<()>;
    /// Appends `k` qubits in `|0⟩`.
    fn append_zero(&mut self, k: usize) -> Result<()>;
    /// Removes qubits `n..` after resetting them to `|0⟩`.
    fn truncate(&mut self, n: usize, rng: &mut dyn RngCore) -> Result<()>;

    fn apply_clifford(&mut self, c: &CliffordOp) -> Result<()> {
        check_len(self.n_qubits(), c.n_qubits())?;
        for g in c.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    fn measure_z(&mut self, q: usize, rng: &mut dyn RngCore) -> Result<bool> {
        let n = self.n_qubits();
        if q >= n {
            return Err(QheError::QubitOutOfRange { index: q, n });
        }
        Ok(self.measure_pauli(&PauliString::single(n, q, Pauli::Z), rng)?.0)
    }

    /// Resets qubit `q` to `|0⟩` by measuring and flipping.
    fn reset(&mut self, q: usize, rng: &mut dyn RngCore) -> Result<()> {
        if self.measure_z(q, rng)? {
            self.apply_gate(&Gate::X(q))?;
        }
        Ok(())
    }
}

impl Backend for StabilizerState {
    fn n_qubits(&self) -> usize {
        StabilizerState::n_qubits(self)
    }
    fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        StabilizerState::apply_gate(self, g)
    }
    fn apply_t(&mut self, q: usize, _dagger: bool) -> Result<()> {
        Err(QheError::NonClifford(format!("T on qubit {q} in the stabilizer backend")))
    }
    fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        StabilizerState::apply_pauli(self, p)
    }
    fn measure_pauli(&mut self, p: &PauliString, rng: &mut dyn RngCore) -> Result<(bool, f64)> {
        StabilizerState::measure_pauli(self, p, rng)
    }
    fn project_pauli(&mut self, p: &PauliString, outcome: bool) -> Result<f64> {
        StabilizerState::project_pauli(self, p, outcome)
    }
    fn depolarize(&mut self, q: usize, _rng: &mut dyn RngCore) -> Result<()> {
        StabilizerState::depolarize(self, q)
    }
    fn append_zero(&mut self, k: usize) -> Result<()> {
        self.extend(k);
        Ok(())
    }
    fn truncate(&mut self, n: usize, _rng: &mut dyn RngCore) -> Result<()> {
        *self = self.partial_trace(&(0..n).collect::<Vec<_>>())?;
        Ok(())
    }
    fn apply_clifford(&mut self, c: &CliffordOp) -> Result<()> {
        StabilizerState::apply_clifford(self, c)
    }
}

impl Backend for DensityMatrix {
    fn n_qubits(&self) -> usize {
        DensityMatrix::n_qubits(self)
    }
    fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        DensityMatrix::apply_gate(self, g)
    }
    fn apply_t(&mut self, q: usize, dagger: bool) -> Result<()> {
        DensityMatrix::apply_t(self, q, dagger)
    }
    fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        DensityMatrix::apply_pauli(self, p)
    }
    fn measure_pauli(&mut self, p: &PauliString, rng: &mut dyn RngCore) -> Result<(bool, f64)> {
        DensityMatrix::measure_pauli(self, p, rng)
    }
    fn project_pauli(&mut self, p: &PauliString, outcome: bool) -> Result<f64> {
        DensityMatrix::project_pauli(self, p, outcome)
    }
    fn depolarize(&mut self, q: usize, _rng: &mut dyn RngCore) -> Result<()> {
        DensityMatrix::depolarize(self, q)
    }
    fn append_zero(&mut self, k: usize) -> Result<()> {
        *self = self.tensor(&DensityMatrix::zero_state(k)?)?;
        Ok(())
    }
    fn truncate(&mut self, n: usize, _rng: &mut dyn RngCore) -> Result<()> {
        *self = self.partial_trace(&(0..n).collect::<Vec<_>>())?;
        Ok(())
    }
    fn apply_clifford(&mut self, c: &CliffordOp) -> Result<()> {
        DensityMatrix::apply_clifford(self, c)
    }
}

impl Backend for StateVector {
    fn n_qubits(&self) -> usize {
        StateVector::n_qubits(self)
    }
    fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        StateVector::apply_gate(self, g)
    }
    fn apply_t(&mut self, q: usize, dagger: bool) -> Result<()> {
        StateVector::apply_t(self, q, dagger)
    }
    fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        StateVector::apply_pauli(self, p)
    }
    fn measure_pauli(&mut self, p: &PauliString, rng: &mut dyn RngCore) -> Result<(bool, f64)> {
        StateVector::measure_pauli(self, p, rng)
    }
    fn project_pauli(&mut self, p: &PauliString, outcome: bool) -> Result<f64> {
        StateVector::project_pauli(self, p, outcome)
    }
    fn depolarize(&mut self, q: usize, rng: &mut dyn RngCore) -> Result<()> {
        StateVector::depolarize(self, q, rng)
    }
    fn append_zero(&mut self, k: usize) -> Result<()> {
        self.extend(k)
    }
    fn truncate(&mut self, n: usize, rng: &mut dyn RngCore) -> Result<()> {
        for q in n..StateVector::n_qubits(self) {
            self.reset(q, rng)?;
        }
        StateVector::truncate(self, n)
    }
}

/// One measured classical bit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub label: String,
    pub outcome: bool,
    pub probability: f64,
}

/// Outcome of the record labelled `label`, if present.
pub fn lookup(records: &[MeasurementRecord], label: &str) -> Option<bool> {
    records.iter().find(|r| r.label == label).map(|r| r.outcome)
}

/// Runs a circuit on a backend; measurements are in the Z basis.
pub fn run_circuit<B: Backend + ?Sized>(
    backend: &mut B,
    circuit: &Circuit,
    rng: &mut dyn RngCore,
) -> Result<Vec<MeasurementRecord>> {
    check_len(backend.n_qubits(), circuit.n_qubits())?;
    let n = circuit.n_qubits();
    let mut rec = Vec::new();
    let mut bits = BTreeMap::new();
    for e in circuit.elements() {
        match e {
            Element::Gate(g) => backend.apply_gate(g)?,
            Element::T(q) => backend.apply_t(*q, false)?,
            Element::Measure { qubit, bit } => {
                let z = PauliString::single(n, *qubit, Pauli::Z);
                let (outcome, probability) = backend.measure_pauli(&z, rng)?;
                bits.insert(bit.as_str(), outcome);
                rec.push(MeasurementRecord { label: bit.clone(), outcome, probability });
            }
            Element::CPauli { bit, pauli, qubit } => {
                if bits[bit.as_str()] {
                    backend.apply_pauli(&PauliString::single(n, *qubit, *pauli))?;
                }
            }
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn teleport_on_all_backends() {
        let text = "QUBITS 3\nH 1\nCNOT 1 2\nCNOT 0 1\nH 0\nM 0 -> a\nM 1 -> b\nCPAULI b X 2\nCPAULI a Z 2\n";
        let circ: Circuit = text.parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..8 {
            let mut st = StabilizerState::zero(3);
            st.apply_gate(&Gate::H(0)).unwrap();
            st.apply_gate(&Gate::S(0)).unwrap();
            run_circuit(&mut st, &circ, &mut rng).unwrap();
            let y2 = PauliString::single(3, 2, Pauli::Y);
            assert_eq!(st.expectation_sign(&y2).unwrap(), Some(false));

            let mut d = DensityMatrix::zero_state(3).unwrap();
            d.apply_gate(&Gate::H(0)).unwrap();
            d.apply_t(0, false).unwrap();
            run_circuit(&mut d, &circ, &mut rng).unwrap();
            let mut want = DensityMatrix::zero_state(1).unwrap();
            want.apply_gate(&Gate::H(0)).unwrap();
            want.apply_t(0, false).unwrap();
            assert!(d.partial_trace(&[2]).unwrap().trace_distance(&want).unwrap() < 1e-9);
        }
    }

    #[test]
    fn stabilizer_rejects_t() {
        let mut st = StabilizerState::zero(1);
        assert!(matches!(Backend::apply_t(&mut st, 0, false), Err(QheError::NonClifford(_))));
    }
}
