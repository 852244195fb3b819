//! Quantum homomorphic encryption composed with stabilizer error correction.
//!
//! Pauli-key, permutation-key and displacement-key schemes, a stabilizer tableau
//! simulator with mixed-state support, small dense oracles, a two-party protocol
//! runtime and the fault-tolerance resource calculator.

pub mod circuit;
pub mod clifford;
pub mod cv;
pub mod error;
pub mod pauli;
pub mod pauli_key;
pub mod perm_key;
pub mod protocol;
pub mod qec;
pub mod qhe;
pub mod resources;
pub mod sim;

pub use circuit::{Circuit, Element};
pub use clifford::{CliffordOp, Gate};
pub use error::{QheError, Result};
pub use pauli::{Pauli, PauliString};
