//! Gate representation and the dense statevector oracle.
//!
//! Qubit 0 is the least significant bit of a basis-state index everywhere in
//! this crate.

pub mod decompose;
pub mod dense;
pub mod gate;

pub use decompose::{lower_gate, lower_gates};
pub use dense::{fidelity, DenseState, StateDump, DENSE_QUBIT_CAP};
pub use gate::{dump_circuit, greedy_depth, inverse_circuit, parse_circuit, GateKind, GateSpec};
