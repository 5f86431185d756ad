//! Stabilizer-code primitives shared by the architecture and compiler crates.

pub mod bits;
pub mod circuit;
pub mod codes;
pub mod gf2;
pub mod pauli;
pub mod sim;

pub use bits::Bits;
pub use circuit::{CircuitBuilder, MeasRole, OpKind, PhysicalCircuit, PhysicalOp};
pub use codes::{rm_code, steane_code, CheckType, CodeKind, StabilizerCode};
pub use pauli::{apply_pauli, Pauli, PauliString};
