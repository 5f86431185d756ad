//! Dense unitary of a small logical program, for semantic equivalence checks.
//!
//! Qubit `i` is bit `i` of the basis index. EC rounds and code switches are the identity.

use crate::program::{LogicalProgram, Op};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

/// Largest register the oracle accepts.
pub const MAX_QUBITS: usize = 10;

/// Column-major `2^n × 2^n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    pub n_qubits: usize,
    pub data: Vec<Complex64>,
}

impl Unitary {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "oracle limited to {MAX_QUBITS} qubits");
        let dim = 1 << n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Unitary { n_qubits, data }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Left-multiplies by a gate.
    pub fn apply(&mut self, op: Op, qubits: &[usize]) {
        let dim = self.dim();
        for col in self.data.chunks_mut(dim) {
            apply_to_state(col, op, qubits);
        }
    }

    /// Equality up to a global phase, entrywise within `tol`.
    pub fn equal_up_to_phase(&self, other: &Unitary, tol: f64) -> bool {
        if self.n_qubits != other.n_qubits {
            return false;
        }
        let Some(k) = self.data.iter().position(|z| z.norm() > 0.5 / (self.dim() as f64).sqrt()) else {
            return false;
        };
        if other.data[k].norm() < 1e-12 {
            return false;
        }
        let phase = self.data[k] / other.data[k];
        if (phase.norm() - 1.0).abs() > tol {
            return false;
        }
        self.data.iter().zip(&other.data).all(|(a, b)| (a - phase * b).norm() <= tol)
    }
}

fn apply_to_state(state: &mut [Complex64], op: Op, qubits: &[usize]) {
    let phase = |theta: f64| Complex64::from_polar(1.0, theta);
    let diag = |state: &mut [Complex64], q: usize, z: Complex64| {
        for (i, amp) in state.iter_mut().enumerate() {
            if i >> q & 1 == 1 {
                *amp *= z;
            }
        }
    };
    match op {
        Op::Ec | Op::Cs(_) => {}
        Op::T => diag(state, qubits[0], phase(std::f64::consts::FRAC_PI_4)),
        Op::Tdg => diag(state, qubits[0], phase(-std::f64::consts::FRAC_PI_4)),
        Op::S => diag(state, qubits[0], Complex64::new(0.0, 1.0)),
        Op::Sdg => diag(state, qubits[0], Complex64::new(0.0, -1.0)),
        Op::Z => diag(state, qubits[0], Complex64::new(-1.0, 0.0)),
        Op::X | Op::H => {
            let bit = 1 << qubits[0];
            for i in 0..state.len() {
                if i & bit == 0 {
                    let (a, b) = (state[i], state[i | bit]);
                    if op == Op::X {
                        state[i] = b;
                        state[i | bit] = a;
                    } else {
                        state[i] = (a + b) * FRAC_1_SQRT_2;
                        state[i | bit] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
        }
        Op::Cx => {
            let (c, t) = (1 << qubits[0], 1 << qubits[1]);
            for i in 0..state.len() {
                if i & c != 0 && i & t == 0 {
                    state.swap(i, i | t);
                }
            }
        }
        Op::Swap => {
            let (a, b) = (1 << qubits[0], 1 << qubits[1]);
            for i in 0..state.len() {
                if i & a != 0 && i & b == 0 {
                    state.swap(i, (i & !a) | b);
                }
            }
        }
    }
}

pub fn unitary(program: &LogicalProgram) -> Unitary {
    let mut u = Unitary::identity(program.n_qubits);
    for instr in &program.instrs {
        u.apply(instr.op, &instr.qubits);
    }
    u
}

pub fn equivalent(a: &LogicalProgram, b: &LogicalProgram) -> bool {
    unitary(a).equal_up_to_phase(&unitary(b), 1e-9)
}
