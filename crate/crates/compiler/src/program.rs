//! Logical instruction set: Clifford+T gates plus EC rounds and code switches.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Encoding a logical qubit is currently held in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Steane,
    Rm,
}

/// Target encoding of a code switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsDirection {
    ToRm,
    ToSteane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    H,
    S,
    Sdg,
    T,
    Tdg,
    X,
    Z,
    Cx,
    Swap,
    Ec,
    Cs(CsDirection),
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Cx | Op::Swap => 2,
            _ => 1,
        }
    }

    /// Mnemonic used in the text format.
    pub fn mnemonic(self) -> &'static str {
        match self {
            Op::H => "h",
            Op::S => "s",
            Op::Sdg => "sdg",
            Op::T => "t",
            Op::Tdg => "tdg",
            Op::X => "x",
            Op::Z => "z",
            Op::Cx => "cx",
            Op::Swap => "swap",
            Op::Ec => "ec",
            Op::Cs(CsDirection::ToRm) => "cs_to_rm",
            Op::Cs(CsDirection::ToSteane) => "cs_to_steane",
        }
    }

    pub fn from_mnemonic(name: &str) -> Option<Op> {
        Some(match name {
            "h" => Op::H,
            "s" => Op::S,
            "sdg" => Op::Sdg,
            "t" => Op::T,
            "tdg" => Op::Tdg,
            "x" => Op::X,
            "z" => Op::Z,
            "cx" => Op::Cx,
            "swap" => Op::Swap,
            "ec" => Op::Ec,
            "cs_to_rm" => Op::Cs(CsDirection::ToRm),
            "cs_to_steane" => Op::Cs(CsDirection::ToSteane),
            _ => return None,
        })
    }

    pub fn is_t(self) -> bool {
        matches!(self, Op::T | Op::Tdg)
    }

    pub fn is_pauli(self) -> bool {
        matches!(self, Op::X | Op::Z)
    }

    /// Gates without a transversal RM realization.
    pub fn steane_only(self) -> bool {
        matches!(self, Op::H | Op::S | Op::Sdg)
    }

    /// EC rounds and code switches act as the logical identity.
    pub fn is_annotation(self) -> bool {
        matches!(self, Op::Ec | Op::Cs(_))
    }

    /// Clifford+T input gates.
    pub fn is_basis_gate(self) -> bool {
        !self.is_annotation() && self != Op::Swap
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// One instruction; two-qubit gates list control then target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalInstr {
    pub op: Op,
    pub qubits: Vec<usize>,
}

impl LogicalInstr {
    pub fn one(op: Op, q: usize) -> Self {
        LogicalInstr { op, qubits: vec![q] }
    }

    pub fn two(op: Op, a: usize, b: usize) -> Self {
        LogicalInstr { op, qubits: vec![a, b] }
    }

    pub fn touches(&self, q: usize) -> bool {
        self.qubits.contains(&q)
    }
}

impl fmt::Display for LogicalInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.op)?;
        for (i, q) in self.qubits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "q[{q}]")?;
        }
        f.write_str(";")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModeError {
    #[error("instruction {index}: {op} expects {expected} qubit(s)")]
    Arity { index: usize, op: Op, expected: usize },
    #[error("instruction {index}: qubit {qubit} out of range")]
    QubitOutOfRange { index: usize, qubit: usize },
    #[error("instruction {index}: {op} repeats qubit {qubit}")]
    RepeatedQubit { index: usize, op: Op, qubit: usize },
    #[error("instruction {index}: {op} on qubit {qubit} requires the RM encoding")]
    NeedsRm { index: usize, op: Op, qubit: usize },
    #[error("instruction {index}: {op} on qubit {qubit} requires the Steane encoding")]
    NeedsSteane { index: usize, op: Op, qubit: usize },
    #[error("instruction {index}: cx between qubits in different encodings")]
    MixedCx { index: usize },
    #[error("instruction {index}: qubit {qubit} is already in the target encoding")]
    RedundantSwitch { index: usize, qubit: usize },
    #[error("qubit {qubit} ends the program in the RM encoding")]
    EndsInRm { qubit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LogicalProgram {
    pub n_qubits: usize,
    pub instrs: Vec<LogicalInstr>,
}

impl LogicalProgram {
    pub fn new(n_qubits: usize) -> Self {
        LogicalProgram { n_qubits, instrs: Vec::new() }
    }

    pub fn push(&mut self, op: Op, qubits: &[usize]) -> &mut Self {
        self.instrs.push(LogicalInstr { op, qubits: qubits.to_vec() });
        self
    }

    pub fn count(&self, pred: impl Fn(Op) -> bool) -> usize {
        self.instrs.iter().filter(|i| pred(i.op)).count()
    }

    pub fn cs_count(&self) -> usize {
        self.count(|op| matches!(op, Op::Cs(_)))
    }

    pub fn swap_count(&self) -> usize {
        self.count(|op| op == Op::Swap)
    }

    pub fn t_count(&self) -> usize {
        self.count(Op::is_t)
    }

    /// Same program with EC rounds and code switches removed.
    pub fn without_annotations(&self) -> LogicalProgram {
        LogicalProgram { n_qubits: self.n_qubits, instrs: self.instrs.iter().filter(|i| !i.op.is_annotation()).cloned().collect() }
    }

    /// Checks arity and ranges, then tracks each qubit's encoding through the code
    /// switches. Returns the encoding every instruction executes in (the source
    /// encoding for a switch).
    pub fn validate_modes(&self) -> Result<Vec<Mode>, ModeError> {
        let mut mode = vec![Mode::Steane; self.n_qubits];
        let mut out = Vec::with_capacity(self.instrs.len());
        for (index, instr) in self.instrs.iter().enumerate() {
            let op = instr.op;
            if instr.qubits.len() != op.arity() {
                return Err(ModeError::Arity { index, op, expected: op.arity() });
            }
            for (k, &qubit) in instr.qubits.iter().enumerate() {
                if qubit >= self.n_qubits {
                    return Err(ModeError::QubitOutOfRange { index, qubit });
                }
                if instr.qubits[..k].contains(&qubit) {
                    return Err(ModeError::RepeatedQubit { index, op, qubit });
                }
            }
            let q = instr.qubits[0];
            let m = mode[q];
            if instr.qubits.iter().any(|&r| mode[r] != m) {
                return Err(ModeError::MixedCx { index });
            }
            match op {
                Op::T | Op::Tdg if m != Mode::Rm => return Err(ModeError::NeedsRm { index, op, qubit: q }),
                _ if op.steane_only() && m != Mode::Steane => return Err(ModeError::NeedsSteane { index, op, qubit: q }),
                Op::Cs(dir) => {
                    let target = match dir {
                        CsDirection::ToRm => Mode::Rm,
                        CsDirection::ToSteane => Mode::Steane,
                    };
                    if m == target {
                        return Err(ModeError::RedundantSwitch { index, qubit: q });
                    }
                    mode[q] = target;
                }
                _ => {}
            }
            out.push(m);
        }
        if let Some(qubit) = mode.iter().position(|&m| m == Mode::Rm) {
            return Err(ModeError::EndsInRm { qubit });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_tracking_accepts_wrapped_t() {
        let mut p = LogicalProgram::new(2);
        p.push(Op::H, &[0]).push(Op::Cs(CsDirection::ToRm), &[0]).push(Op::T, &[0]).push(Op::Cs(CsDirection::ToSteane), &[0]);
        assert_eq!(p.validate_modes().unwrap(), vec![Mode::Steane, Mode::Steane, Mode::Rm, Mode::Rm]);
    }

    #[test]
    fn mode_tracking_rejects_violations() {
        let mut bare_t = LogicalProgram::new(1);
        bare_t.push(Op::T, &[0]);
        assert!(matches!(bare_t.validate_modes(), Err(ModeError::NeedsRm { .. })));

        let mut h_in_rm = LogicalProgram::new(1);
        h_in_rm.push(Op::Cs(CsDirection::ToRm), &[0]).push(Op::H, &[0]).push(Op::Cs(CsDirection::ToSteane), &[0]);
        assert!(matches!(h_in_rm.validate_modes(), Err(ModeError::NeedsSteane { .. })));

        let mut mixed = LogicalProgram::new(2);
        mixed.push(Op::Cs(CsDirection::ToRm), &[0]).push(Op::Cx, &[0, 1]);
        assert!(matches!(mixed.validate_modes(), Err(ModeError::MixedCx { .. })));

        let mut dangling = LogicalProgram::new(1);
        dangling.push(Op::Cs(CsDirection::ToRm), &[0]);
        assert!(matches!(dangling.validate_modes(), Err(ModeError::EndsInRm { qubit: 0 })));

        let mut twice = LogicalProgram::new(1);
        twice.push(Op::Cs(CsDirection::ToSteane), &[0]);
        assert!(matches!(twice.validate_modes(), Err(ModeError::RedundantSwitch { .. })));

        let mut range = LogicalProgram::new(1);
        range.push(Op::Cx, &[0, 1]);
        assert!(matches!(range.validate_modes(), Err(ModeError::QubitOutOfRange { .. })));
    }

    #[test]
    fn mnemonics_round_trip() {
        for op in [Op::H, Op::S, Op::Sdg, Op::T, Op::Tdg, Op::X, Op::Z, Op::Cx, Op::Swap, Op::Ec, Op::Cs(CsDirection::ToRm), Op::Cs(CsDirection::ToSteane)] {
            assert_eq!(Op::from_mnemonic(op.mnemonic()), Some(op));
        }
    }
}
