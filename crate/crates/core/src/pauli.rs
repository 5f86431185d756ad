//! Pauli operators as X/Z bit-vectors with a ±1 sign.
//!
//! The operator with bits `(x, z)` is `sign · ∏ X^x_i Z^z_i`, with X placed left of Z on
//! each qubit. Products of such operators never acquire imaginary phases, so a ±1 sign
//! tracks them exactly. A qubit with both bits set denotes the product `X·Z` and is
//! rendered as `Y`.

use crate::bits::Bits;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid Pauli character {0:?}")]
    BadChar(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// The three non-identity single-qubit Paulis in fixed order.
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    x: Bits,
    z: Bits,
    negative: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { x: Bits::zeros(n), z: Bits::zeros(n), negative: false }
    }

    pub fn from_bits(x: Bits, z: Bits) -> Result<Self, PauliError> {
        if x.len() != z.len() {
            return Err(PauliError::LengthMismatch(x.len(), z.len()));
        }
        Ok(PauliString { x, z, negative: false })
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    /// X on every qubit in `support`.
    pub fn x_on(n: usize, support: &[usize]) -> Self {
        PauliString { x: Bits::from_indices(n, support.iter().copied()), z: Bits::zeros(n), negative: false }
    }

    /// Z on every qubit in `support`.
    pub fn z_on(n: usize, support: &[usize]) -> Self {
        PauliString { x: Bits::zeros(n), z: Bits::from_indices(n, support.iter().copied()), negative: false }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &Bits {
        &self.x
    }

    pub fn z_bits(&self) -> &Bits {
        &self.z
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn with_sign(mut self, negative: bool) -> Self {
        self.negative = negative;
        self
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn weight(&self) -> usize {
        self.x.or(&self.z).count_ones()
    }

    pub fn support(&self) -> Vec<usize> {
        self.x.or(&self.z).iter_ones().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.x.dot(&other.z) == self.z.dot(&other.x)
    }

    /// Product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString, PauliError> {
        if self.n() != other.n() {
            return Err(PauliError::LengthMismatch(self.n(), other.n()));
        }
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    /// In-place product; `other` must have the same length.
    pub fn mul_assign_unchecked(&mut self, other: &PauliString) {
        // Z^a X^b = (-1)^{a·b} X^b Z^a when moving other's X left past self's Z.
        let swap = self.z.dot(&other.x);
        self.negative ^= other.negative ^ swap;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// Concatenated `x ++ z` symplectic vector, ignoring the sign.
    pub fn symplectic(&self) -> Bits {
        self.x.concat(&self.z)
    }

    /// Restricts to the given qubits, in order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut out = PauliString::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set(i, self.get(q));
        }
        out
    }

    /// Embeds into a larger register, mapping local qubit `i` to `qubits[i]`.
    pub fn embed(&self, n: usize, qubits: &[usize]) -> PauliString {
        let mut out = PauliString::identity(n);
        for (i, &q) in qubits.iter().enumerate() {
            out.set(q, self.get(i));
        }
        out.negative = self.negative;
        out
    }

    pub fn parse(s: &str) -> Result<PauliString, PauliError> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let mut out = PauliString::identity(body.chars().count());
        for (i, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(PauliError::BadChar(other)),
            };
            out.set(i, p);
        }
        out.negative = negative;
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        for q in 0..self.n() {
            let c = match self.get(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

/// Free-function form of the group product.
pub fn apply_pauli(p: &PauliString, q: &PauliString) -> Result<PauliString, PauliError> {
    p.mul(q)
}
