//! Aaronson–Gottesman stabilizer tableau.

use crate::bits::Bits;
use crate::codes::{CheckType, StabilizerCode};
use crate::pauli::{Pauli, PauliString};
use rand::Rng;

/// Rows `0..n` are destabilizers, `n..2n` stabilizers. Row bits use the standard Pauli
/// convention where `(x, z) = (1, 1)` is `Y`.
#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    x: Vec<Bits>,
    z: Vec<Bits>,
    r: Vec<bool>,
}

fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => (z2 as i32) * (2 * x2 as i32 - 1),
        (false, true) => (x2 as i32) * (1 - 2 * z2 as i32),
    }
}

impl Tableau {
    /// The all-zeros state.
    pub fn new(n: usize) -> Self {
        let mut x = vec![Bits::zeros(n); 2 * n + 1];
        let mut z = vec![Bits::zeros(n); 2 * n + 1];
        for i in 0..n {
            x[i].set(i, true);
            z[n + i].set(i, true);
        }
        Tableau { n, x, z, r: vec![false; 2 * n + 1] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let mut sum = 2 * (self.r[h] as i32) + 2 * (self.r[i] as i32);
        for j in 0..self.n {
            sum += g(self.x[i].get(j), self.z[i].get(j), self.x[h].get(j), self.z[h].get(j));
        }
        self.r[h] = sum.rem_euclid(4) == 2;
        let (xi, zi) = (self.x[i].clone(), self.z[i].clone());
        self.x[h].xor_assign(&xi);
        self.z[h].xor_assign(&zi);
    }

    pub fn cx(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            let (xa, za, xb, zb) = (self.x[i].get(a), self.z[i].get(a), self.x[i].get(b), self.z[i].get(b));
            if xa && zb && (xb == za) {
                self.r[i] ^= true;
            }
            self.x[i].set(b, xb ^ xa);
            self.z[i].set(a, za ^ zb);
        }
    }

    pub fn h(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (self.x[i].get(a), self.z[i].get(a));
            if xa && za {
                self.r[i] ^= true;
            }
            self.x[i].set(a, za);
            self.z[i].set(a, xa);
        }
    }

    pub fn s(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (self.x[i].get(a), self.z[i].get(a));
            if xa && za {
                self.r[i] ^= true;
            }
            self.z[i].set(a, za ^ xa);
        }
    }

    pub fn sdg(&mut self, a: usize) {
        self.s(a);
        self.s(a);
        self.s(a);
    }

    pub fn z_gate(&mut self, a: usize) {
        for i in 0..2 * self.n {
            if self.x[i].get(a) {
                self.r[i] ^= true;
            }
        }
    }

    pub fn x_gate(&mut self, a: usize) {
        for i in 0..2 * self.n {
            if self.z[i].get(a) {
                self.r[i] ^= true;
            }
        }
    }

    /// Applies a Pauli error (sign irrelevant).
    pub fn apply_pauli(&mut self, p: &PauliString) {
        for q in 0..p.n() {
            match p.get(q) {
                Pauli::I => {}
                Pauli::X => self.x_gate(q),
                Pauli::Z => self.z_gate(q),
                Pauli::Y => {
                    self.x_gate(q);
                    self.z_gate(q);
                }
            }
        }
    }

    /// Z-basis measurement; returns the outcome bit.
    pub fn measure<R: Rng + ?Sized>(&mut self, a: usize, rng: &mut R) -> bool {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| self.x[i].get(a)) {
            for i in 0..2 * n {
                if i != p && self.x[i].get(a) {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            self.x[p].clear();
            self.z[p].clear();
            self.z[p].set(a, true);
            let out = rng.gen::<bool>();
            self.r[p] = out;
            out
        } else {
            let s = 2 * n;
            self.x[s].clear();
            self.z[s].clear();
            self.r[s] = false;
            for i in 0..n {
                if self.x[i].get(a) {
                    self.rowsum(s, i + n);
                }
            }
            self.r[s]
        }
    }

    /// Whether a Z measurement of `a` would be deterministic.
    pub fn is_deterministic(&self, a: usize) -> bool {
        !(self.n..2 * self.n).any(|i| self.x[i].get(a))
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, a: usize, rng: &mut R) {
        if self.measure(a, rng) {
            self.x_gate(a);
        }
    }

    /// Expectation of a Hermitian Pauli given in standard convention (bits (1,1) = Y):
    /// `Some(false)` for +1, `Some(true)` for −1, `None` if random.
    pub fn expectation_standard(&self, x: &Bits, z: &Bits) -> Option<bool> {
        let n = self.n;
        for i in n..2 * n {
            // Anticommutation via symplectic product.
            if self.x[i].dot(z) != self.z[i].dot(x) {
                return None;
            }
        }
        let mut t = self.clone();
        let s = 2 * n;
        t.x[s].clear();
        t.z[s].clear();
        t.r[s] = false;
        for i in 0..n {
            // Destabilizer i anticommutes with P iff stabilizer i appears in P's expansion.
            if t.x[i].dot(z) != t.z[i].dot(x) {
                t.rowsum(s, i + n);
            }
        }
        debug_assert_eq!(&t.x[s], x);
        debug_assert_eq!(&t.z[s], z);
        Some(t.r[s])
    }

    /// Expectation of a `PauliString` (X·Z convention); the operator must be Hermitian.
    pub fn expectation(&self, p: &PauliString) -> Option<bool> {
        let ny = p.x_bits().and(p.z_bits()).count_ones();
        assert!(ny % 2 == 0, "non-Hermitian Pauli in X·Z convention");
        // X·Z = -iY on each Y site, so P = sign · (-i)^ny · P_std.
        let extra = (ny / 2) % 2 == 1;
        self.expectation_standard(p.x_bits(), p.z_bits()).map(|v| v ^ extra ^ p.is_negative())
    }

    /// Projectively measures a Pauli (X·Z convention, Hermitian) via an ancilla-free update.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, p: &PauliString, rng: &mut R) -> bool {
        // Conjugate P to Z on its first support qubit with a Clifford, measure, undo.
        let support = p.support();
        let pivot = support[0];
        let mut ops: Vec<(u8, usize, usize)> = Vec::new();
        for &q in &support {
            match p.get(q) {
                Pauli::X => ops.push((0, q, 0)),
                Pauli::Y => {
                    ops.push((1, q, 0));
                    ops.push((0, q, 0));
                }
                _ => {}
            }
        }
        for &q in &support {
            if q != pivot {
                ops.push((2, q, pivot));
            }
        }
        let apply = |t: &mut Tableau, op: &(u8, usize, usize), inverse: bool| match op.0 {
            0 => t.h(op.1),
            1 => {
                if inverse {
                    t.s(op.1)
                } else {
                    t.sdg(op.1)
                }
            }
            _ => t.cx(op.1, op.2),
        };
        for op in &ops {
            apply(self, op, false);
        }
        let ny = p.x_bits().and(p.z_bits()).count_ones();
        let flip = ((ny / 2) % 2 == 1) ^ p.is_negative();
        let out = self.measure(pivot, rng) ^ flip;
        for op in ops.iter().rev() {
            apply(self, op, true);
        }
        out
    }

    /// Projects data qubits `qubits` (starting from |0…0⟩ or |+…+⟩) into the code space
    /// with logical Z = +1 (`plus = false`) or logical X = +1 (`plus = true`).
    pub fn prepare_code_state<R: Rng + ?Sized>(&mut self, code: &StabilizerCode, qubits: &[usize], plus: bool, rng: &mut R) {
        if plus {
            for &q in qubits {
                self.h(q);
            }
        }
        let measured = if plus { CheckType::Z } else { CheckType::X };
        let n = self.n;
        for (i, st) in code.stabilizers.iter().enumerate() {
            if st.kind != measured {
                continue;
            }
            let p = st.pauli(code.n).embed(n, qubits);
            if self.measure_pauli(&p, rng) {
                // An error of the opposite type flipping only stabilizer i.
                let fix_type = if plus { Pauli::X } else { Pauli::Z };
                let singles: Vec<PauliString> = (0..code.n).map(|q| PauliString::single(code.n, q, fix_type)).collect();
                let syn: Vec<Bits> = singles.iter().map(|e| code.syndrome(e)).collect();
                let sel = crate::gf2::solve_combination(&syn, &Bits::from_indices(syn[0].len(), [i])).expect("unit syndrome realizable");
                let mut fix = PauliString::identity(code.n);
                for q in sel.iter_ones() {
                    fix.mul_assign_unchecked(&singles[q]);
                }
                self.apply_pauli(&fix.embed(n, qubits));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{rm_code, steane_code};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_correlations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let mut t = Tableau::new(2);
            t.h(0);
            t.cx(0, 1);
            let a = t.measure(0, &mut rng);
            let b = t.measure(1, &mut rng);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn expectation_of_bell_stabilizers() {
        let mut t = Tableau::new(2);
        t.h(0);
        t.cx(0, 1);
        assert_eq!(t.expectation(&PauliString::parse("XX").unwrap()), Some(false));
        assert_eq!(t.expectation(&PauliString::parse("ZZ").unwrap()), Some(false));
        assert_eq!(t.expectation(&PauliString::parse("ZI").unwrap()), None);
        // YY = -(XZ)(XZ) in X·Z convention; Bell state has YY = -1, so (XZ)(XZ) = +1.
        assert_eq!(t.expectation(&PauliString::parse("YY").unwrap()), Some(false));
    }

    #[test]
    fn s_gate_maps_x_to_y() {
        let mut t = Tableau::new(1);
        t.h(0);
        t.s(0);
        // State |+i>: Y = +1, i.e. X·Z = -iY has standard expectation... check via standard bits.
        let x = Bits::from_indices(1, [0]);
        assert_eq!(t.expectation_standard(&x, &x), Some(false));
        t.sdg(0);
        assert_eq!(t.expectation_standard(&x, &Bits::zeros(1)), Some(false));
    }

    #[test]
    fn code_state_preparation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for code in [steane_code(), rm_code()] {
            for plus in [false, true] {
                let qubits: Vec<usize> = (0..code.n).collect();
                let mut t = Tableau::new(code.n);
                t.prepare_code_state(&code, &qubits, plus, &mut rng);
                for s in code.stabilizer_paulis() {
                    assert_eq!(t.expectation(&s), Some(false));
                }
                let l = if plus { &code.logical_x } else { &code.logical_z };
                assert_eq!(t.expectation(l), Some(false));
            }
        }
    }

    #[test]
    fn measure_pauli_projects() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = Tableau::new(3);
        let p = PauliString::parse("XXX").unwrap();
        let m = t.measure_pauli(&p, &mut rng);
        assert_eq!(t.expectation(&p), Some(m));
    }
}
