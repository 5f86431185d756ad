//! Benchmark circuits in the Clifford+T basis.

use crate::program::{LogicalProgram, Op};
use rand::Rng;

/// Standard seven-T decomposition of the Toffoli gate with controls `a`, `b` and
/// target `c`: two H, six CX, seven T/Tdg.
pub fn push_toffoli(p: &mut LogicalProgram, a: usize, b: usize, c: usize) {
    p.push(Op::H, &[c])
        .push(Op::Cx, &[b, c])
        .push(Op::Tdg, &[c])
        .push(Op::Cx, &[a, c])
        .push(Op::T, &[c])
        .push(Op::Cx, &[b, c])
        .push(Op::Tdg, &[c])
        .push(Op::Cx, &[a, c])
        .push(Op::T, &[b])
        .push(Op::T, &[c])
        .push(Op::H, &[c])
        .push(Op::Cx, &[a, b])
        .push(Op::T, &[a])
        .push(Op::Tdg, &[b])
        .push(Op::Cx, &[a, b]);
}

pub fn toffoli() -> LogicalProgram {
    let mut p = LogicalProgram::new(3);
    push_toffoli(&mut p, 0, 1, 2);
    p
}

/// `T q0; T q1; CX q0 q1; T q1`.
pub fn t_cx_t_pattern() -> LogicalProgram {
    let mut p = LogicalProgram::new(2);
    p.push(Op::T, &[0]).push(Op::T, &[1]).push(Op::Cx, &[0, 1]).push(Op::T, &[1]);
    p
}

/// Ripple-carry adder of two `bits`-bit registers on `2·bits + 2` qubits, built
/// from majority and unmajority-add stages.
///
/// Qubit 0 is the carry in, `1 + 2i` holds `b_i`, `2 + 2i` holds `a_i`, and the last
/// qubit receives the carry out. The sum replaces `b`.
pub fn ripple_adder(bits: usize) -> LogicalProgram {
    assert!(bits >= 1);
    let n = 2 * bits + 2;
    let mut p = LogicalProgram::new(n);
    let b = |i: usize| 1 + 2 * i;
    let a = |i: usize| 2 + 2 * i;
    let carry = |i: usize| if i == 0 { 0 } else { a(i - 1) };
    for i in 0..bits {
        let (c, bi, ai) = (carry(i), b(i), a(i));
        p.push(Op::Cx, &[ai, bi]).push(Op::Cx, &[ai, c]);
        push_toffoli(&mut p, c, bi, ai);
    }
    p.push(Op::Cx, &[a(bits - 1), n - 1]);
    for i in (0..bits).rev() {
        let (c, bi, ai) = (carry(i), b(i), a(i));
        push_toffoli(&mut p, c, bi, ai);
        p.push(Op::Cx, &[ai, c]).push(Op::Cx, &[c, bi]);
    }
    p
}

/// Comparator of two `bits`-bit registers on `2·bits + 2` qubits, in the adder's
/// layout: the last qubit is flipped iff `a > b`, every other qubit is restored.
///
/// Majority stages on `a` and the complement of `b` compute the carry of `a + !b`,
/// which is set exactly when `a > b`; the stages are then run in reverse.
pub fn comparator(bits: usize) -> LogicalProgram {
    assert!(bits >= 1);
    let n = 2 * bits + 2;
    let mut p = LogicalProgram::new(n);
    let b = |i: usize| 1 + 2 * i;
    let a = |i: usize| 2 + 2 * i;
    let carry = |i: usize| if i == 0 { 0 } else { a(i - 1) };
    for i in 0..bits {
        p.push(Op::X, &[b(i)]);
    }
    for i in 0..bits {
        let (c, bi, ai) = (carry(i), b(i), a(i));
        p.push(Op::Cx, &[ai, bi]).push(Op::Cx, &[ai, c]);
        push_toffoli(&mut p, c, bi, ai);
    }
    p.push(Op::Cx, &[a(bits - 1), n - 1]);
    for i in (0..bits).rev() {
        let (c, bi, ai) = (carry(i), b(i), a(i));
        push_toffoli(&mut p, c, bi, ai);
        p.push(Op::Cx, &[ai, c]).push(Op::Cx, &[ai, bi]);
    }
    for i in 0..bits {
        p.push(Op::X, &[b(i)]);
    }
    p
}

/// Phase flip conditioned on all of `data`, computed through a Toffoli chain on
/// `ancillas` (needs `data.len() - 2` of them) and uncomputed afterwards.
fn push_multi_controlled_z(p: &mut LogicalProgram, data: &[usize], ancillas: &[usize]) {
    let k = data.len();
    assert!(k >= 3 && ancillas.len() >= k - 2);
    push_toffoli(p, data[0], data[1], ancillas[0]);
    for i in 1..k - 2 {
        push_toffoli(p, ancillas[i - 1], data[i + 1], ancillas[i]);
    }
    let (last, target) = (ancillas[k - 3], data[k - 1]);
    p.push(Op::H, &[target]).push(Op::Cx, &[last, target]).push(Op::H, &[target]);
    for i in (1..k - 2).rev() {
        push_toffoli(p, ancillas[i - 1], data[i + 1], ancillas[i]);
    }
    push_toffoli(p, data[0], data[1], ancillas[0]);
}

/// Grover search over `data_qubits` qubits marking the all-ones item, with the
/// oracle and diffusion phase flips realized as Toffoli chains.
pub fn grover(data_qubits: usize, iterations: usize) -> LogicalProgram {
    assert!(data_qubits >= 3);
    let data: Vec<usize> = (0..data_qubits).collect();
    let ancillas: Vec<usize> = (data_qubits..2 * data_qubits - 2).collect();
    let mut p = LogicalProgram::new(2 * data_qubits - 2);
    for &q in &data {
        p.push(Op::H, &[q]);
    }
    for _ in 0..iterations {
        push_multi_controlled_z(&mut p, &data, &ancillas);
        for &q in &data {
            p.push(Op::H, &[q]).push(Op::X, &[q]);
        }
        push_multi_controlled_z(&mut p, &data, &ancillas);
        for &q in &data {
            p.push(Op::X, &[q]).push(Op::H, &[q]);
        }
    }
    p
}

const RANDOM_GATES: [Op; 8] = [Op::H, Op::S, Op::Sdg, Op::T, Op::Tdg, Op::X, Op::Z, Op::Cx];

/// `gates` gates drawn uniformly from the Clifford+T basis on random qubits.
pub fn random_circuit(n_qubits: usize, gates: usize, rng: &mut impl Rng) -> LogicalProgram {
    assert!(n_qubits >= 2);
    let mut p = LogicalProgram::new(n_qubits);
    for _ in 0..gates {
        let op = RANDOM_GATES[rng.gen_range(0..RANDOM_GATES.len())];
        let a = rng.gen_range(0..n_qubits);
        if op == Op::Cx {
            let b = (a + rng.gen_range(1..n_qubits)) % n_qubits;
            p.push(op, &[a, b]);
        } else {
            p.push(op, &[a]);
        }
    }
    p
}

/// Random circuit in which every T/Tdg is immediately followed by H on its qubit.
pub fn random_t_then_h(n_qubits: usize, gates: usize, rng: &mut impl Rng) -> LogicalProgram {
    let mut p = LogicalProgram::new(n_qubits);
    for instr in random_circuit(n_qubits, gates, rng).instrs {
        let t = instr.op.is_t().then_some(instr.qubits[0]);
        p.instrs.push(instr);
        if let Some(q) = t {
            p.push(Op::H, &[q]);
        }
    }
    p
}
