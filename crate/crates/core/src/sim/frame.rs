//! Pauli-frame propagation, 64 trials per machine word.

use super::noise::{locations, Channel, Location};
use crate::bits::Bits;
use crate::circuit::{OpKind, PhysicalCircuit};
use crate::pauli::{Pauli, PauliString};

/// Fault injected into one lane: (lane, location index, fault index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LaneFault {
    pub loc: usize,
    pub lane: u32,
    pub fault: u16,
}

/// Frame words after a batch: bit `l` of each word belongs to lane `l`.
#[derive(Debug, Clone)]
pub struct BatchResult {
    pub records: Vec<u64>,
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl BatchResult {
    pub fn record_bits(&self, lane: u32) -> Bits {
        let mut b = Bits::zeros(self.records.len());
        for (i, w) in self.records.iter().enumerate() {
            if (w >> lane) & 1 == 1 {
                b.set(i, true);
            }
        }
        b
    }

    /// Final frame of `lane` restricted to `qubits`.
    pub fn frame(&self, lane: u32, qubits: &[usize]) -> PauliString {
        let mut p = PauliString::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            p.set(i, Pauli::from_bits((self.x[q] >> lane) & 1 == 1, (self.z[q] >> lane) & 1 == 1));
        }
        p
    }
}

#[derive(Debug, Clone)]
pub struct FrameSimulator<'c> {
    circuit: &'c PhysicalCircuit,
    locs: Vec<Location>,
}

impl<'c> FrameSimulator<'c> {
    pub fn new(circuit: &'c PhysicalCircuit) -> Self {
        FrameSimulator { circuit, locs: locations(circuit) }
    }

    pub fn locations(&self) -> &[Location] {
        &self.locs
    }

    pub fn circuit(&self) -> &PhysicalCircuit {
        self.circuit
    }

    /// Propagates up to 64 lanes of faults; `faults` must be sorted by `loc`.
    pub fn run(&self, faults: &[LaneFault]) -> BatchResult {
        let c = self.circuit;
        let mut x = vec![0u64; c.n_qubits];
        let mut z = vec![0u64; c.n_qubits];
        let mut records = vec![0u64; c.num_records()];
        let Some(first) = faults.first() else {
            return BatchResult { records, x, z };
        };
        debug_assert!(faults.windows(2).all(|w| w[0].loc <= w[1].loc));
        let mut fi = 0;
        let inject = |x: &mut [u64], z: &mut [u64], loc: &Location, f: &LaneFault| {
            let bit = 1u64 << f.lane;
            for (q, p) in loc.fault(f.fault as usize) {
                let (bx, bz) = p.bits();
                if bx {
                    x[q] ^= bit;
                }
                if bz {
                    z[q] ^= bit;
                }
            }
        };
        let start_op = self.locs[first.loc].op;
        for (oi, op) in c.ops.iter().enumerate().skip(start_op) {
            // Faults placed before this op (measurement flips).
            while fi < faults.len() {
                let loc = &self.locs[faults[fi].loc];
                if loc.op == oi && matches!(loc.channel, Channel::FlipBefore(_)) {
                    inject(&mut x, &mut z, loc, &faults[fi]);
                    fi += 1;
                } else {
                    break;
                }
            }
            let t = &op.targets;
            if op.is_feedback() {
                let mask = op.condition.iter().fold(0u64, |m, &r| m ^ records[r]);
                match op.kind {
                    OpKind::X => x[t[0]] ^= mask,
                    OpKind::Z => z[t[0]] ^= mask,
                    _ => unreachable!("feedback is X or Z"),
                }
            } else {
                match op.kind {
                    OpKind::CX => {
                        x[t[1]] ^= x[t[0]];
                        z[t[0]] ^= z[t[1]];
                    }
                    OpKind::H => std::mem::swap(&mut x[t[0]], &mut z[t[0]]),
                    OpKind::S | OpKind::Sdg => z[t[0]] ^= x[t[0]],
                    OpKind::Reset => {
                        x[t[0]] = 0;
                        z[t[0]] = 0;
                    }
                    OpKind::Measure => records[op.record.expect("measure has record")] = x[t[0]],
                    OpKind::T | OpKind::Tdg | OpKind::X | OpKind::Z | OpKind::Identity => {}
                }
            }
            while fi < faults.len() {
                let loc = &self.locs[faults[fi].loc];
                if loc.op == oi {
                    inject(&mut x, &mut z, loc, &faults[fi]);
                    fi += 1;
                } else {
                    break;
                }
            }
        }
        BatchResult { records, x, z }
    }

    /// Propagates a single fault, returning (record flips, final frame on all qubits).
    pub fn propagate_single(&self, loc: usize, fault: usize) -> (Bits, PauliString) {
        let r = self.run(&[LaneFault { loc, lane: 0, fault: fault as u16 }]);
        let all: Vec<usize> = (0..self.circuit.n_qubits).collect();
        (r.record_bits(0), r.frame(0, &all))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, MeasRole};

    #[test]
    fn x_error_propagates_through_cx_to_measurement() {
        let mut b = CircuitBuilder::new(2);
        b.set_persistent(&[0]);
        b.reset(1);
        b.gate(OpKind::Identity, 0);
        b.cx(0, 1);
        b.measure(1, MeasRole::Parity { check: 0 });
        let c = b.finish();
        let sim = FrameSimulator::new(&c);
        // Location 1 is the explicit identity on qubit 0; fault 0 is X.
        let li = sim.locations().iter().position(|l| l.channel == Channel::Depolarize1(0)).unwrap();
        let (rec, frame) = sim.propagate_single(li, 0);
        assert!(rec.get(0));
        assert_eq!(frame.get(0), Pauli::X);
        assert_eq!(frame.get(1), Pauli::X);
    }

    #[test]
    fn lanes_are_independent() {
        let mut b = CircuitBuilder::new(2);
        b.set_persistent(&[0, 1]);
        b.gate(OpKind::Identity, 0);
        b.gate(OpKind::Identity, 1);
        b.cx(0, 1);
        b.measure(1, MeasRole::Data);
        let c = b.finish();
        let sim = FrameSimulator::new(&c);
        let l0 = sim.locations().iter().position(|l| l.channel == Channel::Depolarize1(0)).unwrap();
        let l1 = sim.locations().iter().position(|l| l.channel == Channel::Depolarize1(1)).unwrap();
        let mut f = vec![LaneFault { loc: l0, lane: 3, fault: 0 }, LaneFault { loc: l1, lane: 5, fault: 2 }];
        f.sort();
        let r = sim.run(&f);
        assert_eq!(r.records[0], 1 << 3);
        assert_eq!(r.z[0], 1 << 5);
    }

    #[test]
    fn feedback_cancels_flip() {
        let mut b = CircuitBuilder::new(2);
        b.set_persistent(&[1]);
        b.reset(0);
        b.gate(OpKind::Identity, 0);
        let r = b.measure(0, MeasRole::Ghz);
        b.feedback(OpKind::X, 1, vec![r]);
        let c = b.finish();
        let sim = FrameSimulator::new(&c);
        let li = sim.locations().iter().position(|l| l.channel == Channel::Depolarize1(0)).unwrap();
        let (rec, frame) = sim.propagate_single(li, 0);
        assert!(rec.get(0));
        assert_eq!(frame.get(1), Pauli::X);
    }
}
