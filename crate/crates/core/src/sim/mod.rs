//! Stabilizer simulation: exact tableau, batched Pauli frames, noise and estimation.

pub mod estimate;
pub mod frame;
pub mod noise;
pub mod tableau;

use crate::bits::Bits;
use crate::circuit::{OpKind, PhysicalCircuit};
use noise::{locations, sample_faults, trial_rng, Channel, NoiseModel};
use tableau::Tableau;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("T/T† outside a transversal-T layer cannot be simulated")]
    NonClifford,
}

/// Outcome of one tableau trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Raw measurement outcomes by record index.
    pub records: Bits,
    /// Outcomes split by measurement group, in record order.
    pub syndromes: Vec<Bits>,
}

/// Runs `circuit` once on a tableau prepared by `init`, with noise sampled from the
/// `(seed, trial)` stream. T/T† act as identity inside transversal-T circuits.
pub fn simulate_with(
    circuit: &PhysicalCircuit,
    noise: NoiseModel,
    seed: u64,
    trial: u64,
    init: &dyn Fn(&mut Tableau, &mut rand_chacha::ChaCha8Rng),
) -> Result<(TrialOutcome, Tableau), SimError> {
    let has_t = circuit.ops.iter().any(|o| matches!(o.kind, OpKind::T | OpKind::Tdg));
    if has_t && !circuit.transversal_t {
        return Err(SimError::NonClifford);
    }
    let locs = locations(circuit);
    let mut rng = trial_rng(seed, trial);
    let mut faults = Vec::new();
    sample_faults(&locs, noise.p(), &mut rng, &mut faults);
    // Measurement randomness uses a separate stream so noise sampling stays aligned
    // with the frame simulator.
    let mut mrng = trial_rng(seed ^ 0x9e37_79b9_7f4a_7c15, trial);
    let mut t = Tableau::new(circuit.n_qubits);
    init(&mut t, &mut mrng);
    let mut records = Bits::zeros(circuit.num_records());
    let mut fi = 0;
    let apply_fault = |t: &mut Tableau, loc: &noise::Location, k: usize| {
        for (q, p) in loc.fault(k) {
            let (x, z) = p.bits();
            if x {
                t.x_gate(q);
            }
            if z {
                t.z_gate(q);
            }
        }
    };
    for (oi, op) in circuit.ops.iter().enumerate() {
        while fi < faults.len() && locs[faults[fi].0].op == oi && matches!(locs[faults[fi].0].channel, Channel::FlipBefore(_)) {
            apply_fault(&mut t, &locs[faults[fi].0], faults[fi].1);
            fi += 1;
        }
        let q = &op.targets;
        if op.is_feedback() {
            let fire = op.condition.iter().fold(false, |a, &r| a ^ records.get(r));
            if fire {
                match op.kind {
                    OpKind::X => t.x_gate(q[0]),
                    OpKind::Z => t.z_gate(q[0]),
                    _ => unreachable!(),
                }
            }
        } else {
            match op.kind {
                OpKind::Reset => t.reset(q[0], &mut mrng),
                OpKind::Measure => {
                    let m = t.measure(q[0], &mut mrng);
                    records.set(op.record.unwrap(), m);
                }
                OpKind::H => t.h(q[0]),
                OpKind::S => t.s(q[0]),
                OpKind::Sdg => t.sdg(q[0]),
                OpKind::X => t.x_gate(q[0]),
                OpKind::Z => t.z_gate(q[0]),
                OpKind::CX => t.cx(q[0], q[1]),
                OpKind::T | OpKind::Tdg | OpKind::Identity => {}
            }
        }
        while fi < faults.len() && locs[faults[fi].0].op == oi {
            apply_fault(&mut t, &locs[faults[fi].0], faults[fi].1);
            fi += 1;
        }
    }
    let groups = circuit.measurements.iter().map(|m| m.group).max().map_or(0, |g| g + 1);
    let syndromes = (0..groups)
        .map(|g| {
            let rs = circuit.records_with(|m| m.group == g);
            Bits::from_bools(&rs.iter().map(|&r| records.get(r)).collect::<Vec<_>>())
        })
        .collect();
    Ok((TrialOutcome { records, syndromes }, t))
}

/// Runs `circuit` from the all-zeros state.
pub fn simulate(circuit: &PhysicalCircuit, noise: NoiseModel, seed: u64) -> Result<TrialOutcome, SimError> {
    simulate_with(circuit, noise, seed, 0, &|_, _| {}).map(|r| r.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, MeasRole};

    #[test]
    fn t_outside_transversal_layer_rejected() {
        let mut b = CircuitBuilder::new(1);
        b.gate(OpKind::T, 0);
        let c = b.finish();
        assert_eq!(simulate(&c, NoiseModel::noiseless(), 0), Err(SimError::NonClifford));
    }

    #[test]
    fn same_seed_same_outcome() {
        let mut b = CircuitBuilder::new(2);
        b.h(0);
        b.cx(0, 1);
        b.measure(0, MeasRole::Data);
        b.measure(1, MeasRole::Data);
        let c = b.finish();
        let n = NoiseModel::new(0.2).unwrap();
        assert_eq!(simulate(&c, n, 11).unwrap(), simulate(&c, n, 11).unwrap());
    }
}
