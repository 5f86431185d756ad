//! Circuit-level noise: locations and per-trial fault sampling.

use crate::circuit::{OpKind, PhysicalCircuit};
use crate::pauli::Pauli;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("physical error rate {0} outside [0, 1]")]
pub struct NoiseError(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    p: f64,
}

impl NoiseModel {
    pub fn new(p: f64) -> Result<Self, NoiseError> {
        if (0.0..=1.0).contains(&p) {
            Ok(NoiseModel { p })
        } else {
            Err(NoiseError(p))
        }
    }

    pub fn noiseless() -> Self {
        NoiseModel { p: 0.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Uniform X/Y/Z after a single-qubit gate.
    Depolarize1(usize),
    /// Uniform over the 15 nontrivial Paulis after a CX.
    Depolarize2(usize, usize),
    /// X before a measurement.
    FlipBefore(usize),
    /// X after a reset.
    FlipAfter(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub op: usize,
    pub channel: Channel,
}

impl Location {
    /// Number of distinct nontrivial faults at this location.
    pub fn fault_count(&self) -> usize {
        match self.channel {
            Channel::Depolarize1(_) => 3,
            Channel::Depolarize2(..) => 15,
            _ => 1,
        }
    }

    /// The `k`-th fault as (qubit, Pauli) pairs.
    pub fn fault(&self, k: usize) -> Vec<(usize, Pauli)> {
        const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        match self.channel {
            Channel::Depolarize1(q) => vec![(q, P[k + 1])],
            Channel::Depolarize2(a, b) => {
                let code = k + 1;
                vec![(a, P[code / 4]), (b, P[code % 4])]
            }
            Channel::FlipBefore(q) | Channel::FlipAfter(q) => vec![(q, Pauli::X)],
        }
    }
}

/// All noisy locations in op order.
pub fn locations(circuit: &PhysicalCircuit) -> Vec<Location> {
    circuit
        .ops
        .iter()
        .enumerate()
        .filter(|(_, o)| o.is_noisy())
        .map(|(i, o)| {
            let channel = match o.kind {
                OpKind::CX => Channel::Depolarize2(o.targets[0], o.targets[1]),
                OpKind::Measure => Channel::FlipBefore(o.targets[0]),
                OpKind::Reset => Channel::FlipAfter(o.targets[0]),
                _ => Channel::Depolarize1(o.targets[0]),
            };
            Location { op: i, channel }
        })
        .collect()
}

/// A sampled fault: location index and fault index within it.
pub type Fault = (usize, usize);

/// Per-trial random stream derived from `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Samples the faults of one trial by geometric skipping over locations.
pub fn sample_faults(locs: &[Location], p: f64, rng: &mut impl Rng, out: &mut Vec<Fault>) {
    out.clear();
    if p <= 0.0 || locs.is_empty() {
        return;
    }
    if p >= 1.0 {
        for (i, l) in locs.iter().enumerate() {
            out.push((i, rng.gen_range(0..l.fault_count())));
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut i: usize = 0;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let skip = (u.ln() / log_q).floor();
        if !skip.is_finite() || skip >= (locs.len() - i) as f64 {
            break;
        }
        i += skip as usize;
        out.push((i, rng.gen_range(0..locs[i].fault_count())));
        i += 1;
        if i >= locs.len() {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, MeasRole};

    #[test]
    fn location_audit_matches_op_counts() {
        let mut b = CircuitBuilder::new(3);
        b.set_persistent(&[0, 1]);
        b.reset(2);
        b.h(2);
        b.cx(2, 0);
        b.cx(1, 2);
        let r = b.measure(2, MeasRole::Ghz);
        b.feedback(OpKind::Z, 0, vec![r]);
        let c = b.finish();
        let locs = locations(&c);
        assert_eq!(locs.len(), c.location_count().total());
    }

    #[test]
    fn two_qubit_faults_enumerate_fifteen_distinct() {
        let l = Location { op: 0, channel: Channel::Depolarize2(0, 1) };
        let mut seen = std::collections::BTreeSet::new();
        for k in 0..15 {
            let f = l.fault(k);
            assert!(f.iter().any(|(_, p)| *p != Pauli::I));
            seen.insert(f);
        }
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn sampled_rate_matches_p() {
        let locs: Vec<Location> = (0..1000).map(|q| Location { op: q, channel: Channel::Depolarize1(0) }).collect();
        let mut out = Vec::new();
        let mut total = 0;
        for t in 0..200 {
            sample_faults(&locs, 0.01, &mut trial_rng(5, t), &mut out);
            total += out.len();
        }
        let mean = total as f64 / 200.0;
        assert!((mean - 10.0).abs() < 1.0, "mean faults {mean}");
    }
}
