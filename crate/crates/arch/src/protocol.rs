//! Fault-tolerance benchmarks judged by lookup-table decoding of every code block.
//!
//! A trial fails when some block, after its table correction and an ideal follow-up
//! round, carries a nontrivial logical operator. The table key pairs the syndrome of the
//! block's residual data error with the flag outcomes recorded in the circuit.

use crate::decoder::{build_table, CodeMasks, DecodedBlock, DecoderError, LookupTable, MissPolicy, SmallPauli};
use crate::grid::{BridgeTree, Cell};
use crate::layout::QubitLayout;
use crate::synthesis::{flag_bridge_round, ghz_remote_cx, synth_full_ec};
use qcs_core::circuit::{CircuitBuilder, PhysicalCircuit};
use qcs_core::codes::{code, steane_code, CodeKind};
use qcs_core::sim::estimate::Protocol;
use qcs_core::sim::frame::BatchResult;
use serde::{Deserialize, Serialize};

struct BlockDecoder {
    block: DecodedBlock,
    masks: CodeMasks,
    table: LookupTable,
}

/// A circuit together with one lookup decoder per code block.
pub struct DecodedProtocol {
    circuit: PhysicalCircuit,
    blocks: Vec<BlockDecoder>,
}

impl DecodedProtocol {
    /// Builds every block's table from the single faults of the whole circuit.
    pub fn new(circuit: PhysicalCircuit, blocks: Vec<DecodedBlock>) -> Result<Self, DecoderError> {
        Self::with_miss_policy(circuit, blocks, MissPolicy::default())
    }

    pub fn with_miss_policy(circuit: PhysicalCircuit, blocks: Vec<DecodedBlock>, policy: MissPolicy) -> Result<Self, DecoderError> {
        let blocks = blocks
            .into_iter()
            .map(|block| {
                let table = build_table(&circuit, &block)?.with_miss_policy(policy);
                Ok(BlockDecoder { masks: CodeMasks::new(&code(block.mode)), block, table })
            })
            .collect::<Result<_, DecoderError>>()?;
        Ok(DecodedProtocol { circuit, blocks })
    }

    pub fn table(&self, block: usize) -> &LookupTable {
        &self.blocks[block].table
    }

    /// Table misses summed over blocks since construction.
    pub fn misses(&self) -> u64 {
        self.blocks.iter().map(|b| b.table.misses()).sum()
    }
}

impl Protocol for DecodedProtocol {
    fn circuit(&self) -> &PhysicalCircuit {
        &self.circuit
    }

    fn failed(&self, batch: &BatchResult, lane: u32) -> bool {
        self.blocks.iter().any(|d| {
            let residual = SmallPauli::from_batch(batch, lane, &d.block.data);
            let key = d.block.key(&d.masks, residual, |r| (batch.records[r] >> lane) & 1 == 1);
            d.masks.logical_failure(residual.mul(d.table.decode_key(key)))
        })
    }
}

/// One Steane EC round on the Steane mode of `layout`.
pub fn steane_memory(layout: &QubitLayout) -> Result<DecodedProtocol, DecoderError> {
    let out = synth_full_ec(layout, CodeKind::Steane)?;
    let block = DecodedBlock::from_synth(&out, 0, CodeKind::Steane);
    DecodedProtocol::new(out.circuit, vec![block])
}

/// Design point of the Steane logical CX benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CxConfig {
    /// Flag qubits per stabilizer check.
    pub flags: usize,
    /// Free qubits carrying the GHZ state of each physical CX.
    pub ghz_len: usize,
}

/// Chain of `flags + 1` ancillas with the check's data spread round-robin over it.
fn chain_tree(flags: usize, weight: usize) -> BridgeTree {
    let nodes: Vec<Cell> = (0..=flags as i32).map(|i| Cell::new(i, 0)).collect();
    let parent = (0..nodes.len()).map(|k| k.checked_sub(1)).collect();
    let attach = (0..weight).map(|j| j % nodes.len()).collect();
    BridgeTree { nodes, parent, attach }
}

/// Transversal CX between two Steane blocks, each physical CX mediated by a GHZ chain
/// of `ghz_len` qubits, followed by one flag-bridge EC round per block.
///
/// Every check owns its ancilla chain, so checks overlap wherever their data allow.
pub fn steane_cx_circuit(config: CxConfig) -> (PhysicalCircuit, Vec<DecodedBlock>) {
    let c = steane_code();
    let n = c.n;
    let chain = config.flags + 1;
    let checks = c.stabilizers.len();
    let total = 2 * n + n * config.ghz_len + 2 * checks * chain;
    let mut b = CircuitBuilder::new(total);
    let data: Vec<Vec<usize>> = (0..2).map(|k| (k * n..(k + 1) * n).collect()).collect();
    b.set_persistent(&(0..2 * n).collect::<Vec<_>>());
    for q in 0..n {
        let base = 2 * n + q * config.ghz_len;
        let path: Vec<usize> = (base..base + config.ghz_len).collect();
        ghz_remote_cx(&mut b, data[0][q], data[1][q], &path);
    }
    let mut flags: Vec<Vec<usize>> = vec![Vec::new(); 2];
    for (k, block_data) in data.iter().enumerate() {
        for (i, s) in c.stabilizers.iter().enumerate() {
            let base = 2 * n + n * config.ghz_len + (k * checks + i) * chain;
            let nodes: Vec<usize> = (base..base + chain).collect();
            let tree = chain_tree(config.flags, s.support.len());
            let support: Vec<usize> = s.support.iter().map(|&q| block_data[q]).collect();
            let (_, f) = flag_bridge_round(&mut b, &tree, &nodes, &support, s.kind, i);
            flags[k].extend(f);
        }
    }
    let blocks = data.into_iter().zip(flags).map(|(data, flag_records)| DecodedBlock { mode: CodeKind::Steane, data, flag_records }).collect();
    (b.finish(), blocks)
}

pub fn steane_cx(config: CxConfig) -> Result<DecodedProtocol, DecoderError> {
    let (circuit, blocks) = steane_cx_circuit(config);
    DecodedProtocol::new(circuit, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{build_layout, Scheme};
    use qcs_core::sim::estimate::logical_error_rate;
    use qcs_core::sim::noise::NoiseModel;
    use qcs_core::sim::tableau::Tableau;
    use qcs_core::PauliString;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_protocols_never_fail() {
        let layout = build_layout(Scheme::Oecf).unwrap().0;
        let mem = steane_memory(&layout).unwrap();
        assert_eq!(logical_error_rate(&mem, NoiseModel::noiseless(), 256, 1).failures, 0);
        let cx = steane_cx(CxConfig { flags: 1, ghz_len: 2 }).unwrap();
        assert_eq!(logical_error_rate(&cx, NoiseModel::noiseless(), 256, 1).failures, 0);
    }

    #[test]
    fn every_design_point_is_single_fault_tolerant() {
        for flags in 1..=3 {
            for ghz_len in 0..=4 {
                let p = steane_cx(CxConfig { flags, ghz_len }).unwrap();
                let (circuit, blocks) = steane_cx_circuit(CxConfig { flags, ghz_len });
                for (k, block) in blocks.iter().enumerate() {
                    let (bad, _) = crate::decoder::single_fault_failures(&circuit, block, p.table(k));
                    assert_eq!(bad, 0, "flags {flags} ghz {ghz_len} block {k}");
                }
            }
        }
    }

    #[test]
    fn cx_circuit_acts_as_logical_cx() {
        let c = steane_code();
        let (circuit, _) = steane_cx_circuit(CxConfig { flags: 2, ghz_len: 3 });
        // |+>_L |0>_L becomes a logical Bell pair with XX and ZZ stabilizers.
        let a: Vec<usize> = (0..7).collect();
        let bq: Vec<usize> = (7..14).collect();
        let init = |t: &mut Tableau, rng: &mut ChaCha8Rng| {
            t.prepare_code_state(&c, &a, true, rng);
            t.prepare_code_state(&c, &bq, false, rng);
        };
        let (_, t) = qcs_core::sim::simulate_with(&circuit, NoiseModel::noiseless(), 3, 0, &init).unwrap();
        let logical = |p: &PauliString, shift: usize| p.embed(circuit.n_qubits, &(shift..shift + 7).collect::<Vec<_>>());
        let xx = logical(&c.logical_x, 0).mul(&logical(&c.logical_x, 7)).unwrap();
        let zz = logical(&c.logical_z, 0).mul(&logical(&c.logical_z, 7)).unwrap();
        assert_eq!(t.expectation(&xx), Some(false));
        assert_eq!(t.expectation(&zz), Some(false));
        let z_a = logical(&c.logical_z, 0);
        assert_eq!(t.expectation(&z_a), None);
    }

    #[test]
    fn more_flags_mean_more_locations() {
        let locs = |flags| steane_cx_circuit(CxConfig { flags, ghz_len: 0 }).0.location_count().total();
        assert!(locs(1) < locs(2) && locs(2) < locs(3));
    }
}
