//! Additive cost model and program evaluation.
//!
//! Infidelity is normalized to one Steane logical CX and latency to one Steane EC
//! round. Every entry already includes the EC round that follows the operation, so
//! explicit `ec` instructions cost nothing.

use crate::program::{LogicalProgram, ModeError, Mode, Op};
use qcs_arch::placement::CouplingGraph;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpCost {
    pub infidelity: f64,
    pub latency: f64,
}

impl OpCost {
    pub const fn new(infidelity: f64, latency: f64) -> Self {
        OpCost { infidelity, latency }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("cost entry `{0}` must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub rm_cx: OpCost,
    pub rm_1q: OpCost,
    pub steane_cx: OpCost,
    pub steane_1q: OpCost,
    pub cs: OpCost,
    /// Steane CX infidelity scale per coupled pair `(min, max)`; absent pairs use 1.0.
    #[serde(default, with = "edge_map")]
    pub edge_multipliers: BTreeMap<(usize, usize), f64>,
}

mod edge_map {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        a: usize,
        b: usize,
        multiplier: f64,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<(usize, usize), f64>, s: S) -> Result<S::Ok, S::Error> {
        map.iter().map(|(&(a, b), &multiplier)| Entry { a, b, multiplier }).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?.into_iter().map(|e| ((e.a.min(e.b), e.a.max(e.b)), e.multiplier)).collect())
    }
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            rm_cx: OpCost::new(8.8, 5.5),
            rm_1q: OpCost::new(2.6, 3.0),
            steane_cx: OpCost::new(1.0, 2.9),
            steane_1q: OpCost::new(0.2, 1.0),
            cs: OpCost::new(4.1, 9.1),
            edge_multipliers: BTreeMap::new(),
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), CostError> {
        let entries = [("rm_cx", self.rm_cx), ("rm_1q", self.rm_1q), ("steane_cx", self.steane_cx), ("steane_1q", self.steane_1q), ("cs", self.cs)];
        for (name, c) in entries {
            if !(c.infidelity > 0.0 && c.latency > 0.0) {
                return Err(CostError::NonPositive(name));
            }
        }
        if self.edge_multipliers.values().any(|&m| !(m > 0.0)) {
            return Err(CostError::NonPositive("edge_multipliers"));
        }
        Ok(())
    }

    /// Merging a CX into an RM segment pays off only if the two switches it saves
    /// outweigh the extra cost of running it on RM.
    pub fn merge_profitable(&self) -> bool {
        2.0 * self.cs.infidelity >= self.rm_cx.infidelity - self.steane_cx.infidelity
    }

    /// Multipliers proportional to each edge's CX infidelity, normalized to mean 1.
    pub fn with_graph(mut self, graph: &CouplingGraph) -> Self {
        let mean = graph.edges.iter().map(|e| e.infidelity).sum::<f64>() / graph.edges.len().max(1) as f64;
        self.edge_multipliers.clear();
        if mean > 0.0 {
            for e in &graph.edges {
                let m = e.infidelity / mean;
                if m > 0.0 {
                    self.edge_multipliers.insert((e.a.min(e.b), e.a.max(e.b)), m);
                }
            }
        }
        self
    }

    fn multiplier(&self, a: usize, b: usize) -> f64 {
        self.edge_multipliers.get(&(a.min(b), a.max(b))).copied().unwrap_or(1.0)
    }

    /// Cost of one instruction executed in `mode`.
    pub fn op_cost(&self, op: Op, qubits: &[usize], mode: Mode) -> OpCost {
        let steane_cx = |c: OpCost| OpCost::new(c.infidelity * self.multiplier(qubits[0], qubits[1]), c.latency);
        match (op, mode) {
            (Op::Ec, _) => OpCost::new(0.0, 0.0),
            (Op::Cs(_), _) => self.cs,
            (Op::Cx, Mode::Rm) => self.rm_cx,
            (Op::Cx, Mode::Steane) => steane_cx(self.steane_cx),
            (Op::Swap, mode) => {
                let c = if mode == Mode::Rm { self.rm_cx } else { steane_cx(self.steane_cx) };
                OpCost::new(3.0 * c.infidelity, 3.0 * c.latency)
            }
            (_, Mode::Rm) => self.rm_1q,
            (_, Mode::Steane) => self.steane_1q,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub cs_count: usize,
    pub swap_count: usize,
    /// Sum of per-operation infidelities.
    pub infidelity_norm: f64,
    /// Sum of per-operation latencies, every operation run back to back.
    pub latency_norm: f64,
    /// Longest chain through the per-qubit timelines.
    pub critical_path_norm: f64,
    /// Physical qubits times `latency_norm`.
    pub space_time: f64,
    /// Instruction count per mnemonic, with RM-mode gates prefixed `rm_`.
    pub per_op_histogram: BTreeMap<String, usize>,
}

/// Costs a mode-valid program on `physical_qubits` physical qubits.
pub fn evaluate(program: &LogicalProgram, cost: &CostModel, physical_qubits: usize) -> Result<Report, ModeError> {
    let modes = program.validate_modes()?;
    let mut infidelity = 0.0;
    let mut latency = 0.0;
    let mut ready = vec![0.0f64; program.n_qubits];
    let mut histogram = BTreeMap::new();
    for (instr, &mode) in program.instrs.iter().zip(&modes) {
        let c = cost.op_cost(instr.op, &instr.qubits, mode);
        infidelity += c.infidelity;
        latency += c.latency;
        let start = instr.qubits.iter().map(|&q| ready[q]).fold(0.0, f64::max);
        for &q in &instr.qubits {
            ready[q] = start + c.latency;
        }
        let name = match (instr.op, mode) {
            (op, Mode::Rm) if !op.is_annotation() => format!("rm_{}", op.mnemonic()),
            (op, _) => op.mnemonic().to_string(),
        };
        *histogram.entry(name).or_insert(0) += 1;
    }
    Ok(Report {
        cs_count: program.cs_count(),
        swap_count: program.swap_count(),
        infidelity_norm: infidelity,
        latency_norm: latency,
        critical_path_norm: ready.into_iter().fold(0.0, f64::max),
        space_time: physical_qubits as f64 * latency,
        per_op_histogram: histogram,
    })
}
