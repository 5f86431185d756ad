//! Timed physical circuits, a greedy list scheduler, and a line-oriented text format.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    Reset,
    Measure,
    H,
    S,
    Sdg,
    T,
    Tdg,
    X,
    Z,
    Identity,
    CX,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Reset => "R",
            OpKind::Measure => "M",
            OpKind::H => "H",
            OpKind::S => "S",
            OpKind::Sdg => "SDG",
            OpKind::T => "T",
            OpKind::Tdg => "TDG",
            OpKind::X => "X",
            OpKind::Z => "Z",
            OpKind::Identity => "I",
            OpKind::CX => "CX",
        }
    }

    pub fn from_name(s: &str) -> Option<OpKind> {
        Some(match s {
            "R" => OpKind::Reset,
            "M" => OpKind::Measure,
            "H" => OpKind::H,
            "S" => OpKind::S,
            "SDG" => OpKind::Sdg,
            "T" => OpKind::T,
            "TDG" => OpKind::Tdg,
            "X" => OpKind::X,
            "Z" => OpKind::Z,
            "I" => OpKind::Identity,
            "CX" => OpKind::CX,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        if self == OpKind::CX {
            2
        } else {
            1
        }
    }

    pub fn is_single_qubit_gate(self) -> bool {
        !matches!(self, OpKind::Reset | OpKind::Measure | OpKind::CX)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasRole {
    Parity { check: usize },
    Flag { check: usize, slot: usize },
    Ghz,
    Data,
    Connector,
}

impl MeasRole {
    fn to_text(&self) -> String {
        match self {
            MeasRole::Parity { check } => format!("parity {check}"),
            MeasRole::Flag { check, slot } => format!("flag {check} {slot}"),
            MeasRole::Ghz => "ghz".into(),
            MeasRole::Data => "data".into(),
            MeasRole::Connector => "connector".into(),
        }
    }

    fn from_text(s: &str) -> Option<MeasRole> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        Some(match parts.as_slice() {
            ["parity", c] => MeasRole::Parity { check: c.parse().ok()? },
            ["flag", c, k] => MeasRole::Flag { check: c.parse().ok()?, slot: k.parse().ok()? },
            ["ghz"] => MeasRole::Ghz,
            ["data"] => MeasRole::Data,
            ["connector"] => MeasRole::Connector,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalOp {
    pub kind: OpKind,
    pub targets: Vec<usize>,
    pub time_step: usize,
    /// Measurement record written by a `Measure`.
    pub record: Option<usize>,
    /// Nonempty for a classically controlled Pauli: applied iff the XOR of these records is 1.
    pub condition: Vec<usize>,
}

impl PhysicalOp {
    pub fn is_feedback(&self) -> bool {
        !self.condition.is_empty()
    }

    /// Whether the noise model attaches a channel to this op.
    pub fn is_noisy(&self) -> bool {
        !self.is_feedback()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasInfo {
    pub qubit: usize,
    pub role: MeasRole,
    /// Caller-defined group, e.g. the EC round the measurement belongs to.
    pub group: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("qubit {qubit} used twice in time step {step}")]
    QubitConflict { qubit: usize, step: usize },
    #[error("CX on non-adjacent cells {a:?} and {b:?}")]
    NotAdjacent { a: (i32, i32), b: (i32, i32) },
    #[error("CX needs two distinct targets")]
    BadCx,
    #[error("time steps not contiguous at {0}")]
    Gap(usize),
    #[error("qubit index {0} out of range")]
    QubitRange(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCircuit {
    pub n_qubits: usize,
    /// Sorted by `time_step`.
    pub ops: Vec<PhysicalOp>,
    pub measurements: Vec<MeasInfo>,
    /// Grid cell of each qubit, when the circuit is bound to a layout.
    pub cells: Option<Vec<(i32, i32)>>,
    /// Marks a circuit whose T/T† ops form a transversal layer on an encoded block.
    pub transversal_t: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationCount {
    pub single_qubit: usize,
    pub cx: usize,
    pub measure: usize,
    pub reset: usize,
}

impl LocationCount {
    pub fn total(&self) -> usize {
        self.single_qubit + self.cx + self.measure + self.reset
    }
}

impl PhysicalCircuit {
    pub fn num_steps(&self) -> usize {
        self.ops.last().map_or(0, |o| o.time_step + 1)
    }

    /// Number of time steps containing at least one CX.
    pub fn latency(&self) -> usize {
        self.ops.iter().filter(|o| o.kind == OpKind::CX).map(|o| o.time_step).collect::<BTreeSet<_>>().len()
    }

    pub fn cx_count(&self) -> usize {
        self.count(OpKind::CX)
    }

    pub fn count(&self, kind: OpKind) -> usize {
        self.ops.iter().filter(|o| o.kind == kind && !o.is_feedback()).count()
    }

    pub fn num_records(&self) -> usize {
        self.measurements.len()
    }

    pub fn location_count(&self) -> LocationCount {
        let mut c = LocationCount::default();
        for o in self.ops.iter().filter(|o| o.is_noisy()) {
            match o.kind {
                OpKind::CX => c.cx += 1,
                OpKind::Measure => c.measure += 1,
                OpKind::Reset => c.reset += 1,
                _ => c.single_qubit += 1,
            }
        }
        c
    }

    pub fn records_with(&self, pred: impl Fn(&MeasInfo) -> bool) -> Vec<usize> {
        (0..self.measurements.len()).filter(|&r| pred(&self.measurements[r])).collect()
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut last = 0usize;
        for o in &self.ops {
            if o.time_step > last + 1 {
                return Err(CircuitError::Gap(last + 1));
            }
            last = last.max(o.time_step);
            if o.kind == OpKind::CX && (o.targets.len() != 2 || o.targets[0] == o.targets[1]) {
                return Err(CircuitError::BadCx);
            }
            for &q in &o.targets {
                if q >= self.n_qubits {
                    return Err(CircuitError::QubitRange(q));
                }
                if !used.insert((o.time_step, q)) {
                    return Err(CircuitError::QubitConflict { qubit: q, step: o.time_step });
                }
            }
            if let (OpKind::CX, Some(cells)) = (o.kind, &self.cells) {
                let (a, b) = (cells[o.targets[0]], cells[o.targets[1]]);
                if (a.0 - b.0).abs() + (a.1 - b.1).abs() != 1 {
                    return Err(CircuitError::NotAdjacent { a, b });
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "QUBITS {}", self.n_qubits);
        if self.transversal_t {
            let _ = writeln!(s, "TRANSVERSAL_T");
        }
        if let Some(cells) = &self.cells {
            for (q, c) in cells.iter().enumerate() {
                let _ = writeln!(s, "CELL {q} {} {}", c.0, c.1);
            }
        }
        let mut step = 0;
        for o in &self.ops {
            while step < o.time_step {
                let _ = writeln!(s, "TICK");
                step += 1;
            }
            let qs: Vec<String> = o.targets.iter().map(|q| q.to_string()).collect();
            let _ = write!(s, "{} {}", o.kind.name(), qs.join(" "));
            if let Some(r) = o.record {
                let m = &self.measurements[r];
                let _ = write!(s, " @{r} g{} # role: {}", m.group, m.role.to_text());
            }
            if o.is_feedback() {
                let cs: Vec<String> = o.condition.iter().map(|r| r.to_string()).collect();
                let _ = write!(s, " if {}", cs.join(" "));
            }
            let _ = writeln!(s);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PhysicalCircuit, CircuitError> {
        let err = |line: usize, msg: &str| CircuitError::Parse { line: line + 1, msg: msg.to_string() };
        let mut n_qubits = None;
        let mut cells: Vec<(i32, i32)> = Vec::new();
        let mut transversal_t = false;
        let mut ops = Vec::new();
        let mut meas: Vec<Option<MeasInfo>> = Vec::new();
        let mut step = 0;
        for (ln, raw) in text.lines().enumerate() {
            let (body, comment) = match raw.split_once('#') {
                Some((b, c)) => (b.trim(), Some(c.trim())),
                None => (raw.trim(), None),
            };
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            match toks[0] {
                "QUBITS" => n_qubits = Some(toks.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| err(ln, "bad QUBITS"))?),
                "TRANSVERSAL_T" => transversal_t = true,
                "CELL" => {
                    let v: Vec<i32> = toks[1..].iter().filter_map(|t| t.parse().ok()).collect();
                    if v.len() != 3 || v[0] as usize != cells.len() {
                        return Err(err(ln, "bad CELL"));
                    }
                    cells.push((v[1], v[2]));
                }
                "TICK" => step += 1,
                name => {
                    let kind = OpKind::from_name(name).ok_or_else(|| err(ln, "unknown op"))?;
                    let mut targets = Vec::new();
                    let mut record = None;
                    let mut group = 0;
                    let mut condition = Vec::new();
                    let mut in_cond = false;
                    for t in &toks[1..] {
                        if *t == "if" {
                            in_cond = true;
                        } else if let Some(r) = t.strip_prefix('@') {
                            record = Some(r.parse::<usize>().map_err(|_| err(ln, "bad record"))?);
                        } else if let Some(g) = t.strip_prefix('g') {
                            group = g.parse().map_err(|_| err(ln, "bad group"))?;
                        } else {
                            let v: usize = t.parse().map_err(|_| err(ln, "bad integer"))?;
                            if in_cond {
                                condition.push(v);
                            } else {
                                targets.push(v);
                            }
                        }
                    }
                    if let Some(r) = record {
                        let role = comment
                            .and_then(|c| c.strip_prefix("role:"))
                            .and_then(|c| MeasRole::from_text(c.trim()))
                            .ok_or_else(|| err(ln, "missing role"))?;
                        if meas.len() <= r {
                            meas.resize(r + 1, None);
                        }
                        meas[r] = Some(MeasInfo { qubit: targets[0], role, group });
                    }
                    ops.push(PhysicalOp { kind, targets, time_step: step, record, condition });
                }
            }
        }
        let measurements = meas.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| err(0, "missing record"))?;
        Ok(PhysicalCircuit {
            n_qubits: n_qubits.ok_or_else(|| err(0, "missing QUBITS"))?,
            ops,
            measurements,
            cells: if cells.is_empty() { None } else { Some(cells) },
            transversal_t,
        })
    }
}

/// Greedy as-soon-as-possible list scheduler.
///
/// Each op is placed at the earliest step after every earlier op on its qubits (and after
/// the measurements it is conditioned on). `finish` compacts steps and fills idle live
/// qubits with `Identity`.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    n_qubits: usize,
    ops: Vec<PhysicalOp>,
    ready: Vec<usize>,
    meas: Vec<MeasInfo>,
    meas_step: Vec<usize>,
    persistent: Vec<bool>,
    cells: Option<Vec<(i32, i32)>>,
    group: usize,
    transversal_t: bool,
    idle_fill: bool,
}

impl CircuitBuilder {
    pub fn new(n_qubits: usize) -> Self {
        CircuitBuilder {
            n_qubits,
            ops: Vec::new(),
            ready: vec![0; n_qubits],
            meas: Vec::new(),
            meas_step: Vec::new(),
            persistent: vec![false; n_qubits],
            cells: None,
            group: 0,
            transversal_t: false,
            idle_fill: true,
        }
    }

    pub fn with_cells(mut self, cells: Vec<(i32, i32)>) -> Self {
        assert_eq!(cells.len(), self.n_qubits);
        self.cells = Some(cells);
        self
    }

    pub fn without_idle_fill(mut self) -> Self {
        self.idle_fill = false;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Appends a qubit at `cell`; every qubit of a cell-bound builder needs one.
    pub fn add_qubit(&mut self, cell: (i32, i32)) -> usize {
        let q = self.n_qubits;
        self.n_qubits += 1;
        self.ready.push(0);
        self.persistent.push(false);
        self.cells.get_or_insert_with(Vec::new).push(cell);
        assert_eq!(self.cells.as_ref().unwrap().len(), self.n_qubits, "mixing cell-bound and unbound qubits");
        q
    }

    /// Marks qubits that hold encoded state for the whole circuit.
    pub fn set_persistent(&mut self, qubits: &[usize]) {
        for &q in qubits {
            self.persistent[q] = true;
        }
    }

    pub fn set_group(&mut self, g: usize) {
        self.group = g;
    }

    pub fn group(&self) -> usize {
        self.group
    }

    pub fn mark_transversal_t(&mut self) {
        self.transversal_t = true;
    }

    fn place(&mut self, kind: OpKind, targets: Vec<usize>, record: Option<usize>, condition: Vec<usize>) -> usize {
        let mut step = targets.iter().map(|&q| self.ready[q]).max().unwrap_or(0);
        for &r in &condition {
            step = step.max(self.meas_step[r] + 1);
        }
        for &q in &targets {
            self.ready[q] = step + 1;
        }
        self.ops.push(PhysicalOp { kind, targets, time_step: step, record, condition });
        step
    }

    pub fn gate(&mut self, kind: OpKind, q: usize) {
        debug_assert!(kind.is_single_qubit_gate() || kind == OpKind::Reset);
        self.place(kind, vec![q], None, vec![]);
    }

    pub fn reset(&mut self, q: usize) {
        self.place(OpKind::Reset, vec![q], None, vec![]);
    }

    pub fn h(&mut self, q: usize) {
        self.gate(OpKind::H, q);
    }

    pub fn cx(&mut self, control: usize, target: usize) {
        self.place(OpKind::CX, vec![control, target], None, vec![]);
    }

    /// Z-basis measurement; returns its record index.
    pub fn measure(&mut self, q: usize, role: MeasRole) -> usize {
        let r = self.meas.len();
        self.meas.push(MeasInfo { qubit: q, role, group: self.group });
        let step = self.place(OpKind::Measure, vec![q], Some(r), vec![]);
        self.meas_step.push(step);
        r
    }

    /// Classically controlled X or Z on `q`, applied iff the XOR of `condition` is 1.
    pub fn feedback(&mut self, kind: OpKind, q: usize, condition: Vec<usize>) {
        assert!(matches!(kind, OpKind::X | OpKind::Z));
        if condition.is_empty() {
            return;
        }
        self.place(kind, vec![q], None, condition);
    }

    /// Forces every listed qubit to start its next op no earlier than any of them.
    pub fn barrier(&mut self, qubits: &[usize]) {
        let t = qubits.iter().map(|&q| self.ready[q]).max().unwrap_or(0);
        for &q in qubits {
            self.ready[q] = t;
        }
    }

    /// Earliest free step of a qubit.
    pub fn ready_at(&self, q: usize) -> usize {
        self.ready[q]
    }

    pub fn num_records(&self) -> usize {
        self.meas.len()
    }

    pub fn finish(self) -> PhysicalCircuit {
        let CircuitBuilder { n_qubits, mut ops, meas, persistent, cells, transversal_t, idle_fill, .. } = self;
        // Compact to contiguous steps.
        let used: BTreeSet<usize> = ops.iter().map(|o| o.time_step).collect();
        let remap: std::collections::BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        for o in ops.iter_mut() {
            o.time_step = remap[&o.time_step];
        }
        let n_steps = used.len();
        if idle_fill && n_steps > 0 {
            let mut busy = vec![vec![false; n_steps]; n_qubits];
            let mut per_qubit: Vec<Vec<(usize, OpKind)>> = vec![Vec::new(); n_qubits];
            for o in &ops {
                for &q in &o.targets {
                    busy[q][o.time_step] = true;
                    if !o.is_feedback() {
                        per_qubit[q].push((o.time_step, o.kind));
                    }
                }
            }
            for q in 0..n_qubits {
                per_qubit[q].sort();
                let mut live = vec![false; n_steps];
                if persistent[q] {
                    live.iter_mut().for_each(|l| *l = true);
                } else {
                    let mut start: Option<usize> = None;
                    for &(t, k) in &per_qubit[q] {
                        if start.is_none() {
                            start = Some(t);
                        }
                        if k == OpKind::Measure {
                            let s = start.take().unwrap();
                            live[s..=t].iter_mut().for_each(|l| *l = true);
                        }
                    }
                    if let Some(s) = start {
                        let end = per_qubit[q].last().unwrap().0;
                        live[s..=end].iter_mut().for_each(|l| *l = true);
                    }
                }
                for t in 0..n_steps {
                    if live[t] && !busy[q][t] {
                        ops.push(PhysicalOp { kind: OpKind::Identity, targets: vec![q], time_step: t, record: None, condition: vec![] });
                    }
                }
            }
        }
        ops.sort_by_key(|o| o.time_step);
        PhysicalCircuit { n_qubits, ops, measurements: meas, cells, transversal_t }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PhysicalCircuit {
        let mut b = CircuitBuilder::new(4).with_cells(vec![(0, 0), (1, 0), (2, 0), (3, 0)]);
        b.set_persistent(&[0, 1]);
        b.reset(2);
        b.reset(3);
        b.cx(1, 2);
        b.cx(0, 1);
        b.cx(2, 3);
        b.h(3);
        let r = b.measure(3, MeasRole::Flag { check: 0, slot: 0 });
        b.feedback(OpKind::X, 0, vec![r]);
        b.measure(2, MeasRole::Parity { check: 0 });
        b.finish()
    }

    #[test]
    fn asap_schedule_and_latency() {
        let c = sample();
        c.validate().unwrap();
        // cx(1,2) at 1, cx(0,1) waits for qubit 1 -> 2, cx(2,3) at 2.
        assert_eq!(c.latency(), 2);
        assert_eq!(c.cx_count(), 3);
    }

    #[test]
    fn idle_identity_on_live_qubits() {
        let c = sample();
        // Qubit 0 is persistent and idle at steps 0 and 1.
        let idle0: Vec<usize> = c.ops.iter().filter(|o| o.kind == OpKind::Identity && o.targets == [0]).map(|o| o.time_step).collect();
        assert!(idle0.contains(&0) && idle0.contains(&1));
        let loc = c.location_count();
        assert_eq!(loc.total(), c.ops.iter().filter(|o| o.is_noisy()).count());
    }

    #[test]
    fn text_round_trip() {
        let c = sample();
        let t = c.to_text();
        assert!(t.contains("# role: flag 0 0"));
        let back = PhysicalCircuit::from_text(&t).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn adjacency_enforced() {
        let mut b = CircuitBuilder::new(2).with_cells(vec![(0, 0), (2, 0)]);
        b.cx(0, 1);
        assert!(matches!(b.finish().validate(), Err(CircuitError::NotAdjacent { .. })));
    }
}
