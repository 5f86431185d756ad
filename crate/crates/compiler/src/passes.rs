//! Code-switch placement passes.
//!
//! Both passes take a routed CS-free program and return a mode-valid one with an EC
//! round after every logical gate. The agnostic pass gives each T gate its own RM
//! visit. The block pass groups T gates with neighbouring gates into blocks that stay
//! on RM, so one switch pair per qubit and block replaces one pair per T gate.

use crate::cost::CostModel;
use crate::program::{CsDirection, LogicalInstr, LogicalProgram, Mode, Op};
use std::collections::HashSet;

fn push_with_ec(out: &mut LogicalProgram, instr: LogicalInstr) {
    let qubits = instr.qubits.clone();
    out.instrs.push(instr);
    for q in qubits {
        out.push(Op::Ec, &[q]);
    }
}

/// Wraps every T/Tdg as switch to RM, gate, switch back.
pub fn agnostic_cs(program: &LogicalProgram) -> LogicalProgram {
    let mut out = LogicalProgram::new(program.n_qubits);
    for instr in program.instrs.iter().filter(|i| !i.op.is_annotation()) {
        let q = instr.qubits[0];
        let t = instr.op.is_t();
        if t {
            out.push(Op::Cs(CsDirection::ToRm), &[q]);
        }
        push_with_ec(&mut out, instr.clone());
        if t {
            out.push(Op::Cs(CsDirection::ToSteane), &[q]);
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    instr: LogicalInstr,
}

/// Whether CX(control, target) commutes with `other`, which shares a qubit with it.
fn cx_commutes_with(control: usize, target: usize, other: &LogicalInstr) -> bool {
    match other.op {
        Op::Cx => other.qubits[0] != target && other.qubits[1] != control,
        Op::Z | Op::T | Op::Tdg | Op::S | Op::Sdg => other.qubits[0] == control,
        Op::X => other.qubits[0] == target,
        _ => false,
    }
}

/// Rewrites `pauli · gate` (pauli first) as `gate' · paulis'`.
/// Returns the replacement gate and the Paulis that follow it, the first of which
/// takes the place of `pauli`.
pub fn conjugate_pauli(pauli: &LogicalInstr, gate: &LogicalInstr) -> Option<(LogicalInstr, Vec<LogicalInstr>)> {
    let q = pauli.qubits[0];
    let p = pauli.op;
    let flipped = |op: Op| LogicalInstr::one(op, q);
    let same = vec![pauli.clone()];
    Some(match (p, gate.op) {
        (_, Op::X | Op::Z) => (gate.clone(), same),
        (Op::Z, Op::T | Op::Tdg | Op::S | Op::Sdg) => (gate.clone(), same),
        (Op::X, Op::T) => (flipped(Op::Tdg), same),
        (Op::X, Op::Tdg) => (flipped(Op::T), same),
        (Op::X, Op::S) => (flipped(Op::Sdg), same),
        (Op::X, Op::Sdg) => (flipped(Op::S), same),
        (Op::X, Op::H) => (gate.clone(), vec![LogicalInstr::one(Op::Z, q)]),
        (Op::Z, Op::H) => (gate.clone(), vec![LogicalInstr::one(Op::X, q)]),
        (_, Op::Swap) => {
            let other = if gate.qubits[0] == q { gate.qubits[1] } else { gate.qubits[0] };
            (gate.clone(), vec![LogicalInstr::one(p, other)])
        }
        (_, Op::Cx) => {
            let (c, t) = (gate.qubits[0], gate.qubits[1]);
            match (p, q == c) {
                (Op::X, true) => (gate.clone(), vec![pauli.clone(), LogicalInstr::one(Op::X, t)]),
                (Op::Z, false) => (gate.clone(), vec![pauli.clone(), LogicalInstr::one(Op::Z, c)]),
                _ => (gate.clone(), same),
            }
        }
        _ => return None,
    })
}

/// Outcome of one Steane marking of a block.
struct BlockCost {
    infidelity: f64,
    switches: usize,
    /// Which block gates run on RM.
    rm: Vec<bool>,
}

/// Snapshot of one block for costing alternative markings.
struct Refinement {
    ids: Vec<usize>,
    ops: Vec<(Op, Vec<usize>)>,
    /// Per qubit, indices into `ops` in program order, flagged when a non-block gate
    /// separates the entry from the previous one.
    seqs: Vec<Vec<(usize, bool)>>,
}

impl Refinement {
    fn new(pass: &BlockPass<'_>, block: usize) -> Self {
        let mut ids = Vec::new();
        let mut ops = Vec::new();
        let mut seqs = vec![Vec::new(); pass.n_qubits];
        let mut last_in = vec![false; pass.n_qubits];
        for n in &pass.nodes {
            let member = pass.owner[n.id] == Some(block);
            if member {
                ids.push(n.id);
                ops.push((n.instr.op, n.instr.qubits.clone()));
            }
            for &q in &n.instr.qubits {
                if member {
                    seqs[q].push((ops.len() - 1, !last_in[q]));
                }
                last_in[q] = member;
            }
        }
        Refinement { ids, ops, seqs }
    }

    /// Marked gates run on Steane. The remaining gates split into pieces connected
    /// along qubit timelines; pieces without a T gate fall back to Steane too, and
    /// every maximal RM run on a qubit pays one switch pair.
    fn evaluate(&self, cost: &CostModel, marked: &[bool]) -> BlockCost {
        let m = self.ops.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for seq in &self.seqs {
            let mut prev: Option<usize> = None;
            for &(i, gap) in seq {
                if marked[i] || gap {
                    prev = None;
                }
                if marked[i] {
                    continue;
                }
                if let Some(p) = prev {
                    let (a, b) = (find(&mut parent, p), find(&mut parent, i));
                    parent[a] = b;
                }
                prev = Some(i);
            }
        }
        let mut has_t = vec![false; m];
        for i in (0..m).filter(|&i| !marked[i] && self.ops[i].0.is_t()) {
            let r = find(&mut parent, i);
            has_t[r] = true;
        }
        let rm: Vec<bool> = (0..m).map(|i| !marked[i] && has_t[find(&mut parent, i)]).collect();
        let mut segments = 0;
        for seq in &self.seqs {
            let mut open = false;
            for &(i, gap) in seq {
                if rm[i] && (gap || !open) {
                    segments += 1;
                }
                open = rm[i];
            }
        }
        let mut infidelity = 2.0 * segments as f64 * cost.cs.infidelity;
        for (i, (op, qubits)) in self.ops.iter().enumerate() {
            infidelity += cost.op_cost(*op, qubits, if rm[i] { Mode::Rm } else { Mode::Steane }).infidelity;
        }
        BlockCost { infidelity, switches: 2 * segments, rm }
    }
}

/// Block bookkeeping over a reorderable instruction list with stable node ids.
struct BlockPass<'a> {
    nodes: Vec<Node>,
    owner: Vec<Option<usize>>,
    rm_nodes: HashSet<usize>,
    cost: &'a CostModel,
    n_qubits: usize,
}

impl<'a> BlockPass<'a> {
    fn new(program: &LogicalProgram, cost: &'a CostModel) -> Self {
        let nodes: Vec<Node> = program.instrs.iter().filter(|i| !i.op.is_annotation()).cloned().enumerate().map(|(id, instr)| Node { id, instr }).collect();
        BlockPass { owner: vec![None; nodes.len()], nodes, rm_nodes: HashSet::new(), cost, n_qubits: program.n_qubits }
    }

    fn pos(&self, id: usize) -> usize {
        self.nodes.iter().position(|n| n.id == id).expect("live node")
    }

    fn add_node(&mut self, at: usize, instr: LogicalInstr, block: usize) -> usize {
        let id = self.owner.len();
        self.owner.push(Some(block));
        self.nodes.insert(at, Node { id, instr });
        id
    }

    fn in_block(&self, pos: usize, block: usize) -> bool {
        self.owner[self.nodes[pos].id] == Some(block)
    }

    /// Next (or previous) position after `pos` whose instruction touches `q`.
    fn neighbour_on(&self, pos: usize, q: usize, forward: bool) -> Option<usize> {
        if forward {
            (pos + 1..self.nodes.len()).find(|&p| self.nodes[p].instr.touches(q))
        } else {
            (0..pos).rev().find(|&p| self.nodes[p].instr.touches(q))
        }
    }

    fn run(mut self) -> LogicalProgram {
        let mut block = 0;
        while let Some(seed) = (0..self.nodes.len()).find(|&p| self.nodes[p].instr.op.is_t() && self.owner[self.nodes[p].id].is_none()) {
            if self.cost.merge_profitable() {
                self.grow(seed, block);
                self.reorder(block);
                self.refine(block);
            } else {
                let id = self.nodes[seed].id;
                self.owner[id] = Some(block);
                self.rm_nodes.insert(id);
            }
            block += 1;
        }
        self.emit()
    }

    /// Step 1: claims gates reachable from the seed along each member qubit, stopping
    /// at Steane-only gates and at gates of earlier blocks.
    fn grow(&mut self, seed: usize, block: usize) {
        let seed_id = self.nodes[seed].id;
        self.owner[seed_id] = Some(block);
        let mut work = vec![(seed_id, self.nodes[seed].instr.qubits[0])];
        while let Some((id, q)) = work.pop() {
            let at = self.pos(id);
            for forward in [true, false] {
                let mut p = at;
                while let Some(next) = self.neighbour_on(p, q, forward) {
                    if !forward && next <= seed {
                        break;
                    }
                    let nid = self.nodes[next].id;
                    match self.owner[nid] {
                        Some(b) if b == block => {}
                        Some(_) => break,
                        None if self.nodes[next].instr.op.steane_only() => break,
                        None => {
                            self.owner[nid] = Some(block);
                            for &r in &self.nodes[next].instr.qubits {
                                if r != q {
                                    work.push((nid, r));
                                }
                            }
                        }
                    }
                    p = next;
                }
            }
        }
    }

    /// Step 2: pushes Paulis past the block's end, then commutes CX gates out of it.
    fn reorder(&mut self, block: usize) {
        let mut paulis: Vec<usize> = self.nodes.iter().filter(|n| n.instr.op.is_pauli() && self.owner[n.id] == Some(block)).map(|n| n.id).collect();
        while let Some(id) = paulis.pop() {
            self.push_pauli_out(id, block, &mut paulis);
        }
        loop {
            let cxs: Vec<usize> = self.nodes.iter().filter(|n| n.instr.op == Op::Cx && self.owner[n.id] == Some(block)).map(|n| n.id).collect();
            let moved = cxs.into_iter().filter(|&id| self.move_cx_out(id, block, true) || self.move_cx_out(id, block, false)).count();
            if moved == 0 {
                break;
            }
        }
    }

    fn push_pauli_out(&mut self, id: usize, block: usize, spawned: &mut Vec<usize>) {
        loop {
            let pos = self.pos(id);
            let q = self.nodes[pos].instr.qubits[0];
            if pos + 1 == self.nodes.len() {
                break;
            }
            if !self.nodes[pos + 1].instr.touches(q) {
                self.nodes.swap(pos, pos + 1);
                continue;
            }
            if !self.in_block(pos + 1, block) {
                break;
            }
            let pauli = self.nodes[pos].instr.clone();
            let (gate, after) = conjugate_pauli(&pauli, &self.nodes[pos + 1].instr).expect("block gates admit Pauli conjugation");
            self.nodes[pos + 1].instr = gate;
            self.nodes.swap(pos, pos + 1);
            let mut after = after.into_iter();
            self.nodes[pos + 1].instr = after.next().expect("conjugation keeps the Pauli");
            for (k, extra) in after.enumerate().map(|(k, e)| (k + 1, e)) {
                let new_id = self.add_node(pos + 1 + k, extra, block);
                spawned.push(new_id);
            }
        }
        self.owner[id] = None;
    }

    /// Moves CX `id` past every block gate on its qubits in one direction, or leaves
    /// the program untouched if a non-commuting gate is in the way.
    fn move_cx_out(&mut self, id: usize, block: usize, forward: bool) -> bool {
        let snapshot = self.nodes.clone();
        let (c, t) = {
            let q = &self.nodes[self.pos(id)].instr.qubits;
            (q[0], q[1])
        };
        loop {
            let pos = self.pos(id);
            let clear = [c, t].iter().all(|&q| self.neighbour_on(pos, q, forward).map_or(true, |p| !self.in_block(p, block)));
            if clear {
                self.owner[id] = None;
                return true;
            }
            let other = if forward { pos + 1 } else { pos - 1 };
            let instr = &self.nodes[other].instr;
            if instr.touches(c) || instr.touches(t) {
                if !cx_commutes_with(c, t, instr) {
                    self.nodes = snapshot;
                    return false;
                }
            }
            self.nodes.swap(pos, other);
        }
    }

    /// Step 3: toggles single two-qubit gates between RM and Steane execution while
    /// that lowers the block's infidelity. The descent starts once from all gates on
    /// RM and once from all on Steane; the cheaper fixpoint wins among those needing
    /// at most one switch pair per T gate (the all-Steane start always qualifies).
    fn refine(&mut self, block: usize) {
        let ctx = Refinement::new(self, block);
        let candidates: Vec<usize> = (0..ctx.ops.len()).filter(|&i| ctx.ops[i].0.arity() == 2).collect();
        let t_count = ctx.ops.iter().filter(|(op, _)| op.is_t()).count();
        let eps = 1e-9;
        let descend = |mut marked: Vec<bool>| {
            let mut current = ctx.evaluate(self.cost, &marked);
            loop {
                let mut changed = false;
                for &g in &candidates {
                    marked[g] = !marked[g];
                    let trial = ctx.evaluate(self.cost, &marked);
                    if trial.infidelity < current.infidelity - eps {
                        current = trial;
                        changed = true;
                    } else {
                        marked[g] = !marked[g];
                    }
                }
                if !changed {
                    return current;
                }
            }
        };
        let merged = descend(vec![false; ctx.ops.len()]);
        let mut all = vec![false; ctx.ops.len()];
        for &g in &candidates {
            all[g] = true;
        }
        let split = descend(all);
        let better = |a: &BlockCost, b: &BlockCost| a.infidelity < b.infidelity - eps || ((a.infidelity - b.infidelity).abs() <= eps && a.switches < b.switches);
        let chosen = if merged.switches <= 2 * t_count && (better(&merged, &split) || split.switches > 2 * t_count) { merged } else { split };
        self.rm_nodes.extend(ctx.ids.iter().zip(&chosen.rm).filter(|(_, &rm)| rm).map(|(&id, _)| id));
    }

    fn rm_member(&self, n: &Node) -> bool {
        self.rm_nodes.contains(&n.id)
    }

    fn emit(&self) -> LogicalProgram {
        let mut out = LogicalProgram::new(self.n_qubits);
        let mut in_rm = vec![false; self.n_qubits];
        for n in &self.nodes {
            let rm = self.rm_member(n);
            for &q in &n.instr.qubits {
                if rm != in_rm[q] {
                    let dir = if rm { CsDirection::ToRm } else { CsDirection::ToSteane };
                    out.push(Op::Cs(dir), &[q]);
                    in_rm[q] = rm;
                }
            }
            push_with_ec(&mut out, n.instr.clone());
        }
        for (q, rm) in in_rm.into_iter().enumerate() {
            if rm {
                out.push(Op::Cs(CsDirection::ToSteane), &[q]);
            }
        }
        out
    }
}

/// Fidelity-aware placement of code switches (blocking, reordering, refining).
///
/// Falls back to the agnostic placement if the blocked result would cost more
/// switches or more infidelity.
pub fn block_pass(program: &LogicalProgram, cost: &CostModel) -> LogicalProgram {
    let aware = BlockPass::new(program, cost).run();
    let agnostic = agnostic_cs(program);
    let total = |p: &LogicalProgram| crate::cost::evaluate(p, cost, 0).expect("passes emit mode-valid programs").infidelity_norm;
    if aware.cs_count() > agnostic.cs_count() || total(&aware) > total(&agnostic) + 1e-9 {
        agnostic
    } else {
        aware
    }
}
