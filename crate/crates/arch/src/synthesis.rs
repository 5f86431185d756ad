//! Layout-bound physical circuits: flag-bridge EC rounds, GHZ remote CX, transversal gates,
//! logical CX between tiles and Steane↔RM code switching.
//!
//! Qubits are allocated per grid cell. Data qubit `q` of tile `t` is qubit `15 t + q`;
//! ancilla and GHZ cells follow in allocation order. An ancilla cell may serve as EC
//! ancilla and GHZ chain link at different times.

use crate::grid::{ghz_path_by, Bounds, BridgeTree, Cell};
use crate::layout::{check_specs, mode_checks, mode_data, LayoutError, QubitLayout, NUM_DATA};
use qcs_core::circuit::{CircuitBuilder, MeasRole, OpKind, PhysicalCircuit};
use qcs_core::codes::{
    code, rm_code, rm_index, CheckType, CodeKind, LogicalGate, PhysicalGate, SwitchDirection, SwitchStep, CONNECTOR, RM_JOINT_PAIRS,
    STEANE_PLAQUETTES,
};
use qcs_core::gf2::solve_combination;
use qcs_core::Bits;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

/// Control and target as (tile, data index).
pub type GadgetPair = ((usize, usize), (usize, usize));

/// Random first-fit orders tried when grouping remote CX gadgets into waves.
pub const ROUTE_SHUFFLES: usize = 200;
const ROUTE_SEED: u64 = 0x6a7;

/// Role ids `20..26` name the Steane checks of block B (X then Z plaquettes).
pub const BLOCK_B_CHECK_BASE: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("logical {gate:?} is not transversal in the {mode:?} code; it requires code switching")]
    NonTransversal { gate: LogicalGate, mode: CodeKind },
    #[error("no GHZ path between ({},{}) and ({},{})", .0.x, .0.y, .1.x, .1.y)]
    Unreachable(Cell, Cell),
    #[error("check {0} has no ancilla tree")]
    MissingTree(usize),
}

/// Reflection of a tile about its footprint centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    Identity,
    FlipX,
    FlipY,
    Rotate180,
}

impl Orientation {
    fn flips(self) -> (bool, bool) {
        match self {
            Orientation::Identity => (false, false),
            Orientation::FlipX => (true, false),
            Orientation::FlipY => (false, true),
            Orientation::Rotate180 => (true, true),
        }
    }
}

/// A logical-qubit tile: a layout reflected by `orientation`, then translated by `offset`.
#[derive(Debug, Clone, Copy)]
pub struct Tile<'a> {
    pub layout: &'a QubitLayout,
    pub offset: (i32, i32),
    pub orientation: Orientation,
    /// Footprint `x0 + x1` and `y0 + y1`: a reflection maps `x` to `sum - 1 - x`.
    axis: (i32, i32),
}

impl<'a> Tile<'a> {
    pub fn new(layout: &'a QubitLayout) -> Self {
        Tile::placed(layout, (0, 0), Orientation::Identity)
    }

    pub fn shifted(layout: &'a QubitLayout, offset: (i32, i32)) -> Self {
        Tile::placed(layout, offset, Orientation::Identity)
    }

    pub fn placed(layout: &'a QubitLayout, offset: (i32, i32), orientation: Orientation) -> Self {
        let fp = layout.footprint().unwrap_or(layout.bounds);
        Tile { layout, offset, orientation, axis: (fp.x0 + fp.x1, fp.y0 + fp.y1) }
    }

    fn abs(&self, c: Cell) -> Cell {
        let (fx, fy) = self.orientation.flips();
        let x = if fx { self.axis.0 - 1 - c.x } else { c.x };
        let y = if fy { self.axis.1 - 1 - c.y } else { c.y };
        Cell::new(x + self.offset.0, y + self.offset.1)
    }

    pub fn data_cell(&self, q: usize) -> Result<Cell, LayoutError> {
        Ok(self.abs(self.layout.pos(q)?))
    }

    fn transform(&self, b: Bounds) -> Bounds {
        let (fx, fy) = self.orientation.flips();
        let (x0, x1) = if fx { (self.axis.0 - b.x1, self.axis.0 - b.x0) } else { (b.x0, b.x1) };
        let (y0, y1) = if fy { (self.axis.1 - b.y1, self.axis.1 - b.y0) } else { (b.y0, b.y1) };
        Bounds { x0: x0 + self.offset.0, y0: y0 + self.offset.1, x1: x1 + self.offset.0, y1: y1 + self.offset.1 }
    }

    /// The tile's grid region, used for GHZ paths inside one tile.
    pub fn bounds(&self) -> Bounds {
        self.transform(self.layout.bounds)
    }

    /// Bounding box of data and ancilla cells.
    pub fn footprint(&self) -> Result<Bounds, LayoutError> {
        self.layout.footprint().map(|b| self.transform(b)).ok_or(LayoutError::Unplaced(0))
    }
}

/// One stabilizer measurement: its ancilla tree comes from check `tree_id` of the layout
/// and its measurements are labelled with `role_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCircuit {
    pub role_id: usize,
    pub tree_id: usize,
    pub kind: CheckType,
    pub support: Vec<usize>,
}

pub fn mode_check_circuits(mode: CodeKind) -> Vec<CheckCircuit> {
    mode_checks(mode)
        .map(|id| {
            let s = &check_specs()[id];
            CheckCircuit { role_id: id, tree_id: id, kind: s.kind, support: s.support.clone() }
        })
        .collect()
}

/// Steane checks on block B; both types reuse the tree of the RM Z plaquette on B.
pub fn block_b_checks() -> Vec<CheckCircuit> {
    let specs = check_specs();
    let mut v = Vec::new();
    for (t, kind) in [CheckType::X, CheckType::Z].into_iter().enumerate() {
        for (k, p) in STEANE_PLAQUETTES.iter().enumerate() {
            let support: Vec<usize> = {
                let mut s: Vec<usize> = p.iter().map(|&l| rm_index(l + 8)).collect();
                s.sort();
                s
            };
            let tree_id = mode_checks(CodeKind::ReedMuller)
                .find(|&id| specs[id].kind == CheckType::Z && specs[id].support == support)
                .expect("RM code contains the block-B plaquettes");
            v.push(CheckCircuit { role_id: BLOCK_B_CHECK_BASE + 3 * t + k, tree_id, kind, support });
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoundKind {
    SteaneA,
    SteaneB,
    Rm,
}

/// Measurement group of one EC round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundInfo {
    pub group: usize,
    pub tile: usize,
    pub kind: RoundKind,
    /// Parity record of each measured check, by role id.
    pub parity: Vec<(usize, usize)>,
    /// Flag records of each measured check, by role id.
    pub flags: Vec<(usize, Vec<usize>)>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub circuit: PhysicalCircuit,
    pub rounds: Vec<RoundInfo>,
}

/// Incremental circuit synthesis over a set of tiles.
pub struct Synth<'a> {
    tiles: Vec<Tile<'a>>,
    b: CircuitBuilder,
    qubit: HashMap<Cell, usize>,
    rounds: Vec<RoundInfo>,
    group: usize,
    /// Data cells of every tile plus obstacle cells; GHZ paths avoid all of them.
    blocked: HashSet<Cell>,
}

impl<'a> Synth<'a> {
    pub fn new(tiles: Vec<Tile<'a>>) -> Result<Self, SynthError> {
        let mut s = Synth { tiles, b: CircuitBuilder::new(0), qubit: HashMap::new(), rounds: Vec::new(), group: 0, blocked: HashSet::new() };
        for t in 0..s.tiles.len() {
            for q in 0..NUM_DATA {
                let c = s.tiles[t].data_cell(q)?;
                let id = s.b.add_qubit(c.as_pair());
                s.qubit.insert(c, id);
                s.blocked.insert(c);
            }
        }
        Ok(s)
    }

    /// Cells no GHZ path may use, e.g. the footprints of neighbouring tiles.
    pub fn with_obstacles(mut self, regions: impl IntoIterator<Item = Bounds>) -> Self {
        for r in regions {
            self.blocked.extend(r.cells());
        }
        self
    }

    pub fn data_qubit(&self, tile: usize, q: usize) -> usize {
        tile * NUM_DATA + q
    }

    fn cell_qubit(&mut self, c: Cell) -> usize {
        if let Some(&q) = self.qubit.get(&c) {
            return q;
        }
        let q = self.b.add_qubit(c.as_pair());
        self.qubit.insert(c, q);
        q
    }

    pub fn builder(&mut self) -> &mut CircuitBuilder {
        &mut self.b
    }

    /// Marks the given data qubits of a tile as holding state for the whole circuit.
    pub fn set_persistent(&mut self, tile: usize, qubits: impl IntoIterator<Item = usize>) {
        let qs: Vec<usize> = qubits.into_iter().map(|q| self.data_qubit(tile, q)).collect();
        self.b.set_persistent(&qs);
    }

    /// One flag-bridge stabilizer measurement. Returns (parity record, flag records).
    fn ec_round(&mut self, tile: usize, check: &CheckCircuit) -> Result<(usize, Vec<usize>), SynthError> {
        let t = self.tiles[tile];
        let tree = t.layout.trees[check.tree_id].clone().ok_or(SynthError::MissingTree(check.tree_id))?;
        let nodes: Vec<usize> = tree.nodes.iter().map(|&c| self.cell_qubit(t.abs(c))).collect();
        let data: Vec<usize> = check.support.iter().map(|&q| self.data_qubit(tile, q)).collect();
        Ok(flag_bridge_round(&mut self.b, &tree, &nodes, &data, check.kind, check.role_id))
    }

    /// A full EC round over `checks`, recorded as one measurement group.
    pub fn ec(&mut self, tile: usize, checks: &[CheckCircuit], kind: RoundKind) -> Result<&RoundInfo, SynthError> {
        let group = self.group;
        self.group += 1;
        self.b.set_group(group);
        let mut info = RoundInfo { group, tile, kind, parity: Vec::new(), flags: Vec::new() };
        for c in checks {
            let (p, f) = self.ec_round(tile, c)?;
            info.parity.push((c.role_id, p));
            info.flags.push((c.role_id, f));
        }
        self.rounds.push(info);
        Ok(self.rounds.last().unwrap())
    }

    pub fn mode_ec(&mut self, tile: usize, mode: CodeKind) -> Result<&RoundInfo, SynthError> {
        let kind = if mode == CodeKind::Steane { RoundKind::SteaneA } else { RoundKind::Rm };
        self.ec(tile, &mode_check_circuits(mode), kind)
    }

    pub fn remote_cx_path(&mut self, control: usize, target: usize, path: &[usize]) {
        ghz_remote_cx(&mut self.b, control, target, path);
    }

    /// Region for a GHZ path: the tile grid within one tile, otherwise the bounding box
    /// of both footprints, which includes the gap between them.
    fn search_bounds(&self, a: usize, b: usize) -> Result<Bounds, SynthError> {
        if a == b {
            return Ok(self.tiles[a].bounds());
        }
        let (fa, fb) = (self.tiles[a].footprint()?, self.tiles[b].footprint()?);
        Ok(Bounds { x0: fa.x0.min(fb.x0), y0: fa.y0.min(fb.y0), x1: fa.x1.max(fb.x1), y1: fa.y1.max(fb.y1) })
    }

    /// Canonical shortest GHZ path avoiding data, obstacles and `avoid`.
    fn route(&self, control: (usize, usize), target: (usize, usize), avoid: &HashSet<Cell>) -> Result<Option<Vec<Cell>>, SynthError> {
        let cc = self.tiles[control.0].data_cell(control.1)?;
        let tc = self.tiles[target.0].data_cell(target.1)?;
        let blocked = &self.blocked;
        Ok(ghz_path_by(cc, tc, |c| blocked.contains(&c) || avoid.contains(&c), self.search_bounds(control.0, target.0)?))
    }

    fn remote_cx_along(&mut self, control: (usize, usize), target: (usize, usize), path: &[Cell]) {
        let pq: Vec<usize> = path.iter().map(|&c| self.cell_qubit(c)).collect();
        let (c, t) = (self.data_qubit(control.0, control.1), self.data_qubit(target.0, target.1));
        self.remote_cx_path(c, t, &pq);
    }

    /// Remote CX between two data qubits along the canonical GHZ path.
    fn remote_cx_cells(&mut self, control: (usize, usize), target: (usize, usize)) -> Result<(), SynthError> {
        let path = self.route(control, target, &HashSet::new())?.ok_or_else(|| self.unreachable(control, target))?;
        self.remote_cx_along(control, target, &path);
        Ok(())
    }

    fn unreachable(&self, control: (usize, usize), target: (usize, usize)) -> SynthError {
        match (self.tiles[control.0].data_cell(control.1), self.tiles[target.0].data_cell(target.1)) {
            (Ok(a), Ok(b)) => SynthError::Unreachable(a, b),
            (Err(e), _) | (_, Err(e)) => e.into(),
        }
    }

    /// First-fit wave assignment of the gadgets in `order`.
    pub fn first_fit(&self, pairs: &[GadgetPair], order: &[usize]) -> Result<Vec<Vec<(usize, Vec<Cell>)>>, SynthError> {
        let mut waves: Vec<(HashSet<Cell>, Vec<(usize, Vec<Cell>)>)> = Vec::new();
        for &i in order {
            let (c, t) = pairs[i];
            let mut placed = false;
            for (used, members) in waves.iter_mut() {
                if let Some(p) = self.route(c, t, used)? {
                    used.extend(p.iter().copied());
                    members.push((i, p));
                    placed = true;
                    break;
                }
            }
            if !placed {
                let p = self.route(c, t, &HashSet::new())?.ok_or_else(|| self.unreachable(c, t))?;
                waves.push((p.iter().copied().collect(), vec![(i, p)]));
            }
        }
        Ok(waves.into_iter().map(|w| w.1).collect())
    }

    /// Groups a batch of gadgets into waves of path-disjoint gadgets. First-fit runs over
    /// the natural order, both length orders and `ROUTE_SHUFFLES` seeded shuffles; the
    /// fewest waves win, then the shortest total path.
    pub fn route_waves(&self, pairs: &[GadgetPair]) -> Result<Vec<Vec<(usize, Vec<Cell>)>>, SynthError> {
        let mut lens = Vec::with_capacity(pairs.len());
        for &(c, t) in pairs {
            lens.push(self.route(c, t, &HashSet::new())?.ok_or_else(|| self.unreachable(c, t))?.len());
        }
        let natural: Vec<usize> = (0..pairs.len()).collect();
        let mut orders = vec![natural.clone()];
        let mut by_len = natural.clone();
        by_len.sort_by_key(|&i| (lens[i], i));
        orders.push(by_len.iter().rev().copied().collect());
        orders.push(by_len);
        let mut rng = ChaCha8Rng::seed_from_u64(ROUTE_SEED);
        for _ in 0..ROUTE_SHUFFLES {
            let mut o = natural.clone();
            o.shuffle(&mut rng);
            orders.push(o);
        }
        let mut best: Option<(usize, usize, Vec<Vec<(usize, Vec<Cell>)>>)> = None;
        for o in &orders {
            let w = self.first_fit(pairs, o)?;
            let total: usize = w.iter().flatten().map(|(_, p)| p.len()).sum();
            if best.as_ref().map_or(true, |b| (w.len(), total) < (b.0, b.1)) {
                best = Some((w.len(), total, w));
            }
        }
        Ok(best.map(|b| b.2).unwrap_or_default())
    }

    /// Remote CX gadgets issued wave by wave; gadgets of one wave use disjoint paths.
    fn remote_cx_batch(&mut self, pairs: &[GadgetPair]) -> Result<usize, SynthError> {
        let waves = self.route_waves(pairs)?;
        for wave in &waves {
            for (i, path) in wave {
                let (c, t) = pairs[*i];
                self.remote_cx_along(c, t, path);
            }
        }
        Ok(waves.len())
    }

    /// Transversal logical gate: one physical gate per data qubit of the mode.
    pub fn transversal(&mut self, tile: usize, gate: LogicalGate, mode: CodeKind) -> Result<(), SynthError> {
        let phys = code(mode).physical_gate(gate).ok_or(SynthError::NonTransversal { gate, mode })?;
        let kind = match phys {
            PhysicalGate::H => OpKind::H,
            PhysicalGate::Sdg => OpKind::Sdg,
            PhysicalGate::Tdg => OpKind::Tdg,
            PhysicalGate::X => OpKind::X,
            PhysicalGate::Z => OpKind::Z,
            PhysicalGate::CX => return Err(SynthError::NonTransversal { gate, mode }),
        };
        if kind == OpKind::Tdg {
            self.b.mark_transversal_t();
        }
        for q in mode_data(mode) {
            let d = self.data_qubit(tile, q);
            self.b.gate(kind, d);
        }
        Ok(())
    }

    /// Pairwise remote CX between corresponding data qubits of two tiles.
    /// Returns the number of path-disjoint waves.
    pub fn logical_cx(&mut self, control: usize, target: usize, mode: CodeKind) -> Result<usize, SynthError> {
        let pairs: Vec<_> = mode_data(mode).map(|q| ((control, q), (target, q))).collect();
        self.remote_cx_batch(&pairs)
    }

    /// Code switching of one tile following the abstract template.
    pub fn code_switch(&mut self, tile: usize, direction: SwitchDirection) -> Result<(), SynthError> {
        let template = qcs_core::codes::switching_template(direction);
        let forward = direction == SwitchDirection::SteaneToRm;
        for step in template.steps {
            match step {
                SwitchStep::SteaneEcA => {
                    self.mode_ec(tile, CodeKind::Steane)?;
                }
                SwitchStep::SteaneEcB => {
                    self.ec(tile, &block_b_checks(), RoundKind::SteaneB)?;
                }
                SwitchStep::PrepareB if forward => self.prepare_block_b(tile)?,
                SwitchStep::PrepareB => {
                    for q in 7..14 {
                        let d = self.data_qubit(tile, q);
                        self.b.measure(d, MeasRole::Data);
                    }
                }
                SwitchStep::LogicalCxAB => {
                    let pairs: Vec<_> = (0..7).map(|q| ((tile, q), (tile, q + 7))).collect();
                    self.remote_cx_batch(&pairs)?;
                }
                SwitchStep::PrepareConnector => {
                    let d = self.data_qubit(tile, CONNECTOR);
                    self.b.reset(d);
                }
                SwitchStep::MeasureConnector => {
                    let d = self.data_qubit(tile, CONNECTOR);
                    self.b.measure(d, MeasRole::Connector);
                }
                SwitchStep::ConnectorCx(low) => {
                    self.remote_cx_cells((tile, rm_index(low + 8)), (tile, CONNECTOR))?;
                }
                SwitchStep::RmEc => {
                    let parity = self.mode_ec(tile, CodeKind::ReedMuller)?.parity.clone();
                    if forward {
                        self.gauge_fix(tile, &parity);
                    }
                }
            }
        }
        Ok(())
    }

    /// Block B to Steane `|+>_L`: `|+>` on every qubit, one Steane round, and X on B
    /// labels 1, 2, 4 (each flips exactly one Z plaquette) conditioned on the Z outcomes.
    fn prepare_block_b(&mut self, tile: usize) -> Result<(), SynthError> {
        for q in 7..14 {
            let d = self.data_qubit(tile, q);
            self.b.reset(d);
            self.b.h(d);
        }
        let checks = block_b_checks();
        let parity = self.ec(tile, &checks, RoundKind::SteaneB)?.parity.clone();
        for (k, low) in [1u8, 2, 4].into_iter().enumerate() {
            let z_role = BLOCK_B_CHECK_BASE + 3 + k;
            let rec = parity.iter().find(|(r, _)| *r == z_role).unwrap().1;
            let d = self.data_qubit(tile, rm_index(low + 8));
            self.b.feedback(OpKind::X, d, vec![rec]);
        }
        Ok(())
    }

    /// X on block-B plaquette combinations undoing random joint-face outcomes.
    fn gauge_fix(&mut self, tile: usize, parity: &[(usize, usize)]) {
        let rm = rm_code();
        let faces: Vec<usize> = RM_JOINT_PAIRS
            .iter()
            .map(|&(a, b)| {
                let mut s = vec![rm_index(a), rm_index(b), rm_index(a + 8), rm_index(b + 8)];
                s.sort();
                rm.stabilizers.iter().position(|st| st.kind == CheckType::Z && st.support == s).unwrap()
            })
            .collect();
        let plaquettes: Vec<Vec<usize>> = STEANE_PLAQUETTES.iter().map(|p| p.iter().map(|&l| rm_index(l + 8)).collect()).collect();
        // Anticommutation of each B plaquette X with each joint face.
        let patterns: Vec<Bits> = plaquettes
            .iter()
            .map(|p| Bits::from_bools(&faces.iter().map(|&f| p.iter().filter(|q| rm.stabilizers[f].support.contains(q)).count() % 2 == 1).collect::<Vec<_>>()))
            .collect();
        let mut cond: Vec<Vec<usize>> = vec![Vec::new(); NUM_DATA];
        for (fi, &f) in faces.iter().enumerate() {
            let role = mode_checks(CodeKind::ReedMuller).start + f;
            let rec = parity.iter().find(|(r, _)| *r == role).unwrap().1;
            let mut unit = Bits::zeros(faces.len());
            unit.set(fi, true);
            let sel = solve_combination(&patterns, &unit).expect("plaquette patterns span the joint faces");
            for k in sel.iter_ones() {
                for &q in &plaquettes[k] {
                    cond[q].push(rec);
                }
            }
        }
        for (q, mut c) in cond.into_iter().enumerate() {
            // XOR semantics: a record listed twice cancels.
            c.sort();
            let mut reduced: Vec<usize> = Vec::new();
            for r in c {
                if reduced.last() == Some(&r) {
                    reduced.pop();
                } else {
                    reduced.push(r);
                }
            }
            if !reduced.is_empty() {
                let d = self.data_qubit(tile, q);
                self.b.feedback(OpKind::X, d, reduced);
            }
        }
    }

    pub fn finish(self) -> SynthOutput {
        SynthOutput { circuit: self.b.finish(), rounds: self.rounds }
    }
}

/// One flag-bridge stabilizer measurement on qubits `nodes` (tree order) and `data`
/// (support order). Returns (parity record, flag records).
///
/// Z checks: parity in |0>, flags in |+>, the tree entangled child→parent, data CX onto
/// the attached node, the tree disentangled in reverse, flags read in the X basis. X checks
/// are the H conjugate of this pattern.
pub fn flag_bridge_round(b: &mut CircuitBuilder, tree: &BridgeTree, nodes: &[usize], data: &[usize], kind: CheckType, role: usize) -> (usize, Vec<usize>) {
    let z_type = kind == CheckType::Z;
    for &n in nodes {
        b.reset(n);
    }
    if z_type {
        for &n in &nodes[1..] {
            b.h(n);
        }
    } else {
        b.h(nodes[0]);
    }
    let edges: Vec<(usize, usize)> = tree.bfs_order().into_iter().skip(1).map(|k| (nodes[k], nodes[tree.parent[k].unwrap()])).collect();
    let oriented = |(child, parent): (usize, usize)| if z_type { (child, parent) } else { (parent, child) };
    for &e in &edges {
        let (c, t) = oriented(e);
        b.cx(c, t);
    }
    b.barrier(nodes);
    for (j, &d) in data.iter().enumerate() {
        let a = nodes[tree.attach[j]];
        if z_type {
            b.cx(d, a);
        } else {
            b.cx(a, d);
        }
    }
    b.barrier(nodes);
    for &e in edges.iter().rev() {
        let (c, t) = oriented(e);
        b.cx(c, t);
    }
    if z_type {
        for &n in &nodes[1..] {
            b.h(n);
        }
    } else {
        b.h(nodes[0]);
    }
    let parity = b.measure(nodes[0], MeasRole::Parity { check: role });
    let flags = nodes[1..].iter().enumerate().map(|(k, &n)| b.measure(n, MeasRole::Flag { check: role, slot: k })).collect();
    (parity, flags)
}

/// GHZ-mediated CX from `control` to `target` through the chain `path`.
///
/// Bell pairs on consecutive path cells are made in one CX round and fused in a second
/// round that also couples the control; the target couples from the chain tail in the
/// same or the next round. Z-basis outcomes of the head and fusion qubits set the X
/// correction on the target; X-basis outcomes of the rest set the Z correction on the
/// control.
pub fn ghz_remote_cx(b: &mut CircuitBuilder, control: usize, target: usize, path: &[usize]) {
    let l = path.len();
    match l {
        0 => b.cx(control, target),
        1 => {
            let a = path[0];
            b.reset(a);
            b.cx(control, a);
            b.cx(a, target);
            b.h(a);
            let m = b.measure(a, MeasRole::Ghz);
            b.feedback(OpKind::Z, control, vec![m]);
        }
        _ => {
            let pairs = l / 2;
            for &a in path {
                b.reset(a);
            }
            for i in 0..pairs {
                b.h(path[2 * i]);
            }
            for i in 0..pairs {
                b.cx(path[2 * i], path[2 * i + 1]);
            }
            b.cx(control, path[0]);
            for i in 0..pairs {
                if 2 * i + 2 < l {
                    b.cx(path[2 * i + 1], path[2 * i + 2]);
                }
            }
            let tail = path[l - 1];
            b.cx(tail, target);
            let mut x_cond = vec![b.measure(path[0], MeasRole::Ghz)];
            for i in 1..pairs {
                x_cond.push(b.measure(path[2 * i], MeasRole::Ghz));
            }
            let mut z_cond = Vec::new();
            let mut x_basis: Vec<usize> = (1..l).step_by(2).map(|k| path[k]).collect();
            if l % 2 == 1 {
                x_basis.push(tail);
            }
            for a in x_basis {
                b.h(a);
                z_cond.push(b.measure(a, MeasRole::Ghz));
            }
            b.feedback(OpKind::X, target, x_cond);
            b.feedback(OpKind::Z, control, z_cond);
        }
    }
}

/// One stabilizer's flag-bridge round on a single tile.
pub fn synth_ec_round(layout: &QubitLayout, check: usize) -> Result<SynthOutput, SynthError> {
    let spec = &check_specs()[check];
    let mut s = Synth::new(vec![Tile::new(layout)])?;
    s.set_persistent(0, spec.support.iter().copied());
    let cc = CheckCircuit { role_id: check, tree_id: check, kind: spec.kind, support: spec.support.clone() };
    let kind = if spec.mode == CodeKind::Steane { RoundKind::SteaneA } else { RoundKind::Rm };
    s.ec(0, &[cc], kind)?;
    Ok(s.finish())
}

/// All stabilizer rounds of a mode, overlapping where qubits are disjoint.
pub fn synth_full_ec(layout: &QubitLayout, mode: CodeKind) -> Result<SynthOutput, SynthError> {
    let mut s = Synth::new(vec![Tile::new(layout)])?;
    s.set_persistent(0, mode_data(mode));
    s.mode_ec(0, mode)?;
    Ok(s.finish())
}

/// Remote CX between two data qubits of one tile.
pub fn synth_remote_cx(layout: &QubitLayout, control: usize, target: usize) -> Result<SynthOutput, SynthError> {
    let mut s = Synth::new(vec![Tile::new(layout)])?;
    s.set_persistent(0, [control, target]);
    s.remote_cx_cells((0, control), (0, target))?;
    Ok(s.finish())
}

pub fn synth_logical_gate(layout: &QubitLayout, gate: LogicalGate, mode: CodeKind) -> Result<SynthOutput, SynthError> {
    let mut s = Synth::new(vec![Tile::new(layout)])?;
    s.set_persistent(0, mode_data(mode));
    s.transversal(0, gate, mode)?;
    Ok(s.finish())
}

/// Logical CX from tile `a` to tile `b`, optionally followed by one EC round on each.
/// GHZ paths stay out of `obstacles`.
pub fn synth_logical_cx(a: Tile<'_>, b: Tile<'_>, obstacles: &[Bounds], mode: CodeKind, with_ec: bool) -> Result<SynthOutput, SynthError> {
    let mut s = Synth::new(vec![a, b])?.with_obstacles(obstacles.iter().copied());
    s.set_persistent(0, mode_data(mode));
    s.set_persistent(1, mode_data(mode));
    s.logical_cx(0, 1, mode)?;
    if with_ec {
        s.mode_ec(0, mode)?;
        s.mode_ec(1, mode)?;
    }
    Ok(s.finish())
}

pub fn synth_code_switch(layout: &QubitLayout, direction: SwitchDirection) -> Result<SynthOutput, SynthError> {
    let mut s = Synth::new(vec![Tile::new(layout)])?;
    match direction {
        SwitchDirection::SteaneToRm => s.set_persistent(0, 0..7),
        SwitchDirection::RmToSteane => s.set_persistent(0, 0..NUM_DATA),
    }
    s.code_switch(0, direction)?;
    Ok(s.finish())
}
