//! Tiling of many logical qubits, their coupling graph, and channel-aware CX scheduling.
//!
//! Tiles sit on a lattice with pitch equal to the footprint plus a channel margin.
//! Square schemes (C4, C8) use a plain grid. C4R and C6 shift odd rows by half a pitch,
//! so every tile touches four diagonal neighbours; C6 adds the two horizontal ones.

use crate::decoder::{DecodedBlock, DecoderError};
use crate::grid::{Bounds, Cell};
use crate::layout::{mode_data, QubitLayout, TILE_MARGIN};
use crate::protocol::DecodedProtocol;
use crate::synthesis::{synth_logical_cx, Orientation, Synth, SynthError, Tile};
use qcs_core::codes::CodeKind;
use qcs_core::sim::estimate::pair_coefficient;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};
use thiserror::Error;

/// Device error rate at which edge infidelities are reported.
pub const DEVICE_RATE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PlacementError {
    #[error("a multi-qubit layout needs at least two tiles, got {rows}x{cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("base layout has no footprint")]
    NoFootprint,
    #[error("logical qubits {0} and {1} are not coupled")]
    NotAnEdge(usize, usize),
    #[error("logical qubit {0} out of range")]
    UnknownQubit(usize),
    #[error("calibration has no entry for edge ({0}, {1})")]
    MissingCalibration(usize, usize),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connectivity {
    C4,
    C4R,
    C6,
    C8,
}

impl Connectivity {
    pub const ALL: [Connectivity; 4] = [Connectivity::C4, Connectivity::C4R, Connectivity::C6, Connectivity::C8];

    pub fn degree(self) -> usize {
        match self {
            Connectivity::C4 | Connectivity::C4R => 4,
            Connectivity::C6 => 6,
            Connectivity::C8 => 8,
        }
    }

    fn staggered(self) -> bool {
        matches!(self, Connectivity::C4R | Connectivity::C6)
    }

    /// Neighbour offsets `(dcol, drow, direction)` towards higher indices, for a tile in `row`.
    fn forward_neighbors(self, row: usize) -> Vec<(i64, i64, EdgeDirection)> {
        use EdgeDirection::*;
        let shift = (row % 2) as i64;
        match self {
            Connectivity::C4 => vec![(1, 0, Horizontal), (0, 1, Vertical)],
            Connectivity::C8 => vec![(1, 0, Horizontal), (0, 1, Vertical), (1, 1, Diagonal), (-1, 1, Diagonal)],
            Connectivity::C4R => vec![(shift - 1, 1, Diagonal), (shift, 1, Diagonal)],
            Connectivity::C6 => vec![(1, 0, Horizontal), (shift - 1, 1, Diagonal), (shift, 1, Diagonal)],
        }
    }
}

impl std::fmt::Display for Connectivity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Connectivity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Connectivity::ALL.into_iter().find(|c| c.to_string().eq_ignore_ascii_case(s)).ok_or_else(|| format!("unknown connectivity {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeDirection {
    Horizontal,
    Vertical,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TilePlacement {
    pub row: usize,
    pub col: usize,
    pub offset: (i32, i32),
    pub orientation: Orientation,
}

/// One coupling between logical qubits `a < b`: a transversal CX realised over GHZ paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalEdge {
    pub a: usize,
    pub b: usize,
    pub direction: EdgeDirection,
    /// Cells of every GHZ path of the logical CX.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub channel: BTreeSet<Cell>,
    /// CX layers of the logical CX.
    pub latency: f64,
    /// Logical CX plus one EC round per block, at `DEVICE_RATE`.
    pub infidelity: f64,
}

/// Per-edge values injected in place of synthesis, in the edge JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub a: usize,
    pub b: usize,
    pub direction: EdgeDirection,
    pub latency: f64,
    pub infidelity: f64,
}

/// How per-edge costs are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeCosts {
    /// Latency from synthesis; infidelity left at zero.
    LatencyOnly,
    /// Latency from synthesis; infidelity from `samples` sampled fault pairs.
    Simulated { samples: u64, seed: u64 },
    /// Channels from routing; latency and infidelity from the table.
    Calibrated(Vec<CalibrationEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLayout {
    pub scheme: Connectivity,
    pub rows: usize,
    pub cols: usize,
    pub mode: CodeKind,
    pub tiles: Vec<TilePlacement>,
    pub edges: Vec<LogicalEdge>,
}

/// Relative geometry of an edge: everything its synthesis depends on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct EdgeShape {
    delta: (i32, i32),
    orientations: (Orientation, Orientation),
    obstacles: Vec<(i32, i32)>,
}

fn intersects(a: &Bounds, b: &Bounds) -> bool {
    a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1
}

/// Tiles `rows × cols` copies of `base` under `scheme`, with costs of the `mode` CX.
pub fn build_multilayout(scheme: Connectivity, rows: usize, cols: usize, base: &QubitLayout, mode: CodeKind, costs: &EdgeCosts) -> Result<MultiLayout, PlacementError> {
    if rows * cols < 2 {
        return Err(PlacementError::TooSmall { rows, cols });
    }
    let fp = base.footprint().ok_or(PlacementError::NoFootprint)?;
    let (px, py) = (fp.width() + TILE_MARGIN, fp.height() + TILE_MARGIN);
    let mut tiles = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let shift = if scheme.staggered() && row % 2 == 1 { px / 2 } else { 0 };
            tiles.push(TilePlacement { row, col, offset: (col as i32 * px + shift, row as i32 * py), orientation: Orientation::Identity });
        }
    }
    let tile = |i: usize| Tile::placed(base, tiles[i].offset, tiles[i].orientation);
    let footprints: Vec<Bounds> = (0..tiles.len()).map(|i| tile(i).footprint()).collect::<Result<_, _>>().map_err(SynthError::from)?;
    let mut cache: HashMap<EdgeShape, (BTreeSet<Cell>, f64, f64)> = HashMap::new();
    let mut edges = Vec::new();
    for (a, t) in tiles.iter().enumerate() {
        for (dc, dr, direction) in scheme.forward_neighbors(t.row) {
            let (col, row) = (t.col as i64 + dc, t.row as i64 + dr);
            if col < 0 || row < 0 || col >= cols as i64 || row >= rows as i64 {
                continue;
            }
            let b = row as usize * cols + col as usize;
            let region = Bounds::bounding([footprints[a], footprints[b]].iter().flat_map(|f| [Cell::new(f.x0, f.y0), Cell::new(f.x1 - 1, f.y1 - 1)])).expect("nonempty");
            let obstacle_ids: Vec<usize> = (0..tiles.len()).filter(|&o| o != a && o != b && intersects(&footprints[o], &region)).collect();
            let origin = t.offset;
            let rel = |o: (i32, i32)| (o.0 - origin.0, o.1 - origin.1);
            let mut shape = EdgeShape { delta: rel(tiles[b].offset), orientations: (t.orientation, tiles[b].orientation), obstacles: obstacle_ids.iter().map(|&o| rel(tiles[o].offset)).collect() };
            shape.obstacles.sort_unstable();
            let obstacles: Vec<Bounds> = obstacle_ids.iter().map(|&o| footprints[o]).collect();
            let (channel, latency, infidelity) = match cache.get(&shape) {
                Some((ch, l, f)) => {
                    let (dx, dy) = origin;
                    (ch.iter().map(|c| c.offset(dx, dy)).collect(), *l, *f)
                }
                None => {
                    let (ch, l, f) = edge_costs(tile(a), tile(b), &obstacles, mode, costs)?;
                    let (dx, dy) = origin;
                    cache.insert(shape, (ch.iter().map(|c| c.offset(-dx, -dy)).collect(), l, f));
                    (ch, l, f)
                }
            };
            edges.push(LogicalEdge { a, b, direction, channel, latency, infidelity });
        }
    }
    if let EdgeCosts::Calibrated(table) = costs {
        for e in edges.iter_mut() {
            let entry = table.iter().find(|c| (c.a, c.b) == (e.a, e.b) || (c.b, c.a) == (e.a, e.b)).ok_or(PlacementError::MissingCalibration(e.a, e.b))?;
            e.latency = entry.latency;
            e.infidelity = entry.infidelity;
        }
    }
    Ok(MultiLayout { scheme, rows, cols, mode, tiles, edges })
}

fn edge_costs(a: Tile<'_>, b: Tile<'_>, obstacles: &[Bounds], mode: CodeKind, costs: &EdgeCosts) -> Result<(BTreeSet<Cell>, f64, f64), PlacementError> {
    let synth = Synth::new(vec![a, b])?.with_obstacles(obstacles.iter().copied());
    let pairs: Vec<_> = mode_data(mode).map(|q| ((0, q), (1, q))).collect();
    let channel: BTreeSet<Cell> = synth.route_waves(&pairs)?.into_iter().flatten().flat_map(|(_, p)| p).collect();
    if let EdgeCosts::Calibrated(_) = costs {
        return Ok((channel, 0.0, 0.0));
    }
    let latency = synth_logical_cx(a, b, obstacles, mode, false)?.circuit.latency() as f64;
    let infidelity = match costs {
        EdgeCosts::Simulated { samples, seed } => edge_infidelity(a, b, obstacles, mode, *samples, *seed)?,
        _ => 0.0,
    };
    Ok((channel, latency, infidelity))
}

/// Failure probability of the logical CX followed by one EC round per block at
/// `DEVICE_RATE`, from the sampled second-order coefficient.
pub fn edge_infidelity(a: Tile<'_>, b: Tile<'_>, obstacles: &[Bounds], mode: CodeKind, samples: u64, seed: u64) -> Result<f64, PlacementError> {
    let out = synth_logical_cx(a, b, obstacles, mode, true)?;
    let blocks = (0..2).map(|t| DecodedBlock::from_synth(&out, t, mode)).collect();
    let protocol = DecodedProtocol::new(out.circuit, blocks)?;
    Ok(pair_coefficient(&protocol, samples, seed).rate(DEVICE_RATE))
}

impl MultiLayout {
    pub fn num_qubits(&self) -> usize {
        self.tiles.len()
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&LogicalEdge> {
        self.edges.iter().find(|e| (e.a, e.b) == (a.min(b), a.max(b)))
    }

    pub fn degree(&self, q: usize) -> usize {
        self.edges.iter().filter(|e| e.a == q || e.b == q).count()
    }

    /// Whether `q` has the full neighbourhood of its scheme.
    pub fn is_interior(&self, q: usize) -> bool {
        let t = &self.tiles[q];
        t.row > 0 && t.col > 0 && t.row + 1 < self.rows && t.col + 1 < self.cols
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn coupling_graph(&self) -> CouplingGraph {
        let mut adjacency = vec![Vec::new(); self.num_qubits()];
        for (i, e) in self.edges.iter().enumerate() {
            adjacency[e.a].push((e.b, i));
            adjacency[e.b].push((e.a, i));
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
        }
        CouplingGraph {
            adjacency,
            edges: self.edges.iter().map(|e| GraphEdge { a: e.a, b: e.b, direction: e.direction, latency: e.latency, infidelity: e.infidelity }).collect(),
        }
    }

    /// `{scheme, rows, cols, mode, edges: [{a, b, direction, latency, infidelity}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "scheme": self.scheme,
            "rows": self.rows,
            "cols": self.cols,
            "mode": self.mode,
            "edges": self.calibration(),
        })
    }

    /// Edge values in calibration format.
    pub fn calibration(&self) -> Vec<CalibrationEntry> {
        self.edges.iter().map(|e| CalibrationEntry { a: e.a, b: e.b, direction: e.direction, latency: e.latency, infidelity: e.infidelity }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub direction: EdgeDirection,
    pub latency: f64,
    pub infidelity: f64,
}

/// Logical coupling graph with per-edge cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingGraph {
    /// Sorted `(neighbour, edge index)` lists.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    pub edges: Vec<GraphEdge>,
}

impl CouplingGraph {
    /// Graph over `n` qubits with unit-cost edges.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            adjacency[a].push((b, i));
            adjacency[b].push((a, i));
            edges.push(GraphEdge { a: a.min(b), b: a.max(b), direction: EdgeDirection::Horizontal, latency: 1.0, infidelity: 0.0 });
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
        }
        CouplingGraph { adjacency, edges }
    }

    /// Linear chain `0 - 1 - … - (n-1)`.
    pub fn line(n: usize) -> Self {
        CouplingGraph::from_pairs(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>())
    }

    pub fn num_qubits(&self) -> usize {
        self.adjacency.len()
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].iter().any(|&(n, _)| n == b)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&GraphEdge> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, i)| &self.edges[i])
    }

    /// Fewest-hop path from `a` to `b`, ties broken towards lower neighbour indices.
    pub fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.num_qubits()];
        prev[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                let mut path = vec![b];
                while *path.last().unwrap() != a {
                    path.push(prev[*path.last().unwrap()]);
                }
                path.reverse();
                return Some(path);
            }
            for &(n, _) in &self.adjacency[v] {
                if prev[n] == usize::MAX {
                    prev[n] = v;
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

/// Start times of a list of logical CX gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CxSchedule {
    /// Start time of each CX, in input order.
    pub start: Vec<f64>,
    pub makespan: f64,
}

/// Greedy earliest-start list schedule in program order. A CX starts after the previous
/// CX on either of its qubits ends, and never overlaps in time a CX whose channel or
/// endpoints it shares.
pub fn schedule_cx(layout: &MultiLayout, gates: &[(usize, usize)]) -> Result<CxSchedule, PlacementError> {
    let mut ready = vec![0.0f64; layout.num_qubits()];
    let mut placed: Vec<(f64, f64, &LogicalEdge)> = Vec::new();
    let mut start = Vec::with_capacity(gates.len());
    for &(c, t) in gates {
        for q in [c, t] {
            if q >= layout.num_qubits() {
                return Err(PlacementError::UnknownQubit(q));
            }
        }
        let edge = layout.edge(c, t).ok_or(PlacementError::NotAnEdge(c, t))?;
        let earliest = ready[c].max(ready[t]);
        let conflicts = |other: &LogicalEdge| {
            other.a == edge.a || other.a == edge.b || other.b == edge.a || other.b == edge.b || !other.channel.is_disjoint(&edge.channel)
        };
        let mut candidates: Vec<f64> = std::iter::once(earliest).chain(placed.iter().map(|p| p.1).filter(|&e| e > earliest)).collect();
        candidates.sort_by(f64::total_cmp);
        let s = candidates
            .into_iter()
            .find(|&s| placed.iter().all(|&(ps, pe, other)| pe <= s || s + edge.latency <= ps || !conflicts(other)))
            .expect("after every placed gate ends nothing conflicts");
        let end = s + edge.latency;
        ready[c] = end;
        ready[t] = end;
        placed.push((s, end, edge));
        start.push(s);
    }
    let makespan = placed.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(CxSchedule { start, makespan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{build_layout, Scheme};
    use std::sync::OnceLock;

    fn oecf() -> &'static QubitLayout {
        static L: OnceLock<QubitLayout> = OnceLock::new();
        L.get_or_init(|| build_layout(Scheme::Oecf).unwrap().0)
    }

    fn grid(scheme: Connectivity) -> MultiLayout {
        build_multilayout(scheme, 4, 4, oecf(), CodeKind::Steane, &EdgeCosts::LatencyOnly).unwrap()
    }

    #[test]
    fn interior_degree_matches_scheme() {
        for scheme in Connectivity::ALL {
            let m = grid(scheme);
            for q in 0..m.num_qubits() {
                if m.is_interior(q) {
                    assert_eq!(m.degree(q), scheme.degree(), "{scheme} qubit {q}");
                    assert_eq!(m.coupling_graph().degree(q), scheme.degree());
                }
            }
        }
    }

    #[test]
    fn footprints_are_disjoint() {
        for scheme in Connectivity::ALL {
            let m = grid(scheme);
            let fps: Vec<Bounds> = m.tiles.iter().map(|t| Tile::placed(oecf(), t.offset, t.orientation).footprint().unwrap()).collect();
            for i in 0..fps.len() {
                for j in i + 1..fps.len() {
                    assert!(!intersects(&fps[i], &fps[j]), "{scheme} tiles {i} {j}");
                }
            }
        }
    }

    #[test]
    fn directions_per_scheme() {
        let dirs = |s| grid(s).edges.iter().map(|e| e.direction).collect::<BTreeSet<_>>();
        use EdgeDirection::*;
        assert!(!dirs(Connectivity::C4).contains(&Diagonal));
        assert_eq!(dirs(Connectivity::C4R), BTreeSet::from([Diagonal]));
        assert_eq!(dirs(Connectivity::C6), BTreeSet::from([Horizontal, Diagonal]));
        assert_eq!(dirs(Connectivity::C8), BTreeSet::from([Horizontal, Vertical, Diagonal]));
    }

    #[test]
    fn channels_avoid_every_data_cell() {
        let m = grid(Connectivity::C8);
        let data: BTreeSet<Cell> = m.tiles.iter().flat_map(|t| {
            let tile = Tile::placed(oecf(), t.offset, t.orientation);
            (0..15).map(move |q| tile.data_cell(q).unwrap())
        }).collect();
        for e in &m.edges {
            assert!(e.channel.is_disjoint(&data));
            assert!(e.latency > 0.0);
        }
    }

    #[test]
    fn single_cx_makespan_is_its_latency() {
        let m = grid(Connectivity::C4);
        let s = schedule_cx(&m, &[(0, 1)]).unwrap();
        assert_eq!(s.makespan, m.edge(0, 1).unwrap().latency);
        assert!(matches!(schedule_cx(&m, &[(0, 5)]), Err(PlacementError::NotAnEdge(0, 5))));
    }

    #[test]
    fn disjoint_vertical_cx_run_concurrently() {
        let m = grid(Connectivity::C4);
        let (a, b) = (m.index(0, 0), m.index(1, 0));
        let (c, d) = (m.index(0, 2), m.index(1, 2));
        assert!(m.edge(a, b).unwrap().channel.is_disjoint(&m.edge(c, d).unwrap().channel));
        let s = schedule_cx(&m, &[(a, b), (c, d)]).unwrap();
        assert_eq!(s.start, vec![0.0, 0.0]);
    }

    #[test]
    fn crossing_diagonals_serialize_on_c8() {
        let m = grid(Connectivity::C8);
        let qi = m.index(2, 2);
        let (upper_left, upper, left) = (m.index(1, 1), m.index(1, 2), m.index(2, 1));
        let e1 = m.edge(qi, upper_left).unwrap();
        let e2 = m.edge(upper, left).unwrap();
        assert!(!e1.channel.is_disjoint(&e2.channel));
        let s = schedule_cx(&m, &[(qi, upper_left), (upper, left)]).unwrap();
        assert!(s.start[1] >= s.start[0] + e1.latency);
    }

    #[test]
    fn schedules_respect_channels_and_endpoints() {
        use rand::{Rng, SeedableRng};
        let m = grid(Connectivity::C8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let gates: Vec<(usize, usize)> = (0..40).map(|_| { let e = &m.edges[rng.gen_range(0..m.edges.len())]; (e.a, e.b) }).collect();
        let s = schedule_cx(&m, &gates).unwrap();
        for i in 0..gates.len() {
            for j in i + 1..gates.len() {
                let (ei, ej) = (m.edge(gates[i].0, gates[i].1).unwrap(), m.edge(gates[j].0, gates[j].1).unwrap());
                let overlap = s.start[i] < s.start[j] + ej.latency && s.start[j] < s.start[i] + ei.latency;
                if overlap {
                    assert!(ei.channel.is_disjoint(&ej.channel));
                    assert!(![ei.a, ei.b].iter().any(|q| *q == ej.a || *q == ej.b));
                }
            }
        }
    }

    #[test]
    fn calibration_round_trips_through_json() {
        let m = grid(Connectivity::C4);
        let json = m.to_json();
        let table: Vec<CalibrationEntry> = serde_json::from_value(json["edges"].clone()).unwrap();
        let again = build_multilayout(Connectivity::C4, 4, 4, oecf(), CodeKind::Steane, &EdgeCosts::Calibrated(table)).unwrap();
        assert_eq!(again.calibration(), m.calibration());
        assert!(matches!(build_multilayout(Connectivity::C4, 1, 1, oecf(), CodeKind::Steane, &EdgeCosts::LatencyOnly), Err(PlacementError::TooSmall { .. })));
    }

    #[test]
    fn shortest_path_on_line() {
        let g = CouplingGraph::line(5);
        assert_eq!(g.shortest_path(0, 4), Some(vec![0, 1, 2, 3, 4]));
        assert!(g.are_adjacent(2, 3) && !g.are_adjacent(1, 3));
    }
}
