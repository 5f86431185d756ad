//! Greedy fidelity-aware routing onto a logical coupling graph.
//!
//! Each uncoupled CX takes the path of least summed edge infidelity, fewest hops on
//! ties, and SWAPs its control along the path until it neighbours the target.

use crate::program::{LogicalInstr, LogicalProgram, Op};
use qcs_arch::placement::{CouplingGraph, EdgeDirection};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("coupling graph is disconnected")]
    Disconnected,
    #[error("program needs {program} qubits but the graph has {graph}")]
    TooManyQubits { program: usize, graph: usize },
    #[error("instruction {index}: input already contains {op} instructions; route before code switching")]
    Annotated { index: usize, op: Op },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Routed {
    /// Program over graph nodes.
    pub program: LogicalProgram,
    /// Graph node holding each program qubit at the end.
    pub final_placement: Vec<usize>,
}

fn direction_rank(d: EdgeDirection) -> u8 {
    match d {
        EdgeDirection::Vertical => 0,
        EdgeDirection::Horizontal => 1,
        EdgeDirection::Diagonal => 2,
    }
}

fn connected(graph: &CouplingGraph) -> bool {
    let n = graph.num_qubits();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(w, _) in &graph.adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Least-infidelity path; ties go to fewer hops, then to earlier discovery with
/// vertical edges explored before horizontal before diagonal.
pub fn best_path(graph: &CouplingGraph, from: usize, to: usize) -> Option<Vec<usize>> {
    let n = graph.num_qubits();
    let tol = |x: f64| 1e-9 * x.abs().max(1e-300);
    let mut dist = vec![(f64::INFINITY, usize::MAX, usize::MAX); n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut order = 0;
    dist[from] = (0.0, 0, order);
    loop {
        let mut pick: Option<usize> = None;
        for v in (0..n).filter(|&v| !done[v] && dist[v].0.is_finite()) {
            pick = match pick {
                None => Some(v),
                Some(u) => {
                    let (a, b) = (dist[v], dist[u]);
                    let better = a.0 < b.0 - tol(b.0) || ((a.0 - b.0).abs() <= tol(b.0) && (a.1, a.2) < (b.1, b.2));
                    Some(if better { v } else { u })
                }
            };
        }
        let u = pick?;
        if u == to {
            break;
        }
        done[u] = true;
        let mut nbrs: Vec<(usize, usize)> = graph.adjacency[u].clone();
        nbrs.sort_by_key(|&(w, e)| (direction_rank(graph.edges[e].direction), w));
        for (w, e) in nbrs {
            if done[w] {
                continue;
            }
            let cand = (dist[u].0 + graph.edges[e].infidelity, dist[u].1 + 1);
            let cur = dist[w];
            let better = !cur.0.is_finite() || cand.0 < cur.0 - tol(cur.0) || ((cand.0 - cur.0).abs() <= tol(cur.0) && cand.1 < cur.1);
            if better {
                order += 1;
                dist[w] = (cand.0, cand.1, order);
                prev[w] = u;
            }
        }
    }
    let mut path = vec![to];
    while *path.last().unwrap() != from {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    Some(path)
}

/// Maps program qubit `i` onto graph node `i` and inserts SWAPs before every
/// uncoupled CX.
pub fn route(program: &LogicalProgram, graph: &CouplingGraph) -> Result<Routed, RouteError> {
    if program.n_qubits > graph.num_qubits() {
        return Err(RouteError::TooManyQubits { program: program.n_qubits, graph: graph.num_qubits() });
    }
    if !connected(graph) {
        return Err(RouteError::Disconnected);
    }
    let n = graph.num_qubits();
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut qubit_at: Vec<usize> = (0..n).collect();
    let mut out = LogicalProgram::new(n);
    for (index, instr) in program.instrs.iter().enumerate() {
        if instr.op.is_annotation() {
            return Err(RouteError::Annotated { index, op: instr.op });
        }
        if instr.qubits.len() == 2 {
            let (a, b) = (node_of[instr.qubits[0]], node_of[instr.qubits[1]]);
            if !graph.are_adjacent(a, b) {
                let path = best_path(graph, a, b).ok_or(RouteError::Disconnected)?;
                for w in path.windows(2).take(path.len() - 2) {
                    out.instrs.push(LogicalInstr::two(Op::Swap, w[0], w[1]));
                    let (qa, qb) = (qubit_at[w[0]], qubit_at[w[1]]);
                    qubit_at.swap(w[0], w[1]);
                    node_of.swap(qa, qb);
                }
            }
        }
        out.instrs.push(LogicalInstr { op: instr.op, qubits: instr.qubits.iter().map(|&q| node_of[q]).collect() });
    }
    node_of.truncate(program.n_qubits);
    Ok(Routed { program: out, final_placement: node_of })
}
