//! Grid cells, bridge trees and GHZ channel search on a 4-neighbour lattice.

use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    /// Row first so that derived ordering is (row, column).
    pub y: i32,
    pub x: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { y, x }
    }

    pub fn neighbors(self) -> [Cell; 4] {
        [Cell::new(self.x, self.y - 1), Cell::new(self.x, self.y + 1), Cell::new(self.x - 1, self.y), Cell::new(self.x + 1, self.y)]
    }

    pub fn manhattan(self, o: Cell) -> i32 {
        (self.x - o.x).abs() + (self.y - o.y).abs()
    }

    pub fn is_adjacent(self, o: Cell) -> bool {
        self.manhattan(o) == 1
    }

    pub fn offset(self, dx: i32, dy: i32) -> Cell {
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn as_pair(self) -> (i32, i32) {
        (self.x, self.y)
    }
}

/// Axis-aligned cell rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Bounds {
    pub fn new(w: i32, h: i32) -> Self {
        Bounds { x0: 0, y0: 0, x1: w, y1: h }
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= self.x0 && c.x < self.x1 && c.y >= self.y0 && c.y < self.y1
    }

    pub fn width(&self) -> i32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i32 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> i32 {
        self.width() * self.height()
    }

    pub fn bounding(cells: impl IntoIterator<Item = Cell>) -> Option<Bounds> {
        let mut it = cells.into_iter();
        let f = it.next()?;
        let mut b = Bounds { x0: f.x, y0: f.y, x1: f.x + 1, y1: f.y + 1 };
        for c in it {
            b.x0 = b.x0.min(c.x);
            b.y0 = b.y0.min(c.y);
            b.x1 = b.x1.max(c.x + 1);
            b.y1 = b.y1.max(c.y + 1);
        }
        Some(b)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.y0..self.y1).flat_map(move |y| (self.x0..self.x1).map(move |x| Cell::new(x, y)))
    }

    fn index(&self, c: Cell) -> usize {
        ((c.y - self.y0) * self.width() + (c.x - self.x0)) as usize
    }
}

/// Flag-bridge ancilla tree of one stabilizer.
///
/// `nodes[0]` is the parity qubit; every other node is a flag. `parent[i]` is the index
/// of node `i`'s parent (`None` for the root). `attach[j]` is the node collecting data
/// qubit `j` of the stabilizer support, in support order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeTree {
    pub nodes: Vec<Cell>,
    pub parent: Vec<Option<usize>>,
    pub attach: Vec<usize>,
}

impl BridgeTree {
    pub fn ancilla_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn flag_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Data CX plus two CX per ancilla-ancilla edge.
    pub fn cx_count(&self) -> usize {
        self.attach.len() + 2 * (self.nodes.len() - 1)
    }

    /// Nodes in breadth-first order from the root.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = vec![0];
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            for v in 0..self.nodes.len() {
                if self.parent[v] == Some(u) {
                    order.push(v);
                }
            }
            i += 1;
        }
        order
    }

    pub fn depth(&self, mut v: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[v] {
            v = p;
            d += 1;
        }
        d
    }
}

/// Exact minimum ancilla tree by node-weighted Dreyfus–Wagner dynamic programming.
///
/// Ancilla nodes are cells inside `bounds` not in `blocked`; terminals may only be
/// leaves. Returns `None` when no connecting tree exists.
pub fn min_bridge_tree(terminals: &[Cell], blocked: &HashSet<Cell>, bounds: Bounds, min_ancillas: usize) -> Option<BridgeTree> {
    let t = terminals.len();
    assert!(t >= 1 && t <= 12);
    let nv = bounds.area() as usize;
    let allowed: Vec<bool> = bounds.cells().map(|c| !blocked.contains(&c)).collect();
    let cell_of = |i: usize| Cell::new(bounds.x0 + (i as i32 % bounds.width()), bounds.y0 + (i as i32 / bounds.width()));
    let nbr: Vec<Vec<usize>> = (0..nv)
        .map(|i| {
            if !allowed[i] {
                return vec![];
            }
            cell_of(i).neighbors().into_iter().filter(|&c| bounds.contains(c)).map(|c| bounds.index(c)).filter(|&j| allowed[j]).collect()
        })
        .collect();
    const INF: u32 = u32::MAX / 4;
    #[derive(Clone, Copy)]
    enum Back {
        None,
        Base,
        Merge(usize),
        Extend(usize),
    }
    let full = (1usize << t) - 1;
    let mut dp = vec![vec![INF; nv]; full + 1];
    let mut back = vec![vec![Back::None; nv]; full + 1];
    // Base: a single ancilla adjacent to terminal k.
    for (k, &term) in terminals.iter().enumerate() {
        for c in term.neighbors() {
            if bounds.contains(c) && allowed[bounds.index(c)] {
                let i = bounds.index(c);
                dp[1 << k][i] = 1;
                back[1 << k][i] = Back::Base;
            }
        }
    }
    // Covering several terminals at one cell may also start as a base.
    let extend = |dp: &mut Vec<u32>, back: &mut Vec<Back>| {
        let mut q: VecDeque<usize> = VecDeque::new();
        let mut order: Vec<usize> = (0..nv).filter(|&i| dp[i] < INF).collect();
        order.sort_by_key(|&i| dp[i]);
        // Unit node weights: bucketed relaxation.
        let maxd = order.last().map_or(0, |&i| dp[i]) as usize + nv + 1;
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); maxd + 2];
        for &i in &order {
            buckets[dp[i] as usize].push(i);
        }
        let mut done = vec![false; nv];
        for d in 0..buckets.len() {
            while let Some(u) = buckets[d].pop() {
                if done[u] || dp[u] as usize != d {
                    continue;
                }
                done[u] = true;
                for &v in &nbr[u] {
                    if dp[u] + 1 < dp[v] {
                        dp[v] = dp[u] + 1;
                        back[v] = Back::Extend(u);
                        if (dp[v] as usize) < buckets.len() {
                            buckets[dp[v] as usize].push(v);
                        }
                    }
                }
            }
        }
        q.clear();
    };
    for s in 1..=full {
        if s.count_ones() > 1 {
            // Merge two disjoint subtrees at a common node.
            let mut sub = (s - 1) & s;
            while sub > 0 {
                let other = s ^ sub;
                if sub < other {
                    for v in 0..nv {
                        let a = dp[sub][v];
                        let b = dp[other][v];
                        if a < INF && b < INF && a + b - 1 < dp[s][v] {
                            dp[s][v] = a + b - 1;
                            back[s][v] = Back::Merge(sub);
                        }
                    }
                }
                sub = (sub - 1) & s;
            }
        }
        let (d, b) = (&mut dp[s], &mut back[s]);
        extend(d, b);
    }
    // Candidate roots in cost order; a tree that cannot be padded to the minimum falls
    // through to the next candidate.
    let mut roots: Vec<usize> = (0..nv).filter(|&v| dp[full][v] < INF).collect();
    roots.sort_by_key(|&v| (dp[full][v], cell_of(v)));
    let mut best: Option<Vec<Cell>> = None;
    for v0 in roots {
        let mut nodes: HashSet<usize> = HashSet::new();
        let mut stack = vec![(full, v0)];
        while let Some((s, v)) = stack.pop() {
            nodes.insert(v);
            match back[s][v] {
                Back::Base | Back::None => {}
                Back::Merge(sub) => {
                    stack.push((sub, v));
                    stack.push((s ^ sub, v));
                }
                Back::Extend(u) => stack.push((s, u)),
            }
        }
        if best.as_ref().is_some_and(|b| b.len() <= nodes.len().max(min_ancillas)) {
            break;
        }
        let mut cells: Vec<Cell> = nodes.iter().map(|&i| cell_of(i)).collect();
        cells.sort();
        if pad(&mut cells, blocked, bounds, min_ancillas) && best.as_ref().map_or(true, |b| cells.len() < b.len()) {
            best = Some(cells);
        }
    }
    best.map(|cells| build_tree(&cells, terminals))
}

/// Adds free cells adjacent to the set, lowest first, until it has `min` cells.
fn pad(cells: &mut Vec<Cell>, blocked: &HashSet<Cell>, bounds: Bounds, min: usize) -> bool {
    while cells.len() < min {
        let set: HashSet<Cell> = cells.iter().copied().collect();
        let next = cells
            .iter()
            .flat_map(|c| c.neighbors())
            .filter(|c| bounds.contains(*c) && !blocked.contains(c) && !set.contains(c))
            .min();
        match next {
            Some(c) => cells.push(c),
            None => return false,
        }
    }
    true
}

/// Chooses the root (minimum eccentricity, then lowest cell), a BFS spanning tree, and
/// the data attachments (least-loaded adjacent node, then BFS order).
fn build_tree(cells: &[Cell], terminals: &[Cell]) -> BridgeTree {
    let n = cells.len();
    let idx = |c: Cell| cells.iter().position(|&d| d == c);
    let bfs = |root: usize| -> (Vec<Option<usize>>, Vec<usize>, usize) {
        let mut parent = vec![None; n];
        let mut dist = vec![usize::MAX; n];
        let mut order = vec![root];
        dist[root] = 0;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            for nb in cells[u].neighbors() {
                if let Some(v) = idx(nb) {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = Some(u);
                        order.push(v);
                    }
                }
            }
            i += 1;
        }
        let ecc = *dist.iter().max().unwrap();
        (parent, order, ecc)
    };
    let root = (0..n).min_by_key(|&r| (bfs(r).2, cells[r])).unwrap();
    let (parent, order, _) = bfs(root);
    // Reindex so that node 0 is the root and nodes follow BFS order.
    let new_of: Vec<usize> = {
        let mut m = vec![0; n];
        for (k, &old) in order.iter().enumerate() {
            m[old] = k;
        }
        m
    };
    let nodes: Vec<Cell> = order.iter().map(|&o| cells[o]).collect();
    let parent: Vec<Option<usize>> = order.iter().map(|&o| parent[o].map(|p| new_of[p])).collect();
    let mut load = vec![0usize; n];
    let attach: Vec<usize> = terminals
        .iter()
        .map(|&t| {
            let k = (0..n).filter(|&k| nodes[k].is_adjacent(t)).min_by_key(|&k| (load[k], k)).expect("terminal adjacent to tree");
            load[k] += 1;
            k
        })
        .collect();
    BridgeTree { nodes, parent, attach }
}

/// Shortest path of free cells strictly between `a` and `b`; `Some(vec![])` when adjacent.
pub fn ghz_path(a: Cell, b: Cell, blocked: &HashSet<Cell>, bounds: Bounds) -> Option<Vec<Cell>> {
    ghz_path_by(a, b, |c| blocked.contains(&c), bounds)
}

/// `ghz_path` with a blocking predicate.
pub fn ghz_path_by(a: Cell, b: Cell, blocked: impl Fn(Cell) -> bool, bounds: Bounds) -> Option<Vec<Cell>> {
    if a == b {
        return None;
    }
    if a.is_adjacent(b) {
        return Some(vec![]);
    }
    let w = bounds.width();
    let nv = bounds.area() as usize;
    let mut prev = vec![usize::MAX; nv];
    let mut seen = vec![false; nv];
    let mut q = VecDeque::new();
    for c in a.neighbors() {
        if bounds.contains(c) && !blocked(c) && c != b {
            let i = bounds.index(c);
            if !seen[i] {
                seen[i] = true;
                q.push_back(i);
            }
        }
    }
    while let Some(u) = q.pop_front() {
        let cu = Cell::new(bounds.x0 + u as i32 % w, bounds.y0 + u as i32 / w);
        if cu.is_adjacent(b) {
            let mut path = vec![cu];
            let mut v = u;
            while prev[v] != usize::MAX {
                v = prev[v];
                path.push(Cell::new(bounds.x0 + v as i32 % w, bounds.y0 + v as i32 / w));
            }
            path.reverse();
            return Some(path);
        }
        for c in cu.neighbors() {
            if bounds.contains(c) && !blocked(c) && c != a && c != b {
                let i = bounds.index(c);
                if !seen[i] {
                    seen[i] = true;
                    prev[i] = u;
                    q.push_back(i);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocked(cells: &[Cell]) -> HashSet<Cell> {
        cells.iter().copied().collect()
    }

    /// Brute-force oracle: smallest connected ancilla set adjacent to every terminal.
    fn brute_min(terminals: &[Cell], block: &HashSet<Cell>, bounds: Bounds, max_k: usize) -> Option<usize> {
        let mut level: HashSet<Vec<Cell>> = HashSet::new();
        for t in terminals {
            for c in t.neighbors() {
                if bounds.contains(c) && !block.contains(&c) {
                    level.insert(vec![c]);
                }
            }
        }
        for k in 1..=max_k {
            for s in &level {
                if terminals.iter().all(|t| s.iter().any(|c| c.is_adjacent(*t))) {
                    return Some(k);
                }
            }
            let mut next = HashSet::new();
            for s in &level {
                for c in s {
                    for nb in c.neighbors() {
                        if bounds.contains(nb) && !block.contains(&nb) && !s.contains(&nb) {
                            let mut v = s.clone();
                            v.push(nb);
                            v.sort();
                            next.insert(v);
                        }
                    }
                }
            }
            level = next;
        }
        None
    }

    #[test]
    fn fig3_shape_costs_six() {
        // Data a,b beside parity (2,2); c,d beside flag (3,2).
        let data = [Cell::new(2, 1), Cell::new(2, 3), Cell::new(3, 1), Cell::new(3, 3)];
        let t = min_bridge_tree(&data, &blocked(&data), Bounds::new(5, 5), 2).unwrap();
        assert_eq!(t.ancilla_count(), 2);
        assert_eq!(t.cx_count(), 6);
    }

    #[test]
    fn one_bridge_cell_adds_two() {
        let data = [Cell::new(2, 1), Cell::new(2, 3), Cell::new(3, 1), Cell::new(4, 2)];
        let t = min_bridge_tree(&data, &blocked(&data), Bounds::new(6, 5), 2).unwrap();
        assert_eq!(t.cx_count(), 6);
        let far = [Cell::new(2, 1), Cell::new(2, 3), Cell::new(3, 1), Cell::new(5, 2)];
        let t2 = min_bridge_tree(&far, &blocked(&far), Bounds::new(7, 5), 2).unwrap();
        assert_eq!(t2.cx_count(), 8);
    }

    #[test]
    fn padding_respects_minimum() {
        // All four data around one cell: one ancilla covers them, but two are required and
        // the centre has no free neighbour left, so the tree extends elsewhere.
        let data = [Cell::new(2, 1), Cell::new(2, 3), Cell::new(1, 2), Cell::new(3, 2)];
        let t = min_bridge_tree(&data, &blocked(&data), Bounds::new(5, 5), 2).unwrap();
        assert!(t.ancilla_count() >= 2);
        let t8 = min_bridge_tree(&data, &blocked(&data), Bounds::new(5, 5), 4).unwrap();
        assert!(t8.ancilla_count() >= 4);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..60 {
            let bounds = Bounds::new(6, 6);
            let mut data: Vec<Cell> = Vec::new();
            let nt = rng.gen_range(2..=4);
            while data.len() < nt + 2 {
                let c = Cell::new(rng.gen_range(0..6), rng.gen_range(0..6));
                if !data.contains(&c) {
                    data.push(c);
                }
            }
            let block = blocked(&data);
            let terms = &data[..nt];
            let dw = min_bridge_tree(terms, &block, bounds, 1).map(|t| t.ancilla_count());
            let bf = brute_min(terms, &block, bounds, 7);
            match (dw, bf) {
                (Some(a), Some(b)) => assert_eq!(a, b, "{terms:?}"),
                (None, None) => {}
                (a, None) => assert!(a.unwrap() > 7),
                (None, b) => panic!("DW missed a tree of size {b:?}"),
            }
        }
    }

    #[test]
    fn tree_is_connected_and_covers() {
        let data = [Cell::new(0, 0), Cell::new(4, 0), Cell::new(0, 4), Cell::new(4, 4), Cell::new(2, 2)];
        let t = min_bridge_tree(&data, &blocked(&data), Bounds::new(5, 5), 4).unwrap();
        for (i, p) in t.parent.iter().enumerate() {
            if let Some(p) = p {
                assert!(t.nodes[i].is_adjacent(t.nodes[*p]));
                assert!(*p < i);
            } else {
                assert_eq!(i, 0);
            }
        }
        for (j, &a) in t.attach.iter().enumerate() {
            assert!(t.nodes[a].is_adjacent(data[j]));
        }
    }

    #[test]
    fn ghz_length_cases() {
        let b = Bounds::new(8, 5);
        assert_eq!(ghz_path(Cell::new(1, 1), Cell::new(2, 1), &HashSet::new(), b).unwrap().len(), 0);
        assert_eq!(ghz_path(Cell::new(1, 1), Cell::new(5, 1), &HashSet::new(), b).unwrap().len(), 3);
        // Block the straight channel; the detour below is 5 cells.
        let block = blocked(&[Cell::new(3, 1)]);
        assert_eq!(ghz_path(Cell::new(1, 1), Cell::new(5, 1), &block, b).unwrap().len(), 5);
        let wall = blocked(&[Cell::new(3, 0), Cell::new(3, 1), Cell::new(3, 2), Cell::new(3, 3), Cell::new(3, 4)]);
        assert!(ghz_path(Cell::new(1, 1), Cell::new(5, 1), &wall, b).is_none());
    }
}
