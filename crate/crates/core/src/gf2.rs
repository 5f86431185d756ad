//! Linear algebra over GF(2) on packed bit-vectors.

use crate::bits::Bits;

/// Row-echelon basis supporting incremental insertion and membership tests.
#[derive(Debug, Clone, Default)]
pub struct Gf2Basis {
    /// Rows kept reduced; `pivots[i]` is the leading column of `rows[i]`.
    rows: Vec<Bits>,
    pivots: Vec<usize>,
}

impl Gf2Basis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a Bits>) -> Self {
        let mut b = Self::new();
        for r in rows {
            b.insert(r.clone());
        }
        b
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, v: &Bits) -> Bits {
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &Bits) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: Bits) -> bool {
        let r = self.reduce(&v);
        let Some(p) = r.first_one() else { return false };
        for row in self.rows.iter_mut() {
            if row.get(p) {
                row.xor_assign(&r);
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        true
    }
}

/// Finds a subset of `vectors` whose XOR equals `target`, as a selection mask.
pub fn solve_combination(vectors: &[Bits], target: &Bits) -> Option<Bits> {
    let m = vectors.len();
    // Augment each vector with its index bit so reduction tracks the combination.
    let aug: Vec<Bits> = vectors.iter().enumerate().map(|(i, v)| v.concat(&Bits::from_indices(m, [i]))).collect();
    let basis = Gf2Basis::from_rows(&aug);
    let t = target.concat(&Bits::zeros(m));
    let r = basis.reduce(&t);
    let len = target.len();
    if (0..len).any(|i| r.get(i)) {
        return None;
    }
    Some(Bits::from_indices(m, (0..m).filter(|&i| r.get(len + i))))
}

pub fn rank(rows: &[Bits]) -> usize {
    Gf2Basis::from_rows(rows).rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_finds_combination() {
        let v = vec![Bits::from_indices(3, [0, 1]), Bits::from_indices(3, [1, 2]), Bits::from_indices(3, [2])];
        let t = Bits::from_indices(3, [0]);
        let sel = solve_combination(&v, &t).unwrap();
        let mut acc = Bits::zeros(3);
        for i in sel.iter_ones() {
            acc.xor_assign(&v[i]);
        }
        assert_eq!(acc, t);
        assert!(solve_combination(&v[..1], &Bits::from_indices(3, [2])).is_none());
    }

    #[test]
    fn rank_and_membership() {
        let a = Bits::from_indices(4, [0, 1]);
        let b = Bits::from_indices(4, [1, 2]);
        let c = Bits::from_indices(4, [0, 2]);
        assert_eq!(rank(&[a.clone(), b.clone(), c.clone()]), 2);
        let basis = Gf2Basis::from_rows([&a, &b]);
        assert!(basis.contains(&c));
        assert!(!basis.contains(&Bits::from_indices(4, [3])));
    }
}
