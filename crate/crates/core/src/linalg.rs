//! Exact sparse linear algebra over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::element::Q;

pub type SparseVec = BTreeMap<usize, Q>;

pub fn axpy(y: &mut SparseVec, a: &Q, x: &SparseVec) {
    if a.is_zero() {
        return;
    }
    for (i, v) in x {
        let e = y.entry(*i).or_insert_with(Q::zero);
        *e += a * v;
        if e.is_zero() {
            y.remove(i);
        }
    }
}

/// Incremental row echelon form; pivots are the smallest column of each row.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` against the stored rows.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        while let Some((&c, _)) = v.iter().next() {
            match self.pivots.get(&c) {
                Some(row) => {
                    let a = -v[&c].clone();
                    axpy(&mut v, &a, row);
                }
                None => {
                    let x = v.remove(&c).unwrap();
                    out.insert(c, x);
                }
            }
        }
        out
    }

    /// Inserts `v`; returns true if it increased the rank.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let mut r = self.reduce(v);
        let Some((&c, lead)) = r.iter().next() else {
            return false;
        };
        let inv = Q::one() / lead.clone();
        for x in r.values_mut() {
            *x *= &inv;
        }
        self.pivots.insert(c, r);
        true
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v.clone()).is_empty()
    }
}

pub fn rank(rows: impl IntoIterator<Item = SparseVec>) -> usize {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Basis of the kernel of the map sending basis vector `j` to `cols[j]`.
pub fn kernel(cols: &[SparseVec]) -> Vec<SparseVec> {
    // Track each column's combination alongside its reduction.
    let mut pivots: BTreeMap<usize, (SparseVec, SparseVec)> = BTreeMap::new();
    let mut out = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let mut v = c.clone();
        let mut comb = SparseVec::new();
        comb.insert(j, Q::one());
        loop {
            let Some((&p, x)) = v.iter().next() else {
                out.push(comb);
                break;
            };
            match pivots.get(&p) {
                Some((row, rc)) => {
                    let a = -x.clone();
                    axpy(&mut v, &a, row);
                    axpy(&mut comb, &a, rc);
                }
                None => {
                    let inv = Q::one() / x.clone();
                    for y in v.values_mut() {
                        *y *= &inv;
                    }
                    for y in comb.values_mut() {
                        *y *= &inv;
                    }
                    pivots.insert(p, (v, comb));
                    break;
                }
            }
        }
    }
    out
}

/// Applies the map given by columns to a coefficient vector.
pub fn apply(cols: &[SparseVec], x: &SparseVec) -> SparseVec {
    let mut y = SparseVec::new();
    for (j, a) in x {
        axpy(&mut y, a, &cols[*j]);
    }
    y
}
