//! Anick numberings, the inductive Morse matching on the indecomposables of a
//! monomial resolution, and an exact-rank homology oracle.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::element::Q;
use crate::error::{Error, Result};
use crate::resolution::{homology, HomologyTable, Monomial, Resolution, StratumHomology};
use crate::trees::{Occurrence, Slot, Tree};

/// How a numbering was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NumberingSource {
    /// Unary trees: by position along the spine.
    Spine,
    /// Left and right combs: deeper roots first, left before right at a shared root.
    Comb,
    /// The default depth-first order already satisfies the condition.
    Default,
    Search,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnickNumbering {
    pub tree: Tree,
    /// `order[k]` is the default index of the divisor numbered `k`.
    pub order: Vec<usize>,
    pub source: NumberingSource,
}

/// Whether `i < j < k` and `S_i ∩ S_j ≠ ∅` imply `S_i ∩ S_k ⊆ S_j ∩ S_k`.
pub fn is_anick(occs: &[Occurrence], order: &[usize]) -> bool {
    (0..order.len()).all(|k| extends(occs, &order[..k], order[k]))
}

/// Checks the triples whose largest element is `next`, appended after `prefix`.
fn extends(occs: &[Occurrence], prefix: &[usize], next: usize) -> bool {
    let sk = &occs[next];
    for (a, &i) in prefix.iter().enumerate() {
        let si = &occs[i];
        let ik = si.intersection(sk);
        if ik.is_empty() {
            continue;
        }
        for &j in &prefix[a + 1..] {
            let sj = &occs[j];
            if si.intersects(sj) && !ik.iter().all(|v| sj.contains_vertex(*v)) {
                return false;
            }
        }
    }
    true
}

/// Comb type of a leading term: `Some(true)` for a left comb of binary
/// vertices, `Some(false)` for a right comb.
pub fn comb_kind(sig: &crate::trees::Signature, t: &Tree) -> Option<bool> {
    fn spine(sig: &crate::trees::Signature, t: &Tree, left: bool) -> bool {
        match t {
            Tree::Leaf(_) => true,
            Tree::Node(g, ch) => {
                if sig.get(*g).arity != 2 {
                    return false;
                }
                let (down, other) = if left { (&ch[0], &ch[1]) } else { (&ch[1], &ch[0]) };
                other.is_leaf() && spine(sig, down, left)
            }
        }
    }
    if t.vertex_count() == 1 && t.root().map_or(false, |g| sig.get(g).arity == 2) {
        return Some(true);
    }
    if spine(sig, t, true) {
        Some(true)
    } else if spine(sig, t, false) {
        Some(false)
    } else {
        None
    }
}

/// Finds an Anick numbering of the divisors of `t`, trying the spine order,
/// the comb order and the default order before a backtracking search that
/// visits at most `budget` partial orders.
pub fn anick_numbering(res: &Resolution, t: &Tree, budget: usize) -> Option<AnickNumbering> {
    let d = res.divisors(t);
    let occs = &d.occs;
    let k = occs.len();
    let default: Vec<usize> = (0..k).collect();
    let sig = res.sig();
    let make = |order: Vec<usize>, source| Some(AnickNumbering { tree: t.clone(), order, source });
    if d.flat.gens.iter().all(|&g| sig.get(g).arity == 1) {
        let mut order = default.clone();
        order.sort_by_key(|&i| (occs[i].root, occs[i].vertices.len()));
        if is_anick(occs, &order) {
            return make(order, NumberingSource::Spine);
        }
    }
    let kinds: Vec<Option<bool>> = res.leading().iter().map(|lt| comb_kind(sig, lt)).collect();
    if kinds.iter().all(|c| c.is_some()) {
        let mut order = default.clone();
        order.sort_by_key(|&i| (std::cmp::Reverse(occs[i].root), !kinds[d.relation[i]].unwrap(), i));
        if is_anick(occs, &order) {
            return make(order, NumberingSource::Comb);
        }
    }
    if is_anick(occs, &default) {
        return make(default, NumberingSource::Default);
    }
    let mut visited = 0usize;
    let mut used = vec![false; k];
    let mut prefix = Vec::with_capacity(k);
    fn search(occs: &[Occurrence], used: &mut [bool], prefix: &mut Vec<usize>, visited: &mut usize, budget: usize) -> bool {
        if prefix.len() == occs.len() {
            return true;
        }
        for next in 0..occs.len() {
            if used[next] {
                continue;
            }
            *visited += 1;
            if *visited > budget {
                return false;
            }
            if extends(occs, prefix, next) {
                used[next] = true;
                prefix.push(next);
                if search(occs, used, prefix, visited, budget) {
                    return true;
                }
                prefix.pop();
                used[next] = false;
            }
        }
        false
    }
    if search(occs, &mut used, &mut prefix, &mut visited, budget) {
        return make(prefix, NumberingSource::Search);
    }
    None
}

/// The matching on the indecomposable markings of one tree.
#[derive(Clone, Debug)]
pub struct MorseMatching {
    pub numbering: AnickNumbering,
    pub cells: Vec<Monomial>,
    /// Matched `(higher, lower)` cell indices.
    pub pairs: Vec<(usize, usize)>,
    pub critical: Vec<usize>,
}

impl MorseMatching {
    /// Whether every cell lies in at most one pair.
    pub fn is_matching(&self) -> bool {
        let mut seen = vec![false; self.cells.len()];
        for &(a, b) in &self.pairs {
            for x in [a, b] {
                if seen[x] {
                    return false;
                }
                seen[x] = true;
            }
        }
        true
    }
}

/// Cells indexed by mark sets, with the edges of the induced differential.
struct CellGraph {
    cells: Vec<Monomial>,
    pos: HashMap<Vec<usize>, usize>,
    /// `(target, coefficient)` for every nonzero entry of the differential.
    down: Vec<Vec<(usize, Q)>>,
}

fn cell_graph(res: &Resolution, t: &Tree) -> CellGraph {
    let cells = res.generators_on(t);
    let pos: HashMap<Vec<usize>, usize> = cells.iter().enumerate().map(|(i, m)| (m.marks.clone(), i)).collect();
    let down = cells
        .iter()
        .map(|m| res.abelianized_d(m).into_iter().map(|(y, c)| (pos[&y.marks], c)).collect())
        .collect();
    CellGraph { cells, pos, down }
}

/// Builds the matching `M_1 ∪ M_2 ∪ …`, pairing `v` with `v` minus the divisor
/// numbered `k` when both are still unmatched and indecomposable, and checks
/// acyclicity.
pub fn build_matching(res: &Resolution, numbering: &AnickNumbering) -> Result<MorseMatching> {
    let occs = &res.divisors(&numbering.tree).occs;
    if !is_anick(occs, &numbering.order) {
        return Err(Error::Other("numbering violates the Anick condition".into()));
    }
    let g = cell_graph(res, &numbering.tree);
    let mut matched = vec![false; g.cells.len()];
    let mut pairs = Vec::new();
    for &s in &numbering.order {
        let mut step = Vec::new();
        for (i, m) in g.cells.iter().enumerate() {
            if matched[i] || !m.marks.contains(&s) {
                continue;
            }
            let lower: Vec<usize> = m.marks.iter().copied().filter(|&x| x != s).collect();
            if let Some(&j) = g.pos.get(&lower) {
                if !matched[j] {
                    step.push((i, j));
                }
            }
        }
        for &(i, j) in &step {
            matched[i] = true;
            matched[j] = true;
        }
        pairs.extend(step);
    }
    let critical = (0..g.cells.len()).filter(|&i| !matched[i]).collect();
    if !acyclic(&g, &pairs) {
        return Err(Error::Other("matching has a directed cycle".into()));
    }
    Ok(MorseMatching { numbering: numbering.clone(), cells: g.cells, pairs, critical })
}

/// Topological sort of the differential graph with matched edges reversed.
fn acyclic(g: &CellGraph, pairs: &[(usize, usize)]) -> bool {
    let n = g.cells.len();
    let matched: std::collections::HashSet<(usize, usize)> = pairs.iter().copied().collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, outs) in g.down.iter().enumerate() {
        for &(w, _) in outs {
            if matched.contains(&(v, w)) {
                adj[w].push(v);
            } else {
                adj[v].push(w);
            }
        }
    }
    let mut indeg = vec![0usize; n];
    for outs in &adj {
        for &w in outs {
            indeg[w] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                stack.push(w);
            }
        }
    }
    seen == n
}

/// The Morse differential on critical cells by summation over alternating
/// paths; entries `(critical source, critical target) -> coefficient`.
pub fn morse_differential(res: &Resolution, m: &MorseMatching) -> BTreeMap<(usize, usize), Q> {
    let g = cell_graph(res, &m.numbering.tree);
    let up: HashMap<usize, usize> = m.pairs.iter().map(|&(a, b)| (b, a)).collect();
    let lower_matched: std::collections::HashSet<usize> = m.pairs.iter().map(|&(a, _)| a).collect();
    let is_critical: std::collections::HashSet<usize> = m.critical.iter().copied().collect();
    let mut memo: HashMap<usize, BTreeMap<usize, Q>> = HashMap::new();
    fn phi(
        w: usize,
        g: &CellGraph,
        up: &HashMap<usize, usize>,
        lower_matched: &std::collections::HashSet<usize>,
        is_critical: &std::collections::HashSet<usize>,
        memo: &mut HashMap<usize, BTreeMap<usize, Q>>,
    ) -> BTreeMap<usize, Q> {
        if let Some(r) = memo.get(&w) {
            return r.clone();
        }
        let mut out = BTreeMap::new();
        if is_critical.contains(&w) {
            out.insert(w, Q::one());
        } else if let (Some(&v), false) = (up.get(&w), lower_matched.contains(&w)) {
            let cvw = g.down[v].iter().find(|(x, _)| *x == w).map(|(_, c)| c.clone()).unwrap();
            for (x, c) in &g.down[v] {
                if *x == w {
                    continue;
                }
                let scale = -c.clone() / cvw.clone();
                for (y, e) in phi(*x, g, up, lower_matched, is_critical, memo) {
                    let t = out.entry(y).or_insert_with(Q::zero);
                    *t += &scale * e;
                }
            }
            out.retain(|_, c| !c.is_zero());
        }
        memo.insert(w, out.clone());
        out
    }
    let mut dm = BTreeMap::new();
    for &c in &m.critical {
        for (w, x) in &g.down[c] {
            for (y, e) in phi(*w, &g, &up, &lower_matched, &is_critical, &mut memo) {
                let t = dm.entry((c, y)).or_insert_with(Q::zero);
                *t += x * e;
            }
        }
    }
    dm.retain(|_, c: &mut Q| !c.is_zero());
    dm
}

/// Critical cells of all trees of arity `n`, with the trees for which no
/// numbering was found listed separately.
#[derive(Clone, Debug, Default)]
pub struct MorseReport {
    pub matchings: Vec<MorseMatching>,
    pub unnumbered: Vec<Tree>,
}

impl MorseReport {
    pub fn critical(&self) -> Vec<Monomial> {
        self.matchings.iter().flat_map(|m| m.critical.iter().map(|&i| m.cells[i].clone())).collect()
    }

    /// Critical-cell counts per stratum; trees without a numbering contribute
    /// their oracle Betti numbers.
    pub fn table(&self, res: &Resolution) -> Result<HomologyTable> {
        let mut t = HomologyTable::default();
        for c in self.critical() {
            let e = t.strata.entry((c.arity(), res.internal_degree(&c.tree))).or_insert_with(StratumHomology::default);
            *e.betti.entry(c.q()).or_insert(0) += 1;
            *e.generators.entry(c.q()).or_insert(0) += 1;
        }
        for tree in &self.unnumbered {
            let gens = res.generators_on(tree);
            let h = homology(&gens, |m| res.internal_degree(&m.tree), |m| Ok(res.abelianized_d(m)))?;
            for (key, s) in h.strata {
                let e = t.strata.entry(key).or_default();
                for (q, b) in s.betti {
                    *e.betti.entry(q).or_insert(0) += b;
                }
                for (q, g) in s.generators {
                    *e.generators.entry(q).or_insert(0) += g;
                }
            }
        }
        for s in t.strata.values_mut() {
            s.betti.retain(|_, b| *b > 0);
        }
        Ok(t)
    }
}

/// Matchings on every tree of arity `n` with at most `max_vertices` vertices
/// carrying at least one generator.
pub fn critical_cells(res: &Resolution, n: usize, max_vertices: usize, budget: usize) -> Result<MorseReport> {
    let gens = res.generators(n, max_vertices);
    let mut trees: Vec<Tree> = gens.into_iter().map(|m| m.tree).collect();
    trees.sort();
    trees.dedup();
    let results: Vec<Result<Option<MorseMatching>>> = trees
        .par_iter()
        .map(|t| match anick_numbering(res, t, budget) {
            Some(num) => build_matching(res, &num).map(Some),
            None => Ok(None),
        })
        .collect();
    let mut report = MorseReport::default();
    for (t, r) in trees.into_iter().zip(results) {
        match r? {
            Some(m) => report.matchings.push(m),
            None => report.unnumbered.push(t),
        }
    }
    Ok(report)
}

/// Betti numbers of the induced differential on indecomposables.
pub fn homology_oracle(res: &Resolution, n: usize, max_vertices: usize) -> Result<HomologyTable> {
    let gens = res.generators(n, max_vertices);
    let mut t = homology(&gens, |m| res.internal_degree(&m.tree), |m| Ok(res.abelianized_d(m)))?;
    for s in t.strata.values_mut() {
        s.betti.retain(|_, b| *b > 0);
    }
    Ok(t)
}

/// Maximal combs of a tree of binary vertices as vertex lists from the top,
/// flagged `true` for left combs.
pub fn maximal_combs(res: &Resolution, t: &Tree) -> Vec<(bool, Vec<usize>)> {
    let d = res.divisors(t);
    let f = &d.flat;
    let mut out = Vec::new();
    for left in [true, false] {
        let down = if left { 0 } else { 1 };
        for v in 0..f.len() {
            if f.children[v].len() != 2 {
                continue;
            }
            let starts = match f.parent[v] {
                None => true,
                Some(p) => f.children[p].len() != 2 || f.children[p][down] != Slot::V(v),
            };
            if !starts {
                continue;
            }
            let mut comb = vec![v];
            let mut cur = v;
            while let Slot::V(w) = f.children[cur][down] {
                if f.children[w].len() != 2 {
                    break;
                }
                comb.push(w);
                cur = w;
            }
            out.push((left, comb));
        }
    }
    out
}

/// Whether a set of intervals in a word of length `len` forms an Anick chain:
/// consecutive relations overlap, each one is the only relation inside the
/// segment from the end of its predecessor's predecessor, and it ends that
/// segment. `relations` lists every relation interval of the word.
pub fn is_word_chain(len: usize, relations: &[(usize, usize)], marks: &[(usize, usize)]) -> bool {
    if marks.is_empty() {
        return len <= 1;
    }
    let mut r = marks.to_vec();
    r.sort_unstable();
    if r[0].0 != 0 || r.last().unwrap().1 != len - 1 {
        return false;
    }
    for k in 0..r.len() {
        let lo = if k == 0 {
            0
        } else if k == 1 {
            1
        } else {
            r[k - 2].1 + 1
        };
        if r[k].0 < lo {
            return false;
        }
        if k > 0 && (r[k].0 > r[k - 1].1 || r[k].1 <= r[k - 1].1) {
            return false;
        }
        let inside = relations.iter().filter(|&&(a, b)| a >= lo && b <= r[k].1).count();
        if inside != 1 {
            return false;
        }
    }
    true
}

/// Whether the marks of `m` cover every maximal comb of its tree in the
/// pattern of an Anick chain, reading each comb from its lowest vertex.
pub fn is_anick_chain(res: &Resolution, m: &Monomial) -> bool {
    let d = res.divisors(&m.tree);
    let sig = res.sig();
    let kinds: Vec<Option<bool>> = res.leading().iter().map(|lt| comb_kind(sig, lt)).collect();
    for (left, comb) in maximal_combs(res, &m.tree) {
        let len = comb.len();
        let pos = |v: usize| comb.iter().position(|&x| x == v).map(|p| len - 1 - p);
        let interval = |i: usize| -> Option<(usize, usize)> {
            if kinds[d.relation[i]] != Some(left) || d.occs[i].vertices.len() < 2 {
                return None;
            }
            let ps: Option<Vec<usize>> = d.occs[i].vertices.iter().map(|&v| pos(v)).collect();
            let ps = ps?;
            Some((*ps.iter().min().unwrap(), *ps.iter().max().unwrap()))
        };
        let relations: Vec<(usize, usize)> = (0..d.len()).filter_map(interval).collect();
        let marks: Vec<(usize, usize)> = m.marks.iter().filter_map(|&i| interval(i)).collect();
        if !is_word_chain(len, &relations, &marks) {
            return false;
        }
    }
    true
}
