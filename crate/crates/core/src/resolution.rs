//! The inclusion-exclusion resolution of an operad with monomial relations.
//!
//! A basis monomial is a tree together with a set of marked relation divisors.
//! Its odd items are listed as the marks (each of degree one) in numbering
//! order followed by the odd vertices in depth-first order; every sign below
//! is the Koszul sign of a permutation of such lists.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::element::{Element, Q};
use crate::error::{Error, Result};
use crate::groebner::GroebnerBasis;
use crate::linalg::{self, SparseVec};
use crate::trees::{match_at, standardize, substitute_tracked, FlatTree, Occurrence, Sig, Tree, TreeEnumerator};

/// The relation divisors of a tree in their fixed numbering.
#[derive(Debug)]
pub struct Divisors {
    pub flat: FlatTree,
    pub occs: Vec<Occurrence>,
    /// Index of the leading term each divisor is an occurrence of.
    pub relation: Vec<usize>,
    index: HashMap<Vec<usize>, usize>,
}

impl Divisors {
    pub fn len(&self) -> usize {
        self.occs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occs.is_empty()
    }

    /// The divisor occupying exactly `vertices` (sorted).
    pub fn find(&self, vertices: &[usize]) -> Option<usize> {
        self.index.get(vertices).copied()
    }
}

/// A tree with marked divisors, listed by increasing number.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub tree: Tree,
    pub marks: Vec<usize>,
}

impl Monomial {
    pub fn new(tree: Tree, mut marks: Vec<usize>) -> Monomial {
        marks.sort_unstable();
        Monomial { tree, marks }
    }

    pub fn unmarked(tree: Tree) -> Monomial {
        Monomial { tree, marks: Vec::new() }
    }

    pub fn q(&self) -> usize {
        self.marks.len()
    }

    pub fn arity(&self) -> usize {
        self.tree.arity()
    }
}

/// A linear combination of marked monomials.
pub type Chain = BTreeMap<Monomial, Q>;

pub fn chain_add(c: &mut Chain, m: Monomial, x: Q) {
    if x.is_zero() {
        return;
    }
    let e = c.entry(m.clone()).or_insert_with(Q::zero);
    *e += x;
    if e.is_zero() {
        c.remove(&m);
    }
}

pub fn chain_axpy(c: &mut Chain, a: &Q, x: &Chain) {
    for (m, v) in x {
        chain_add(c, m.clone(), a * v);
    }
}

pub fn chain_from_element(e: &Element) -> Chain {
    e.terms().map(|(t, c)| (Monomial::unmarked(t.clone()), c.clone())).collect()
}

/// An odd-capable item of a marked monomial; the derived order is the
/// canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Item {
    Mark(usize),
    Vertex(usize),
}

/// A factor of the grafting-point factorisation of a monomial.
#[derive(Clone, Debug)]
pub struct Piece {
    /// Host vertices of the factor, sorted.
    pub vertices: Vec<usize>,
    pub occ: Occurrence,
    /// The factor as a standalone generator.
    pub mono: Monomial,
    /// Host items in the factor's canonical order.
    pub items: Vec<Item>,
}

pub struct Resolution {
    sig: Sig,
    planar: bool,
    leading: Vec<Tree>,
    cache: RwLock<HashMap<Tree, Arc<Divisors>>>,
}

impl Resolution {
    pub fn new(sig: Sig, planar: bool, leading: Vec<Tree>) -> Resolution {
        Resolution { sig, planar, leading, cache: RwLock::new(HashMap::new()) }
    }

    pub fn from_basis(gb: &GroebnerBasis) -> Resolution {
        Resolution::new(gb.sig().clone(), gb.pres.planar, gb.leading_terms())
    }

    pub fn sig(&self) -> &Sig {
        &self.sig
    }

    pub fn planar(&self) -> bool {
        self.planar
    }

    pub fn leading(&self) -> &[Tree] {
        &self.leading
    }

    /// Relation divisors ordered by depth-first position of their root, then
    /// by leading-term index.
    pub fn divisors(&self, t: &Tree) -> Arc<Divisors> {
        if let Some(d) = self.cache.read().unwrap().get(t) {
            return d.clone();
        }
        let flat = FlatTree::new(t);
        let mut occs = Vec::new();
        let mut relation = Vec::new();
        for v in 0..flat.len() {
            for (i, lt) in self.leading.iter().enumerate() {
                if let Some(o) = match_at(&flat, v, lt) {
                    occs.push(o);
                    relation.push(i);
                }
            }
        }
        let index = occs.iter().enumerate().map(|(i, o)| (o.vertices.clone(), i)).collect();
        let d = Arc::new(Divisors { flat, occs, relation, index });
        self.cache.write().unwrap().insert(t.clone(), d.clone());
        d
    }

    pub fn internal_degree(&self, t: &Tree) -> i32 {
        t.homdeg(&self.sig)
    }

    /// Homological degree: number of marks plus the internal degree.
    pub fn degree(&self, m: &Monomial) -> i32 {
        m.q() as i32 + self.internal_degree(&m.tree)
    }

    fn item_odd(&self, d: &Divisors, it: Item) -> bool {
        match it {
            Item::Mark(_) => true,
            Item::Vertex(v) => self.sig.is_odd(d.flat.gens[v]),
        }
    }

    /// Sign of the permutation taking `items` to canonical order.
    pub fn sign_to_canonical(&self, d: &Divisors, items: &[Item]) -> i8 {
        let odd: Vec<Item> = items.iter().copied().filter(|&it| self.item_odd(d, it)).collect();
        let mut inv = 0usize;
        for i in 0..odd.len() {
            for j in i + 1..odd.len() {
                if odd[i] > odd[j] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn canonical_items(&self, m: &Monomial) -> Vec<Item> {
        let n = m.tree.vertex_count();
        m.marks.iter().map(|&i| Item::Mark(i)).chain((0..n).map(Item::Vertex)).collect()
    }

    fn covered_edges(d: &Divisors, marks: &[usize]) -> Vec<(usize, usize, bool)> {
        d.flat
            .internal_edges()
            .into_iter()
            .map(|(p, c)| {
                let cov = marks.iter().any(|&i| d.occs[i].contains_vertex(p) && d.occs[i].contains_vertex(c));
                (p, c, cov)
            })
            .collect()
    }

    /// True if every internal edge lies inside some mark.
    pub fn is_indecomposable(&self, m: &Monomial) -> bool {
        let d = self.divisors(&m.tree);
        Self::covered_edges(&d, &m.marks).iter().all(|e| e.2)
    }

    /// Grafting-point factorisation: cut every internal edge not inside a mark.
    /// Factors are ordered by their root.
    pub fn pieces(&self, m: &Monomial) -> Vec<Piece> {
        let d = self.divisors(&m.tree);
        let n = d.flat.len();
        let mut comp: Vec<usize> = (0..n).collect();
        for v in 0..n {
            if let Some(p) = d.flat.parent[v] {
                let cov = m.marks.iter().any(|&i| d.occs[i].contains_vertex(p) && d.occs[i].contains_vertex(v));
                if cov {
                    comp[v] = comp[p];
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            groups.entry(comp[v]).or_default().push(v);
        }
        groups
            .into_values()
            .map(|vertices| {
                let occ = standardize(&d.flat, &vertices).expect("factor is connected");
                let pd = self.divisors(&occ.pattern);
                let mut local: Vec<(usize, usize)> = m
                    .marks
                    .iter()
                    .filter(|&&i| vertices.binary_search(&d.occs[i].root).is_ok())
                    .map(|&i| {
                        let vs: Vec<usize> = d.occs[i].vertices.iter().map(|v| vertices.binary_search(v).unwrap()).collect();
                        (pd.find(&vs).expect("mark is a divisor of its factor"), i)
                    })
                    .collect();
                local.sort_unstable();
                let mut items: Vec<Item> = local.iter().map(|&(_, i)| Item::Mark(i)).collect();
                items.extend(vertices.iter().map(|&v| Item::Vertex(v)));
                let mono = Monomial { tree: occ.pattern.clone(), marks: local.iter().map(|&(k, _)| k).collect() };
                Piece { vertices, occ, mono, items }
            })
            .collect()
    }

    /// Sign relating the factors listed in order to the canonical monomial.
    pub fn factor_sign(&self, m: &Monomial, pieces: &[Piece]) -> i8 {
        let d = self.divisors(&m.tree);
        let items: Vec<Item> = pieces.iter().flat_map(|p| p.items.iter().copied()).collect();
        self.sign_to_canonical(&d, &items)
    }

    /// Replaces factor `i` of `m` by the monomial `y` of the same arity and
    /// returns the composite with the sign of the factors listed in order.
    pub fn replace_piece(&self, m: &Monomial, pieces: &[Piece], i: usize, y: &Monomial) -> Result<(Monomial, i8)> {
        let d = self.divisors(&m.tree);
        let (tree, host_pos, inner_pos) = substitute_tracked(&self.sig, &d.flat, &pieces[i].occ, &y.tree)?;
        let nd = self.divisors(&tree);
        let yd = self.divisors(&y.tree);
        let map_mark = |vs: Vec<usize>| -> Result<usize> {
            let mut vs = vs;
            vs.sort_unstable();
            nd.find(&vs).ok_or_else(|| Error::Occurrence("mark lost under substitution".into()))
        };
        let mut items = Vec::new();
        let mut marks = Vec::new();
        for (j, p) in pieces.iter().enumerate() {
            if j == i {
                for &k in &y.marks {
                    let nk = map_mark(yd.occs[k].vertices.iter().map(|&v| inner_pos[v]).collect())?;
                    marks.push(nk);
                    items.push(Item::Mark(nk));
                }
                items.extend(inner_pos.iter().map(|&v| Item::Vertex(v)));
                continue;
            }
            for it in &p.items {
                match *it {
                    Item::Mark(h) => {
                        let nk = map_mark(d.occs[h].vertices.iter().map(|&v| host_pos[v].unwrap()).collect())?;
                        marks.push(nk);
                        items.push(Item::Mark(nk));
                    }
                    Item::Vertex(v) => items.push(Item::Vertex(host_pos[v].unwrap())),
                }
            }
        }
        let s = self.sign_to_canonical(&nd, &items);
        Ok((Monomial::new(tree, marks), s))
    }

    /// The differential removing one mark at a time.
    pub fn d(&self, m: &Monomial) -> Chain {
        let mut out = Chain::new();
        for r in 0..m.marks.len() {
            let mut marks = m.marks.clone();
            marks.remove(r);
            let c = if r % 2 == 0 { Q::one() } else { -Q::one() };
            chain_add(&mut out, Monomial { tree: m.tree.clone(), marks }, c);
        }
        out
    }

    pub fn d_chain(&self, c: &Chain) -> Chain {
        let mut out = Chain::new();
        for (m, x) in c {
            chain_axpy(&mut out, x, &self.d(m));
        }
        out
    }

    /// The differential induced on indecomposables.
    pub fn abelianized_d(&self, m: &Monomial) -> Chain {
        self.d(m).into_iter().filter(|(y, _)| self.is_indecomposable(y)).collect()
    }

    /// Every marking of `t`: the basis of the complex attached to `t`.
    pub fn markings(&self, t: &Tree) -> Vec<Monomial> {
        let d = self.divisors(t);
        let k = d.len();
        (0u64..1 << k)
            .map(|mask| Monomial { tree: t.clone(), marks: (0..k).filter(|i| mask >> i & 1 == 1).collect() })
            .collect()
    }

    /// Indecomposable markings of `t`.
    pub fn generators_on(&self, t: &Tree) -> Vec<Monomial> {
        let d = self.divisors(t);
        let edges = d.flat.internal_edges();
        let cover: Vec<Vec<usize>> = edges
            .iter()
            .map(|&(p, c)| (0..d.len()).filter(|&i| d.occs[i].contains_vertex(p) && d.occs[i].contains_vertex(c)).collect())
            .collect();
        if cover.iter().any(|c| c.is_empty()) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        fn rec(i: usize, k: usize, cover: &[Vec<usize>], chosen: &mut Vec<usize>, t: &Tree, out: &mut Vec<Monomial>) {
            if i == k {
                if cover.iter().all(|c| c.iter().any(|x| chosen.contains(x))) {
                    out.push(Monomial { tree: t.clone(), marks: chosen.clone() });
                }
                return;
            }
            rec(i + 1, k, cover, chosen, t, out);
            chosen.push(i);
            rec(i + 1, k, cover, chosen, t, out);
            chosen.pop();
        }
        rec(0, d.len(), &cover, &mut chosen, t, &mut out);
        out.sort();
        out
    }

    /// All indecomposable generators of arity `n` on trees with at most
    /// `max_vertices` vertices.
    pub fn generators(&self, n: usize, max_vertices: usize) -> Vec<Monomial> {
        // A divisor covering an edge has its root at most `reach` levels above
        // the parent vertex, so edges deeper than that must already be covered
        // inside the subtree: the filter is inherited by subtrees.
        let reach = self.leading.iter().map(tree_depth).max().unwrap_or(1).saturating_sub(2);
        let leading = &self.leading;
        let trees = TreeEnumerator::new(&self.sig, self.planar, max_vertices)
            .with_filter(move |t| {
                let flat = FlatTree::new(t);
                let mut occs: Vec<Occurrence> = Vec::new();
                for v in 0..flat.len() {
                    occs.extend(leading.iter().filter_map(|lt| match_at(&flat, v, lt)));
                }
                flat.internal_edges().iter().all(|&(p, c)| {
                    flat.depth(p) < reach || occs.iter().any(|o| o.contains_vertex(p) && o.contains_vertex(c))
                })
            })
            .trees(n);
        let mut out: Vec<Monomial> = trees.par_iter().filter(|t| !t.is_leaf()).flat_map_iter(|t| self.generators_on(t)).collect();
        out.sort_by(|a, b| (a.q(), &a.tree, &a.marks).cmp(&(b.q(), &b.tree, &b.marks)));
        out
    }
}

fn tree_depth(t: &Tree) -> usize {
    match t {
        Tree::Leaf(_) => 0,
        Tree::Node(_, ch) => 1 + ch.iter().map(tree_depth).max().unwrap_or(0),
    }
}

/// Betti numbers of one stratum, indexed by the number of marks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StratumHomology {
    pub generators: BTreeMap<usize, usize>,
    pub ranks: BTreeMap<usize, usize>,
    pub betti: BTreeMap<usize, usize>,
}

/// Homology per `(arity, grading)` stratum; the grading is the internal
/// degree unless a caller chooses another one preserved by the differential.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HomologyTable {
    pub strata: BTreeMap<(usize, i32), StratumHomology>,
}

impl HomologyTable {
    /// Nonzero Betti numbers as `(arity, grading, marks) -> dim`.
    pub fn nonzero(&self) -> BTreeMap<(usize, i32, usize), usize> {
        let mut out = BTreeMap::new();
        for (&(n, i), s) in &self.strata {
            for (&q, &b) in &s.betti {
                if b > 0 {
                    out.insert((n, i, q), b);
                }
            }
        }
        out
    }

    /// Total dimension by arity and grading plus marks.
    pub fn by_total_degree(&self) -> BTreeMap<(usize, i32), usize> {
        let mut out = BTreeMap::new();
        for ((n, i, q), b) in self.nonzero() {
            *out.entry((n, i + q as i32)).or_insert(0) += b;
        }
        out
    }

    pub fn merge(&mut self, other: HomologyTable) {
        self.strata.extend(other.strata);
    }
}

/// Exact-rank homology of a differential on a set of generators, which must
/// be closed under the differential and preserve `grading`.
pub fn homology<F>(gens: &[Monomial], grading: impl Fn(&Monomial) -> i32, diff: F) -> Result<HomologyTable>
where
    F: Fn(&Monomial) -> Result<Chain> + Sync,
{
    let mut strata: BTreeMap<(usize, i32), BTreeMap<usize, Vec<&Monomial>>> = BTreeMap::new();
    for g in gens {
        strata.entry((g.arity(), grading(g))).or_default().entry(g.q()).or_default().push(g);
    }
    let mut table = HomologyTable::default();
    for (key, by_q) in strata {
        let index: HashMap<&Monomial, usize> = by_q.values().flat_map(|v| v.iter().enumerate().map(|(i, m)| (*m, i))).collect();
        let mut sh = StratumHomology::default();
        for (&q, ms) in &by_q {
            sh.generators.insert(q, ms.len());
            if q == 0 {
                sh.ranks.insert(0, 0);
                continue;
            }
            let cols: Vec<SparseVec> = ms
                .par_iter()
                .map(|m| -> Result<SparseVec> {
                    let mut v = SparseVec::new();
                    for (y, c) in diff(m)? {
                        if y.q() != q - 1 || y.arity() != key.0 {
                            return Err(Error::Other("differential left the stratum".into()));
                        }
                        match by_q.get(&(q - 1)).and(index.get(&y)) {
                            Some(&j) => {
                                v.insert(j, c);
                            }
                            None => return Err(Error::Bound(format!("generator {:?} outside the enumerated range", y.tree))),
                        }
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            sh.ranks.insert(q, linalg::rank(cols));
        }
        for (&q, &g) in &sh.generators {
            let r_out = sh.ranks.get(&q).copied().unwrap_or(0);
            let r_in = sh.ranks.get(&(q + 1)).copied().unwrap_or(0);
            sh.betti.insert(q, g - r_out - r_in);
        }
        table.strata.insert(key, sh);
    }
    Ok(table)
}

/// Checks the complex on all markings of `t`: `d^2 = 0`, and its homology is
/// zero if `t` is divisible and one-dimensional in degree zero otherwise.
/// Returns the total Betti number.
pub fn tree_complex_betti(res: &Resolution, t: &Tree) -> Result<usize> {
    let basis = res.markings(t);
    let k = res.divisors(t).len();
    let pos: HashMap<&Vec<usize>, usize> = basis.iter().enumerate().map(|(i, m)| (&m.marks, i)).collect();
    let mut ranks = vec![0usize; k + 2];
    for q in 1..=k {
        let cols: Vec<SparseVec> = basis
            .iter()
            .filter(|m| m.q() == q)
            .map(|m| {
                let dm = res.d(m);
                let dd = res.d_chain(&dm);
                if !dd.is_empty() {
                    return Err(Error::Other("d^2 is nonzero".into()));
                }
                Ok(dm.into_iter().map(|(y, c)| (pos[&y.marks], c)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        ranks[q] = linalg::rank(cols);
    }
    let mut total = 0;
    for q in 0..=k {
        let dim = basis.iter().filter(|m| m.q() == q).count();
        total += dim - ranks[q] - ranks[q + 1];
    }
    Ok(total)
}
