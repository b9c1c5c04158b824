//! Division, small common multiples, S-polynomials and Buchberger completion.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::element::{Element, Q};
use crate::error::{Error, Result};
use crate::orders::{MonomialOrder, OrdKey};
use crate::trees::{match_at, FlatTree, GenId, Label, Occurrence, Sig, Slot, Tree, TreeEnumerator};

/// Generators, relations, order and scalar parameters of an operad.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub name: String,
    pub sig: Sig,
    pub relations: Vec<Element>,
    pub order: MonomialOrder,
    pub params: BTreeMap<String, Q>,
    /// Restricts every enumeration to trees whose leaves read `1..n`.
    pub planar: bool,
}

impl Presentation {
    pub fn new(name: &str, sig: Sig, relations: Vec<Element>, order: MonomialOrder, planar: bool) -> Result<Self> {
        let p = Presentation { name: name.to_string(), sig, relations, order, params: BTreeMap::new(), planar };
        p.validate()?;
        Ok(p)
    }

    pub fn with_params(mut self, params: BTreeMap<String, Q>) -> Self {
        self.params = params;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order.signature().as_ref() != self.sig.as_ref() {
            return Err(Error::Other("order defined over a different signature".into()));
        }
        for r in &self.relations {
            if r.is_zero() {
                return Err(Error::ZeroElement);
            }
            r.homdeg(&self.sig)?;
            for (t, _) in r.terms() {
                t.validate(&self.sig)?;
                if self.planar && !t.is_planar() {
                    return Err(Error::Leaves(format!("{} is not planar", t.display(&self.sig))));
                }
            }
        }
        Ok(())
    }

    pub fn max_relation_arity(&self) -> usize {
        self.relations.iter().map(Element::arity).max().unwrap_or(1)
    }

    /// Default vertex bound for an arity bound.
    pub fn default_vertex_bound(&self, arity: usize) -> usize {
        if self.sig.has_unary() {
            2 * arity + 2
        } else {
            arity.saturating_sub(1).max(1)
        }
    }

    pub fn leading_term(&self, f: &Element) -> Result<(Tree, Q)> {
        leading_term(&self.order, f)
    }
}

pub fn leading_term(ord: &MonomialOrder, f: &Element) -> Result<(Tree, Q)> {
    f.terms()
        .max_by(|a, b| ord.compare(a.0, b.0))
        .map(|(t, c)| (t.clone(), c.clone()))
        .ok_or(Error::ZeroElement)
}

pub fn make_monic(ord: &MonomialOrder, f: &Element) -> Result<Element> {
    let (_, c) = leading_term(ord, f)?;
    Ok(f.scale(&(Q::one() / c)))
}

/// Truncation bounds: arity and number of internal vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub arity: usize,
    pub vertices: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GbElement {
    pub id: usize,
    pub lt: Tree,
    pub poly: Element,
}

/// A small common multiple with the two leading-term occurrences.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Scm {
    pub multiple: Tree,
    pub occ_u: Occurrence,
    pub occ_v: Occurrence,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScmRecord {
    pub left: usize,
    pub right: usize,
    pub multiple: String,
    pub reduces_to_zero: bool,
    pub residue: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub bounds: Bounds,
    pub pairs_checked: usize,
    pub scms: Vec<ScmRecord>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.scms.iter().all(|r| r.reduces_to_zero)
    }

    pub fn first_failure(&self) -> Option<&ScmRecord> {
        self.scms.iter().find(|r| !r.reduces_to_zero)
    }
}

#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    pub pres: Presentation,
    pub elements: Vec<GbElement>,
    pub bounds: Bounds,
    index: HashMap<GenId, Vec<usize>>,
    next_id: usize,
}

impl GroebnerBasis {
    /// The relations made monic, without completion.
    pub fn from_relations(pres: &Presentation, bounds: Bounds) -> Result<Self> {
        let mut gb = GroebnerBasis { pres: pres.clone(), elements: Vec::new(), bounds, index: HashMap::new(), next_id: 0 };
        let mut polys = Vec::new();
        for r in &pres.relations {
            polys.push(make_monic(&pres.order, r)?);
        }
        gb.set_elements(polys)?;
        Ok(gb)
    }

    /// A basis consisting of monomials only.
    pub fn monomial(pres: &Presentation, lts: &[Tree], bounds: Bounds) -> Result<Self> {
        let mut p = pres.clone();
        p.relations = lts.iter().map(|t| Element::monomial(t.clone(), Q::one())).collect();
        GroebnerBasis::from_relations(&p, bounds)
    }

    fn set_elements(&mut self, polys: Vec<Element>) -> Result<()> {
        let mut elems = Vec::new();
        for p in polys {
            let (lt, _) = leading_term(&self.pres.order, &p)?;
            elems.push((self.pres.order.ord_key(&lt), p));
        }
        elems.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        self.elements = elems
            .into_iter()
            .map(|(k, p)| {
                let id = self.next_id;
                self.next_id += 1;
                GbElement { id, lt: k.tree, poly: p }
            })
            .collect();
        self.rebuild_index();
        Ok(())
    }

    fn rebuild_index(&mut self) {
        self.index.clear();
        for (i, e) in self.elements.iter().enumerate() {
            if let Some(g) = e.lt.root() {
                self.index.entry(g).or_default().push(i);
            }
        }
    }

    pub fn sig(&self) -> &Sig {
        &self.pres.sig
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.pres.order
    }

    pub fn leading_terms(&self) -> Vec<Tree> {
        self.elements.iter().map(|e| e.lt.clone()).collect()
    }

    pub fn polys(&self) -> Vec<Element> {
        self.elements.iter().map(|e| e.poly.clone()).collect()
    }

    /// First divisor occurrence in `t`: smallest root vertex, then basis order.
    pub fn find_divisor(&self, flat: &FlatTree) -> Option<(usize, Occurrence)> {
        self.find_divisor_except(flat, None)
    }

    fn find_divisor_except(&self, flat: &FlatTree, skip: Option<usize>) -> Option<(usize, Occurrence)> {
        for v in 0..flat.len() {
            if let Some(cands) = self.index.get(&flat.gens[v]) {
                for &i in cands {
                    if Some(i) == skip {
                        continue;
                    }
                    if let Some(occ) = match_at(flat, v, &self.elements[i].lt) {
                        return Some((i, occ));
                    }
                }
            }
        }
        None
    }

    /// True if no leading term divides `t`.
    pub fn is_normal(&self, t: &Tree) -> bool {
        self.find_divisor(&FlatTree::new(t)).is_none()
    }

    /// True if no leading term occurs rooted at the root of `t`.
    pub fn is_normal_at_root(&self, t: &Tree) -> bool {
        let Some(g) = t.root() else { return true };
        let Some(cands) = self.index.get(&g) else { return true };
        let flat = FlatTree::new(t);
        cands.iter().all(|&i| match_at(&flat, 0, &self.elements[i].lt).is_none())
    }

    /// Normal form of `f`: the maximal reducible monomial is rewritten first,
    /// at its first divisor occurrence.
    pub fn reduce(&self, f: &Element) -> Result<Element> {
        if f.arity() > self.bounds.arity {
            return Err(Error::Bound(format!("arity {} above bound {}", f.arity(), self.bounds.arity)));
        }
        Ok(self.reduce_except(f, None))
    }

    fn reduce_except(&self, f: &Element, skip: Option<usize>) -> Element {
        let ord = &self.pres.order;
        let sig = &self.pres.sig;
        let n = f.arity();
        let mut work: BTreeMap<OrdKey, Q> = f.terms().map(|(t, c)| (ord.ord_key(t), c.clone())).collect();
        let mut rem = Element::zero(n);
        while let Some((k, c)) = work.pop_last() {
            let flat = FlatTree::new(&k.tree);
            match self.find_divisor_except(&flat, skip) {
                None => rem.add_term(k.tree, c),
                Some((i, occ)) => {
                    let sub = Element::substitute_flat(sig, n, &flat, &occ, &self.elements[i].poly)
                        .expect("divisor occurrence matches its leading term");
                    for (t, d) in sub.terms() {
                        if *t == k.tree {
                            continue;
                        }
                        let key = ord.ord_key(t);
                        let e = work.entry(key).or_insert_with(Q::zero);
                        *e -= &c * d;
                        if e.is_zero() {
                            let key = ord.ord_key(t);
                            work.remove(&key);
                        }
                    }
                }
            }
        }
        rem
    }

    /// Reduction of `f` recording the rewriting steps as (element index,
    /// host tree, occurrence, coefficient); `f - residue` equals the sum of
    /// `coefficient * substitute(host, occurrence, element)`.
    pub fn reduce_with_trace(&self, f: &Element) -> Result<(Element, Vec<(usize, Tree, Occurrence, Q)>)> {
        if f.arity() > self.bounds.arity {
            return Err(Error::Bound(format!("arity {} above bound {}", f.arity(), self.bounds.arity)));
        }
        let ord = &self.pres.order;
        let sig = &self.pres.sig;
        let n = f.arity();
        let mut work: BTreeMap<OrdKey, Q> = f.terms().map(|(t, c)| (ord.ord_key(t), c.clone())).collect();
        let mut rem = Element::zero(n);
        let mut trace = Vec::new();
        while let Some((k, c)) = work.pop_last() {
            let flat = FlatTree::new(&k.tree);
            match self.find_divisor(&flat) {
                None => rem.add_term(k.tree, c),
                Some((i, occ)) => {
                    let sub = Element::substitute_flat(sig, n, &flat, &occ, &self.elements[i].poly)?;
                    for (t, d) in sub.terms() {
                        if *t == k.tree {
                            continue;
                        }
                        let key = ord.ord_key(t);
                        let e = work.entry(key.clone()).or_insert_with(Q::zero);
                        *e -= &c * d;
                        if e.is_zero() {
                            work.remove(&key);
                        }
                    }
                    trace.push((i, k.tree.clone(), occ, c));
                }
            }
        }
        Ok((rem, trace))
    }

    /// Small common multiples of the leading terms of elements `i` and `j`.
    pub fn scms(&self, i: usize, j: usize) -> Vec<Scm> {
        small_common_multiples(&self.elements[i].lt, &self.elements[j].lt, self.bounds, self.pres.planar)
    }

    /// S-polynomial of elements `i` and `j` along an SCM.
    pub fn s_polynomial(&self, i: usize, j: usize, scm: &Scm) -> Result<Element> {
        s_polynomial(&self.pres.sig, &scm.multiple, (&scm.occ_u, &self.elements[i].poly), (&scm.occ_v, &self.elements[j].poly))
    }

    /// Checks that every S-polynomial within the bounds reduces to zero.
    pub fn is_groebner(&self) -> Certificate {
        let pairs: Vec<(usize, usize)> =
            (0..self.elements.len()).flat_map(|i| (i..self.elements.len()).map(move |j| (i, j))).collect();
        let sig = &self.pres.sig;
        let mut scms: Vec<ScmRecord> = pairs
            .par_iter()
            .flat_map_iter(|&(i, j)| {
                self.scms(i, j)
                    .into_iter()
                    .map(|scm| {
                        let s = self.s_polynomial(i, j, &scm).expect("SCM substitution");
                        let r = self.reduce_except(&s, None);
                        ScmRecord {
                            left: i,
                            right: j,
                            multiple: scm.multiple.display(sig).to_string(),
                            reduces_to_zero: r.is_zero(),
                            residue: r.display(sig).to_string(),
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        scms.sort_by(|a, b| (a.left, a.right, &a.multiple).cmp(&(b.left, b.right, &b.multiple)));
        Certificate { bounds: self.bounds, pairs_checked: pairs.len(), scms }
    }

    /// Tail-reduces every element and removes elements whose leading term is
    /// divisible by another's, until stable.
    fn interreduce(&mut self) -> Result<()> {
        loop {
            let mut changed = false;
            let mut i = 0;
            while i < self.elements.len() {
                let r = self.reduce_except(&self.elements[i].poly, Some(i));
                if r != self.elements[i].poly {
                    changed = true;
                    let mut polys: Vec<Element> = self.polys();
                    if r.is_zero() {
                        polys.remove(i);
                    } else {
                        polys[i] = make_monic(&self.pres.order, &r)?;
                    }
                    let old: HashMap<Element, usize> = self.elements.iter().map(|e| (e.poly.clone(), e.id)).collect();
                    self.set_elements_keep_ids(polys, &old)?;
                    i = 0;
                    continue;
                }
                i += 1;
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn set_elements_keep_ids(&mut self, polys: Vec<Element>, old: &HashMap<Element, usize>) -> Result<()> {
        self.set_elements(polys)?;
        for e in self.elements.iter_mut() {
            if let Some(&id) = old.get(&e.poly) {
                e.id = id;
            }
        }
        Ok(())
    }

    /// Buchberger completion within the bounds.
    pub fn complete(pres: &Presentation, bounds: Bounds) -> Result<Self> {
        let mut gb = GroebnerBasis::from_relations(pres, bounds)?;
        gb.elements.retain(|e| e.poly.arity() <= bounds.arity);
        gb.rebuild_index();
        gb.interreduce()?;
        let mut done: HashSet<(usize, usize)> = HashSet::new();
        loop {
            let pairs: Vec<(usize, usize)> = (0..gb.elements.len())
                .flat_map(|i| (i..gb.elements.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| !done.contains(&(gb.elements[i].id, gb.elements[j].id)))
                .collect();
            let snapshot = &gb;
            let mut new: Vec<Element> = pairs
                .par_iter()
                .flat_map_iter(|&(i, j)| {
                    snapshot
                        .scms(i, j)
                        .into_iter()
                        .filter_map(|scm| {
                            let s = snapshot.s_polynomial(i, j, &scm).expect("SCM substitution");
                            let r = snapshot.reduce_except(&s, None);
                            (!r.is_zero()).then_some(r)
                        })
                        .collect::<Vec<_>>()
                })
                .map(|r| make_monic(&snapshot.pres.order, &r).expect("nonzero residue"))
                .collect();
            for &(i, j) in &pairs {
                done.insert((gb.elements[i].id, gb.elements[j].id));
            }
            new.sort();
            new.dedup();
            if new.is_empty() {
                return Ok(gb);
            }
            let old: HashMap<Element, usize> = gb.elements.iter().map(|e| (e.poly.clone(), e.id)).collect();
            let mut polys = gb.polys();
            // Reduce the new elements against each other before merging.
            let mut added: Vec<Element> = Vec::new();
            for f in new {
                let mut tmp = gb.clone();
                let mut ps = tmp.polys();
                ps.extend(added.iter().cloned());
                tmp.set_elements(ps)?;
                let r = tmp.reduce_except(&f, None);
                if !r.is_zero() {
                    added.push(make_monic(&gb.pres.order, &r)?);
                }
            }
            polys.extend(added);
            gb.set_elements_keep_ids(polys, &old)?;
            gb.interreduce()?;
        }
    }

    /// Normal monomials of arity `n` within the vertex bound.
    pub fn normal_monomials(&self, n: usize) -> Result<Vec<Tree>> {
        if n > self.bounds.arity {
            return Err(Error::Bound(format!("arity {n} above bound {}", self.bounds.arity)));
        }
        let mut en = TreeEnumerator::new(&self.pres.sig, self.pres.planar, self.bounds.vertices)
            .with_filter(|t| self.is_normal_at_root(t));
        Ok(en.trees(n))
    }

    /// Counts of normal monomials of arity `n` by (homological degree, weight).
    pub fn hilbert(&self, n: usize) -> Result<BTreeMap<(i32, i64), usize>> {
        let mut out = BTreeMap::new();
        for t in self.normal_monomials(n)? {
            *out.entry((t.homdeg(&self.pres.sig), t.weight(&self.pres.sig))).or_insert(0) += 1;
        }
        Ok(out)
    }
}

/// `substitute(m, occ1, g1) - substitute(m, occ2, g2)` with the occurrence
/// whose root comes first in depth-first order taken as the first.
pub fn s_polynomial(sig: &Sig, m: &Tree, a: (&Occurrence, &Element), b: (&Occurrence, &Element)) -> Result<Element> {
    let (first, second) = if b.0.root < a.0.root { (b, a) } else { (a, b) };
    let flat = FlatTree::new(m);
    let n = m.arity();
    let x = Element::substitute_flat(sig, n, &flat, first.0, first.1)?;
    let y = Element::substitute_flat(sig, n, &flat, second.0, second.1)?;
    Ok(x.sub(&y))
}

/// Planar tree shape with placeholder leaves, built by gluing two patterns.
#[derive(Clone, Debug)]
enum Shape {
    Leaf,
    Node(GenId, Vec<Shape>),
}

struct Glue<'a> {
    u: &'a FlatTree,
    v: &'a FlatTree,
    /// Vertex of `u` carrying the root of `v`.
    at: usize,
    u_verts: Vec<usize>,
    v_verts: Vec<usize>,
    count: usize,
}

impl Glue<'_> {
    fn build(&mut self, us: Option<Slot>, vs: Option<Slot>) -> Option<Shape> {
        let vs = match (us, vs) {
            (Some(Slot::V(x)), None) if x == self.at => Some(self.v.root),
            _ => vs,
        };
        let uv = match us {
            Some(Slot::V(x)) => Some(x),
            _ => None,
        };
        let vv = match vs {
            Some(Slot::V(x)) => Some(x),
            _ => None,
        };
        match (uv, vv) {
            (None, None) => Some(Shape::Leaf),
            (Some(x), Some(y)) => {
                if self.u.gens[x] != self.v.gens[y] {
                    return None;
                }
                let idx = self.count;
                self.count += 1;
                self.u_verts.push(idx);
                self.v_verts.push(idx);
                let mut ch = Vec::new();
                for k in 0..self.u.children[x].len() {
                    ch.push(self.build(Some(self.u.children[x][k]), Some(self.v.children[y][k]))?);
                }
                Some(Shape::Node(self.u.gens[x], ch))
            }
            (Some(x), None) => {
                let idx = self.count;
                self.count += 1;
                self.u_verts.push(idx);
                let mut ch = Vec::new();
                for k in 0..self.u.children[x].len() {
                    ch.push(self.build(Some(self.u.children[x][k]), None)?);
                }
                Some(Shape::Node(self.u.gens[x], ch))
            }
            (None, Some(y)) => {
                let idx = self.count;
                self.count += 1;
                self.v_verts.push(idx);
                let mut ch = Vec::new();
                for k in 0..self.v.children[y].len() {
                    ch.push(self.build(None, Some(self.v.children[y][k]))?);
                }
                Some(Shape::Node(self.v.gens[y], ch))
            }
        }
    }
}

fn shape_leaves(s: &Shape) -> usize {
    match s {
        Shape::Leaf => 1,
        Shape::Node(_, ch) => ch.iter().map(shape_leaves).sum(),
    }
}

/// All canonical labellings of a planar shape with the label set `labels`.
fn labellings(s: &Shape, labels: &[Label]) -> Vec<Tree> {
    match s {
        Shape::Leaf => vec![Tree::Leaf(labels[0])],
        Shape::Node(g, ch) => {
            let sizes: Vec<usize> = ch.iter().map(shape_leaves).collect();
            let mut out = Vec::new();
            let mut parts: Vec<Vec<Label>> = Vec::new();
            fn split(
                g: GenId,
                ch: &[Shape],
                sizes: &[usize],
                rest: &[Label],
                parts: &mut Vec<Vec<Label>>,
                out: &mut Vec<Tree>,
            ) {
                let k = parts.len();
                if k == ch.len() {
                    let mut acc: Vec<Vec<Tree>> = vec![Vec::new()];
                    for (c, p) in ch.iter().zip(parts.iter()) {
                        let subs = labellings(c, p);
                        let mut next = Vec::new();
                        for a in &acc {
                            for s in &subs {
                                let mut b = a.clone();
                                b.push(s.clone());
                                next.push(b);
                            }
                        }
                        acc = next;
                    }
                    out.extend(acc.into_iter().map(|children| Tree::Node(g, children)));
                    return;
                }
                let first = rest[0];
                for combo in crate::trees::choose(&rest[1..], sizes[k] - 1) {
                    let mut block = vec![first];
                    block.extend(combo.iter().copied());
                    let left: Vec<Label> = rest[1..].iter().copied().filter(|x| !combo.contains(x)).collect();
                    parts.push(block);
                    split(g, ch, sizes, &left, parts, out);
                    parts.pop();
                }
            }
            split(*g, ch, &sizes, labels, &mut parts, &mut out);
            out
        }
    }
}

fn planar_labelling(s: &Shape, next: &mut Label) -> Tree {
    match s {
        Shape::Leaf => {
            *next += 1;
            Tree::Leaf(*next)
        }
        Shape::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| planar_labelling(c, next)).collect()),
    }
}

/// Small common multiples of `u` and `v`: trees covered by overlapping
/// occurrences of both, within the bounds.
pub fn small_common_multiples(u: &Tree, v: &Tree, bounds: Bounds, planar: bool) -> Vec<Scm> {
    if u.is_leaf() || v.is_leaf() {
        return Vec::new();
    }
    let fu = FlatTree::new(u);
    let fv = FlatTree::new(v);
    let mut out: BTreeSet<Scm> = BTreeSet::new();
    // v's root inside u, then u's root strictly inside v.
    for (a, b, swap) in [(&fu, &fv, false), (&fv, &fu, true)] {
        for at in 0..a.len() {
            if swap && (at == 0 || u == v) {
                continue;
            }
            let mut glue = Glue { u: a, v: b, at, u_verts: Vec::new(), v_verts: Vec::new(), count: 0 };
            let Some(shape) = glue.build(Some(a.root), None) else { continue };
            let (a_verts, b_verts) = (glue.u_verts, glue.v_verts);
            if a_verts == b_verts && u == v {
                continue;
            }
            let n = shape_leaves(&shape);
            if n > bounds.arity || glue.count > bounds.vertices {
                continue;
            }
            let trees = if planar {
                vec![planar_labelling(&shape, &mut 0)]
            } else {
                let labels: Vec<Label> = (1..=n as Label).collect();
                labellings(&shape, &labels)
            };
            let (pa, pb) = if swap { (v, u) } else { (u, v) };
            for m in trees {
                let flat = FlatTree::new(&m);
                let Some(oa) = match_at(&flat, a_verts[0], pa) else { continue };
                let Some(ob) = match_at(&flat, b_verts[0], pb) else { continue };
                if oa.vertices != a_verts || ob.vertices != b_verts {
                    continue;
                }
                let (occ_u, occ_v) = if swap { (ob, oa) } else { (oa, ob) };
                out.insert(Scm { multiple: m, occ_u, occ_v });
            }
        }
    }
    out.into_iter().collect()
}
