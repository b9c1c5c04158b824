//! Tree monomials of free shuffle operads.
//!
//! A [`Tree`] is always kept in canonical planar form: the inputs of every
//! vertex are sorted by the smallest leaf reachable through them. Internal
//! vertices are enumerated depth-first (root first, children in planar order);
//! this enumeration is the reference ordering for Koszul signs.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type GenId = u16;
pub type Label = u16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub arity: usize,
    pub homdeg: i32,
    pub weight: u32,
}

impl Generator {
    pub fn new(name: &str, arity: usize, homdeg: i32) -> Self {
        Generator { name: name.to_string(), arity, homdeg, weight: 1 }
    }

    pub fn with_weight(mut self, weight: u32) -> Self {
        self.weight = weight;
        self
    }

    pub fn is_odd(&self) -> bool {
        self.homdeg.rem_euclid(2) == 1
    }
}

/// The generating collection of a free operad.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    gens: Vec<Generator>,
}

pub type Sig = Arc<Signature>;

impl Signature {
    pub fn new(gens: Vec<Generator>) -> Result<Sig> {
        for (i, g) in gens.iter().enumerate() {
            if g.arity == 0 {
                return Err(Error::Generator(format!("{} has arity 0", g.name)));
            }
            if g.name.is_empty() {
                return Err(Error::Generator("empty generator name".into()));
            }
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::Generator(format!("duplicate name {}", g.name)));
            }
        }
        if gens.len() > GenId::MAX as usize {
            return Err(Error::Generator("too many generators".into()));
        }
        Ok(Arc::new(Signature { gens }))
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn get(&self, id: GenId) -> &Generator {
        &self.gens[id as usize]
    }

    pub fn id(&self, name: &str) -> Option<GenId> {
        self.gens.iter().position(|g| g.name == name).map(|i| i as GenId)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn ids(&self) -> impl Iterator<Item = GenId> {
        0..self.gens.len() as GenId
    }

    pub fn is_odd(&self, id: GenId) -> bool {
        self.gens[id as usize].is_odd()
    }

    pub fn has_unary(&self) -> bool {
        self.gens.iter().any(|g| g.arity == 1)
    }
}

/// A tree monomial in canonical planar form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Leaf(Label),
    Node(GenId, Vec<Tree>),
}

impl Tree {
    /// The degenerate tree (composition unit).
    pub fn unit() -> Tree {
        Tree::Leaf(1)
    }

    pub fn corolla(sig: &Signature, g: GenId) -> Tree {
        let a = sig.get(g).arity;
        Tree::Node(g, (1..=a as Label).map(Tree::Leaf).collect())
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    pub fn arity(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node(_, ch) => ch.iter().map(Tree::arity).sum(),
        }
    }

    pub fn min_leaf(&self) -> Label {
        match self {
            Tree::Leaf(l) => *l,
            Tree::Node(_, ch) => ch[0].min_leaf(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node(_, ch) => 1 + ch.iter().map(Tree::vertex_count).sum::<usize>(),
        }
    }

    pub fn root(&self) -> Option<GenId> {
        match self {
            Tree::Leaf(_) => None,
            Tree::Node(g, _) => Some(*g),
        }
    }

    /// Leaf labels in planar (left to right) order.
    pub fn planar_leaves(&self) -> Vec<Label> {
        let mut out = Vec::new();
        fn go(t: &Tree, out: &mut Vec<Label>) {
            match t {
                Tree::Leaf(l) => out.push(*l),
                Tree::Node(_, ch) => ch.iter().for_each(|c| go(c, out)),
            }
        }
        go(self, &mut out);
        out
    }

    /// True if the leaves read 1..n from left to right.
    pub fn is_planar(&self) -> bool {
        self.planar_leaves().iter().enumerate().all(|(i, &l)| l as usize == i + 1)
    }

    /// Generators of the internal vertices in depth-first order.
    pub fn vertices_dfs(&self) -> Vec<GenId> {
        let mut out = Vec::new();
        fn go(t: &Tree, out: &mut Vec<GenId>) {
            if let Tree::Node(g, ch) = t {
                out.push(*g);
                ch.iter().for_each(|c| go(c, out));
            }
        }
        go(self, &mut out);
        out
    }

    pub fn homdeg(&self, sig: &Signature) -> i32 {
        self.vertices_dfs().iter().map(|&g| sig.get(g).homdeg).sum()
    }

    pub fn weight(&self, sig: &Signature) -> i64 {
        self.vertices_dfs().iter().map(|&g| sig.get(g).weight as i64).sum()
    }

    pub fn count_gen(&self, g: GenId) -> usize {
        self.vertices_dfs().iter().filter(|&&h| h == g).count()
    }

    /// For each leaf label 1..n, the generators met on the path from the root.
    pub fn path_words(&self) -> Vec<Vec<GenId>> {
        let n = self.arity();
        let mut out = vec![Vec::new(); n];
        fn go(t: &Tree, prefix: &mut Vec<GenId>, out: &mut Vec<Vec<GenId>>) {
            match t {
                Tree::Leaf(l) => out[*l as usize - 1] = prefix.clone(),
                Tree::Node(g, ch) => {
                    prefix.push(*g);
                    for c in ch {
                        go(c, prefix, out);
                    }
                    prefix.pop();
                }
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Checks canonical form, arities and leaf labels.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        fn go(t: &Tree, sig: &Signature, seen: &mut Vec<Label>) -> Result<()> {
            match t {
                Tree::Leaf(l) => {
                    seen.push(*l);
                    Ok(())
                }
                Tree::Node(g, ch) => {
                    if *g as usize >= sig.len() {
                        return Err(Error::Generator(format!("unknown id {g}")));
                    }
                    if sig.get(*g).arity != ch.len() {
                        return Err(Error::Arity(format!(
                            "{} expects {} inputs, got {}",
                            sig.get(*g).name,
                            sig.get(*g).arity,
                            ch.len()
                        )));
                    }
                    for w in ch.windows(2) {
                        if w[0].min_leaf() >= w[1].min_leaf() {
                            return Err(Error::Leaves("children not in canonical order".into()));
                        }
                    }
                    ch.iter().try_for_each(|c| go(c, sig, seen))
                }
            }
        }
        let mut seen = Vec::new();
        go(self, sig, &mut seen)?;
        check_labels(&seen)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TreeDisplay<'a> {
        TreeDisplay { tree: self, sig }
    }

    /// Replaces every leaf label by `f(label)`, keeping the planar shape.
    pub fn map_leaves(&self, f: &impl Fn(Label) -> Label) -> Tree {
        match self {
            Tree::Leaf(l) => Tree::Leaf(f(*l)),
            Tree::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| c.map_leaves(f)).collect()),
        }
    }
}

fn check_labels(seen: &[Label]) -> Result<()> {
    let n = seen.len();
    let mut hit = vec![false; n + 1];
    for &l in seen {
        let i = l as usize;
        if i == 0 || i > n {
            return Err(Error::Leaves(format!("label {l} outside 1..{n}")));
        }
        if hit[i] {
            return Err(Error::Leaves(format!("repeated leaf {l}")));
        }
        hit[i] = true;
    }
    Ok(())
}

pub struct TreeDisplay<'a> {
    tree: &'a Tree,
    sig: &'a Signature,
}

impl fmt::Display for TreeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &Tree, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Tree::Leaf(l) => write!(f, "{l}"),
                Tree::Node(g, ch) => {
                    write!(f, "{}(", sig.get(*g).name)?;
                    for (i, c) in ch.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        go(c, sig, f)?;
                    }
                    write!(f, ")")
                }
            }
        }
        go(self.tree, self.sig, f)
    }
}

/// A decorated tree in arbitrary planar position; `tag` records the position
/// of each vertex in the ordering the caller considers "given".
#[derive(Clone, Debug)]
pub enum RawTree {
    Leaf(Label),
    Node { gen: GenId, tag: usize, children: Vec<RawTree> },
}

impl RawTree {
    /// Raw copy of a tree whose tags are `offset + depth-first index`.
    pub fn from_tree(t: &Tree, offset: usize) -> RawTree {
        let mut next = offset;
        fn go(t: &Tree, next: &mut usize) -> RawTree {
            match t {
                Tree::Leaf(l) => RawTree::Leaf(*l),
                Tree::Node(g, ch) => {
                    let tag = *next;
                    *next += 1;
                    RawTree::Node { gen: *g, tag, children: ch.iter().map(|c| go(c, next)).collect() }
                }
            }
        }
        go(t, &mut next)
    }
}

/// Sign of the permutation taking the given order (tags `0..`) to `dfs_tags`,
/// counting only entries for which `odd(tag)` holds.
pub fn odd_perm_sign(dfs_tags: &[usize], odd: impl Fn(usize) -> bool) -> i8 {
    let odd_tags: Vec<usize> = dfs_tags.iter().copied().filter(|&t| odd(t)).collect();
    let mut inv = 0usize;
    for i in 0..odd_tags.len() {
        for j in i + 1..odd_tags.len() {
            if odd_tags[i] > odd_tags[j] {
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

/// Canonical planar representative of a raw tree together with the vertex
/// tags in the depth-first order of the result.
pub fn canonicalize(sig: &Signature, raw: &RawTree) -> Result<(Tree, Vec<usize>)> {
    fn go(sig: &Signature, r: &RawTree, tags: &mut Vec<usize>, seen: &mut Vec<Label>) -> Result<Tree> {
        match r {
            RawTree::Leaf(l) => {
                seen.push(*l);
                Ok(Tree::Leaf(*l))
            }
            RawTree::Node { gen, tag, children } => {
                if *gen as usize >= sig.len() {
                    return Err(Error::Generator(format!("unknown id {gen}")));
                }
                let g = sig.get(*gen);
                if g.arity != children.len() {
                    return Err(Error::Arity(format!(
                        "{} expects {} inputs, got {}",
                        g.name,
                        g.arity,
                        children.len()
                    )));
                }
                let mut built: Vec<(Tree, Vec<usize>)> = Vec::with_capacity(children.len());
                for c in children {
                    let mut sub = Vec::new();
                    let t = go(sig, c, &mut sub, seen)?;
                    built.push((t, sub));
                }
                built.sort_by_key(|(t, _)| t.min_leaf());
                tags.push(*tag);
                let mut ch = Vec::with_capacity(built.len());
                for (t, sub) in built {
                    tags.extend(sub);
                    ch.push(t);
                }
                Ok(Tree::Node(*gen, ch))
            }
        }
    }
    let mut tags = Vec::new();
    let mut seen = Vec::new();
    let t = go(sig, raw, &mut tags, &mut seen)?;
    check_labels(&seen)?;
    Ok((t, tags))
}

/// Canonical form with the Koszul sign of the vertex reordering; tags of the
/// raw tree must be `0..m` listing the given order.
pub fn canonical_form(sig: &Signature, raw: &RawTree) -> Result<(Tree, i8)> {
    let (t, tags) = canonicalize(sig, raw)?;
    let gens = tag_gens(raw);
    let s = odd_perm_sign(&tags, |tag| sig.is_odd(gens[&tag]));
    Ok((t, s))
}

fn tag_gens(raw: &RawTree) -> HashMap<usize, GenId> {
    let mut m = HashMap::new();
    fn go(r: &RawTree, m: &mut HashMap<usize, GenId>) {
        if let RawTree::Node { gen, tag, children } = r {
            m.insert(*tag, *gen);
            children.iter().for_each(|c| go(c, m));
        }
    }
    go(raw, &mut m);
    m
}

/// A shuffle surjection given by its fibres; block minima increase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShuffleSurjection {
    pub blocks: Vec<Vec<Label>>,
}

impl ShuffleSurjection {
    pub fn new(blocks: Vec<Vec<Label>>) -> Result<Self> {
        let mut all: Vec<Label> = blocks.iter().flatten().copied().collect();
        if blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::Arity("empty block".into()));
        }
        all.sort_unstable();
        check_labels(&all)?;
        let mut blocks = blocks;
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        if blocks.windows(2).any(|w| w[0][0] >= w[1][0]) {
            return Err(Error::Arity("block minima must increase".into()));
        }
        Ok(ShuffleSurjection { blocks })
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }
}

/// All shuffle surjections with the given block sizes.
pub fn enumerate_shuffle_surjections(sizes: &[usize]) -> Result<Vec<ShuffleSurjection>> {
    if sizes.is_empty() {
        return Err(Error::Arity("empty block list".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::Arity("block sizes must be positive".into()));
    }
    let n: usize = sizes.iter().sum();
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<Label>> = Vec::new();
    let remaining: Vec<Label> = (1..=n as Label).collect();
    fn rec(sizes: &[usize], remaining: &[Label], blocks: &mut Vec<Vec<Label>>, out: &mut Vec<ShuffleSurjection>) {
        if sizes.is_empty() {
            out.push(ShuffleSurjection { blocks: blocks.clone() });
            return;
        }
        let first = remaining[0];
        let rest = &remaining[1..];
        for combo in choose(rest, sizes[0] - 1) {
            let mut block = vec![first];
            block.extend(combo.iter().copied());
            let left: Vec<Label> = rest.iter().copied().filter(|x| !combo.contains(x)).collect();
            blocks.push(block);
            rec(&sizes[1..], &left, blocks, out);
            blocks.pop();
        }
    }
    rec(sizes, &remaining, &mut blocks, &mut out);
    Ok(out)
}

/// All `k`-element subsets of `items`, in lexicographic order.
pub fn choose<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec<T: Copy>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..items.len() {
            if items.len() - i < need {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// Shuffle composition of tree monomials with its Koszul sign.
pub fn compose(sig: &Signature, outer: &Tree, phi: &ShuffleSurjection, inners: &[Tree]) -> Result<(Tree, i8)> {
    let k = outer.arity();
    if phi.k() != k || inners.len() != k {
        return Err(Error::Arity(format!("outer arity {k}, {} blocks, {} inners", phi.k(), inners.len())));
    }
    for (b, t) in phi.blocks.iter().zip(inners) {
        if b.len() != t.arity() {
            return Err(Error::Arity(format!("block of size {} for inner of arity {}", b.len(), t.arity())));
        }
    }
    let mut offsets = Vec::with_capacity(k);
    let mut next = outer.vertex_count();
    for t in inners {
        offsets.push(next);
        next += t.vertex_count();
    }
    let mut counter = 0usize;
    fn go(
        t: &Tree,
        counter: &mut usize,
        phi: &ShuffleSurjection,
        inners: &[Tree],
        offsets: &[usize],
    ) -> RawTree {
        match t {
            Tree::Leaf(l) => {
                let i = *l as usize - 1;
                let block = &phi.blocks[i];
                let raw = RawTree::from_tree(&inners[i], offsets[i]);
                relabel_raw(&raw, &|x| block[x as usize - 1])
            }
            Tree::Node(g, ch) => {
                let tag = *counter;
                *counter += 1;
                RawTree::Node {
                    gen: *g,
                    tag,
                    children: ch.iter().map(|c| go(c, counter, phi, inners, offsets)).collect(),
                }
            }
        }
    }
    let raw = go(outer, &mut counter, phi, inners, &offsets);
    canonical_form(sig, &raw)
}

/// Partial composition `outer ∘_i inner` in which the inner tree's leaves
/// receive labels `i, .., i+m-1` when `planar` (non-symmetric insertion), or
/// the given label set `block` (sorted, containing `i` as minimum) otherwise.
pub fn partial_compose(sig: &Signature, outer: &Tree, i: Label, inner: &Tree, block: &[Label]) -> Result<(Tree, i8)> {
    let k = outer.arity();
    let n = k + inner.arity() - 1;
    let mut blocks: Vec<Vec<Label>> = Vec::with_capacity(k);
    let others: Vec<Label> = (1..=n as Label).filter(|x| !block.contains(x)).collect();
    let mut it = others.into_iter();
    for j in 1..=k as Label {
        if j == i {
            blocks.push(block.to_vec());
        } else {
            blocks.push(vec![it.next().ok_or_else(|| Error::Arity("bad block".into()))?]);
        }
    }
    let phi = ShuffleSurjection::new(blocks)?;
    let mut inners: Vec<Tree> = (0..k).map(|_| Tree::unit()).collect();
    inners[i as usize - 1] = inner.clone();
    compose(sig, outer, &phi, &inners)
}

fn relabel_raw(r: &RawTree, f: &impl Fn(Label) -> Label) -> RawTree {
    match r {
        RawTree::Leaf(l) => RawTree::Leaf(f(*l)),
        RawTree::Node { gen, tag, children } => RawTree::Node {
            gen: *gen,
            tag: *tag,
            children: children.iter().map(|c| relabel_raw(c, f)).collect(),
        },
    }
}

/// Relabels leaves by `sigma` (leaf `i` becomes `sigma[i-1]`) and returns the
/// canonical representative with the sign of the vertex reordering.
pub fn relabel_leaves(sig: &Signature, t: &Tree, sigma: &[Label]) -> Result<(Tree, i8)> {
    let n = t.arity();
    if sigma.len() != n {
        return Err(Error::Permutation(format!("length {} for arity {n}", sigma.len())));
    }
    let mut s = sigma.to_vec();
    s.sort_unstable();
    if s.iter().enumerate().any(|(i, &x)| x as usize != i + 1) {
        return Err(Error::Permutation(format!("{sigma:?}")));
    }
    let raw = relabel_raw(&RawTree::from_tree(t, 0), &|x| sigma[x as usize - 1]);
    canonical_form(sig, &raw)
}

/// Reference to an input of a vertex: another vertex or a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    V(usize),
    L(Label),
}

/// Array form of a tree with depth-first vertex indices.
#[derive(Clone, Debug)]
pub struct FlatTree {
    pub gens: Vec<GenId>,
    pub children: Vec<Vec<Slot>>,
    pub parent: Vec<Option<usize>>,
    pub min_leaf: Vec<Label>,
    pub root: Slot,
}

impl FlatTree {
    pub fn new(t: &Tree) -> FlatTree {
        let mut f = FlatTree { gens: Vec::new(), children: Vec::new(), parent: Vec::new(), min_leaf: Vec::new(), root: Slot::L(1) };
        fn go(t: &Tree, parent: Option<usize>, f: &mut FlatTree) -> Slot {
            match t {
                Tree::Leaf(l) => Slot::L(*l),
                Tree::Node(g, ch) => {
                    let idx = f.gens.len();
                    f.gens.push(*g);
                    f.children.push(Vec::new());
                    f.parent.push(parent);
                    f.min_leaf.push(t.min_leaf());
                    let slots: Vec<Slot> = ch.iter().map(|c| go(c, Some(idx), f)).collect();
                    f.children[idx] = slots;
                    Slot::V(idx)
                }
            }
        }
        f.root = go(t, None, &mut f);
        f
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn slot_min(&self, s: Slot) -> Label {
        match s {
            Slot::L(l) => l,
            Slot::V(v) => self.min_leaf[v],
        }
    }

    /// Internal edges as (parent, child) vertex pairs.
    pub fn internal_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (v, ch) in self.children.iter().enumerate() {
            for s in ch {
                if let Slot::V(w) = s {
                    out.push((v, *w));
                }
            }
        }
        out
    }

    /// Subtree below a slot as a tree monomial with original labels.
    pub fn subtree(&self, s: Slot) -> Tree {
        match s {
            Slot::L(l) => Tree::Leaf(l),
            Slot::V(v) => Tree::Node(self.gens[v], self.children[v].iter().map(|&c| self.subtree(c)).collect()),
        }
    }

    /// True if `anc` lies on the path from the root to `v` (inclusive).
    pub fn is_ancestor(&self, anc: usize, v: usize) -> bool {
        let mut cur = Some(v);
        while let Some(c) = cur {
            if c == anc {
                return true;
            }
            cur = self.parent[c];
        }
        false
    }

    pub fn depth(&self, v: usize) -> usize {
        let mut d = 0;
        let mut cur = self.parent[v];
        while let Some(c) = cur {
            d += 1;
            cur = self.parent[c];
        }
        d
    }
}

/// A divisor occurrence: a connected set of vertices of the host whose
/// standardisation is `pattern`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occurrence {
    pub root: usize,
    pub vertices: Vec<usize>,
    pub pattern: Tree,
    /// Host slots feeding the pattern leaves `1..=m`, in label order.
    pub boundary: Vec<Slot>,
}

impl Occurrence {
    pub fn intersects(&self, other: &Occurrence) -> bool {
        self.vertices.iter().any(|v| other.vertices.binary_search(v).is_ok())
    }

    pub fn intersection(&self, other: &Occurrence) -> Vec<usize> {
        self.vertices.iter().copied().filter(|v| other.vertices.binary_search(v).is_ok()).collect()
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Tries to match `pattern` with its root at vertex `v` of `host`.
pub fn match_at(host: &FlatTree, v: usize, pattern: &Tree) -> Option<Occurrence> {
    let mut verts = Vec::new();
    let mut bound: Vec<(Label, Slot)> = Vec::new();
    fn go(host: &FlatTree, v: usize, p: &Tree, verts: &mut Vec<usize>, bound: &mut Vec<(Label, Slot)>) -> bool {
        match p {
            Tree::Leaf(_) => unreachable!(),
            Tree::Node(g, ch) => {
                if host.gens[v] != *g {
                    return false;
                }
                verts.push(v);
                for (i, c) in ch.iter().enumerate() {
                    let s = host.children[v][i];
                    match c {
                        Tree::Leaf(l) => bound.push((*l, s)),
                        Tree::Node(..) => match s {
                            Slot::V(w) => {
                                if !go(host, w, c, verts, bound) {
                                    return false;
                                }
                            }
                            Slot::L(_) => return false,
                        },
                    }
                }
                true
            }
        }
    }
    if pattern.is_leaf() || !go(host, v, pattern, &mut verts, &mut bound) {
        return None;
    }
    bound.sort_by_key(|(l, _)| *l);
    let mins: Vec<Label> = bound.iter().map(|(_, s)| host.slot_min(*s)).collect();
    if mins.windows(2).any(|w| w[0] >= w[1]) {
        return None;
    }
    verts.sort_unstable();
    Some(Occurrence { root: v, vertices: verts, pattern: pattern.clone(), boundary: bound.into_iter().map(|(_, s)| s).collect() })
}

/// All occurrences of `beta` in `alpha`, ordered by depth-first position of
/// their root.
pub fn divisor_occurrences(alpha: &Tree, beta: &Tree) -> Vec<Occurrence> {
    if beta.is_leaf() || beta.arity() > alpha.arity() || beta.vertex_count() > alpha.vertex_count() {
        return Vec::new();
    }
    let host = FlatTree::new(alpha);
    occurrences_in(&host, beta)
}

pub fn occurrences_in(host: &FlatTree, beta: &Tree) -> Vec<Occurrence> {
    (0..host.len()).filter_map(|v| match_at(host, v, beta)).collect()
}

pub fn is_divisible(alpha: &Tree, beta: &Tree) -> bool {
    !divisor_occurrences(alpha, beta).is_empty()
}

/// Standardisation of a connected vertex set of `host` (root first in the set).
pub fn standardize(host: &FlatTree, vertices: &[usize]) -> Option<Occurrence> {
    let root = *vertices.iter().min()?;
    let inset = |v: usize| vertices.contains(&v);
    let mut bound: Vec<Slot> = Vec::new();
    fn go(host: &FlatTree, v: usize, inset: &impl Fn(usize) -> bool, bound: &mut Vec<Slot>) -> Tree {
        let ch = host.children[v]
            .iter()
            .map(|&s| match s {
                Slot::V(w) if inset(w) => go(host, w, inset, bound),
                _ => {
                    bound.push(s);
                    Tree::Leaf(host.slot_min(s))
                }
            })
            .collect();
        Tree::Node(host.gens[v], ch)
    }
    let raw_pattern = go(host, root, &inset, &mut bound);
    if raw_pattern.vertex_count() != vertices.len() {
        return None;
    }
    let mut mins: Vec<Label> = bound.iter().map(|&s| host.slot_min(s)).collect();
    mins.sort_unstable();
    let rank = |x: Label| mins.binary_search(&x).unwrap() as Label + 1;
    let pattern = raw_pattern.map_leaves(&rank);
    let mut order: Vec<Slot> = bound.clone();
    order.sort_by_key(|&s| host.slot_min(s));
    let mut verts = vertices.to_vec();
    verts.sort_unstable();
    Some(Occurrence { root, vertices: verts, pattern, boundary: order })
}

/// Substitutes each term `t` of a combination for the occurrence `occ` in
/// `host`, returning `(tree, sign)` pairs so that substituting the pattern
/// itself returns `(host, +1)`.
pub fn substitute_monomial(sig: &Signature, host: &Tree, occ: &Occurrence, t: &Tree) -> Result<(Tree, i8)> {
    let flat = FlatTree::new(host);
    substitute_flat(sig, &flat, occ, t)
}

pub fn substitute_flat(sig: &Signature, flat: &FlatTree, occ: &Occurrence, t: &Tree) -> Result<(Tree, i8)> {
    if t.arity() != occ.boundary.len() {
        return Err(Error::Occurrence(format!("arity {} vs {} boundary slots", t.arity(), occ.boundary.len())));
    }
    let host_sign = block_sign(sig, flat, occ, &occ.pattern)?;
    let (tree, s) = substituted_raw_sign(sig, flat, occ, t)?;
    Ok((tree, host_sign * s))
}

fn block_sign(sig: &Signature, flat: &FlatTree, occ: &Occurrence, t: &Tree) -> Result<i8> {
    Ok(substituted_raw_sign(sig, flat, occ, t)?.1)
}

fn substituted_raw_sign(sig: &Signature, flat: &FlatTree, occ: &Occurrence, t: &Tree) -> Result<(Tree, i8)> {
    let r = substituted_raw(sig, flat, occ, t)?;
    let s = odd_perm_sign(&r.tags, |tag| sig.is_odd(r.gens_by_tag[tag]));
    Ok((r.tree, s))
}

/// Replaces the occurrence by `t` and returns the result with the depth-first
/// position of every surviving host vertex (`None` inside the occurrence) and
/// of every vertex of `t`.
pub fn substitute_tracked(sig: &Signature, flat: &FlatTree, occ: &Occurrence, t: &Tree) -> Result<(Tree, Vec<Option<usize>>, Vec<usize>)> {
    if t.arity() != occ.boundary.len() {
        return Err(Error::Occurrence(format!("arity {} vs {} boundary slots", t.arity(), occ.boundary.len())));
    }
    let r = substituted_raw(sig, flat, occ, t)?;
    let mut pos = vec![0usize; r.tags.len()];
    for (i, &tag) in r.tags.iter().enumerate() {
        pos[tag] = i;
    }
    let host = r.ltag.iter().map(|&tag| (tag != usize::MAX).then(|| pos[tag])).collect();
    let inner = (0..t.vertex_count()).map(|i| pos[r.tbase + i]).collect();
    Ok((r.tree, host, inner))
}

struct Substituted {
    tree: Tree,
    tags: Vec<usize>,
    gens_by_tag: Vec<GenId>,
    ltag: Vec<usize>,
    tbase: usize,
}

/// Builds the host with the occurrence replaced by `t`, tags listing the host
/// vertices in depth-first order with `t`'s vertices as a block at the root of
/// the occurrence, and canonicalises it.
fn substituted_raw(sig: &Signature, flat: &FlatTree, occ: &Occurrence, t: &Tree) -> Result<Substituted> {
    let tv = t.vertex_count();
    let mut ltag = vec![usize::MAX; flat.len()];
    let mut counter = 0usize;
    let mut tbase = 0usize;
    for v in 0..flat.len() {
        if v == occ.root {
            tbase = counter;
            counter += tv;
        } else if !occ.contains_vertex(v) {
            ltag[v] = counter;
            counter += 1;
        }
    }
    let mut gens_by_tag = vec![0 as GenId; counter];
    fn build_host(
        flat: &FlatTree,
        s: Slot,
        occ: &Occurrence,
        t: &Tree,
        ltag: &[usize],
        tbase: usize,
        gens_by_tag: &mut Vec<GenId>,
    ) -> RawTree {
        match s {
            Slot::L(l) => RawTree::Leaf(l),
            Slot::V(v) if v == occ.root => {
                let mut next = tbase;
                build_pattern(flat, t, &mut next, occ, ltag, tbase, gens_by_tag)
            }
            Slot::V(v) => {
                gens_by_tag[ltag[v]] = flat.gens[v];
                RawTree::Node {
                    gen: flat.gens[v],
                    tag: ltag[v],
                    children: flat.children[v]
                        .iter()
                        .map(|&c| build_host(flat, c, occ, t, ltag, tbase, gens_by_tag))
                        .collect(),
                }
            }
        }
    }
    fn build_pattern(
        flat: &FlatTree,
        p: &Tree,
        next: &mut usize,
        occ: &Occurrence,
        ltag: &[usize],
        tbase: usize,
        gens_by_tag: &mut Vec<GenId>,
    ) -> RawTree {
        match p {
            Tree::Leaf(l) => build_host(flat, occ.boundary[*l as usize - 1], occ, p, ltag, tbase, gens_by_tag),
            Tree::Node(g, ch) => {
                let tag = *next;
                *next += 1;
                gens_by_tag[tag] = *g;
                let children = ch.iter().map(|c| build_pattern(flat, c, next, occ, ltag, tbase, gens_by_tag)).collect();
                RawTree::Node { gen: *g, tag, children }
            }
        }
    }
    // Leaves of `t` re-enter the host; boundary subtrees never contain the
    // occurrence root, so the pattern argument passed there is unused.
    let raw = build_host(flat, flat.root, occ, t, &ltag, tbase, &mut gens_by_tag);
    let (tree, tags) = canonicalize(sig, &raw)?;
    Ok(Substituted { tree, tags, gens_by_tag, ltag, tbase })
}

/// All canonical trees of arity `n` with at most `max_vertices` vertices.
pub fn enumerate_trees(sig: &Signature, n: usize, max_vertices: usize, planar: bool) -> Vec<Tree> {
    TreeEnumerator::new(sig, planar, max_vertices).trees(n)
}

/// Memoised enumeration of trees on standard leaf sets, optionally pruned by a
/// predicate that is inherited by subtrees (such as normality).
pub struct TreeEnumerator<'a> {
    sig: &'a Signature,
    planar: bool,
    max_vertices: usize,
    memo: HashMap<(usize, usize), Vec<Tree>>,
    filter: Option<Box<dyn Fn(&Tree) -> bool + 'a>>,
}

impl<'a> TreeEnumerator<'a> {
    pub fn new(sig: &'a Signature, planar: bool, max_vertices: usize) -> Self {
        TreeEnumerator { sig, planar, max_vertices, memo: HashMap::new(), filter: None }
    }

    /// Keeps only trees accepted by `f`; `f` must reject every tree having a
    /// rejected subtree, or the result is incomplete.
    pub fn with_filter(mut self, f: impl Fn(&Tree) -> bool + 'a) -> Self {
        self.filter = Some(Box::new(f));
        self
    }

    pub fn trees(&mut self, n: usize) -> Vec<Tree> {
        self.trees_budget(n, self.max_vertices)
    }

    /// Trees on leaves `1..=n` with at most `budget` vertices.
    pub fn trees_budget(&mut self, n: usize, budget: usize) -> Vec<Tree> {
        if let Some(v) = self.memo.get(&(n, budget)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.push(Tree::Leaf(1));
        }
        if budget > 0 {
            for g in self.sig.ids() {
                let a = self.sig.get(g).arity;
                if a > n {
                    continue;
                }
                if a == 1 {
                    for c in self.trees_budget(n, budget - 1) {
                        let t = Tree::Node(g, vec![c]);
                        if self.accept(&t) {
                            out.push(t);
                        }
                    }
                    continue;
                }
                for sizes in compositions(n, a) {
                    let surj: Vec<ShuffleSurjection> = if self.planar {
                        let mut start = 1 as Label;
                        let blocks = sizes
                            .iter()
                            .map(|&s| {
                                let b: Vec<Label> = (start..start + s as Label).collect();
                                start += s as Label;
                                b
                            })
                            .collect();
                        vec![ShuffleSurjection { blocks }]
                    } else {
                        enumerate_shuffle_surjections(&sizes).unwrap()
                    };
                    let child_sets: Vec<Vec<Tree>> = sizes.iter().map(|&s| self.trees_budget(s, budget - 1)).collect();
                    let mut combo: Vec<&Tree> = Vec::with_capacity(a);
                    let mut acc = Vec::new();
                    product_within(&child_sets, 0, budget - 1, &mut combo, &mut acc);
                    for phi in &surj {
                        for ch in &acc {
                            let children: Vec<Tree> = ch
                                .iter()
                                .zip(&phi.blocks)
                                .map(|(c, b)| c.map_leaves(&|x| b[x as usize - 1]))
                                .collect();
                            let t = Tree::Node(g, children);
                            if self.accept(&t) {
                                out.push(t);
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        self.memo.insert((n, budget), out.clone());
        out
    }

    fn accept(&self, t: &Tree) -> bool {
        self.filter.as_ref().map_or(true, |f| f(t))
    }
}

fn product_within<'t>(sets: &'t [Vec<Tree>], i: usize, budget: usize, combo: &mut Vec<&'t Tree>, acc: &mut Vec<Vec<Tree>>) {
    if i == sets.len() {
        acc.push(combo.iter().map(|t| (*t).clone()).collect());
        return;
    }
    for t in &sets[i] {
        let v = t.vertex_count();
        if v > budget {
            continue;
        }
        combo.push(t);
        product_within(sets, i + 1, budget - v, combo, acc);
        combo.pop();
    }
}

/// Ordered compositions of `n` into `k` positive parts.
pub fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            if n == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if n < k {
            return;
        }
        for first in 1..=n - (k - 1) {
            cur.push(first);
            rec(n - first, k - 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, &mut cur, &mut out);
    out
}
