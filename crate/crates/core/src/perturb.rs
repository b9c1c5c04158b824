//! Deformation of the monomial resolution of the leading terms into a
//! resolution of an operad with a Gröbner basis.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};

use crate::element::Q;
use crate::error::{Error, Result};
use crate::groebner::GroebnerBasis;
use crate::orders::{MonomialOrder, OrdKey};
use crate::resolution::{chain_add, chain_axpy, chain_from_element, homology, Chain, HomologyTable, Monomial, Resolution};
use crate::trees::{Sig, Tree};

pub struct PerturbedComplex {
    res: Resolution,
    gb: GroebnerBasis,
    cache: RwLock<HashMap<Monomial, Arc<Chain>>>,
}

/// Working copy of a chain grouped by underlying tree in monomial order.
type Graded = BTreeMap<OrdKey, BTreeMap<Vec<usize>, Q>>;

impl PerturbedComplex {
    /// `gb` must be a Gröbner basis with monic elements.
    pub fn new(gb: GroebnerBasis) -> PerturbedComplex {
        let res = Resolution::from_basis(&gb);
        PerturbedComplex { res, gb, cache: RwLock::new(HashMap::new()) }
    }

    pub fn resolution(&self) -> &Resolution {
        &self.res
    }

    pub fn basis(&self) -> &GroebnerBasis {
        &self.gb
    }

    pub fn sig(&self) -> &Sig {
        self.res.sig()
    }

    pub fn order(&self) -> &MonomialOrder {
        self.gb.order()
    }

    /// The deformed differential on a marked monomial.
    pub fn differential(&self, m: &Monomial) -> Result<Arc<Chain>> {
        if let Some(c) = self.cache.read().unwrap().get(m) {
            return Ok(c.clone());
        }
        let out = Arc::new(if self.res.is_indecomposable(m) { self.on_generator(m)? } else { self.on_composite(m)? });
        self.cache.write().unwrap().insert(m.clone(), out.clone());
        Ok(out)
    }

    pub fn differential_chain(&self, c: &Chain) -> Result<Chain> {
        let mut out = Chain::new();
        for (m, x) in c {
            chain_axpy(&mut out, x, &*self.differential(m)?);
        }
        Ok(out)
    }

    fn on_generator(&self, x: &Monomial) -> Result<Chain> {
        match x.q() {
            0 => Ok(Chain::new()),
            1 => {
                let d = self.res.divisors(&x.tree);
                let r = d.relation[x.marks[0]];
                let e = &self.gb.elements[r];
                if e.lt != x.tree {
                    return Err(Error::Other("a generator with one mark is a leading term".into()));
                }
                Ok(chain_from_element(&e.poly))
            }
            _ => {
                let dx = self.res.d(x);
                let ddx = self.differential_chain(&dx)?;
                let (h, _) = self.homotopy(&ddx)?;
                let mut out = dx;
                chain_axpy(&mut out, &-Q::one(), &h);
                Ok(out)
            }
        }
    }

    /// Extension to composites as a derivation with Koszul signs.
    fn on_composite(&self, m: &Monomial) -> Result<Chain> {
        let pieces = self.res.pieces(m);
        let eps = self.res.factor_sign(m, &pieces);
        let mut out = Chain::new();
        let mut before = 0i32;
        for (i, p) in pieces.iter().enumerate() {
            let dp = self.differential(&p.mono)?;
            let pre = if before % 2 == 0 { 1 } else { -1 };
            for (y, c) in dp.iter() {
                let (z, s) = self.res.replace_piece(m, &pieces, i, y)?;
                chain_add(&mut out, z, c * Q::from_integer((eps as i64 * pre * s as i64).into()));
            }
            before += self.res.degree(&p.mono);
        }
        Ok(out)
    }

    fn graded(&self, c: &Chain) -> Graded {
        let mut g = Graded::new();
        for (m, x) in c {
            add_graded(&mut g, self.order().ord_key(&m.tree), m.marks.clone(), x.clone());
        }
        g
    }

    /// The contracting homotopy on a `D`-cycle `u`, homogeneous in the number
    /// of marks; returns `(H(u), residue)` with `D(H(u)) = u - residue`. The
    /// residue is the normal form of `u` when it has no marks and zero
    /// otherwise.
    pub fn homotopy(&self, u: &Chain) -> Result<(Chain, Chain)> {
        let mut work = self.graded(u);
        let mut out = Chain::new();
        let mut residue = Chain::new();
        while let Some((key, top)) = work.iter().next_back() {
            let key = key.clone();
            let t = key.tree.clone();
            let d = self.res.divisors(&t);
            if d.is_empty() {
                if top.keys().any(|marks| !marks.is_empty()) {
                    return Err(Error::NotCycle("marked normal monomial".into()));
                }
                for (_, c) in work.remove(&key).unwrap() {
                    chain_add(&mut residue, Monomial::unmarked(t.clone()), c);
                }
                continue;
            }
            let mut y = Chain::new();
            for (marks, c) in top {
                if marks.first() == Some(&0) {
                    continue;
                }
                let mut mk = Vec::with_capacity(marks.len() + 1);
                mk.push(0);
                mk.extend(marks);
                chain_add(&mut y, Monomial { tree: t.clone(), marks: mk }, c.clone());
            }
            if y.is_empty() {
                return Err(Error::NotCycle(format!("leading part at {} is not a cycle", t.display(self.sig()))));
            }
            let dy = self.differential_chain(&y)?;
            for (m, c) in dy {
                add_graded(&mut work, self.order().ord_key(&m.tree), m.marks, -c);
            }
            if work.contains_key(&key) {
                return Err(Error::NotCycle(format!("leading part at {} is not a cycle", t.display(self.sig()))));
            }
            chain_axpy(&mut out, &Q::one(), &y);
        }
        Ok((out, residue))
    }

    /// The differential induced on indecomposables.
    pub fn induced(&self, x: &Monomial) -> Result<Chain> {
        Ok(self.differential(x)?.iter().filter(|(y, _)| self.res.is_indecomposable(y)).map(|(y, c)| (y.clone(), c.clone())).collect())
    }

    pub fn generators(&self, n: usize, max_vertices: usize) -> Vec<Monomial> {
        self.res.generators(n, max_vertices)
    }

    /// Quillen homology of arities `1..=max_arity` from generators on trees
    /// with at most `max_vertices(n)` vertices.
    pub fn quillen_homology(&self, max_arity: usize, max_vertices: impl Fn(usize) -> usize) -> Result<HomologyTable> {
        let mut table = HomologyTable::default();
        for n in 1..=max_arity {
            let gens = self.generators(n, max_vertices(n));
            table.merge(homology(&gens, |m| self.res.internal_degree(&m.tree), |m| self.induced(m))?);
        }
        Ok(table)
    }

    /// A term of `D(x)` written as its factors with the factorisation sign
    /// absorbed into the coefficient.
    pub fn expand(&self, c: &Chain) -> Vec<(Vec<Monomial>, Q)> {
        c.iter()
            .map(|(m, x)| {
                let pieces = self.res.pieces(m);
                let s = self.res.factor_sign(m, &pieces);
                (pieces.into_iter().map(|p| p.mono).collect(), x * Q::from_integer((s as i64).into()))
            })
            .collect()
    }

    /// Every tree of `D(x) - d(x)` is strictly below the tree of `x`.
    pub fn lower_terms_property(&self, x: &Monomial) -> Result<bool> {
        let mut diff = (*self.differential(x)?).clone();
        chain_axpy(&mut diff, &-Q::one(), &self.res.d(x));
        let top = self.order().ord_key(&x.tree);
        Ok(diff.keys().all(|m| self.order().ord_key(&m.tree) < top))
    }

    pub fn display(&self, m: &Monomial) -> String {
        display_monomial(&self.res, m)
    }
}

/// Text form: the tree followed by the marked divisors as `pattern@root`.
pub fn display_monomial(res: &Resolution, m: &Monomial) -> String {
    let sig = res.sig();
    let mut s = m.tree.display(sig).to_string();
    if !m.marks.is_empty() {
        let d = res.divisors(&m.tree);
        let marks: Vec<String> = m.marks.iter().map(|&i| format!("{}@{}", d.occs[i].pattern.display(sig), d.occs[i].root)).collect();
        s.push_str(" ; ");
        s.push_str(&marks.join(" ^ "));
    }
    s
}

fn add_graded(g: &mut Graded, key: OrdKey, marks: Vec<usize>, c: Q) {
    if c.is_zero() {
        return;
    }
    let inner = g.entry(key.clone()).or_default();
    let e = inner.entry(marks.clone()).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        inner.remove(&marks);
        if inner.is_empty() {
            g.remove(&key);
        }
    }
}

/// Tree of the largest monomial of a chain.
pub fn leading_tree(ord: &MonomialOrder, c: &Chain) -> Option<Tree> {
    c.keys().map(|m| ord.ord_key(&m.tree)).max().map(|k| k.tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::builtins::{builtin, BuiltinOptions};
    use crate::element::q;
    use crate::groebner::Bounds;

    fn ncrb() -> PerturbedComplex {
        let p = builtin("ncrb", &BuiltinOptions::default()).unwrap();
        let gb = GroebnerBasis::from_relations(&p, Bounds { arity: 4, vertices: 10 }).unwrap();
        PerturbedComplex::new(gb)
    }

    #[test]
    fn one_mark_gives_the_relation() {
        let pc = ncrb();
        let gens = pc.generators(2, 4);
        let nu = gens.iter().find(|m| m.q() == 1).unwrap();
        let d = pc.differential(nu).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d[&Monomial::unmarked(nu.tree.clone())], q(1));
    }

    #[test]
    fn d_squared_vanishes_on_ncrb_generators() {
        let pc = ncrb();
        for n in 1..=4 {
            for g in pc.generators(n, 3 * (n - 1).max(1)) {
                let dd = pc.differential_chain(&pc.differential(&g).unwrap()).unwrap();
                assert!(dd.is_empty(), "{}", pc.display(&g));
                assert!(pc.lower_terms_property(&g).unwrap());
            }
        }
    }
}
