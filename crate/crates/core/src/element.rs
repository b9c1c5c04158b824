//! Finite linear combinations of tree monomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::trees::{compose, substitute_flat, FlatTree, Occurrence, ShuffleSurjection, Signature, Tree};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `n` or `n/d`.
pub fn q_str(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    arity: usize,
    terms: BTreeMap<Tree, Q>,
}

impl Element {
    pub fn zero(arity: usize) -> Self {
        Element { arity, terms: BTreeMap::new() }
    }

    pub fn monomial(t: Tree, c: Q) -> Self {
        let mut e = Element::zero(t.arity());
        e.add_term(t, c);
        e
    }

    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Tree, Q)>) -> Result<Self> {
        let mut e = Element::zero(arity);
        for (t, c) in terms {
            if t.arity() != arity {
                return Err(Error::Arity(format!("term of arity {} in element of arity {arity}", t.arity())));
            }
            e.add_term(t, c);
        }
        Ok(e)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Tree, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, t: &Tree) -> Q {
        self.terms.get(t).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, t: Tree, c: Q) {
        debug_assert_eq!(t.arity(), self.arity);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(t);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Element, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (t, d) in &other.terms {
            self.add_term(t.clone(), d * c);
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut e = self.clone();
        e.add_scaled(other, &Q::one());
        e
    }

    pub fn sub(&self, other: &Element) -> Element {
        let mut e = self.clone();
        e.add_scaled(other, &-Q::one());
        e
    }

    pub fn scale(&self, c: &Q) -> Element {
        if c.is_zero() {
            return Element::zero(self.arity);
        }
        Element { arity: self.arity, terms: self.terms.iter().map(|(t, d)| (t.clone(), d * c)).collect() }
    }

    pub fn neg(&self) -> Element {
        self.scale(&-Q::one())
    }

    /// Homological degree, checking that all terms agree.
    pub fn homdeg(&self, sig: &Signature) -> Result<Option<i32>> {
        let mut deg = None;
        for t in self.terms.keys() {
            let d = t.homdeg(sig);
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => {
                    return Err(Error::Inhomogeneous(format!("homological degrees {e} and {d}")));
                }
                _ => {}
            }
        }
        Ok(deg)
    }

    pub fn max_vertices(&self) -> usize {
        self.terms.keys().map(Tree::vertex_count).max().unwrap_or(0)
    }

    /// Substitutes `g` for the occurrence `occ` in `host`.
    pub fn substitute(sig: &Signature, host: &Tree, occ: &Occurrence, g: &Element) -> Result<Element> {
        let flat = FlatTree::new(host);
        Element::substitute_flat(sig, host.arity(), &flat, occ, g)
    }

    pub fn substitute_flat(sig: &Signature, arity: usize, flat: &FlatTree, occ: &Occurrence, g: &Element) -> Result<Element> {
        if g.arity != occ.boundary.len() {
            return Err(Error::Occurrence(format!("element of arity {} for pattern of arity {}", g.arity, occ.boundary.len())));
        }
        let mut out = Element::zero(arity);
        for (t, c) in &g.terms {
            let (u, s) = substitute_flat(sig, flat, occ, t)?;
            out.add_term(u, if s > 0 { c.clone() } else { -c.clone() });
        }
        Ok(out)
    }

    /// Multilinear shuffle composition.
    pub fn compose(sig: &Signature, outer: &Element, phi: &ShuffleSurjection, inners: &[Element]) -> Result<Element> {
        let mut out = Element::zero(phi.n());
        let mut stack: Vec<(Vec<Tree>, Q)> = vec![(Vec::new(), Q::one())];
        for inner in inners {
            let mut next = Vec::new();
            for (ts, c) in &stack {
                for (t, d) in &inner.terms {
                    let mut ts2 = ts.clone();
                    ts2.push(t.clone());
                    next.push((ts2, c * d));
                }
            }
            stack = next;
        }
        for (o, co) in &outer.terms {
            for (ts, c) in &stack {
                let (t, s) = compose(sig, o, phi, ts)?;
                let coef = co * c;
                out.add_term(t, if s > 0 { coef } else { -coef });
            }
        }
        Ok(out)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> ElementDisplay<'a> {
        ElementDisplay { e: self, sig }
    }

    /// Terms as `(coefficient string, tree string)` pairs in tree order.
    pub fn to_strings(&self, sig: &Signature) -> Vec<(String, String)> {
        self.terms.iter().map(|(t, c)| (q_str(c), t.display(sig).to_string())).collect()
    }
}

pub struct ElementDisplay<'a> {
    e: &'a Element,
    sig: &'a Signature,
}

impl fmt::Display for ElementDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e.is_zero() {
            return write!(f, "0");
        }
        for (i, (t, c)) in self.e.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if !a.is_one() {
                write!(f, "{}*", q_str(&a))?;
            }
            write!(f, "{}", t.display(self.sig))?;
        }
        Ok(())
    }
}
