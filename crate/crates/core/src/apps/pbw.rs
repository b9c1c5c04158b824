//! Koszulness verdicts from quadratic Gröbner bases.

use serde::Serialize;

use crate::element::Element;
use crate::error::Result;
use crate::groebner::{Bounds, GroebnerBasis, Presentation};
use crate::perturb::PerturbedComplex;
use crate::resolution::{homology, HomologyTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PBW-Koszul")]
    PbwKoszul,
    NotQuadraticGB,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct PbwReport {
    pub verdict: Verdict,
    pub basis: GroebnerBasis,
    /// The non-quadratic basis element with the largest leading term.
    pub witness: Option<Element>,
    /// Quillen homology graded by number of vertices.
    pub diagonal: Option<HomologyTable>,
    pub reason: String,
}

fn is_quadratic(e: &Element) -> bool {
    e.terms().all(|(t, _)| t.vertex_count() == 2)
}

/// Completes `p` up to arity `bound`; a quadratic certified basis gives
/// PBW-Koszul after checking that the homology sits on the diagonal, where
/// the number of marks is one less than the number of vertices.
pub fn pbw_koszul_check(p: &Presentation, bound: usize) -> Result<PbwReport> {
    let bounds = Bounds { arity: bound, vertices: p.default_vertex_bound(bound) };
    let basis = GroebnerBasis::complete(p, bounds)?;
    let inconclusive = |basis: GroebnerBasis, reason: String| PbwReport { verdict: Verdict::Inconclusive, basis, witness: None, diagonal: None, reason };
    if p.max_relation_arity() > bound {
        return Ok(inconclusive(basis, format!("relations of arity {} exceed the bound", p.max_relation_arity())));
    }
    let cert = basis.is_groebner();
    if !cert.passed() {
        return Ok(inconclusive(basis, "completion not certified within the bound".into()));
    }
    let witness = basis
        .elements
        .iter()
        .filter(|e| !is_quadratic(&e.poly))
        .max_by(|a, b| {
            (a.lt.vertex_count(), basis.order().ord_key(&a.lt)).cmp(&(b.lt.vertex_count(), basis.order().ord_key(&b.lt)))
        })
        .map(|e| e.poly.clone());
    if let Some(w) = witness {
        return Ok(PbwReport {
            verdict: Verdict::NotQuadraticGB,
            basis,
            witness: Some(w),
            diagonal: None,
            reason: "the Gröbner basis has a non-quadratic element".into(),
        });
    }
    let pc = PerturbedComplex::new(basis.clone());
    let mut table = HomologyTable::default();
    for n in 1..=bound {
        let gens = pc.generators(n, p.default_vertex_bound(n));
        table.merge(homology(&gens, |m| m.tree.vertex_count() as i32, |m| pc.induced(m))?);
    }
    let off: Vec<_> = table.nonzero().into_keys().filter(|&(_, v, q)| q as i32 != v - 1).collect();
    if !off.is_empty() {
        return Ok(PbwReport {
            verdict: Verdict::Inconclusive,
            basis,
            witness: None,
            diagonal: Some(table),
            reason: format!("homology off the diagonal at {off:?}"),
        });
    }
    Ok(PbwReport { verdict: Verdict::PbwKoszul, basis, witness: None, diagonal: Some(table), reason: "quadratic Gröbner basis".into() })
}
