mod common;

use std::collections::BTreeMap;

use common::{complete, pres, tree};
use operad_core::apps::report::homology_vertex_bound;
use operad_core::morse::{anick_numbering, build_matching, critical_cells, homology_oracle};
use operad_core::resolution::{Monomial, Resolution};

const BUDGET: usize = 20_000;

fn monomial(name: &str, arity: usize) -> (operad_core::groebner::Presentation, Resolution) {
    let p = pres(name);
    let gb = complete(&p, arity);
    (p, Resolution::from_basis(&gb))
}

fn totals(t: &operad_core::resolution::HomologyTable) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for ((n, _, _), b) in t.nonzero() {
        *out.entry(n).or_insert(0) += b;
    }
    out
}

#[test]
fn trees_without_divisors_are_all_critical() {
    let (p, res) = monomial("ncrb", 3);
    for text in ["m(1,2)", "P(1)"] {
        let t = tree(&p.sig, text);
        let num = anick_numbering(&res, &t, BUDGET).unwrap();
        assert!(num.order.is_empty());
        let m = build_matching(&res, &num).unwrap();
        assert!(m.pairs.is_empty());
        assert_eq!(m.critical.len(), m.cells.len());
        assert_eq!(m.cells, vec![Monomial::unmarked(t)]);
    }
}

#[test]
fn ncrb_strata_have_one_critical_cell() {
    let (p, res) = monomial("ncrb", 5);
    for n in 2..=5 {
        let report = critical_cells(&res, n, homology_vertex_bound(&p, n), BUDGET).unwrap();
        assert!(report.unnumbered.is_empty());
        for m in &report.matchings {
            assert!(m.is_matching());
            assert_eq!(m.critical.len(), 1, "{:?}", m.numbering.tree);
        }
        let mut degrees: Vec<usize> = report.critical().iter().map(|c| c.q()).collect();
        degrees.sort();
        assert_eq!(degrees, if n == 2 { vec![0, 1] } else { vec![n - 2, n - 1] }, "arity {n}");
    }
}

#[test]
fn rota_baxter_monomial_oracle() {
    let (p, res) = monomial("rb", 5);
    for n in 2..=5usize {
        let table = homology_oracle(&res, n, homology_vertex_bound(&p, n)).unwrap();
        let gens = res.generators(n, homology_vertex_bound(&p, n)).len();
        assert_eq!(totals(&table)[&n], gens, "arity {n}");
        let report = critical_cells(&res, n, homology_vertex_bound(&p, n), BUDGET).unwrap();
        assert_eq!(report.table(&res).unwrap().nonzero(), table.nonzero(), "arity {n}");
    }
}

#[test]
fn bv_betti_numbers_count_generators() {
    let (p, res) = monomial("bv", 4);
    for n in 1..=4 {
        let bound = homology_vertex_bound(&p, n);
        let table = homology_oracle(&res, n, bound).unwrap();
        assert_eq!(totals(&table).get(&n).copied().unwrap_or(0), res.generators(n, bound).len(), "arity {n}");
    }
}

#[test]
fn free_operad_homology_is_the_generators() {
    let p = pres("free");
    let res = Resolution::new(p.sig.clone(), p.planar, Vec::new());
    let t = homology_oracle(&res, 2, 1).unwrap();
    assert_eq!(t.nonzero(), BTreeMap::from([((2, 0, 0), 1)]));
    assert!(homology_oracle(&res, 3, 2).unwrap().nonzero().is_empty());
}
