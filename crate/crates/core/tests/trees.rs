mod common;

use common::{elem, pres, tree};
use operad_core::element::Element;
use operad_core::trees::{
    compose, divisor_occurrences, enumerate_shuffle_surjections, partial_compose, relabel_leaves, substitute_monomial, ShuffleSurjection, Tree,
};

#[test]
fn corolla_is_its_own_canonical_form() {
    let p = pres("free");
    let m = p.sig.id("m").unwrap();
    let c = Tree::corolla(&p.sig, m);
    assert_eq!(c, tree(&p.sig, "m(1,2)"));
    assert_eq!(c.arity(), 2);
    assert_eq!(c.vertex_count(), 1);
    assert!(Tree::unit().is_leaf());
    assert_eq!(Tree::unit().arity(), 1);
}

#[test]
fn trivial_shuffle_surjections() {
    for m in 1..=5 {
        let s = enumerate_shuffle_surjections(&[m]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].blocks, vec![(1..=m as u16).collect::<Vec<_>>()]);
    }
    for n in 1..=5 {
        let s = enumerate_shuffle_surjections(&vec![1; n]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].blocks, (1..=n as u16).map(|i| vec![i]).collect::<Vec<_>>());
    }
}

#[test]
fn grafting_a_product_into_the_first_slot() {
    let p = pres("free");
    let mu = tree(&p.sig, "m(1,2)");
    let phi = ShuffleSurjection::new(vec![vec![1, 2], vec![3]]).unwrap();
    let (t, s) = compose(&p.sig, &mu, &phi, &[mu.clone(), Tree::unit()]).unwrap();
    assert_eq!(t, tree(&p.sig, "m(m(1,2),3)"));
    assert_eq!(s, 1);
}

#[test]
fn composing_with_units_is_the_identity() {
    let p = pres("bv");
    for text in ["m(m(1,2),3)", "D(m(1,D(m(2,3))))", "m(D(1),2)"] {
        let x = tree(&p.sig, text);
        let n = x.arity();
        let phi = ShuffleSurjection::new((1..=n as u16).map(|i| vec![i]).collect()).unwrap();
        let units = vec![Tree::unit(); n];
        assert_eq!(compose(&p.sig, &x, &phi, &units).unwrap(), (x.clone(), 1), "{text}");
    }
}

#[test]
fn odd_vertices_change_sign_when_reordered() {
    let p = operad_core::apps::builtins::odd_assoc(1).unwrap();
    let mu = tree(&p.sig, "mu(1,2,3)");
    // Inserting into slot 3 and then slot 1 creates the vertices out of
    // depth-first order, which costs one transposition of odd vertices.
    let (a, s1) = partial_compose(&p.sig, &mu, 3, &mu, &[3, 4, 5]).unwrap();
    let (b, s2) = partial_compose(&p.sig, &a, 1, &mu, &[1, 2, 3]).unwrap();
    assert_eq!(b, tree(&p.sig, "mu(mu(1,2,3),4,mu(5,6,7))"));
    assert_eq!((s1, s2), (1, -1));
}

#[test]
fn divisibility_of_equal_and_larger_trees() {
    let p = pres("ncrb");
    for text in ["m(1,2)", "P(m(P(1),2))", "m(m(1,2),3)"] {
        let t = tree(&p.sig, text);
        let occs = divisor_occurrences(&t, &t);
        assert_eq!(occs.len(), 1, "{text}");
        assert_eq!(occs[0].root, 0);
    }
    let small = tree(&p.sig, "m(1,2)");
    let big = tree(&p.sig, "m(m(1,2),3)");
    assert!(divisor_occurrences(&small, &big).is_empty());
}

#[test]
fn substituting_associativity_into_the_four_leaf_comb() {
    let p = pres("free");
    let host = tree(&p.sig, "m(m(m(1,2),3),4)");
    let lhs = tree(&p.sig, "m(m(1,2),3)");
    let g = elem(&p.sig, "m(m(1,2),3) - m(1,m(2,3))");
    let occs = divisor_occurrences(&host, &lhs);
    assert_eq!(occs.iter().map(|o| o.root).collect::<Vec<_>>(), vec![0, 1]);
    let lower = Element::substitute(&p.sig, &host, &occs[1], &g).unwrap();
    assert_eq!(lower, elem(&p.sig, "m(m(m(1,2),3),4) - m(m(1,m(2,3)),4)"));
    let upper = Element::substitute(&p.sig, &host, &occs[0], &g).unwrap();
    assert_eq!(upper, elem(&p.sig, "m(m(m(1,2),3),4) - m(m(1,2),m(3,4))"));
}

#[test]
fn substituting_the_pattern_returns_the_host() {
    let p = pres("bv");
    let host = tree(&p.sig, "D(m(m(D(1),2),D(m(3,4))))");
    let pat = tree(&p.sig, "D(m(1,2))");
    for occ in divisor_occurrences(&host, &pat) {
        assert_eq!(substitute_monomial(&p.sig, &host, &occ, &pat).unwrap(), (host.clone(), 1));
    }
}

#[test]
fn identity_relabelling_changes_nothing() {
    let p = pres("bv");
    let t = tree(&p.sig, "m(D(m(1,3)),2)");
    assert_eq!(relabel_leaves(&p.sig, &t, &[1, 2, 3]).unwrap(), (t.clone(), 1));
    let (u, _) = relabel_leaves(&p.sig, &t, &[1, 3, 2]).unwrap();
    assert_eq!(u, tree(&p.sig, "m(D(m(1,2)),3)"));
}
