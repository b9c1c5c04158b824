use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::One;
use operad_core::apps::builtins::{builtin, BuiltinOptions, NAMES};
use operad_core::apps::parse::{parse_presentation, print_presentation};
use operad_core::apps::report::homology_vertex_bound;
use operad_core::element::{q, Element, Q};
use operad_core::groebner::{Bounds, GroebnerBasis, Presentation};
use operad_core::linalg::{rank, SparseVec};
use operad_core::morse::{anick_numbering, build_matching, morse_differential};
use operad_core::perturb::PerturbedComplex;
use operad_core::resolution::{chain_add, chain_axpy, chain_from_element, homology, Chain, Monomial, Resolution};
use operad_core::trees::{enumerate_trees, partial_compose, relabel_leaves, Label, Tree};
use proptest::prelude::*;
use proptest::sample::Index;

struct Fixture {
    p: Presentation,
    gb: GroebnerBasis,
    pc: PerturbedComplex,
    trees: Vec<Tree>,
    /// All markings of `trees`, grouped by arity and number of marks.
    strata: Vec<Vec<Monomial>>,
}

fn fixture(name: &str) -> Fixture {
    let p = builtin(name, &BuiltinOptions { max_arity: Some(4), ..Default::default() }).unwrap();
    let gb = GroebnerBasis::complete(&p, Bounds { arity: 4, vertices: p.default_vertex_bound(4) }).unwrap();
    let pc = PerturbedComplex::new(gb.clone());
    let mut trees = Vec::new();
    let mut by_key: BTreeMap<(usize, usize), Vec<Monomial>> = BTreeMap::new();
    for n in 1..=4 {
        for t in enumerate_trees(&p.sig, n, homology_vertex_bound(&p, n), p.planar) {
            for m in pc.resolution().markings(&t) {
                by_key.entry((n, m.q())).or_default().push(m);
            }
            trees.push(t);
        }
    }
    Fixture { p, gb, pc, trees, strata: by_key.into_values().collect() }
}

fn ncrb() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture("ncrb"))
}

fn bv() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture("bv"))
}

fn pick<'a, T>(items: &'a [T], i: &Index) -> &'a T {
    &items[i.index(items.len())]
}

fn random_chain(f: &Fixture, stratum: &Index, picks: &[(Index, i64)]) -> Chain {
    let pool = pick(&f.strata, stratum);
    let mut y = Chain::new();
    for (i, c) in picks {
        chain_add(&mut y, pick(pool, i).clone(), q(*c));
    }
    y
}

fn element_of(trees: &[Tree], picks: &[(Index, i64)], arity: usize) -> Element {
    let pool: Vec<&Tree> = trees.iter().filter(|t| t.arity() == arity).collect();
    let mut e = Element::zero(arity);
    for (i, c) in picks {
        e.add_term((*pick(&pool, i)).clone(), q(*c));
    }
    e
}

fn coefficients() -> impl Strategy<Value = Vec<(Index, i64)>> {
    prop::collection::vec((any::<Index>(), -3i64..=3), 1..4)
}

/// The derivation rule for `d` over the factorisation of a marked tree.
fn derivation_holds(res: &Resolution, m: &Monomial) -> bool {
    let pieces = res.pieces(m);
    let eps = res.factor_sign(m, &pieces);
    let mut rhs = Chain::new();
    let mut before = 0;
    for (i, piece) in pieces.iter().enumerate() {
        let sign = if before % 2 == 0 { 1 } else { -1 };
        for (y, c) in res.d(&piece.mono) {
            let (z, s) = res.replace_piece(m, &pieces, i, &y).unwrap();
            chain_add(&mut rhs, z, c * q(eps as i64 * sign * s as i64));
        }
        before += res.degree(&piece.mono);
    }
    rhs == res.d(m)
}

fn betti_from_morse(res: &Resolution, t: &Tree) -> Option<BTreeMap<usize, usize>> {
    let num = anick_numbering(res, t, 20_000)?;
    let m = build_matching(res, &num).unwrap();
    assert!(m.is_matching());
    let dm = morse_differential(res, &m);
    let mut rows: BTreeMap<usize, SparseVec> = BTreeMap::new();
    for (&(src, dst), c) in &dm {
        rows.entry(src).or_default().insert(dst, c.clone());
    }
    let q_of = |i: usize| m.cells[i].q();
    let mut out = BTreeMap::new();
    let top = m.critical.iter().map(|&i| q_of(i)).max().unwrap_or(0);
    let rank_at = |q: usize| rank(m.critical.iter().filter(|&&i| q_of(i) == q).filter_map(|i| rows.get(i).cloned()));
    for k in 0..=top {
        let count = m.critical.iter().filter(|&&i| q_of(i) == k).count();
        let b = count - rank_at(k) - rank_at(k + 1);
        if b > 0 {
            out.insert(k, b);
        }
    }
    Some(out)
}

#[test]
fn presentations_round_trip() {
    for name in NAMES {
        let p = builtin(name, &BuiltinOptions { max_arity: Some(5), ..Default::default() }).unwrap();
        let text = print_presentation(&p);
        let again = parse_presentation(&text, &BTreeMap::new()).unwrap();
        assert_eq!(print_presentation(&again), text, "{name}");
        assert_eq!(again.relations, p.relations, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn relabelling_round_trips(t in any::<Index>(), perm in Just((1..=4).collect::<Vec<Label>>()).prop_shuffle()) {
        let f = bv();
        let t = pick(&f.trees, &t);
        let sigma: Vec<Label> = perm.iter().copied().filter(|&x| x as usize <= t.arity()).collect();
        let mut inverse = vec![0; sigma.len()];
        for (i, &s) in sigma.iter().enumerate() {
            inverse[s as usize - 1] = i as Label + 1;
        }
        let (u, s1) = relabel_leaves(&f.p.sig, t, &sigma).unwrap();
        let (back, s2) = relabel_leaves(&f.p.sig, &u, &inverse).unwrap();
        prop_assert_eq!(&back, t);
        prop_assert_eq!(s1 * s2, 1);
    }

    #[test]
    fn orders_are_compatible_with_grafting(a in any::<Index>(), b in any::<Index>(), ctx in any::<Index>(), slot in any::<Index>()) {
        for f in [ncrb(), bv()] {
            let ord = f.gb.order();
            let small: Vec<&Tree> = f.trees.iter().filter(|t| t.arity() == 2 && t.vertex_count() <= 3).collect();
            let (a, b) = (*pick(&small, &a), *pick(&small, &b));
            let outer = pick(&f.trees, &ctx);
            if outer.is_leaf() || outer.arity() > 2 {
                continue;
            }
            let i = slot.index(outer.arity()) as Label + 1;
            let block: Vec<Label> = (i..i + 2).collect();
            let (ca, _) = partial_compose(&f.p.sig, outer, i, a, &block).unwrap();
            let (cb, _) = partial_compose(&f.p.sig, outer, i, b, &block).unwrap();
            prop_assert_eq!(ord.compare(a, b), ord.compare(&ca, &cb));
            let (ac, _) = partial_compose(&f.p.sig, a, 1, outer, &(1..=outer.arity() as Label).collect::<Vec<_>>()).unwrap();
            let (bc, _) = partial_compose(&f.p.sig, b, 1, outer, &(1..=outer.arity() as Label).collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(ord.compare(a, b), ord.compare(&ac, &bc));
        }
    }

    #[test]
    fn reduction_gives_normal_forms_in_the_same_class(arity in 2usize..=4, picks in coefficients()) {
        let f = bv();
        let e = element_of(&f.trees, &picks, arity);
        let r = f.gb.reduce(&e).unwrap();
        prop_assert!(r.terms().all(|(t, _)| f.gb.is_normal(t)));
        prop_assert!(f.gb.reduce(&e.sub(&r)).unwrap().is_zero());
        prop_assert_eq!(f.gb.reduce(&r).unwrap(), r);
    }

    #[test]
    fn resolution_differential_squares_to_zero(stratum in any::<Index>(), picks in coefficients()) {
        for f in [ncrb(), bv()] {
            let res = f.pc.resolution();
            let y = random_chain(f, &stratum, &picks);
            prop_assert!(res.d_chain(&res.d_chain(&y)).is_empty());
        }
    }

    #[test]
    fn resolution_differential_is_a_derivation(stratum in any::<Index>(), i in any::<Index>()) {
        for f in [ncrb(), bv()] {
            let m = pick(pick(&f.strata, &stratum), &i);
            prop_assert!(derivation_holds(f.pc.resolution(), m), "{}", f.pc.display(m));
        }
    }

    #[test]
    fn deformed_differential_squares_to_zero(stratum in any::<Index>(), picks in coefficients()) {
        for f in [ncrb(), bv()] {
            let y = random_chain(f, &stratum, &picks);
            let dy = f.pc.differential_chain(&y).unwrap();
            prop_assert!(f.pc.differential_chain(&dy).unwrap().is_empty());
        }
    }

    #[test]
    fn homotopy_contracts_cycles(stratum in any::<Index>(), picks in coefficients(), boundary in any::<bool>()) {
        for f in [ncrb(), bv()] {
            let y = random_chain(f, &stratum, &picks);
            let unmarked = y.keys().all(|m| m.q() == 0);
            let u = if unmarked && !boundary { y } else { f.pc.differential_chain(&y).unwrap() };
            let (h, residue) = f.pc.homotopy(&u).unwrap();
            let mut lhs = f.pc.differential_chain(&h).unwrap();
            chain_axpy(&mut lhs, &Q::one(), &residue);
            prop_assert_eq!(&lhs, &u);
            let plain: Vec<(Tree, Q)> = u.iter().filter(|(m, _)| m.q() == 0).map(|(m, c)| (m.tree.clone(), c.clone())).collect();
            let normal = match plain.first() {
                Some((t, _)) => chain_from_element(&f.gb.reduce(&Element::from_terms(t.arity(), plain.clone()).unwrap()).unwrap()),
                None => Chain::new(),
            };
            prop_assert_eq!(residue, normal);
        }
    }

    #[test]
    fn morse_complexes_compute_tree_homology(t in any::<Index>()) {
        for f in [ncrb(), bv()] {
            let res = f.pc.resolution();
            let t = pick(&f.trees, &t);
            let gens = res.generators_on(t);
            let oracle = homology(&gens, |m| res.internal_degree(&m.tree), |m| Ok(res.abelianized_d(m))).unwrap();
            let want: BTreeMap<usize, usize> = oracle.nonzero().into_iter().map(|((_, _, q), b)| (q, b)).collect();
            if let Some(got) = betti_from_morse(res, t) {
                prop_assert_eq!(got, want);
            }
        }
    }
}
