//! Built-in presentations.

use std::collections::BTreeMap;

use crate::apps::parse::parse_presentation;
use crate::element::{q, Element, Q};
use crate::error::{Error, Result};
use crate::groebner::Presentation;
use crate::orders::{MonomialOrder, OrderKind};
use crate::trees::{canonical_form, choose, Generator, Label, RawTree, Signature, Tree};

pub const NAMES: [&str; 6] = ["rb", "ncrb", "bv", "grav", "odd-assoc", "free"];

/// Options for built-ins that take them.
#[derive(Clone, Debug, Default)]
pub struct BuiltinOptions {
    /// `k` for the odd `(2k+1)`-associative operad.
    pub k: Option<usize>,
    /// Largest generator arity for the gravity operad.
    pub max_arity: Option<usize>,
    pub params: BTreeMap<String, Q>,
}

pub fn builtin(name: &str, opts: &BuiltinOptions) -> Result<Presentation> {
    match name {
        "rb" => rota_baxter(false, &opts.params),
        "ncrb" => rota_baxter(true, &opts.params),
        "bv" => bv(),
        "grav" => grav(opts.max_arity.unwrap_or(6)),
        "odd-assoc" => odd_assoc(opts.k.unwrap_or(1)),
        "free" => free(),
        _ => Err(Error::Other(format!("unknown built-in {name}; expected one of {}", NAMES.join(", ")))),
    }
}

const RB_COMMUTATIVE: &str = "\
name rb
field Q
gen m 2 0
gen P 1 0
order path_lex P > m
param lambda 1
rel m(m(1,2),3) - m(1,m(2,3))
rel m(m(1,3),2) - m(1,m(2,3))
rel P(m(P(1),2)) + P(m(1,P(2))) + lambda*P(m(1,2)) - m(P(1),P(2))
";

const RB_NONCOMMUTATIVE: &str = "\
name ncrb
field Q
gen m 2 0
gen P 1 0
order path_lex P > m
param lambda 1
planar
rel m(m(1,2),3) - m(1,m(2,3))
rel P(m(P(1),2)) + P(m(1,P(2))) + lambda*P(m(1,2)) - m(P(1),P(2))
";

const BV: &str = "\
name bv
field Q
gen m 2 0
gen D 1 1
order pathlex_then_perm D > m
rel m(m(1,2),3) - m(1,m(2,3))
rel m(m(1,3),2) - m(1,m(2,3))
rel D(D(1))
rel D(m(1,m(2,3))) - m(D(m(1,2)),3) - m(D(m(1,3)),2) - m(1,D(m(2,3))) + m(D(1),m(2,3)) + m(1,m(D(2),3)) + m(1,m(2,D(3)))
";

const FREE: &str = "\
name free
field Q
gen m 2 0
";

/// Rota-Baxter operads of weight `lambda`; `planar` gives the non-commutative one.
pub fn rota_baxter(planar: bool, params: &BTreeMap<String, Q>) -> Result<Presentation> {
    parse_presentation(if planar { RB_NONCOMMUTATIVE } else { RB_COMMUTATIVE }, params)
}

/// Batalin-Vilkovisky operad: commutative product with an order-two operator.
pub fn bv() -> Result<Presentation> {
    parse_presentation(BV, &BTreeMap::new())
}

pub fn free() -> Result<Presentation> {
    parse_presentation(FREE, &BTreeMap::new())
}

/// The non-symmetric operad with one odd operation of arity `2k+1` that is
/// associative in all positions.
pub fn odd_assoc(k: usize) -> Result<Presentation> {
    if k == 0 {
        return Err(Error::Other("k must be positive".into()));
    }
    let a = 2 * k + 1;
    let sig = Signature::new(vec![Generator::new("mu", a, 1)])?;
    let insert = |p: usize| -> Tree {
        let mut ch: Vec<Tree> = Vec::new();
        for i in 1..=a {
            if i == p {
                ch.push(Tree::Node(0, (p..p + a).map(|x| Tree::Leaf(x as Label)).collect()));
            } else if i < p {
                ch.push(Tree::Leaf(i as Label));
            } else {
                ch.push(Tree::Leaf((i + a - 1) as Label));
            }
        }
        Tree::Node(0, ch)
    };
    let last = insert(a);
    let rels = (1..a)
        .map(|p| Element::from_terms(2 * a - 1, [(insert(p), q(1)), (last.clone(), q(-1))]))
        .collect::<Result<Vec<_>>>()?;
    let ord = MonomialOrder::new(sig.clone(), OrderKind::PathLex, &[])?;
    Presentation::new("odd-assoc", sig, rels, ord, true)
}

/// Sign of the permutation sorting `xs`.
fn sort_sign(xs: &[Label]) -> i64 {
    let mut inv = 0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[i] > xs[j] {
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

fn raw_min(r: &RawTree) -> Label {
    match r {
        RawTree::Leaf(l) => *l,
        RawTree::Node { children, .. } => children.iter().map(raw_min).min().unwrap(),
    }
}

/// Canonical form of a tree of totally antisymmetric operations: the Koszul
/// sign times the signs of the input permutations.
fn antisymmetric_canonical(sig: &Signature, raw: &RawTree) -> Result<(Tree, i64)> {
    fn perm_signs(r: &RawTree) -> i64 {
        match r {
            RawTree::Leaf(_) => 1,
            RawTree::Node { children, .. } => {
                let mins: Vec<Label> = children.iter().map(raw_min).collect();
                sort_sign(&mins) * children.iter().map(perm_signs).product::<i64>()
            }
        }
    }
    let (t, s) = canonical_form(sig, raw)?;
    Ok((t, s as i64 * perm_signs(raw)))
}

/// The gravity operad with brackets `c2..c_max` of degree `2-n`; `c2` has
/// weight 0 and the other brackets weight 1.
///
/// For `A` of size `k >= 3` with complement `B` of size `l`, the relation is
/// `sum_{p<q} (-1)^(p+q+1) c(c2(a_p,a_q), A - {a_p,a_q}, B) - (-1)^k c(c_k(A), B)`
/// (positions `p, q` counted from 1), the last term present only when `l > 0`.
pub fn grav(max_arity: usize) -> Result<Presentation> {
    grav_with_signs(max_arity, |p, q, _| if (p + q) % 2 == 0 { -1 } else { 1 }, |k, _| if k % 2 == 0 { 1 } else { -1 })
}

/// The gravity presentation with the sign of each left-hand term given by
/// `lhs(p, q, k)` (0-based positions) and the right-hand sign by `rhs(k, l)`.
pub fn grav_with_signs(max_arity: usize, lhs: impl Fn(usize, usize, usize) -> i64, rhs: impl Fn(usize, usize) -> i64) -> Result<Presentation> {
    if max_arity < 2 {
        return Err(Error::Other("gravity operad needs arity at least 2".into()));
    }
    let gens: Vec<Generator> = (2..=max_arity)
        .map(|n| Generator::new(&format!("c{n}"), n, 2 - n as i32).with_weight(if n == 2 { 0 } else { 1 }))
        .collect();
    let sig = Signature::new(gens)?;
    let c = |n: usize| (n - 2) as u16;
    let mut rels = Vec::new();
    for n in 3..=max_arity {
        let all: Vec<Label> = (1..=n as Label).collect();
        for k in 3..=n {
            for a in choose(&all, k) {
                let b: Vec<Label> = all.iter().copied().filter(|x| !a.contains(x)).collect();
                let l = b.len();
                let mut e = Element::zero(n);
                for p in 0..k {
                    for qq in p + 1..k {
                        let mut children = vec![RawTree::Node {
                            gen: c(2),
                            tag: 1,
                            children: vec![RawTree::Leaf(a[p]), RawTree::Leaf(a[qq])],
                        }];
                        children.extend(a.iter().enumerate().filter(|&(i, _)| i != p && i != qq).map(|(_, &x)| RawTree::Leaf(x)));
                        children.extend(b.iter().map(|&x| RawTree::Leaf(x)));
                        let raw = RawTree::Node { gen: c(n - 1), tag: 0, children };
                        let (t, s) = antisymmetric_canonical(&sig, &raw)?;
                        let sign = lhs(p, qq, k);
                        e.add_term(t, q(sign * s));
                    }
                }
                if l > 0 {
                    let mut children = vec![RawTree::Node { gen: c(k), tag: 1, children: a.iter().map(|&x| RawTree::Leaf(x)).collect() }];
                    children.extend(b.iter().map(|&x| RawTree::Leaf(x)));
                    let raw = RawTree::Node { gen: c(l + 1), tag: 0, children };
                    let (t, s) = antisymmetric_canonical(&sig, &raw)?;
                    e.add_term(t, q(-s * rhs(k, l)));
                }
                if !e.is_zero() {
                    rels.push(e);
                }
            }
        }
    }
    let prec: Vec<u16> = (2..=max_arity).map(c).collect();
    let ord = MonomialOrder::new(sig.clone(), OrderKind::WeightFirstReversePathLex, &prec)?;
    Presentation::new("grav", sig, rels, ord, false)
}
