#![allow(dead_code)]

use std::collections::BTreeMap;

use operad_core::apps::builtins::{builtin, BuiltinOptions};
use operad_core::apps::parse::parse_element;
use operad_core::element::{Element, Q};
use operad_core::groebner::{Bounds, GroebnerBasis, Presentation};
use operad_core::trees::{Signature, Tree};

pub fn pres(name: &str) -> Presentation {
    builtin(name, &BuiltinOptions::default()).unwrap()
}

pub fn elem(sig: &Signature, text: &str) -> Element {
    parse_element(text, sig, &BTreeMap::new(), 1).unwrap()
}

/// The single tree of a monomial written in tree syntax, with its sign.
pub fn signed_tree(sig: &Signature, text: &str) -> (Tree, Q) {
    let e = elem(sig, text);
    assert_eq!(e.len(), 1, "{text}");
    let (t, c) = e.terms().next().unwrap();
    (t.clone(), c.clone())
}

pub fn tree(sig: &Signature, text: &str) -> Tree {
    signed_tree(sig, text).0
}

pub fn complete(p: &Presentation, arity: usize) -> GroebnerBasis {
    GroebnerBasis::complete(p, Bounds { arity, vertices: p.default_vertex_bound(arity) }).unwrap()
}

pub fn bounds(p: &Presentation, arity: usize) -> Bounds {
    Bounds { arity, vertices: p.default_vertex_bound(arity) }
}
