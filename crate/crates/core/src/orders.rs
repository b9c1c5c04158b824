//! Admissible total orders on tree monomials.
//!
//! Every order is a lexicographic comparison of an integer key, with the
//! derived structural order on trees as a final tiebreak for totality.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::trees::{partial_compose, GenId, Label, Sig, Signature, Tree, TreeEnumerator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum OrderKind {
    /// Per leaf: path length, then path letters; then the planar leaf sequence.
    PathLex,
    /// Per generator (by precedence): path-occurrence counts over leaves; then
    /// path letters; then the planar leaf sequence.
    PathLexThenPerm,
    /// Weight first (larger is bigger), then the reverse of `PathLexThenPerm`
    /// computed with the precedence reversed.
    WeightFirstReversePathLex,
}

impl OrderKind {
    pub fn name(self) -> &'static str {
        match self {
            OrderKind::PathLex => "path_lex",
            OrderKind::PathLexThenPerm => "pathlex_then_perm",
            OrderKind::WeightFirstReversePathLex => "weight_first_reverse_pathlex",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "path_lex" | "pathlex" => Ok(OrderKind::PathLex),
            "pathlex_then_perm" => Ok(OrderKind::PathLexThenPerm),
            "weight_first_reverse_pathlex" | "grav" => Ok(OrderKind::WeightFirstReversePathLex),
            _ => Err(Error::Other(format!("unknown order kind {s}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MonomialOrder {
    kind: OrderKind,
    sig: Sig,
    /// Generators from highest to lowest precedence.
    precedence: Vec<GenId>,
    /// `rank[g]` grows with precedence.
    rank: Vec<i64>,
}

impl PartialEq for MonomialOrder {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.precedence == other.precedence && self.sig == other.sig
    }
}

impl MonomialOrder {
    /// `precedence` lists generators from highest to lowest; generators not
    /// mentioned are placed below in declaration order.
    pub fn new(sig: Sig, kind: OrderKind, precedence: &[GenId]) -> Result<Self> {
        let mut prec: Vec<GenId> = Vec::new();
        for &g in precedence {
            if g as usize >= sig.len() {
                return Err(Error::Generator(format!("unknown id {g}")));
            }
            if prec.contains(&g) {
                return Err(Error::Generator(format!("{} repeated in precedence", sig.get(g).name)));
            }
            prec.push(g);
        }
        for g in sig.ids() {
            if !prec.contains(&g) {
                prec.push(g);
            }
        }
        let mut rank = vec![0i64; sig.len()];
        let m = prec.len() as i64;
        for (i, &g) in prec.iter().enumerate() {
            rank[g as usize] = m - i as i64;
        }
        Ok(MonomialOrder { kind, sig, precedence: prec, rank })
    }

    pub fn by_names(sig: Sig, kind: OrderKind, names: &[&str]) -> Result<Self> {
        let ids = names
            .iter()
            .map(|n| sig.id(n).ok_or_else(|| Error::Generator(format!("unknown generator {n}"))))
            .collect::<Result<Vec<_>>>()?;
        MonomialOrder::new(sig, kind, &ids)
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn precedence(&self) -> &[GenId] {
        &self.precedence
    }

    pub fn signature(&self) -> &Sig {
        &self.sig
    }

    /// `kind:g1>g2>...` with generator names.
    pub fn spec(&self) -> String {
        let names: Vec<&str> = self.precedence.iter().map(|&g| self.sig.get(g).name.as_str()).collect();
        format!("{}:{}", self.kind.name(), names.join(">"))
    }

    /// Parses `kind` or `kind:g1>g2>...`.
    pub fn parse_spec(sig: Sig, spec: &str) -> Result<Self> {
        let (kind, rest) = match spec.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => (spec.trim(), ""),
        };
        let kind = OrderKind::parse(kind)?;
        let names: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split('>').map(str::trim).collect() };
        MonomialOrder::by_names(sig, kind, &names)
    }

    pub fn key(&self, t: &Tree) -> Vec<i64> {
        match self.kind {
            OrderKind::PathLex => self.path_lex_key(t),
            OrderKind::PathLexThenPerm => self.count_key(t, false),
            OrderKind::WeightFirstReversePathLex => {
                let mut k = vec![t.weight(&self.sig)];
                k.extend(self.count_key(t, true).into_iter().map(|x| -x));
                k
            }
        }
    }

    fn path_lex_key(&self, t: &Tree) -> Vec<i64> {
        let mut k = Vec::new();
        for w in t.path_words() {
            k.push(w.len() as i64);
            k.extend(w.iter().map(|&g| self.rank[g as usize]));
        }
        k.extend(t.planar_leaves().iter().map(|&l| l as i64));
        k
    }

    fn count_key(&self, t: &Tree, reversed: bool) -> Vec<i64> {
        let words = t.path_words();
        let mut k = Vec::new();
        let gens: Vec<GenId> =
            if reversed { self.precedence.iter().rev().copied().collect() } else { self.precedence.clone() };
        let m = self.rank.len() as i64 + 1;
        for &g in &gens {
            k.extend(words.iter().map(|w| w.iter().filter(|&&h| h == g).count() as i64));
        }
        for w in &words {
            k.extend(w.iter().map(|&g| if reversed { m - self.rank[g as usize] } else { self.rank[g as usize] }));
        }
        k.extend(t.planar_leaves().iter().map(|&l| l as i64));
        k
    }

    pub fn compare(&self, a: &Tree, b: &Tree) -> Ordering {
        self.key(a).cmp(&self.key(b)).then_with(|| a.cmp(b))
    }

    pub fn compare_checked(&self, a: &Tree, b: &Tree) -> Result<Ordering> {
        if a.arity() != b.arity() {
            return Err(Error::Arity(format!("comparing arities {} and {}", a.arity(), b.arity())));
        }
        Ok(self.compare(a, b))
    }

    pub fn ord_key(&self, t: &Tree) -> OrdKey {
        OrdKey { key: self.key(t), tree: t.clone() }
    }
}

impl fmt::Display for MonomialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec())
    }
}

/// A tree together with its order key; sorts as the order does.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrdKey {
    pub key: Vec<i64>,
    pub tree: Tree,
}

/// A violation of admissibility: `lo < hi` but `ctx(lo) > ctx(hi)`.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityWitness {
    pub lo: String,
    pub hi: String,
    pub lo_in_context: String,
    pub hi_in_context: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub samples: usize,
    pub violations: usize,
    pub witness: Option<AdmissibilityWitness>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Randomised check that `cmp` is compatible with shuffle compositions: for
/// sampled `a < b`, plugging both into the same slot of a context, or plugging
/// the same tree into the same leaf of both, preserves the strict inequality.
pub fn check_admissibility(
    sig: &Signature,
    cmp: impl Fn(&Tree, &Tree) -> Ordering,
    max_arity: usize,
    max_vertices: usize,
    samples: usize,
    seed: u64,
    planar: bool,
) -> AdmissibilityReport {
    let mut report = AdmissibilityReport { samples, violations: 0, witness: None };
    if samples == 0 {
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut en = TreeEnumerator::new(sig, planar, max_vertices);
    let pools: Vec<Vec<Tree>> = (0..=max_arity).map(|n| if n == 0 { Vec::new() } else { en.trees(n) }).collect();
    let nonempty: Vec<usize> = (1..=max_arity).filter(|&n| pools[n].len() >= 2).collect();
    let small: Vec<usize> = (1..=max_arity).filter(|&n| !pools[n].is_empty()).collect();
    if nonempty.is_empty() {
        return report;
    }
    for _ in 0..samples {
        let n = *nonempty.choose(&mut rng).unwrap();
        let mut a = pools[n].choose(&mut rng).unwrap().clone();
        let mut b = pools[n].choose(&mut rng).unwrap().clone();
        match cmp(&a, &b) {
            Ordering::Equal => continue,
            Ordering::Greater => std::mem::swap(&mut a, &mut b),
            Ordering::Less => {}
        }
        let m = *small.choose(&mut rng).unwrap();
        let other = pools[m].choose(&mut rng).unwrap().clone();
        let outer_slot = rng.gen_bool(0.5);
        let total = n + m - 1;
        let result = if outer_slot {
            // a, b inserted into leaf i of `other`
            let i = rng.gen_range(1..=m) as Label;
            let block = random_block(&mut rng, total, i, n, planar);
            let ca = partial_compose(sig, &other, i, &a, &block);
            let cb = partial_compose(sig, &other, i, &b, &block);
            (ca, cb)
        } else {
            let i = rng.gen_range(1..=n) as Label;
            let block = random_block(&mut rng, total, i, m, planar);
            let ca = partial_compose(sig, &a, i, &other, &block);
            let cb = partial_compose(sig, &b, i, &other, &block);
            (ca, cb)
        };
        if let (Ok((ca, _)), Ok((cb, _))) = result {
            if cmp(&ca, &cb) != Ordering::Less {
                report.violations += 1;
                if report.witness.is_none() {
                    report.witness = Some(AdmissibilityWitness {
                        lo: a.display(sig).to_string(),
                        hi: b.display(sig).to_string(),
                        lo_in_context: ca.display(sig).to_string(),
                        hi_in_context: cb.display(sig).to_string(),
                    });
                }
            }
        }
    }
    report
}

/// A block of size `size` with minimum `i` inside `1..=total`.
fn random_block(rng: &mut impl Rng, total: usize, i: Label, size: usize, planar: bool) -> Vec<Label> {
    if planar {
        return (i..i + size as Label).collect();
    }
    let mut rest: Vec<Label> = ((i + 1)..=total as Label).collect();
    rest.shuffle(rng);
    let mut b: Vec<Label> = std::iter::once(i).chain(rest.into_iter().take(size - 1)).collect();
    b.sort_unstable();
    b
}
