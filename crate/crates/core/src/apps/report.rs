//! Subcommands producing a JSON report and an exit code.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::apps::algebra::{algebra_to_operad, CommutativeAlgebra};
use crate::apps::builtins::{builtin, BuiltinOptions};
use crate::apps::parse::{parse_order, parse_presentation, print_presentation};
use crate::apps::pbw::{pbw_koszul_check, Verdict};
use crate::element::{q_str, Q};
use crate::error::{Error, Result};
use crate::groebner::{Bounds, GroebnerBasis, Presentation};
use crate::morse::{critical_cells, homology_oracle};
use crate::perturb::{display_monomial, PerturbedComplex};
use crate::resolution::{chain_axpy, Chain, HomologyTable, Monomial, Resolution};

pub const SUBCOMMANDS: [&str; 8] = ["gb", "normal", "hilbert", "resolve", "homology", "minmodel", "check-pbw", "from-algebra"];

pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;

const SEARCH_BUDGET: usize = 20_000;
const HOMOTOPY_SAMPLES: usize = 20;

#[derive(Clone, Debug)]
pub enum Source {
    Builtin(String),
    /// Contents of a presentation file, or an algebra file for `from-algebra`.
    Text(String),
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub source: Source,
    pub arity: usize,
    /// Keep only monomials of this weight in `normal` and `hilbert`.
    pub weight: Option<i64>,
    pub order: Option<String>,
    pub params: BTreeMap<String, Q>,
    pub seed: u64,
    pub k: Option<usize>,
    /// Vertex bound for resolution generators; a per-presentation default otherwise.
    pub vertices: Option<usize>,
}

impl RunOptions {
    pub fn new(source: Source, arity: usize) -> Self {
        RunOptions { source, arity, weight: None, order: None, params: BTreeMap::new(), seed: 0, k: None, vertices: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub document: Value,
    pub exit_code: i32,
}

/// Runs a subcommand; errors are reported in the document.
pub fn run(cmd: &str, opts: &RunOptions) -> Report {
    let result = match cmd {
        "gb" => gb(opts),
        "normal" => normal(opts),
        "hilbert" => hilbert(opts),
        "resolve" => resolve(opts),
        "homology" => homology(opts),
        "minmodel" => minmodel(opts),
        "check-pbw" => check_pbw(opts),
        "from-algebra" => from_algebra(opts),
        _ => Err(Error::Other(format!("unknown subcommand {cmd}; expected one of {}", SUBCOMMANDS.join(", ")))),
    };
    let (body, exit_code) = match result {
        Ok(r) => r,
        Err(e) => (json!({ "error": e.to_string() }), EXIT_ERROR),
    };
    let mut document = json!({ "subcommand": cmd, "arity": opts.arity, "seed": opts.seed });
    if let Source::Builtin(name) = &opts.source {
        document["builtin"] = json!(name);
    }
    if let (Value::Object(d), Value::Object(b)) = (&mut document, body) {
        d.extend(b);
    }
    Report { document, exit_code }
}

pub fn presentation(opts: &RunOptions) -> Result<Presentation> {
    let mut p = match &opts.source {
        Source::Builtin(name) => {
            let bo = BuiltinOptions { k: opts.k, max_arity: Some(opts.arity.max(3)), params: opts.params.clone() };
            builtin(name, &bo)?
        }
        Source::Text(text) => parse_presentation(text, &opts.params)?,
    };
    if let Some(spec) = &opts.order {
        p.order = parse_order(&p.sig, spec)?;
    }
    Ok(p)
}

/// Vertex bound for resolution generators of arity `n`.
pub fn homology_vertex_bound(p: &Presentation, n: usize) -> usize {
    if !p.sig.has_unary() {
        n.saturating_sub(1).max(1)
    } else if p.sig.generators().iter().any(|g| g.homdeg != 0) {
        n + 2
    } else {
        3 * (n.max(2) - 1)
    }
}

fn bounds(p: &Presentation, arity: usize) -> Bounds {
    let arity = arity.max(p.max_relation_arity());
    Bounds { arity, vertices: p.default_vertex_bound(arity) }
}

fn basis(p: &Presentation, opts: &RunOptions) -> Result<GroebnerBasis> {
    GroebnerBasis::complete(p, bounds(p, opts.arity))
}

fn vertex_bound(p: &Presentation, opts: &RunOptions, n: usize) -> usize {
    opts.vertices.unwrap_or_else(|| homology_vertex_bound(p, n))
}

fn element_json(p: &Presentation, e: &crate::groebner::GbElement) -> Value {
    json!({
        "id": e.id,
        "leading_term": e.lt.display(&p.sig).to_string(),
        "vertices": e.lt.vertex_count(),
        "element": e.poly.display(&p.sig).to_string(),
        "terms": e.poly.len(),
    })
}

fn gb(opts: &RunOptions) -> Result<(Value, i32)> {
    let p = presentation(opts)?;
    let gb = basis(&p, opts)?;
    let cert = gb.is_groebner();
    let elements: Vec<Value> = gb.elements.iter().map(|e| element_json(&p, e)).collect();
    let failures: Vec<&crate::groebner::ScmRecord> = cert.scms.iter().filter(|r| !r.reduces_to_zero).collect();
    let doc = json!({
        "order": gb.order().spec(),
        "bounds": gb.bounds,
        "basis": elements,
        "certificate": {
            "passed": cert.passed(),
            "pairs_checked": cert.pairs_checked,
            "scms": cert.scms.len(),
            "failures": failures,
        },
    });
    Ok((doc, if cert.passed() { 0 } else { EXIT_UNDECIDED }))
}

fn normal(opts: &RunOptions) -> Result<(Value, i32)> {
    let p = presentation(opts)?;
    let gb = basis(&p, opts)?;
    let mut by_arity = Vec::new();
    for n in 1..=opts.arity {
        let ms: Vec<String> = gb
            .normal_monomials(n)?
            .into_iter()
            .filter(|t| opts.weight.map_or(true, |w| t.weight(&p.sig) == w))
            .map(|t| t.display(&p.sig).to_string())
            .collect();
        by_arity.push(json!({ "arity": n, "count": ms.len(), "monomials": ms }));
    }
    Ok((json!({ "vertex_bound": gb.bounds.vertices, "normal": by_arity }), 0))
}

fn hilbert(opts: &RunOptions) -> Result<(Value, i32)> {
    let p = presentation(opts)?;
    let gb = basis(&p, opts)?;
    let mut rows = Vec::new();
    for n in 1..=opts.arity {
        let h: BTreeMap<(i32, i64), usize> = gb.hilbert(n)?.into_iter().filter(|((_, w), _)| opts.weight.map_or(true, |x| *w == x)).collect();
        let character: Vec<Value> = h.iter().map(|(&(d, w), &c)| json!({ "homdeg": d, "weight": w, "count": c })).collect();
        rows.push(json!({ "arity": n, "total": h.values().sum::<usize>(), "character": character }));
    }
    Ok((json!({ "vertex_bound": gb.bounds.vertices, "hilbert": rows }), 0))
}

fn generator_table(gens: &[Monomial]) -> Vec<Value> {
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for g in gens {
        *counts.entry((g.arity(), g.q())).or_insert(0) += 1;
    }
    counts.into_iter().map(|((n, q), c)| json!({ "arity": n, "marks": q, "count": c })).collect()
}

fn resolve(opts: &RunOptions) -> Result<(Value, i32)> {
    let p = presentation(opts)?;
    let gb = basis(&p, opts)?;
    let res = Resolution::from_basis(&gb);
    let mut all = Vec::new();
    let mut listing = Vec::new();
    let mut d_squared = true;
    for n in 1..=opts.arity {
        for g in res.generators(n, vertex_bound(&p, opts, n)) {
            d_squared &= res.d_chain(&res.d(&g)).is_empty();
            listing.push(json!({ "arity": n, "marks": g.q(), "generator": display_monomial(&res, &g) }));
            all.push(g);
        }
    }
    let leading: Vec<String> = res.leading().iter().map(|t| t.display(&p.sig).to_string()).collect();
    let doc = json!({
        "leading_terms": leading,
        "table": generator_table(&all),
        "generators": listing,
        "d_squared_zero": d_squared,
    });
    Ok((doc, if d_squared { 0 } else { EXIT_ERROR }))
}

fn table_json(t: &HomologyTable) -> Vec<Value> {
    t.nonzero()
        .into_iter()
        .map(|((n, i, q), b)| json!({ "arity": n, "internal_degree": i, "marks": q, "degree": i + q as i32, "suspended_degree": i + q as i32 + 1, "dim": b }))
        .collect()
}

fn is_monomial(gb: &GroebnerBasis) -> bool {
    gb.elements.iter().all(|e| e.poly.len() == 1)
}

fn homology(opts: &RunOptions) -> Result<(Value, i32)> {
    let p = presentation(opts)?;
    let gb = basis(&p, opts)?;
    if is_monomial(&gb) {
        let res = Resolution::from_basis(&gb);
        let mut morse = HomologyTable::default();
        let mut oracle = HomologyTable::default();
        let mut unnumbered = 0;
        for n in 1..=opts.arity {
            let mv = vertex_bound(&p, opts, n);
            let r = critical_cells(&res, n, mv, SEARCH_BUDGET)?;
            unnumbered += r.unnumbered.len();
            morse.merge(r.table(&res)?);
            oracle.merge(homology_oracle(&res, n, mv)?);
        }
        let agree = morse.nonzero() == oracle.nonzero();
        let doc = json!({
            "method": "morse",
            "homology": table_json(&oracle),
            "critical_cells": table_json(&morse),
            "trees_without_numbering": unnumbered,
            "morse_matches_oracle": agree,
        });
        return Ok((doc, if agree { 0 } else { EXIT_ERROR }));
    }
    let pc = PerturbedComplex::new(gb);
    let table = pc.quillen_homology(opts.arity, |n| vertex_bound(&p, opts, n))?;
    Ok((json!({ "method": "perturbed", "homology": table_json(&table) }), 0))
}

fn chain_json(pc: &PerturbedComplex, c: &Chain) -> Vec<Value> {
    c.iter()
        .zip(pc.expand(c))
        .map(|((m, x), (factors, fx))| {
            let f: Vec<String> = factors.iter().map(|m| pc.display(m)).collect();
            json!({ "coefficient": q_str(x), "term": pc.display(m), "factors": f, "factor_coefficient": q_str(&fx) })
        })
        .collect()
}

/// Checks `D(H(u)) = u - residue` on random `D`-cycles `u = D(y)`.
fn homotopy_samples(pc: &PerturbedComplex, gens: &[Monomial], seed: u64) -> Result<(usize, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let marked: Vec<&Monomial> = gens.iter().filter(|g| g.q() >= 1).collect();
    let mut ok = true;
    let mut n = 0;
    for _ in 0..HOMOTOPY_SAMPLES {
        let Some(&g) = marked.choose(&mut rng) else { break };
        let same: Vec<&&Monomial> = marked.iter().filter(|m| m.arity() == g.arity() && m.q() == g.q()).collect();
        let mut y = Chain::new();
        for m in same.choose_multiple(&mut rng, 3) {
            let c = Q::from_integer(rng.gen_range(-3i64..=3).into());
            crate::resolution::chain_add(&mut y, (**m).clone(), c);
        }
        let u = pc.differential_chain(&y)?;
        if u.is_empty() {
            continue;
        }
        let (h, residue) = pc.homotopy(&u)?;
        let mut lhs = pc.differential_chain(&h)?;
        chain_axpy(&mut lhs, &Q::from_integer(1.into()), &residue);
        ok &= lhs == u;
        n += 1;
    }
    Ok((n, ok))
}

fn minmodel(opts: &RunOptions) -> Result<(Value, i32)> {
    let p = presentation(opts)?;
    let gb = basis(&p, opts)?;
    let pc = PerturbedComplex::new(gb);
    let mut gens = Vec::new();
    for n in 1..=opts.arity {
        gens.extend(pc.generators(n, vertex_bound(&p, opts, n)));
    }
    let mut listing = Vec::new();
    let mut d_squared = true;
    let mut lower = true;
    for g in &gens {
        let d = pc.differential(g)?;
        d_squared &= pc.differential_chain(&d)?.is_empty();
        lower &= pc.lower_terms_property(g)?;
        let induced = pc.induced(g)?;
        listing.push(json!({
            "arity": g.arity(),
            "marks": g.q(),
            "generator": pc.display(g),
            "differential": chain_json(&pc, &d),
            "induced": chain_json(&pc, &induced),
        }));
    }
    let table = pc.quillen_homology(opts.arity, |n| vertex_bound(&p, opts, n))?;
    let (samples, homotopy_ok) = homotopy_samples(&pc, &gens, opts.seed)?;
    let ok = d_squared && lower && homotopy_ok;
    let doc = json!({
        "table": generator_table(&gens),
        "generators": listing,
        "homology": table_json(&table),
        "checks": {
            "d_squared_zero": d_squared,
            "lower_terms": lower,
            "homotopy_samples": samples,
            "homotopy_identity": homotopy_ok,
        },
    });
    Ok((doc, if ok { 0 } else { EXIT_ERROR }))
}

fn pbw_json(p: &Presentation, opts: &RunOptions) -> Result<(Value, i32)> {
    let r = pbw_koszul_check(p, opts.arity)?;
    let doc = json!({
        "verdict": r.verdict,
        "reason": r.reason,
        "basis": r.basis.elements.iter().map(|e| element_json(p, e)).collect::<Vec<_>>(),
        "witness": r.witness.map(|w| w.display(&p.sig).to_string()),
        "diagonal": r.diagonal.as_ref().map(|t| {
            t.nonzero().into_iter().map(|((n, v, q), b)| json!({ "arity": n, "vertices": v, "marks": q, "dim": b })).collect::<Vec<_>>()
        }),
    });
    Ok((doc, if r.verdict == Verdict::Inconclusive { EXIT_UNDECIDED } else { 0 }))
}

fn check_pbw(opts: &RunOptions) -> Result<(Value, i32)> {
    pbw_json(&presentation(opts)?, opts)
}

fn from_algebra(opts: &RunOptions) -> Result<(Value, i32)> {
    let Source::Text(text) = &opts.source else {
        return Err(Error::Other("from-algebra reads an algebra file".into()));
    };
    let a = CommutativeAlgebra::parse(text)?;
    let mut p = algebra_to_operad(&a)?;
    if let Some(spec) = &opts.order {
        p.order = parse_order(&p.sig, spec)?;
    }
    let gb = basis(&p, opts)?;
    let dims: Vec<Value> = (1..=opts.arity)
        .map(|n| gb.normal_monomials(n).map(|m| json!({ "arity": n, "dim": m.len() })))
        .collect::<Result<_>>()?;
    let (mut doc, code) = pbw_json(&p, opts)?;
    doc["presentation"] = json!(print_presentation(&p));
    doc["dimensions"] = json!(dims);
    Ok((doc, code))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_is_an_error() {
        let r = run("frobnicate", &RunOptions::new(Source::Builtin("free".into()), 3));
        assert_eq!(r.exit_code, EXIT_ERROR);
        assert!(r.document["error"].as_str().unwrap().contains("unknown subcommand"));
    }

    #[test]
    fn hilbert_of_the_free_operad() {
        let r = run("hilbert", &RunOptions::new(Source::Builtin("free".into()), 3));
        assert_eq!(r.exit_code, 0);
        let totals: Vec<u64> = r.document["hilbert"].as_array().unwrap().iter().map(|h| h["total"].as_u64().unwrap()).collect();
        assert_eq!(totals, vec![1, 1, 3]);
    }
}
