//! Presentation files and relation expressions.
//!
//! ```text
//! # comment
//! field Q
//! gen m 2 0            name arity homdeg [weight]
//! gen P 1 0
//! order path_lex P > m
//! param lambda 1
//! planar
//! rel P(m(P(1),2)) + P(m(1,P(2))) + lambda*P(m(1,2)) - m(P(1),P(2))
//! ```

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::element::{q_str, Element, Q};
use crate::error::{Error, Result};
use crate::groebner::Presentation;
use crate::orders::{MonomialOrder, OrderKind};
use crate::trees::{canonical_form, Generator, RawTree, Signature};

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line, _src: src }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.pos + 1, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            let ok = if self.pos == start { c.is_alphabetic() || c == '_' } else { c.is_alphanumeric() || c == '_' };
            if !ok {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn integer(&mut self) -> Option<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().ok()
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// Parses a rational such as `3`, `-2/5`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse { line: 0, col: 1, msg: format!("invalid rational {s:?}") };
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let (n, d) = match body.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (body, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    let x = Q::new(n, d);
    Ok(if neg { -x } else { x })
}

struct RelParser<'a, 'b> {
    lx: Lexer<'a>,
    sig: &'b Signature,
    params: &'b BTreeMap<String, Q>,
    tag: usize,
}

impl RelParser<'_, '_> {
    fn tree(&mut self) -> Result<RawTree> {
        if let Some(n) = self.lx.integer() {
            let l: u16 = n.try_into().map_err(|_| self.lx.err("leaf label too large"))?;
            if l == 0 {
                return Err(self.lx.err("leaf labels start at 1"));
            }
            return Ok(RawTree::Leaf(l));
        }
        let name = self.lx.ident().ok_or_else(|| self.lx.err("expected generator or leaf"))?;
        let gen = self.sig.id(&name).ok_or_else(|| self.lx.err(format!("unknown generator {name}")))?;
        let tag = self.tag;
        self.tag += 1;
        self.lx.expect('(')?;
        let mut children = vec![self.tree()?];
        while self.lx.eat(',') {
            children.push(self.tree()?);
        }
        self.lx.expect(')')?;
        let a = self.sig.get(gen).arity;
        if children.len() != a {
            return Err(self.lx.err(format!("{name} expects {a} inputs, got {}", children.len())));
        }
        Ok(RawTree::Node { gen, tag, children })
    }

    /// A product of scalar factors followed by a tree.
    fn term(&mut self) -> Result<(Q, RawTree)> {
        let mut coef = Q::one();
        loop {
            let save = self.lx.pos;
            if let Some(n) = self.lx.integer() {
                let mut x = Q::from_integer(n);
                if self.lx.eat('/') {
                    let d = self.lx.integer().ok_or_else(|| self.lx.err("expected denominator"))?;
                    if d.is_zero() {
                        return Err(self.lx.err("zero denominator"));
                    }
                    x /= Q::from_integer(d);
                }
                if self.lx.eat('*') {
                    coef *= x;
                    continue;
                }
                // A bare integer is a leaf.
                self.lx.pos = save;
                break;
            }
            let Some(name) = self.lx.ident() else { break };
            if self.lx.peek() == Some('(') {
                self.lx.pos = save;
                break;
            }
            let v = self.params.get(&name).ok_or_else(|| self.lx.err(format!("unknown parameter {name}")))?;
            coef *= v.clone();
            self.lx.expect('*')?;
        }
        self.tag = 0;
        Ok((coef, self.tree()?))
    }
}

/// Parses a relation expression into a canonical element, applying the
/// Koszul sign of each monomial's canonicalisation.
pub fn parse_element(text: &str, sig: &Signature, params: &BTreeMap<String, Q>, line: usize) -> Result<Element> {
    let mut p = RelParser { lx: Lexer::new(text, line), sig, params, tag: 0 };
    let mut terms: Vec<(Q, RawTree)> = Vec::new();
    let mut sign = if p.lx.eat('-') {
        -Q::one()
    } else {
        p.lx.eat('+');
        Q::one()
    };
    loop {
        let (c, t) = p.term()?;
        terms.push((sign * c, t));
        if p.lx.eat('+') {
            sign = Q::one();
        } else if p.lx.eat('-') {
            sign = -Q::one();
        } else {
            break;
        }
    }
    if !p.lx.at_end() {
        return Err(p.lx.err("unexpected trailing input"));
    }
    let mut arity = None;
    let mut out: Option<Element> = None;
    for (c, raw) in terms {
        let (t, s) = canonical_form(sig, &raw).map_err(|e| Error::Parse { line, col: 1, msg: e.to_string() })?;
        let n = t.arity();
        if *arity.get_or_insert(n) != n {
            return Err(Error::Parse { line, col: 1, msg: "terms of different arity".into() });
        }
        let e = out.get_or_insert_with(|| Element::zero(n));
        e.add_term(t, if s > 0 { c } else { -c });
    }
    let e = out.unwrap_or_else(|| Element::zero(1));
    e.homdeg(sig).map_err(|err| Error::Parse { line, col: 1, msg: err.to_string() })?;
    Ok(e)
}

/// Parses a presentation file; `overrides` replace parameter values.
pub fn parse_presentation(text: &str, overrides: &BTreeMap<String, Q>) -> Result<Presentation> {
    let mut gens: Vec<Generator> = Vec::new();
    let mut order_line: Option<(usize, String)> = None;
    let mut params: BTreeMap<String, Q> = BTreeMap::new();
    let mut rels: Vec<(usize, String)> = Vec::new();
    let mut planar = false;
    let mut name = "presentation".to_string();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (kw, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        let perr = |msg: String| Error::Parse { line, col: 1, msg };
        match kw {
            "field" => {
                if rest != "Q" && rest != "QQ" {
                    return Err(perr(format!("unsupported field {rest}")));
                }
            }
            "name" => name = rest.to_string(),
            "planar" => planar = true,
            "gen" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() < 3 || f.len() > 4 {
                    return Err(perr("gen NAME ARITY HOMDEG [WEIGHT]".into()));
                }
                let arity: usize = f[1].parse().map_err(|_| perr(format!("bad arity {}", f[1])))?;
                let homdeg: i32 = f[2].parse().map_err(|_| perr(format!("bad degree {}", f[2])))?;
                let weight: u32 = match f.get(3) {
                    Some(w) => w.parse().map_err(|_| perr(format!("bad weight {w}")))?,
                    None => 1,
                };
                let g = Generator::new(f[0], arity, homdeg).with_weight(weight);
                if !f[0].chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                    || !f[0].chars().all(|c| c.is_alphanumeric() || c == '_')
                {
                    return Err(perr(format!("bad generator name {}", f[0])));
                }
                gens.push(g);
            }
            "order" => order_line = Some((line, rest.to_string())),
            "param" => {
                let (pname, val) = rest.split_once(char::is_whitespace).ok_or_else(|| perr("param NAME VALUE".into()))?;
                params.insert(pname.to_string(), parse_rational(val).map_err(|_| perr(format!("bad value {val}")))?);
            }
            "rel" => rels.push((line, rest.to_string())),
            _ => return Err(perr(format!("unknown declaration {kw}"))),
        }
    }
    for (k, v) in overrides {
        params.insert(k.clone(), v.clone());
    }
    let sig = Signature::new(gens).map_err(|e| Error::Parse { line: 0, col: 1, msg: e.to_string() })?;
    let order = match order_line {
        Some((line, spec)) => parse_order(&sig, &spec).map_err(|e| Error::Parse { line, col: 1, msg: e.to_string() })?,
        None => MonomialOrder::new(sig.clone(), OrderKind::PathLex, &[])?,
    };
    let mut relations = Vec::new();
    for (line, r) in rels {
        let e = parse_element(&r, &sig, &params, line)?;
        if e.is_zero() {
            return Err(Error::Parse { line, col: 1, msg: "relation is zero".into() });
        }
        if planar && e.terms().any(|(t, _)| !t.is_planar()) {
            return Err(Error::Parse { line, col: 1, msg: "non-planar monomial in planar presentation".into() });
        }
        relations.push(e);
    }
    Ok(Presentation::new(&name, sig, relations, order, planar)?.with_params(params))
}

/// Accepts `kind:a>b` or `kind a > b`.
pub fn parse_order(sig: &std::sync::Arc<Signature>, spec: &str) -> Result<MonomialOrder> {
    let spec = spec.trim();
    let normalized = match spec.split_once(char::is_whitespace) {
        Some((k, rest)) if !k.contains(':') => format!("{k}:{}", rest.replace(char::is_whitespace, "")),
        _ => spec.to_string(),
    };
    MonomialOrder::parse_spec(sig.clone(), &normalized)
}

/// Prints a presentation in the file format; parameters are already folded
/// into the relation coefficients.
pub fn print_presentation(p: &Presentation) -> String {
    let mut s = String::new();
    s.push_str(&format!("name {}\nfield Q\n", p.name));
    for g in p.sig.generators() {
        s.push_str(&format!("gen {} {} {} {}\n", g.name, g.arity, g.homdeg, g.weight));
    }
    let names: Vec<&str> = p.order.precedence().iter().map(|&g| p.sig.get(g).name.as_str()).collect();
    s.push_str(&format!("order {} {}\n", p.order.kind().name(), names.join(" > ")));
    for (k, v) in &p.params {
        s.push_str(&format!("param {k} {}\n", q_str(v)));
    }
    if p.planar {
        s.push_str("planar\n");
    }
    for r in &p.relations {
        s.push_str(&format!("rel {}\n", r.display(&p.sig)));
    }
    s
}
