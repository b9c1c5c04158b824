//! The operad of a graded commutative algebra generated in degree one:
//! arity `n` is the degree `n-1` component, and composition multiplies.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::apps::parse::{parse_presentation, parse_rational};
use crate::element::{q_str, Q};
use crate::error::{Error, Result};
use crate::groebner::Presentation;

/// A commutative polynomial: sorted variable multisets with coefficients.
pub type Polynomial = BTreeMap<Vec<usize>, Q>;

#[derive(Clone, Debug, PartialEq)]
pub struct CommutativeAlgebra {
    pub vars: Vec<String>,
    pub relations: Vec<Polynomial>,
}

impl CommutativeAlgebra {
    pub fn new(vars: &[&str], relations: &[&str]) -> Result<Self> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let relations = relations.iter().map(|r| parse_polynomial(r, &vars)).collect::<Result<Vec<_>>>()?;
        Ok(CommutativeAlgebra { vars, relations })
    }

    /// Line-oriented text: `vars x y` and `rel <polynomial>`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vars: Vec<String> = Vec::new();
        let mut rels = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match kw {
                "vars" => vars.extend(rest.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).map(String::from)),
                "rel" => rels.push((i + 1, rest.trim().to_string())),
                _ => return Err(Error::Parse { line: i + 1, col: 1, msg: format!("unknown directive {kw}") }),
            }
        }
        if vars.is_empty() {
            return Err(Error::Parse { line: 1, col: 1, msg: "no variables declared".into() });
        }
        let relations = rels
            .into_iter()
            .map(|(line, r)| {
                parse_polynomial(&r, &vars).map_err(|e| match e {
                    Error::Parse { col, msg, .. } => Error::Parse { line, col, msg },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CommutativeAlgebra { vars, relations })
    }
}

/// Parses sums of terms like `3/2*x^2*y`.
pub fn parse_polynomial(text: &str, vars: &[String]) -> Result<Polynomial> {
    let err = |col: usize, msg: String| Error::Parse { line: 1, col, msg };
    let mut out = Polynomial::new();
    let mut terms: Vec<(usize, bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut neg = false;
    for (i, ch) in text.char_indices() {
        if (ch == '+' || ch == '-') && !cur.trim().is_empty() {
            terms.push((start, neg, std::mem::take(&mut cur)));
            neg = ch == '-';
            start = i + 1;
        } else if (ch == '+' || ch == '-') && cur.trim().is_empty() {
            neg ^= ch == '-';
            start = i + 1;
        } else {
            cur.push(ch);
        }
    }
    if cur.trim().is_empty() {
        return Err(err(text.len() + 1, "expected a term".into()));
    }
    terms.push((start, neg, cur));
    for (col, neg, term) in terms {
        let mut coeff = Q::one();
        let mut mono = Vec::new();
        for factor in term.split('*').map(str::trim) {
            if factor.is_empty() {
                return Err(err(col + 1, "empty factor".into()));
            }
            if factor.chars().next().unwrap().is_ascii_digit() {
                coeff *= parse_rational(factor).map_err(|_| err(col + 1, format!("bad coefficient {factor}")))?;
                continue;
            }
            let (name, exp) = match factor.split_once('^') {
                Some((n, e)) => (n.trim(), e.trim().parse::<usize>().map_err(|_| err(col + 1, format!("bad exponent in {factor}")))?),
                None => (factor, 1),
            };
            let v = vars.iter().position(|x| x == name).ok_or_else(|| err(col + 1, format!("unknown variable {name}")))?;
            mono.extend(std::iter::repeat(v).take(exp));
        }
        mono.sort_unstable();
        if neg {
            coeff = -coeff;
        }
        let e = out.entry(mono.clone()).or_insert_with(Q::zero);
        *e += coeff;
        if e.is_zero() {
            out.remove(&mono);
        }
    }
    Ok(out)
}

/// Right comb `v0(1, v1(2, ... v_{k-1}(k, k+1)))` in presentation syntax.
fn right_comb(vars: &[String], word: &[usize]) -> String {
    fn go(vars: &[String], word: &[usize], leaf: usize) -> String {
        if word.is_empty() {
            return leaf.to_string();
        }
        format!("{}({},{})", vars[word[0]], leaf, go(vars, &word[1..], leaf + 1))
    }
    go(vars, word, 1)
}

/// Presentation of the operad of `a`: one binary generator per variable,
/// relations making compositions depend only on the operations used, and the
/// algebra relations written as right combs.
pub fn algebra_to_operad(a: &CommutativeAlgebra) -> Result<Presentation> {
    let v = &a.vars;
    let mut text = String::from("name from-algebra\nfield Q\n");
    for name in v {
        writeln!(text, "gen {name} 2 0").unwrap();
    }
    writeln!(text, "order path_lex {}", v.join(" > ")).unwrap();
    for x in v {
        for y in v {
            writeln!(text, "rel {x}({y}(1,2),3) - {x}(1,{y}(2,3))").unwrap();
            writeln!(text, "rel {x}({y}(1,3),2) - {x}(1,{y}(2,3))").unwrap();
        }
    }
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            writeln!(text, "rel {} - {}", right_comb(v, &[i, j]), right_comb(v, &[j, i])).unwrap();
        }
    }
    for r in &a.relations {
        let degrees: Vec<usize> = r.keys().map(Vec::len).collect();
        if degrees.iter().any(|&d| d != degrees[0]) {
            return Err(Error::Inhomogeneous("algebra relation mixes degrees".into()));
        }
        if degrees.first() == Some(&0) {
            return Err(Error::Inhomogeneous("constant algebra relation".into()));
        }
        let mut line = String::from("rel ");
        for (k, (mono, c)) in r.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else if k > 0 { "+" } else { "" };
            let mag = c.abs();
            let coeff = if mag.is_one() { String::new() } else { format!("{}*", q_str(&mag)) };
            write!(line, "{}{}{}{}", if k > 0 { " " } else { "" }, sign, if k > 0 { " " } else { "" }, coeff).unwrap();
            line.push_str(&right_comb(v, mono));
        }
        writeln!(text, "{line}").unwrap();
    }
    parse_presentation(&text, &BTreeMap::new())
}
