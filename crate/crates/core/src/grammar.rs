//! Text forms for functions, spacetimes, potentials and densities.
//!
//! ```text
//! u        := "u_p:" float | "u_0" | "shifted_u_p:" float | "shifted_u_0"
//!           | "conjugate(" u ")" | "rescale(" u "," float ")" | "shift(" u "," float ")"
//! st       := "minkowski:" int [sep "V=" weight] [sep "N=" ("inf" | float)]
//! weight   := "none" | "linear:c=" f | "quad:alpha=" f | "gauss:amp=" f ",width=" f
//! phi      := "affine:a=" vec [",b=" f] | "quad:q=" vec ",a=" vec [",b=" f]
//! density  := "box:lo=" vec ",hi=" vec | "ball:center=" vec ",r=" f
//! vec      := f ("|" f)*
//! ```
//! `sep` is whitespace or `;`.

use nalgebra::DMatrix;

use crate::admissible::AdmissibleFunction;
use crate::error::{LotError, Result};
use crate::geodesic::{Density, PotentialField};
use crate::spacetime::{Spacetime, Weight};

const MAX_DEPTH: usize = 64;

fn number(field: &str, text: &str) -> Result<f64> {
    let t = text.trim();
    let x: f64 = t.parse().map_err(|_| LotError::parse(field, format!("'{t}' is not a number")))?;
    if !x.is_finite() {
        return Err(LotError::parse(field, format!("'{t}' is not finite")));
    }
    Ok(x)
}

fn vector(field: &str, text: &str) -> Result<Vec<f64>> {
    text.split('|').map(|c| number(field, c)).collect()
}

fn domain_to_parse(field: &str) -> impl Fn(LotError) -> LotError + '_ {
    move |e| match e {
        LotError::Parse { .. } => e,
        other => LotError::parse(field, other.to_string()),
    }
}

pub fn parse_function(text: &str) -> Result<AdmissibleFunction> {
    let mut p = FunctionParser { src: text.as_bytes(), pos: 0 };
    let u = p.function(0)?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(LotError::parse("u", format!("trailing input at offset {}", p.pos)));
    }
    Ok(u)
}

struct FunctionParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl FunctionParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(LotError::parse("u", format!("expected '{token}' at offset {}", self.pos)))
        }
    }

    fn float(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        if text.is_empty() {
            return Err(LotError::parse("u", format!("expected a number at offset {start}")));
        }
        number("u", text)
    }

    fn function(&mut self, depth: usize) -> Result<AdmissibleFunction> {
        if depth > MAX_DEPTH {
            return Err(LotError::parse("u", "expression nested too deeply"));
        }
        let field = domain_to_parse("u");
        if self.eat("shifted_u_p:") {
            return AdmissibleFunction::shifted_builtin(self.float()?).map_err(field);
        }
        if self.eat("shifted_u_0") {
            return AdmissibleFunction::shifted_builtin(0.0).map_err(field);
        }
        if self.eat("u_p:") {
            return AdmissibleFunction::builtin(self.float()?).map_err(field);
        }
        if self.eat("u_0") {
            return Ok(AdmissibleFunction::log());
        }
        if self.eat("conjugate(") {
            let inner = self.function(depth + 1)?;
            self.expect(")")?;
            return Ok(inner.conjugate());
        }
        for (head, rescale) in [("rescale(", true), ("shift(", false)] {
            if self.eat(head) {
                let inner = self.function(depth + 1)?;
                self.expect(",")?;
                let c = self.float()?;
                self.expect(")")?;
                return if rescale { inner.rescale(c) } else { inner.shift(c) }.map_err(field);
            }
        }
        Err(LotError::parse("u", format!("unknown function at offset {}", self.pos)))
    }
}

/// Splits `key=value` items on `,`; values may not contain `,` or `=`.
fn key_values<'a>(field: &str, text: &'a str) -> Result<Vec<(&'a str, &'a str)>> {
    text.split(',')
        .map(|item| {
            item.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| LotError::parse(field, format!("expected key=value, got '{item}'")))
        })
        .collect()
}

fn take<'a>(field: &str, items: &[(&str, &'a str)], key: &str) -> Result<Option<&'a str>> {
    let mut found = None;
    for (k, v) in items {
        if *k == key {
            if found.is_some() {
                return Err(LotError::parse(field, format!("'{key}' given twice")));
            }
            found = Some(*v);
        }
    }
    Ok(found)
}

fn require<'a>(field: &str, items: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    take(field, items, key)?.ok_or_else(|| LotError::parse(field, format!("missing '{key}'")))
}

fn only_keys(field: &str, items: &[(&str, &str)], allowed: &[&str]) -> Result<()> {
    match items.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(LotError::parse(field, format!("unknown key '{k}'"))),
        None => Ok(()),
    }
}

pub fn parse_weight(text: &str) -> Result<Weight> {
    let f = "V";
    let text = text.trim();
    if text == "none" {
        return Ok(Weight::None);
    }
    let (kind, rest) = text.split_once(':').ok_or_else(|| LotError::parse(f, format!("unknown weight '{text}'")))?;
    let items = key_values(f, rest)?;
    match kind {
        "linear" => {
            only_keys(f, &items, &["c"])?;
            Ok(Weight::Linear { c: number(f, require(f, &items, "c")?)? })
        }
        "quad" => {
            only_keys(f, &items, &["alpha"])?;
            Ok(Weight::Quadratic { alpha: number(f, require(f, &items, "alpha")?)? })
        }
        "gauss" => {
            only_keys(f, &items, &["amp", "width"])?;
            Ok(Weight::Gaussian { amp: number(f, require(f, &items, "amp")?)?, width: number(f, require(f, &items, "width")?)? })
        }
        other => Err(LotError::parse(f, format!("unknown weight kind '{other}'"))),
    }
}

pub fn parse_spacetime(text: &str) -> Result<Spacetime> {
    let f = "spacetime";
    let mut tokens = text.split(|c: char| c.is_whitespace() || c == ';').filter(|t| !t.is_empty());
    let head = tokens.next().ok_or_else(|| LotError::parse(f, "empty spacetime spec"))?;
    let dim = head.strip_prefix("minkowski:").ok_or_else(|| LotError::parse(f, format!("expected 'minkowski:<dim>', got '{head}'")))?;
    let dim: usize = dim.parse().map_err(|_| LotError::parse(f, format!("bad dimension '{dim}'")))?;
    if dim > 16 {
        return Err(LotError::parse(f, format!("dimension {dim} is above the supported 16")));
    }
    let mut weight = None;
    let mut synthetic = None;
    for tok in tokens {
        if let Some(v) = tok.strip_prefix("V=") {
            if weight.replace(parse_weight(v)?).is_some() {
                return Err(LotError::parse(f, "V given twice"));
            }
        } else if let Some(n) = tok.strip_prefix("N=") {
            let n = if n == "inf" { f64::INFINITY } else { number("N", n)? };
            if synthetic.replace(n).is_some() {
                return Err(LotError::parse(f, "N given twice"));
            }
        } else {
            return Err(LotError::parse(f, format!("unexpected token '{tok}'")));
        }
    }
    Spacetime::weighted(dim, weight.unwrap_or(Weight::None), synthetic.unwrap_or(f64::INFINITY)).map_err(domain_to_parse(f))
}

pub fn parse_potential(text: &str) -> Result<PotentialField> {
    let f = "phi";
    let (kind, rest) = text.trim().split_once(':').ok_or_else(|| LotError::parse(f, "expected 'affine:' or 'quad:'"))?;
    let items = key_values(f, rest)?;
    let b = take(f, &items, "b")?.map(|b| number(f, b)).transpose()?.unwrap_or(0.0);
    let a = vector(f, require(f, &items, "a")?)?;
    if !(2..=16).contains(&a.len()) {
        return Err(LotError::parse(f, format!("gradient has {} entries", a.len())));
    }
    match kind {
        "affine" => {
            only_keys(f, &items, &["a", "b"])?;
            Ok(PotentialField::affine(a, b))
        }
        "quad" => {
            only_keys(f, &items, &["q", "a", "b"])?;
            let q = vector(f, require(f, &items, "q")?)?;
            let n = a.len();
            if q.len() != n * n {
                return Err(LotError::parse(f, format!("q has {} entries, expected {}", q.len(), n * n)));
            }
            PotentialField::quadratic(DMatrix::from_row_slice(n, n, &q), a, b).map_err(domain_to_parse(f))
        }
        other => Err(LotError::parse(f, format!("unknown potential kind '{other}'"))),
    }
}

pub fn parse_density(text: &str) -> Result<Density> {
    let f = "rho0";
    let (kind, rest) = text.trim().split_once(':').ok_or_else(|| LotError::parse(f, "expected 'box:' or 'ball:'"))?;
    let items = key_values(f, rest)?;
    let d = match kind {
        "box" => {
            only_keys(f, &items, &["lo", "hi"])?;
            Density::boxed(vector(f, require(f, &items, "lo")?)?, vector(f, require(f, &items, "hi")?)?)
        }
        "ball" => {
            only_keys(f, &items, &["center", "r"])?;
            Density::ball(vector(f, require(f, &items, "center")?)?, number(f, require(f, &items, "r")?)?)
        }
        other => return Err(LotError::parse(f, format!("unknown density kind '{other}'"))),
    }
    .map_err(domain_to_parse(f))?;
    if !(2..=16).contains(&d.dim()) {
        return Err(LotError::parse(f, format!("dimension {} is outside 2..=16", d.dim())));
    }
    Ok(d)
}
