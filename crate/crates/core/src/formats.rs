//! Text formats for barcodes and representatives.
//!
//! Barcode: one `<H|B> <p> <b> <d>` line per bar, sorted.
//!
//! Representatives: per bar a header `R <H|B> <p> <b> <d> <nsegs>`, then per
//! segment `S <lo> <hi> <k>` followed by `k` lines of vertices.

use std::fmt::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::bar::{Bar, Module};
use crate::complex::{Chain, Simplex};
use crate::wires::{Representative, Segment};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        line,
        message: message.into(),
    })
}

pub fn write_barcode(bars: &[Bar]) -> String {
    let mut sorted = bars.to_vec();
    sorted.sort();
    let mut out = String::new();
    for b in sorted {
        writeln!(out, "{b}").expect("writing to a String");
    }
    out
}

fn field<T: FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T, FormatError> {
    match token {
        Some(t) => t.parse().or_else(|_| err(line, format!("bad {what} {t:?}"))),
        None => err(line, format!("missing {what}")),
    }
}

fn parse_bar<'a>(line: usize, tokens: &mut impl Iterator<Item = &'a str>) -> Result<Bar, FormatError> {
    let module: Module = field(line, tokens.next(), "module")?;
    let degree = field(line, tokens.next(), "degree")?;
    let birth = field(line, tokens.next(), "birth")?;
    let death = field(line, tokens.next(), "death")?;
    Ok(Bar::new(module, degree, birth, death))
}

pub fn parse_barcode(text: &str) -> Result<Vec<Bar>, FormatError> {
    let mut bars = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut tokens = raw.split_whitespace();
        bars.push(parse_bar(line, &mut tokens)?);
        if tokens.next().is_some() {
            return err(line, "trailing tokens");
        }
    }
    Ok(bars)
}

pub fn write_representatives(reps: &[Representative]) -> String {
    let mut sorted: Vec<&Representative> = reps.iter().collect();
    sorted.sort_by_key(|r| r.bar);
    let mut out = String::new();
    for r in sorted {
        writeln!(out, "R {} {}", r.bar, r.segments.len()).expect("writing to a String");
        for seg in &r.segments {
            writeln!(out, "S {} {} {}", seg.lo, seg.hi, seg.chain.len()).expect("writing to a String");
            for s in &seg.chain {
                writeln!(out, "{s}").expect("writing to a String");
            }
        }
    }
    out
}

pub fn parse_representatives(text: &str) -> Result<Vec<Representative>, FormatError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let mut reps = Vec::new();
    while let Some((line, header)) = lines.next() {
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("R") {
            return err(line, "expected an R header");
        }
        let bar = parse_bar(line, &mut tokens)?;
        let nsegs: usize = field(line, tokens.next(), "segment count")?;
        let mut segments = Vec::with_capacity(nsegs);
        for _ in 0..nsegs {
            let Some((line, seg)) = lines.next() else {
                return err(line, "missing segment");
            };
            let mut tokens = seg.split_whitespace();
            if tokens.next() != Some("S") {
                return err(line, "expected an S line");
            }
            let lo = field(line, tokens.next(), "segment start")?;
            let hi = field(line, tokens.next(), "segment end")?;
            let k: usize = field(line, tokens.next(), "simplex count")?;
            let mut simplices = Vec::with_capacity(k);
            for _ in 0..k {
                let Some((line, body)) = lines.next() else {
                    return err(line, "missing simplex");
                };
                let vertices = body
                    .split_whitespace()
                    .map(|t| field(line, Some(t), "vertex"))
                    .collect::<Result<Vec<u32>, _>>()?;
                let s = Simplex::new(vertices).or_else(|e| err(line, e.to_string()))?;
                simplices.push(s);
            }
            let chain = Chain::from_simplices(simplices).or_else(|e| err(line, e.to_string()))?;
            segments.push(Segment { lo, hi, chain });
        }
        reps.push(Representative { bar, segments });
    }
    Ok(reps)
}
