//! Simplex-wise zigzag filtrations: text format, validation, and replay.
//!
//! The text format is one step per line, `i v1 .. vk` for an insertion and
//! `d v1 .. vk` for a deletion, vertices strictly increasing and separated
//! by single spaces. Blank lines and lines starting with `#` are skipped.

use std::fmt::Write as _;

use thiserror::Error;

use crate::complex::{ComplexState, LiveId, Simplex, StepError, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Insert,
    Delete,
}

/// Direction of the arrow `K_i <-> K_{i+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

impl Op {
    pub fn direction(self) -> Direction {
        match self {
            Op::Insert => Direction::Forward,
            Op::Delete => Direction::Backward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiltrationStep {
    pub op: Op,
    pub simplex: Simplex,
}

impl FiltrationStep {
    pub fn insert(simplex: Simplex) -> Self {
        FiltrationStep { op: Op::Insert, simplex }
    }

    pub fn delete(simplex: Simplex) -> Self {
        FiltrationStep { op: Op::Delete, simplex }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: unknown step tag {tag:?}")]
    UnknownOp { line: usize, tag: String },
    #[error("line {line}: step has no vertices")]
    NoVertices { line: usize },
    #[error("line {line}: invalid vertex {token:?}")]
    BadVertex { line: usize, token: String },
    #[error("line {line}: vertices not strictly increasing")]
    NotIncreasing { line: usize },
    #[error("input is not valid UTF-8")]
    Utf8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("arrow {arrow}: {reason}")]
pub struct ValidationError {
    pub arrow: usize,
    pub reason: StepError,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiltrationError {
    #[error("complex index {index} out of range 0..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Length `m` and maximum complex size `n` of a valid filtration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiltrationStats {
    pub m: usize,
    pub n: usize,
}

/// A sequence of insertions and deletions starting from the empty complex.
///
/// Arrow `i` (0-based) connects complexes `K_i` and `K_{i+1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ZigzagFiltration {
    steps: Vec<FiltrationStep>,
}

impl ZigzagFiltration {
    pub fn new(steps: Vec<FiltrationStep>) -> Self {
        ZigzagFiltration { steps }
    }

    pub fn steps(&self) -> &[FiltrationStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn step(&self, arrow: usize) -> &FiltrationStep {
        &self.steps[arrow]
    }

    pub fn direction(&self, arrow: usize) -> Direction {
        self.steps[arrow].op.direction()
    }

    /// The first `len` steps, itself a valid filtration when `self` is.
    pub fn prefix(&self, len: usize) -> ZigzagFiltration {
        ZigzagFiltration {
            steps: self.steps[..len.min(self.steps.len())].to_vec(),
        }
    }

    pub fn is_all_forward(&self) -> bool {
        self.steps.iter().all(|s| s.op == Op::Insert)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_filtration(text.as_bytes())
    }

    pub fn validate(&self) -> Result<FiltrationStats, ValidationError> {
        validate(self)
    }

    pub fn serialize(&self) -> String {
        serialize(self)
    }

    /// Replays the first `j` arrows, returning `K_j`.
    pub fn complex_at(&self, j: usize) -> Result<ComplexState, FiltrationError> {
        complex_at(self, j)
    }

    /// All complexes `K_0, ..., K_m` of a valid filtration.
    pub fn replay_all(&self) -> Result<Vec<ComplexState>, ValidationError> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut state = ComplexState::new();
        out.push(state.clone());
        for (arrow, step) in self.steps.iter().enumerate() {
            apply(&mut state, arrow, step)?;
            out.push(state.clone());
        }
        Ok(out)
    }
}

fn apply(state: &mut ComplexState, arrow: usize, step: &FiltrationStep) -> Result<(), ValidationError> {
    let res = match step.op {
        Op::Insert => state.insert(step.simplex.clone(), arrow as LiveId),
        Op::Delete => state.remove(&step.simplex).map(|_| ()),
    };
    res.map_err(|reason| ValidationError { arrow, reason })
}

pub fn parse_filtration(bytes: &[u8]) -> Result<ZigzagFiltration, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ParseError::Utf8)?;
    let mut steps = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let op = match tokens.next() {
            Some("i") => Op::Insert,
            Some("d") => Op::Delete,
            Some(tag) => {
                return Err(ParseError::UnknownOp {
                    line,
                    tag: tag.to_string(),
                })
            }
            None => unreachable!("non-empty line has a token"),
        };
        let vertices = tokens
            .map(|tok| {
                tok.parse::<Vertex>().map_err(|_| ParseError::BadVertex {
                    line,
                    token: tok.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if vertices.is_empty() {
            return Err(ParseError::NoVertices { line });
        }
        let simplex = Simplex::new(vertices).map_err(|_| ParseError::NotIncreasing { line })?;
        steps.push(FiltrationStep { op, simplex });
    }
    Ok(ZigzagFiltration { steps })
}

/// Checks every step under replay and reports `m` and `n`.
pub fn validate(f: &ZigzagFiltration) -> Result<FiltrationStats, ValidationError> {
    let mut state = ComplexState::new();
    let mut n = 0;
    for (arrow, step) in f.steps.iter().enumerate() {
        apply(&mut state, arrow, step)?;
        n = n.max(state.len());
    }
    Ok(FiltrationStats { m: f.len(), n })
}

pub fn complex_at(f: &ZigzagFiltration, j: usize) -> Result<ComplexState, FiltrationError> {
    if j > f.len() {
        return Err(FiltrationError::IndexOutOfRange { index: j, len: f.len() });
    }
    let mut state = ComplexState::new();
    for (arrow, step) in f.steps[..j].iter().enumerate() {
        apply(&mut state, arrow, step)?;
    }
    Ok(state)
}

pub fn serialize(f: &ZigzagFiltration) -> String {
    let mut out = String::new();
    for step in &f.steps {
        let tag = match step.op {
            Op::Insert => 'i',
            Op::Delete => 'd',
        };
        writeln!(out, "{tag} {}", step.simplex).expect("writing to a String");
    }
    out
}
