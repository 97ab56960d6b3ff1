//! Oscillating Rips zigzags over a greedy ordering of a point cloud.
//!
//! With `P_k` the first `k` greedy points and `ε_k` the distance from the
//! `(k+1)`-th greedy point to `P_k`, the complex-level zigzag is
//!
//! ```text
//! R(P_1; μ ε_1) ⊆ R(P_2; ν ε_1) ⊇ R(P_2; μ ε_2) ⊆ R(P_3; ν ε_2) ⊇ ... ⊆ R(P_N; ν ε_{N-1})
//! ```
//!
//! where `R(P; t)` is the clique complex of edges of length at most `t`,
//! truncated at `max_dim`. Each inclusion is expanded into single-simplex
//! steps: insertions by ascending dimension then lexicographically,
//! deletions by descending dimension then reverse lexicographically.
//! Vertices are the indices of the points in the input.

use std::cmp::Reverse;

use rustc_hash::FxHashSet;
use thiserror::Error;

use crate::complex::{Simplex, Vertex};
use crate::filtration::{FiltrationStep, ZigzagFiltration};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RipsError {
    #[error("line {line}: cannot parse {token:?} as a coordinate")]
    BadCoordinate { line: usize, token: String },
    #[error("line {line}: coordinate is not finite")]
    NonFinite { line: usize },
    #[error("line {line}: expected {expected} coordinates, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("point cloud is empty")]
    Empty,
    #[error("need 0 < mu <= nu, got mu = {mu}, nu = {nu}")]
    Multipliers { mu: f64, nu: f64 },
    #[error("max_dim must be at least 1")]
    MaxDim,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: &[Vec<f64>]) -> Result<Self, RipsError> {
        let dim = points.first().map_or(0, Vec::len);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (k, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(RipsError::Ragged {
                    line: k + 1,
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(RipsError::NonFinite { line: k + 1 });
            }
            coords.extend_from_slice(p);
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.point(a)
            .iter()
            .zip(self.point(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Uniform random points in the unit cube.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> Self {
        PointCloud {
            dim,
            coords: (0..n * dim).map(|_| rng.gen::<f64>()).collect(),
        }
    }
}

/// Parses one point per line as whitespace-separated decimals; blank lines
/// and lines starting with `#` are skipped.
pub fn load_points(text: &str) -> Result<PointCloud, RipsError> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut dim = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let p = body
            .split_whitespace()
            .map(|t| {
                let x: f64 = t.parse().map_err(|_| RipsError::BadCoordinate {
                    line,
                    token: t.to_string(),
                })?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(RipsError::NonFinite { line })
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        match dim {
            None => dim = Some(p.len()),
            Some(d) if d != p.len() => {
                return Err(RipsError::Ragged {
                    line,
                    expected: d,
                    found: p.len(),
                })
            }
            _ => {}
        }
        points.push(p);
    }
    PointCloud::new(&points)
}

/// A farthest-point ordering. `radii[0]` is an infinite sentinel and
/// `radii[k]` is the distance from `order[k]` to `order[..k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Greedy {
    pub order: Vec<usize>,
    pub radii: Vec<f64>,
    /// Points dropped because they coincide with an earlier point.
    pub truncated: usize,
}

pub fn greedy_permutation(p: &PointCloud) -> Result<Greedy, RipsError> {
    let n = p.len();
    if n == 0 {
        return Err(RipsError::Empty);
    }
    let mut order = vec![0];
    let mut radii = vec![f64::INFINITY];
    let mut reach: Vec<f64> = (0..n).map(|k| p.distance(0, k)).collect();
    let mut chosen = vec![false; n];
    chosen[0] = true;
    while order.len() < n {
        // ties go to the lowest index
        let (next, r) = (0..n)
            .filter(|&k| !chosen[k])
            .map(|k| (k, reach[k]))
            .fold((usize::MAX, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if r <= 0.0 {
            break;
        }
        chosen[next] = true;
        order.push(next);
        radii.push(r);
        for (k, r) in reach.iter_mut().enumerate() {
            *r = r.min(p.distance(next, k));
        }
    }
    let truncated = n - order.len();
    Ok(Greedy { order, radii, truncated })
}

/// Simplices of the clique complex on `vertices` with edges of length at
/// most `t`, up to dimension `max_dim`.
fn rips_complex(p: &PointCloud, vertices: &[usize], t: f64, max_dim: usize) -> FxHashSet<Simplex> {
    let mut sorted: Vec<usize> = vertices.to_vec();
    sorted.sort_unstable();
    let up: Vec<Vec<usize>> = sorted
        .iter()
        .map(|&a| sorted.iter().copied().filter(|&b| b > a && p.distance(a, b) <= t).collect())
        .collect();
    let pos = |v: usize| sorted.binary_search(&v).expect("vertex of the prefix");
    let mut out = FxHashSet::default();
    fn expand(
        clique: &mut Vec<usize>,
        candidates: &[usize],
        up: &[Vec<usize>],
        pos: &dyn Fn(usize) -> usize,
        max_dim: usize,
        out: &mut FxHashSet<Simplex>,
    ) {
        out.insert(Simplex::new(clique.iter().map(|&v| v as Vertex)).expect("increasing"));
        if clique.len() > max_dim {
            return;
        }
        for (k, &v) in candidates.iter().enumerate() {
            let next: Vec<usize> = candidates[k + 1..]
                .iter()
                .copied()
                .filter(|w| up[pos(v)].binary_search(w).is_ok())
                .collect();
            clique.push(v);
            expand(clique, &next, up, pos, max_dim, out);
            clique.pop();
        }
    }
    for (k, &v) in sorted.iter().enumerate() {
        let mut clique = vec![v];
        expand(&mut clique, &up[k], &up, &pos, max_dim, &mut out);
    }
    out
}

fn push_transition(from: &FxHashSet<Simplex>, to: &FxHashSet<Simplex>, steps: &mut Vec<FiltrationStep>) {
    let mut gone: Vec<&Simplex> = from.difference(to).collect();
    gone.sort_by(|a, b| (Reverse(a.dim()), Reverse(a)).cmp(&(Reverse(b.dim()), Reverse(b))));
    steps.extend(gone.into_iter().map(|s| FiltrationStep::delete(s.clone())));
    let mut new: Vec<&Simplex> = to.difference(from).collect();
    new.sort_by(|a, b| (a.dim(), a).cmp(&(b.dim(), b)));
    steps.extend(new.into_iter().map(|s| FiltrationStep::insert(s.clone())));
}

pub fn oscillating_rips(p: &PointCloud, mu: f64, nu: f64, max_dim: usize) -> Result<ZigzagFiltration, RipsError> {
    if !(mu > 0.0 && mu <= nu && nu.is_finite()) {
        return Err(RipsError::Multipliers { mu, nu });
    }
    if max_dim < 1 {
        return Err(RipsError::MaxDim);
    }
    let g = greedy_permutation(p)?;
    let n = g.order.len();
    let mut steps = Vec::new();
    let mut current = FxHashSet::default();
    let first = if n > 1 { mu * g.radii[1] } else { 0.0 };
    let next = rips_complex(p, &g.order[..1], first, max_dim);
    push_transition(&current, &next, &mut steps);
    current = next;
    for k in 1..n {
        let eps = g.radii[k];
        let up = rips_complex(p, &g.order[..=k], nu * eps, max_dim);
        push_transition(&current, &up, &mut steps);
        current = up;
        if k + 1 < n {
            let down = rips_complex(p, &g.order[..=k], mu * g.radii[k + 1], max_dim);
            push_transition(&current, &down, &mut steps);
            current = down;
        }
    }
    Ok(ZigzagFiltration::new(steps))
}
