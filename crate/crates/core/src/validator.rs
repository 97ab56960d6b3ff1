//! Brute-force certification of engine output.
//!
//! Everything here recomputes from the filtration alone with dense Z₂
//! Gaussian elimination. Nothing is shared with the engine's sparse matrices,
//! so agreement between the two is meaningful.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::bar::{Bar, Module};
use crate::complex::{Chain, ComplexState, Simplex};
use crate::filtration::{Direction, Op, ValidationError, ZigzagFiltration};
use crate::order::{precedes, BirthKey};
use crate::wires::{Bundle, Representative, Wire, WireKind, WireStore};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("chain is not contained in the complex")]
    NotInComplex,
    #[error("chain is not a cycle")]
    NotCycle,
    #[error("filtration contains a deletion at arrow {0}")]
    NotForward(usize),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn zeros(len: usize) -> Self {
        BitSet(vec![0; len.div_ceil(64)])
    }

    fn flip(&mut self, k: usize) {
        self.0[k / 64] ^= 1 << (k % 64);
    }

    fn xor(&mut self, other: &BitSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn top(&self) -> Option<usize> {
        let w = self.0.iter().rposition(|&w| w != 0)?;
        Some(w * 64 + 63 - self.0[w].leading_zeros() as usize)
    }
}

/// Row-echelon basis of a subspace of Z₂^len, one vector per leading bit.
#[derive(Debug, Clone)]
struct Echelon {
    len: usize,
    by_top: Vec<Option<BitSet>>,
    rank: usize,
}

impl Echelon {
    fn new(len: usize) -> Self {
        Echelon {
            len,
            by_top: vec![None; len],
            rank: 0,
        }
    }

    fn reduce(&self, mut v: BitSet) -> BitSet {
        while let Some(t) = v.top() {
            match &self.by_top[t] {
                Some(row) => v.xor(row),
                None => break,
            }
        }
        v
    }

    fn contains(&self, v: BitSet) -> bool {
        self.reduce(v).top().is_none()
    }

    /// Adds `v`; false when it was already in the span.
    fn insert(&mut self, v: BitSet) -> bool {
        let r = self.reduce(v);
        match r.top() {
            Some(t) => {
                self.by_top[t] = Some(r);
                self.rank += 1;
                true
            }
            None => false,
        }
    }
}

/// Ranks of one degree of a complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DegreeRanks {
    pub cycles: usize,
    pub boundaries: usize,
    pub homology: usize,
}

/// Linear algebra over the chain groups of one fixed complex.
#[derive(Debug, Clone)]
pub struct ComplexOracle {
    /// Per degree, simplex to column position.
    index: Vec<FxHashMap<Simplex, usize>>,
    /// Per degree `p`, a basis of `B_p`.
    boundaries: Vec<Echelon>,
    ranks: Vec<DegreeRanks>,
}

impl ComplexOracle {
    pub fn new(k: &ComplexState) -> Self {
        let mut index: Vec<FxHashMap<Simplex, usize>> = Vec::new();
        for s in k.simplices_sorted() {
            let p = s.dim();
            if index.len() <= p {
                index.resize_with(p + 1, FxHashMap::default);
            }
            let pos = index[p].len();
            index[p].insert(s, pos);
        }
        let top = index.len();
        let mut boundaries: Vec<Echelon> = index.iter().map(|ix| Echelon::new(ix.len())).collect();
        for p in 1..top {
            for s in index[p].keys() {
                let mut v = BitSet::zeros(index[p - 1].len());
                for f in s.facets() {
                    v.flip(index[p - 1][&f]);
                }
                boundaries[p - 1].insert(v);
            }
        }
        let ranks = (0..top)
            .map(|p| {
                let rank_out = if p == 0 { 0 } else { boundaries[p - 1].rank };
                let cycles = index[p].len() - rank_out;
                let bounds = boundaries[p].rank;
                DegreeRanks {
                    cycles,
                    boundaries: bounds,
                    homology: cycles - bounds,
                }
            })
            .collect();
        ComplexOracle {
            index,
            boundaries,
            ranks,
        }
    }

    /// Ranks per degree; degrees past the top dimension are all zero.
    pub fn ranks(&self, p: usize) -> DegreeRanks {
        self.ranks.get(p).copied().unwrap_or_default()
    }

    pub fn top_degree(&self) -> Option<usize> {
        self.ranks.len().checked_sub(1)
    }

    fn vector(&self, z: &Chain) -> Result<Option<(usize, BitSet)>, OracleError> {
        let Some(p) = z.degree() else {
            return Ok(None);
        };
        let ix = self.index.get(p).ok_or(OracleError::NotInComplex)?;
        let mut v = BitSet::zeros(ix.len());
        for s in z {
            v.flip(*ix.get(s).ok_or(OracleError::NotInComplex)?);
        }
        Ok(Some((p, v)))
    }

    /// Whether `z = ∂x` for some chain `x` of the complex.
    pub fn is_boundary(&self, z: &Chain) -> Result<bool, OracleError> {
        let vec = self.vector(z)?;
        if !z.is_cycle() {
            return Err(OracleError::NotCycle);
        }
        Ok(match vec {
            None => true,
            Some((p, v)) => self.boundaries[p].contains(v),
        })
    }

    /// Total form of [`is_boundary`](Self::is_boundary): false for chains
    /// outside the complex or with non-empty boundary.
    pub fn bounds(&self, z: &Chain) -> bool {
        self.is_boundary(z).unwrap_or(false)
    }

    pub fn is_cycle_in(&self, z: &Chain) -> bool {
        self.vector(z).is_ok() && z.is_cycle()
    }

    /// Whether `cycles` of degree `p` are independent and span `Z_p`
    /// (`relative == false`), or have classes forming a basis of `H_p`
    /// (`relative == true`).
    fn is_basis(&self, p: usize, cycles: &[&Chain], relative: bool) -> Result<bool, OracleError> {
        let r = self.ranks(p);
        let (mut ech, target) = match (relative, self.boundaries.get(p)) {
            (true, Some(b)) => (b.clone(), r.homology),
            (false, Some(b)) => (Echelon::new(b.len), r.cycles),
            (_, None) => return Ok(cycles.is_empty()),
        };
        for z in cycles {
            if !z.is_cycle() {
                return Err(OracleError::NotCycle);
            }
            let Some((q, v)) = self.vector(z)? else {
                return Ok(false);
            };
            if q != p || !ech.insert(v) {
                return Ok(false);
            }
        }
        Ok(cycles.len() == target)
    }
}

/// `(dim Z_p, dim B_p, dim H_p)` for every degree up to the top dimension.
pub fn betti_numbers(k: &ComplexState) -> Vec<DegreeRanks> {
    ComplexOracle::new(k).ranks
}

pub fn is_boundary(k: &ComplexState, z: &Chain) -> Result<bool, OracleError> {
    if !z.is_subset_of(k) {
        return Err(OracleError::NotInComplex);
    }
    ComplexOracle::new(k).is_boundary(z)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skip(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
}

/// The outcome of a list of named checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Certificate {
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(name: impl Into<String>, result: Result<(), String>) -> Self {
        let mut c = Certificate::new();
        c.record(name, result);
        c
    }

    pub fn record(&mut self, name: impl Into<String>, result: Result<(), String>) {
        self.checks.push(Check {
            name: name.into(),
            outcome: match result {
                Ok(()) => Outcome::Pass,
                Err(why) => Outcome::Fail(why),
            },
        });
    }

    pub fn skip(&mut self, name: impl Into<String>, why: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            outcome: Outcome::Skip(why.into()),
        });
    }

    pub fn extend(&mut self, other: Certificate) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| matches!(c.outcome, Outcome::Fail(_)))
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.outcome {
                Outcome::Pass => writeln!(f, "PASS {}", c.name)?,
                Outcome::Fail(why) => writeln!(f, "FAIL {}: {}", c.name, why)?,
                Outcome::Skip(why) => writeln!(f, "SKIP {}: {}", c.name, why)?,
            }
        }
        Ok(())
    }
}

/// All complexes of one filtration with lazily built oracles.
pub struct Verifier<'f> {
    f: &'f ZigzagFiltration,
    complexes: Vec<ComplexState>,
    oracles: Vec<OnceCell<ComplexOracle>>,
}

fn fail(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

impl<'f> Verifier<'f> {
    pub fn new(f: &'f ZigzagFiltration) -> Result<Self, ValidationError> {
        let complexes = f.replay_all()?;
        let oracles = (0..complexes.len()).map(|_| OnceCell::new()).collect();
        Ok(Verifier { f, complexes, oracles })
    }

    pub fn filtration(&self) -> &ZigzagFiltration {
        self.f
    }

    pub fn m(&self) -> usize {
        self.f.len()
    }

    pub fn complex(&self, j: usize) -> &ComplexState {
        &self.complexes[j]
    }

    pub fn oracle(&self, j: usize) -> &ComplexOracle {
        self.oracles[j].get_or_init(|| ComplexOracle::new(&self.complexes[j]))
    }

    fn in_cycles(&self, j: usize, z: &Chain) -> bool {
        z.is_subset_of(&self.complexes[j]) && z.is_cycle()
    }

    fn bounds(&self, j: usize, z: &Chain) -> bool {
        z.is_subset_of(&self.complexes[j]) && self.oracle(j).bounds(z)
    }

    /// `z ∈ B(K_j) ∖ B(K_{j'})`.
    fn newly_bounds(&self, j: usize, not_j: usize, z: &Chain) -> bool {
        self.bounds(j, z) && !self.bounds(not_j, z)
    }

    /// Checks one representative against the homology or boundary
    /// representative conditions for its bar.
    pub fn check_representative(&self, rep: &Representative) -> Certificate {
        let bar = rep.bar;
        let name = format!("representative {bar}");
        Certificate::single(name, self.representative_violation(rep))
    }

    fn representative_violation(&self, rep: &Representative) -> Result<(), String> {
        let bar = rep.bar;
        let m = self.m();
        fail(rep.is_well_formed(), || "segments do not partition the interval".into())?;
        fail(1 <= bar.birth && bar.death <= m, || format!("interval outside [1, {m}]"))?;
        for (alpha, z) in rep.cycles() {
            fail(z.degree() == Some(bar.degree), || format!("z_{alpha} is not a non-empty {}-chain", bar.degree))?;
            fail(self.in_cycles(alpha, z), || format!("z_{alpha} is not a cycle in K_{alpha}"))?;
            match bar.module {
                Module::H => fail(!self.oracle(alpha).bounds(z), || format!("z_{alpha} is a boundary in K_{alpha}"))?,
                Module::B => fail(self.oracle(alpha).bounds(z), || format!("z_{alpha} is not a boundary in K_{alpha}"))?,
            }
        }
        let at = |a: usize| rep.cycle_at(a).expect("well-formed");
        for alpha in bar.birth..bar.death {
            let (z, z_next) = (at(alpha), at(alpha + 1));
            match bar.module {
                Module::H => {
                    let larger = match self.f.direction(alpha) {
                        Direction::Forward => alpha + 1,
                        Direction::Backward => alpha,
                    };
                    let diff = z.add(z_next).map_err(|e| e.to_string())?;
                    fail(self.bounds(larger, &diff), || {
                        format!("consecutive: z_{alpha} and z_{} are not homologous in K_{larger}", alpha + 1)
                    })?;
                }
                Module::B => fail(z == z_next, || format!("consecutive: z_{alpha} differs from z_{}", alpha + 1))?,
            }
        }

        let (b, d) = (bar.birth, bar.death);
        let zb = at(b);
        match (bar.module, self.f.direction(b - 1)) {
            (Module::H, Direction::Forward) => {
                fail(!zb.is_subset_of(&self.complexes[b - 1]), || format!("birth: z_{b} is already a cycle in K_{}", b - 1))?
            }
            (Module::H, Direction::Backward) => fail(self.newly_bounds(b - 1, b, zb), || {
                format!("birth: z_{b} is not in B(K_{}) minus B(K_{b})", b - 1)
            })?,
            (Module::B, Direction::Forward) => fail(self.newly_bounds(b, b - 1, zb), || {
                format!("birth: z_{b} is not in B(K_{b}) minus B(K_{})", b - 1)
            })?,
            (Module::B, Direction::Backward) => return Err(format!("birth: arrow {} is backward", b - 1)),
        }
        if d < m {
            let zd = at(d);
            match (bar.module, self.f.direction(d)) {
                (Module::H, Direction::Backward) => {
                    fail(!zd.is_subset_of(&self.complexes[d + 1]), || format!("death: z_{d} is still a cycle in K_{}", d + 1))?
                }
                (Module::H, Direction::Forward) => fail(self.newly_bounds(d + 1, d, zd), || {
                    format!("death: z_{d} is not in B(K_{}) minus B(K_{d})", d + 1)
                })?,
                (Module::B, Direction::Backward) => fail(self.newly_bounds(d, d + 1, zd), || {
                    format!("death: z_{d} is not in B(K_{d}) minus B(K_{})", d + 1)
                })?,
                (Module::B, Direction::Forward) => return Err(format!("death: arrow {d} is forward")),
            }
        }
        Ok(())
    }

    /// Birth and death index multisets per (module, degree), derived from
    /// rank changes across every arrow and the ranks of the final complex.
    pub fn birth_death_indices(&self) -> BTreeMap<(Module, usize), (Vec<usize>, Vec<usize>)> {
        let m = self.m();
        let mut out: BTreeMap<(Module, usize), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        let degrees = |j: usize| self.oracle(j).top_degree().map_or(0, |t| t + 1);
        for i in 0..m {
            let top = degrees(i).max(degrees(i + 1));
            for p in 0..top {
                let (before, after) = (self.oracle(i).ranks(p), self.oracle(i + 1).ranks(p));
                for (module, x, y) in [
                    (Module::H, before.homology, after.homology),
                    (Module::B, before.boundaries, after.boundaries),
                ] {
                    let entry = out.entry((module, p)).or_default();
                    for _ in y..x {
                        entry.1.push(i);
                    }
                    for _ in x..y {
                        entry.0.push(i + 1);
                    }
                }
            }
        }
        for p in 0..degrees(m) {
            let r = self.oracle(m).ranks(p);
            out.entry((Module::H, p)).or_default().1.extend(std::iter::repeat_n(m, r.homology));
            out.entry((Module::B, p)).or_default().1.extend(std::iter::repeat_n(m, r.boundaries));
        }
        out.retain(|_, (births, deaths)| !births.is_empty() || !deaths.is_empty());
        out
    }

    /// Checks that bar births and deaths exhaust the independently derived
    /// birth and death multisets, and that `b ≤ d` for every bar.
    pub fn check_pairing(&self, bars: &[Bar], modules: &[Module]) -> Certificate {
        let mut cert = Certificate::new();
        let expected = self.birth_death_indices();
        for &module in &[Module::H, Module::B] {
            let name = format!("pairing {module}");
            if !modules.contains(&module) {
                cert.skip(name, "module not in barcode");
                continue;
            }
            let mut got: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
            let mut order_ok = Ok(());
            for bar in bars.iter().filter(|b| b.module == module) {
                if bar.birth > bar.death && order_ok.is_ok() {
                    order_ok = Err(format!("bar {bar} has birth after death"));
                }
                let e = got.entry(bar.degree).or_default();
                e.0.push(bar.birth);
                e.1.push(bar.death);
            }
            let mut want: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = expected
                .iter()
                .filter(|((md, _), _)| *md == module)
                .map(|((_, p), v)| (*p, v.clone()))
                .collect();
            let result = order_ok.and_then(|()| {
                for v in got.values_mut().chain(want.values_mut()) {
                    v.0.sort_unstable();
                    v.1.sort_unstable();
                }
                let degrees: Vec<usize> = got.keys().chain(want.keys()).copied().collect();
                for p in degrees {
                    let g = got.get(&p).cloned().unwrap_or_default();
                    let w = want.get(&p).cloned().unwrap_or_default();
                    if g.0 != w.0 {
                        return Err(format!("degree {p} births {:?}, expected {:?}", g.0, w.0));
                    }
                    if g.1 != w.1 {
                        return Err(format!("degree {p} deaths {:?}, expected {:?}", g.1, w.1));
                    }
                }
                Ok(())
            });
            cert.record(name, result);
        }
        cert
    }

    /// Checks the wire condition matching its kind and the arrow into its start.
    pub fn check_wire(&self, wire: &Wire) -> Certificate {
        let i = wire.start;
        let name = format!("wire {i}");
        let result = (|| {
            fail(1 <= i && i <= self.m(), || format!("start outside [1, {}]", self.m()))?;
            fail(self.in_cycles(i, &wire.cycle) && !wire.cycle.is_empty(), || format!("not a non-empty cycle in K_{i}"))?;
            match (wire.kind, self.f.direction(i - 1)) {
                (WireKind::NonBoundary, Direction::Forward) => fail(!wire.cycle.is_subset_of(&self.complexes[i - 1]), || {
                    format!("already a cycle in K_{}", i - 1)
                }),
                (WireKind::NonBoundary, Direction::Backward) => {
                    fail(self.newly_bounds(i - 1, i, &wire.cycle), || format!("not in B(K_{}) minus B(K_{i})", i - 1))
                }
                (WireKind::Boundary, Direction::Forward) => {
                    fail(self.newly_bounds(i, i - 1, &wire.cycle), || format!("not in B(K_{i}) minus B(K_{})", i - 1))
                }
                (WireKind::Boundary, Direction::Backward) => Err("boundary wire after a backward arrow".into()),
            }
        })();
        Certificate::single(name, result)
    }

    /// The bundle prefix before `birth` is a boundary at every index up to
    /// `birth` and uses boundary wires only.
    pub fn check_boundary_prefix(&self, store: &WireStore, bundle: &Bundle, birth: usize) -> Result<(), String> {
        let mut z = Chain::empty();
        let mut starts = bundle.indices().filter(|&s| s < birth).peekable();
        for alpha in 0..=birth {
            while let Some(&s) = starts.peek() {
                if s > alpha {
                    break;
                }
                let w = store.get(s).ok_or_else(|| format!("no wire {s}"))?;
                if w.kind != WireKind::Boundary {
                    return Err(format!("prefix wire {s} is not a boundary wire"));
                }
                z.add_assign(&w.cycle).map_err(|e| e.to_string())?;
                starts.next();
            }
            if !self.bounds(alpha, &z) {
                return Err(format!("prefix sum at {alpha} is not a boundary in K_{alpha}"));
            }
        }
        Ok(())
    }

    /// At index `j`, the H cycles give a basis of homology, the B cycles a
    /// basis of the boundaries, and together a basis of the cycles.
    pub fn check_pointwise_basis(&self, reps: &[Representative], j: usize) -> Result<(), String> {
        let oracle = self.oracle(j);
        let top = oracle.top_degree().map_or(0, |t| t + 1);
        let max_rep = reps.iter().map(|r| r.bar.degree + 1).max().unwrap_or(0);
        for p in 0..top.max(max_rep) {
            let alive = |module: Module| -> Vec<&Chain> {
                reps.iter()
                    .filter(|r| r.bar.module == module && r.bar.degree == p && r.bar.contains(j))
                    .map(|r| r.cycle_at(j).expect("contains j"))
                    .collect()
            };
            let (hs, bs) = (alive(Module::H), alive(Module::B));
            let err = |e: OracleError| format!("index {j} degree {p}: {e}");
            if !oracle.is_basis(p, &hs, true).map_err(err)? {
                return Err(format!("index {j} degree {p}: H cycles are not a homology basis"));
            }
            if bs.iter().any(|z| !oracle.bounds(z)) {
                return Err(format!("index {j} degree {p}: a B cycle is not a boundary"));
            }
            if bs.len() != oracle.ranks(p).boundaries {
                return Err(format!("index {j} degree {p}: {} B cycles for rank {}", bs.len(), oracle.ranks(p).boundaries));
            }
            let all: Vec<&Chain> = hs.iter().chain(&bs).copied().collect();
            if !oracle.is_basis(p, &all, false).map_err(err)? {
                return Err(format!("index {j} degree {p}: H and B cycles are not a cycle basis"));
            }
        }
        Ok(())
    }
}

/// Standard column reduction of an insert-only filtration, reported in the
/// zigzag index convention: a class created by arrow `i` is born at `i + 1`,
/// one killed by arrow `j` dies at `j`, and survivors die at `m`.
pub fn classical_persistence(f: &ZigzagFiltration) -> Result<Vec<Bar>, OracleError> {
    if let Some(i) = f.steps().iter().position(|s| s.op == Op::Delete) {
        return Err(OracleError::NotForward(i));
    }
    f.validate()?;
    let m = f.len();
    let position: FxHashMap<&Simplex, usize> = f.steps().iter().enumerate().map(|(i, s)| (&s.simplex, i)).collect();
    // Reduced columns that kept a non-zero lowest entry, keyed by that entry.
    let mut by_low: FxHashMap<usize, Vec<usize>> = FxHashMap::default();
    let mut paired = vec![false; m];
    let mut bars = Vec::new();
    for (j, step) in f.steps().iter().enumerate() {
        let mut col: Vec<usize> = step.simplex.facets().map(|s| position[&s]).collect();
        col.sort_unstable();
        while let Some(other) = col.last().and_then(|low| by_low.get(low)) {
            col = crate::sorted::symmetric_difference(&col, other);
        }
        if let Some(&low) = col.last() {
            paired[low] = true;
            paired[j] = true;
            bars.push(Bar::new(Module::H, f.step(low).simplex.dim(), low + 1, j));
            by_low.insert(low, col);
        }
    }
    for (i, step) in f.steps().iter().enumerate() {
        if !paired[i] {
            bars.push(Bar::new(Module::H, step.simplex.dim(), i + 1, m));
        }
    }
    bars.sort();
    Ok(bars)
}

/// Whether `precedes` is irreflexive, total, antisymmetric and transitive on `keys`.
pub fn check_order_properties(keys: &[BirthKey]) -> Certificate {
    let result = (|| {
        for a in keys {
            if precedes(a, a) {
                return Err(format!("{a:?} precedes itself"));
            }
        }
        for (x, a) in keys.iter().enumerate() {
            for b in &keys[x + 1..] {
                match (precedes(a, b), precedes(b, a)) {
                    (true, true) => return Err(format!("{a:?} and {b:?} precede each other")),
                    (false, false) => return Err(format!("{a:?} and {b:?} are incomparable")),
                    _ => {}
                }
            }
        }
        for a in keys {
            for b in keys {
                if !precedes(a, b) {
                    continue;
                }
                for c in keys {
                    if precedes(b, c) && !precedes(a, c) {
                        return Err(format!("{a:?} < {b:?} < {c:?} but not {a:?} < {c:?}"));
                    }
                }
            }
        }
        Ok(())
    })();
    Certificate::single(format!("order on {} keys", keys.len()), result)
}
