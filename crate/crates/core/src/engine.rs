//! The main left-to-right loop computing both barcodes with wire bundles.
//!
//! Iteration `i` processes the arrow `K_i <-> K_{i+1}`. Every active
//! homology bar owns a Z column and every active boundary bar a B/C column
//! pair; the column always equals the last cycle of the representative its
//! bundle generates, so bundles can be summed alongside columns and a bar's
//! bundle is final the moment the bar stops being active.

use thiserror::Error;

use crate::bar::{Bar, Module};
use crate::complex::{Chain, ComplexState, LiveId, Simplex, StepError};
use crate::filtration::{Direction, Op, ValidationError, ZigzagFiltration};
use crate::matrices::{pivot_of, BcColumn, ColRef, IdChain, MatrixError, MatrixTriple, Summation, Which, ZColumn};
use crate::order::{compare, BirthKey};
use crate::sorted::symmetric_difference;
use crate::wires::{Bundle, Representative, WireError, WireKind, WireStore};

pub use crate::order::precedes;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineErrorKind {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("no Z, B or C column contains [{0}]")]
    NoColumnContains(Simplex),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("arrow {arrow}: {kind}")]
pub struct EngineError {
    pub arrow: usize,
    pub kind: EngineErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZigzagError {
    #[error("invalid filtration: {0}")]
    Invalid(#[from] ValidationError),
    #[error("internal error at {0}")]
    Engine(#[from] EngineError),
}

/// A finished bar with the bundle generating its representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub bar: Bar,
    pub birth_key: BirthKey,
    pub bundle: Bundle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Birth { key: BirthKey, degree: usize },
    Death(Bar),
    WireCreated { start: usize, kind: WireKind },
    Sum(Summation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub m: usize,
    pub n: usize,
    pub homology_bars: usize,
    pub boundary_bars: usize,
    pub summations: usize,
}

#[derive(Debug, Clone)]
pub struct PersistenceResult {
    /// Sorted by bar: H before B, then degree, birth, death.
    pub intervals: Vec<Interval>,
    pub wires: WireStore,
    pub stats: RunStats,
}

impl PersistenceResult {
    pub fn bars(&self) -> Vec<Bar> {
        self.intervals.iter().map(|iv| iv.bar).collect()
    }

    pub fn bars_of(&self, module: Module) -> Vec<Bar> {
        self.intervals.iter().map(|iv| iv.bar).filter(|b| b.module == module).collect()
    }

    pub fn representative(&self, interval: &Interval) -> Result<Representative, WireError> {
        self.wires.extract_representative(&interval.bundle, interval.bar)
    }

    pub fn representatives(&self) -> Result<Vec<Representative>, WireError> {
        self.intervals.iter().map(|iv| self.representative(iv)).collect()
    }
}

/// Computes both barcodes of a filtration together with their bundles.
pub fn run(f: &ZigzagFiltration) -> Result<PersistenceResult, ZigzagError> {
    let mut engine = Engine::new(f)?;
    while engine.step()?.is_some() {}
    Ok(engine.finish())
}

/// Step-by-step driver, exposed so callers can inspect the matrices between arrows.
pub struct Engine<'f> {
    filtration: &'f ZigzagFiltration,
    state: ComplexState,
    matrices: MatrixTriple,
    wires: WireStore,
    intervals: Vec<Interval>,
    next_arrow: usize,
    n: usize,
    summations: usize,
}

impl<'f> Engine<'f> {
    pub fn new(filtration: &'f ZigzagFiltration) -> Result<Self, ValidationError> {
        filtration.validate()?;
        Ok(Engine {
            filtration,
            state: ComplexState::new(),
            matrices: MatrixTriple::new(),
            wires: WireStore::new(),
            intervals: Vec::new(),
            next_arrow: 0,
            n: 0,
            summations: 0,
        })
    }

    /// Index of the current complex `K_i` (number of arrows processed).
    pub fn index(&self) -> usize {
        self.next_arrow
    }

    pub fn state(&self) -> &ComplexState {
        &self.state
    }

    pub fn matrices(&self) -> &MatrixTriple {
        &self.matrices
    }

    pub fn wires(&self) -> &WireStore {
        &self.wires
    }

    /// Bars finalized so far, in finalization order.
    pub fn finished(&self) -> &[Interval] {
        &self.intervals
    }

    /// Converts a column of live ids back to a chain of simplices.
    pub fn to_chain(&self, ids: &[LiveId]) -> Chain {
        let mut simplices: Vec<Simplex> = ids
            .iter()
            .map(|&id| self.filtration.step(id as usize).simplex.clone())
            .collect();
        simplices.sort_unstable();
        Chain::from_sorted_unchecked(simplices)
    }

    /// Processes the next arrow; `None` once all arrows are done.
    pub fn step(&mut self) -> Result<Option<Vec<Event>>, EngineError> {
        let i = self.next_arrow;
        if i >= self.filtration.len() {
            return Ok(None);
        }
        let step = self.filtration.step(i);
        let events = match step.op {
            Op::Insert => self.process_forward(i, &step.simplex),
            Op::Delete => self.process_backward(i, &step.simplex),
        }
        .map_err(|kind| EngineError { arrow: i, kind })?;
        self.summations += events.iter().filter(|e| matches!(e, Event::Sum(_))).count();
        self.n = self.n.max(self.state.len());
        self.next_arrow += 1;
        Ok(Some(events))
    }

    fn finalize(&mut self, bar: Bar, birth_key: BirthKey, bundle: Bundle, events: &mut Vec<Event>) {
        events.push(Event::Death(bar));
        self.intervals.push(Interval { bar, birth_key, bundle });
    }

    fn new_wire(&mut self, start: usize, ids: &[LiveId], kind: WireKind, events: &mut Vec<Event>) -> Result<(), WireError> {
        let cycle = self.to_chain(ids);
        self.wires.register(start, cycle, kind)?;
        events.push(Event::WireCreated { start, kind });
        Ok(())
    }

    fn restore(&mut self, col: ColRef, events: &mut Vec<Event>) -> Result<(), MatrixError> {
        let limit = self.state.len() + 1;
        let sums = self.matrices.restore_distinct_pivots(col, limit)?;
        events.extend(sums.into_iter().map(Event::Sum));
        Ok(())
    }

    fn process_forward(&mut self, i: usize, sigma: &Simplex) -> Result<Vec<Event>, EngineErrorKind> {
        let mut events = Vec::new();
        let mut bd: IdChain = sigma
            .facets()
            .map(|f| self.state.live_id(&f).expect("validated: faces are live"))
            .collect();
        bd.sort_unstable();
        self.state.insert(sigma.clone(), i as LiveId)?;
        let (zs, bs) = self.matrices.reduce_boundary(&bd)?;

        if zs.is_empty() {
            // ∂σ already bounds: σ closes a new cycle.
            let mut wire: IdChain = vec![i as LiveId];
            for &k in &bs {
                wire = symmetric_difference(&wire, &self.matrices.bc(k).expect("live").cchain);
            }
            let key = BirthKey::homology(i + 1, Direction::Forward);
            self.new_wire(i + 1, &wire, WireKind::NonBoundary, &mut events)?;
            events.push(Event::Birth { key, degree: sigma.dim() });
            let col = self.matrices.add_z_column(ZColumn {
                chain: wire,
                birth: key,
                bundle: Bundle::single(i + 1),
                degree: sigma.dim(),
            });
            self.restore(col, &mut events)?;
        } else {
            // [∂σ] dies: the ≺-latest class among those summing to it ends here.
            let lambda = *zs
                .iter()
                .max_by(|&&a, &&b| {
                    compare(
                        &self.matrices.z(a).expect("live").birth,
                        &self.matrices.z(b).expect("live").birth,
                    )
                })
                .expect("non-empty");
            let mut bundle = Bundle::empty();
            for &j in &zs {
                bundle.sum_assign(&self.matrices.z(j).expect("live").bundle);
            }
            let dying = self.matrices.z(lambda).expect("live").birth;
            let degree = sigma.dim() - 1;
            self.finalize(Bar::new(Module::H, degree, dying.index, i), dying, bundle, &mut events);
            self.matrices.delete_column(ColRef::Z(lambda))?;

            let key = BirthKey::boundary(i + 1);
            self.new_wire(i + 1, &bd, WireKind::Boundary, &mut events)?;
            events.push(Event::Birth { key, degree });
            let col = self.matrices.add_bc_column(BcColumn {
                bchain: bd,
                cchain: vec![i as LiveId],
                birth: key,
                bundle: Bundle::single(i + 1),
                degree,
            });
            self.restore(col, &mut events)?;
        }
        Ok(events)
    }

    fn process_backward(&mut self, i: usize, sigma: &Simplex) -> Result<Vec<Event>, EngineErrorKind> {
        let mut events = Vec::new();
        let sid = self.state.live_id(sigma).expect("validated: simplex is live");
        let zs = self.matrices.columns_containing_id(Which::Z, sid);
        if zs.is_empty() {
            self.backward_surjective(i, sigma, sid, &mut events)?;
        } else {
            self.backward_injective(i, sid, zs, &mut events)?;
        }
        self.state.remove(sigma)?;
        Ok(events)
    }

    /// σ lies in no cycle: a boundary bar dies and a homology bar is born.
    fn backward_surjective(
        &mut self,
        i: usize,
        sigma: &Simplex,
        sid: LiveId,
        events: &mut Vec<Event>,
    ) -> Result<(), EngineErrorKind> {
        let mut alphas = self.matrices.columns_containing_id(Which::C, sid);
        if alphas.is_empty() {
            return Err(EngineErrorKind::NoColumnContains(sigma.clone()));
        }
        alphas.sort_by(|&a, &b| compare(&self.matrices.bc(a).expect("live").birth, &self.matrices.bc(b).expect("live").birth));
        for &a in &alphas {
            self.matrices.unregister_pivot(ColRef::B(a));
        }

        // Carry (c1, c2, U) so that σ is cleared from every column but the first.
        let first = self.matrices.bc(alphas[0]).expect("live").clone();
        let (mut c1, mut c2, mut carried, mut key) = (first.cchain, first.bchain, first.bundle, first.birth);
        for &a in &alphas[1..] {
            let col = self.matrices.bc(a).expect("live").clone();
            if col.degree != first.degree {
                return Err(MatrixError::DegreeMismatch(first.degree, col.degree).into());
            }
            events.push(Event::Sum(Summation { source: key, target: col.birth }));
            let new_c = symmetric_difference(&col.cchain, &c1);
            let new_b = symmetric_difference(&col.bchain, &c2);
            let new_u = col.bundle.sum(&carried);
            if pivot_of(&col.bchain) < pivot_of(&c2) {
                c1 = col.cchain;
                c2 = col.bchain;
                carried = col.bundle;
                key = col.birth;
            }
            self.matrices.set_bc(a, new_b, new_c, new_u);
        }

        let lambda = alphas[0];
        let dying = self.matrices.bc(lambda).expect("live").clone();
        self.finalize(
            Bar::new(Module::B, dying.degree, dying.birth.index, i),
            dying.birth,
            dying.bundle,
            events,
        );
        self.matrices.delete_column(ColRef::B(lambda))?;
        for &a in &alphas[1..] {
            self.restore(ColRef::B(a), events)?;
        }

        // B[λ] is homologous to ∂σ once σ is gone.
        let key = BirthKey::homology(i + 1, Direction::Backward);
        self.new_wire(i + 1, &dying.bchain, WireKind::NonBoundary, events)?;
        events.push(Event::Birth { key, degree: dying.degree });
        let col = self.matrices.add_z_column(ZColumn {
            chain: dying.bchain,
            birth: key,
            bundle: Bundle::single(i + 1),
            degree: dying.degree,
        });
        self.restore(col, events)?;
        Ok(())
    }

    /// σ lies in a cycle: a homology bar dies.
    fn backward_injective(
        &mut self,
        i: usize,
        sid: LiveId,
        mut alphas: Vec<usize>,
        events: &mut Vec<Event>,
    ) -> Result<(), EngineErrorKind> {
        // Clear σ from C first; adding a cycle keeps ∂C unchanged.
        let cycle = self.matrices.z(alphas[0]).expect("live").chain.clone();
        for k in self.matrices.columns_containing_id(Which::C, sid) {
            self.matrices.add_to_c(k, &cycle);
        }

        alphas.sort_by(|&a, &b| compare(&self.matrices.z(a).expect("live").birth, &self.matrices.z(b).expect("live").birth));
        for &a in &alphas {
            self.matrices.unregister_pivot(ColRef::Z(a));
        }
        let first = self.matrices.z(alphas[0]).expect("live").clone();
        let (mut z, mut carried, mut key) = (first.chain, first.bundle.clone(), first.birth);
        for &a in &alphas[1..] {
            let col = self.matrices.z_column_mut(a);
            if col.degree != first.degree {
                return Err(MatrixError::DegreeMismatch(first.degree, col.degree).into());
            }
            events.push(Event::Sum(Summation { source: key, target: col.birth }));
            let new_z = symmetric_difference(&col.chain, &z);
            let new_w = col.bundle.sum(&carried);
            if pivot_of(&col.chain) < pivot_of(&z) {
                z = std::mem::replace(&mut col.chain, new_z);
                carried = std::mem::replace(&mut col.bundle, new_w);
                key = col.birth;
            } else {
                col.chain = new_z;
                col.bundle = new_w;
            }
        }

        self.finalize(
            Bar::new(Module::H, first.degree, first.birth.index, i),
            first.birth,
            first.bundle,
            events,
        );
        self.matrices.delete_column(ColRef::Z(alphas[0]))?;
        for &a in &alphas[1..] {
            self.restore(ColRef::Z(a), events)?;
        }
        Ok(())
    }

    /// Closes every active bar at `m` and returns the result.
    pub fn finish(mut self) -> PersistenceResult {
        let m = self.filtration.len();
        assert_eq!(self.next_arrow, m, "finish called before all arrows were processed");
        let mut events = Vec::new();
        let zs: Vec<ZColumn> = self.matrices.z_columns().map(|(_, c)| c.clone()).collect();
        for c in zs {
            self.finalize(Bar::new(Module::H, c.degree, c.birth.index, m), c.birth, c.bundle, &mut events);
        }
        let bs: Vec<BcColumn> = self.matrices.bc_columns().map(|(_, c)| c.clone()).collect();
        for c in bs {
            self.finalize(Bar::new(Module::B, c.degree, c.birth.index, m), c.birth, c.bundle, &mut events);
        }
        let mut intervals = self.intervals;
        intervals.sort_by_key(|iv| iv.bar);
        let stats = RunStats {
            m,
            n: self.n,
            homology_bars: intervals.iter().filter(|iv| iv.bar.module == Module::H).count(),
            boundary_bars: intervals.iter().filter(|iv| iv.bar.module == Module::B).count(),
            summations: self.summations,
        };
        PersistenceResult {
            intervals,
            wires: self.wires,
            stats,
        }
    }

    /// Checks the matrix invariants at the current index: distinct pivots,
    /// every Z and B column equal to its bundle's last cycle, `B = ∂C`, and
    /// all columns inside the current complex.
    pub fn check_invariants(&self) -> Result<(), String> {
        let i = self.next_arrow;
        self.matrices.check_structure()?;
        for (k, col) in self.matrices.z_columns() {
            let chain = self.to_chain(&col.chain);
            let last = self.wires.bundle_last_cycle(&col.bundle, i).map_err(|e| e.to_string())?;
            if chain != last {
                return Err(format!("Z[{k}] (birth {}) differs from its bundle's last cycle", col.birth.index));
            }
            if !chain.is_cycle() || !chain.is_subset_of(&self.state) {
                return Err(format!("Z[{k}] is not a cycle of the current complex"));
            }
            if chain.degree() != Some(col.degree) {
                return Err(format!("Z[{k}] has the wrong degree"));
            }
            self.check_bundle(&col.bundle)?;
        }
        for (k, col) in self.matrices.bc_columns() {
            let bchain = self.to_chain(&col.bchain);
            let cchain = self.to_chain(&col.cchain);
            let last = self.wires.bundle_last_cycle(&col.bundle, i).map_err(|e| e.to_string())?;
            if bchain != last {
                return Err(format!("B[{k}] (birth {}) differs from its bundle's last cycle", col.birth.index));
            }
            if cchain.boundary() != bchain {
                return Err(format!("B[{k}] is not the boundary of C[{k}]"));
            }
            if !cchain.is_subset_of(&self.state) {
                return Err(format!("C[{k}] leaves the current complex"));
            }
            self.check_bundle(&col.bundle)?;
            if col.bundle.indices().any(|s| self.wires.get(s).is_some_and(|w| w.kind != WireKind::Boundary)) {
                return Err(format!("B[{k}] bundle holds a non-boundary wire"));
            }
        }
        Ok(())
    }

    fn check_bundle(&self, bundle: &Bundle) -> Result<(), String> {
        match bundle.indices().find(|&s| self.wires.get(s).is_none()) {
            Some(s) => Err(format!("bundle refers to missing wire {s}")),
            None => Ok(()),
        }
    }
}
