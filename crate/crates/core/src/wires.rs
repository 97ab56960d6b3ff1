//! Wires, bundles, and extraction of explicit representatives.
//!
//! A wire is one fixed cycle tagged with the index it starts at; at most one
//! wire starts at any index, so a bundle is just a sorted set of start
//! indices and bundle sums are symmetric differences of index sets. The
//! cycles of a representative are recovered as prefix sums over the bundle.

use thiserror::Error;

use crate::bar::Bar;
use crate::complex::{Chain, ComplexError};
use crate::sorted;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WireKind {
    NonBoundary,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wire {
    pub start: usize,
    pub kind: WireKind,
    pub cycle: Chain,
}

impl Wire {
    pub fn degree(&self) -> usize {
        self.cycle.degree().expect("wires are non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("a wire already starts at index {0}")]
    Duplicate(usize),
    #[error("wire at index {0} is empty")]
    EmptyWire(usize),
    #[error("wire at index {0} is not a cycle")]
    NotCycle(usize),
    #[error("no wire starts at index {0}")]
    Unknown(usize),
    #[error("bundle mixes wires of degree {0} and {1}")]
    MixedDegree(usize, usize),
    #[error("bundle has no wire at or before death index {0}")]
    EmptyBundle(usize),
    #[error("representatives end at {0} and {1}, not at a common index")]
    EndMismatch(usize, usize),
    #[error(transparent)]
    Chain(#[from] ComplexError),
}

/// A set of wire start indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bundle(Vec<u32>);

impl Bundle {
    pub fn empty() -> Self {
        Bundle(Vec::new())
    }

    pub fn single(start: usize) -> Self {
        Bundle(vec![start as u32])
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Bundle(sorted::reduce_mod2(indices.into_iter().map(|i| i as u32).collect()))
    }

    pub fn indices(&self) -> impl DoubleEndedIterator<Item = usize> + ExactSizeIterator + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, start: usize) -> bool {
        self.0.binary_search(&(start as u32)).is_ok()
    }

    pub fn sum(&self, other: &Bundle) -> Bundle {
        Bundle(sorted::symmetric_difference(&self.0, &other.0))
    }

    pub fn sum_assign(&mut self, other: &Bundle) {
        self.0 = sorted::symmetric_difference(&self.0, &other.0);
    }
}

pub fn bundle_sum(a: &Bundle, b: &Bundle) -> Bundle {
    a.sum(b)
}

/// All wires of one engine run, indexed by start.
#[derive(Debug, Clone, Default)]
pub struct WireStore {
    slots: Vec<Option<Wire>>,
    count: usize,
}

impl WireStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn register(&mut self, start: usize, cycle: Chain, kind: WireKind) -> Result<usize, WireError> {
        if self.get(start).is_some() {
            return Err(WireError::Duplicate(start));
        }
        if cycle.is_empty() {
            return Err(WireError::EmptyWire(start));
        }
        if !cycle.is_cycle() {
            return Err(WireError::NotCycle(start));
        }
        if self.slots.len() <= start {
            self.slots.resize(start + 1, None);
        }
        self.slots[start] = Some(Wire { start, kind, cycle });
        self.count += 1;
        Ok(start)
    }

    pub fn get(&self, start: usize) -> Option<&Wire> {
        self.slots.get(start).and_then(Option::as_ref)
    }

    fn wire(&self, start: usize) -> Result<&Wire, WireError> {
        self.get(start).ok_or(WireError::Unknown(start))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Wire> {
        self.slots.iter().flatten()
    }

    /// Checks that all wires of a bundle exist and share one degree.
    pub fn bundle_degree(&self, bundle: &Bundle) -> Result<Option<usize>, WireError> {
        let mut degree = None;
        for start in bundle.indices() {
            let d = self.wire(start)?.degree();
            match degree {
                Some(prev) if prev != d => return Err(WireError::MixedDegree(prev, d)),
                _ => degree = Some(d),
            }
        }
        Ok(degree)
    }

    /// Sum of the bundle's wires starting at or before `index`.
    pub fn bundle_last_cycle(&self, bundle: &Bundle, index: usize) -> Result<Chain, WireError> {
        self.bundle_degree(bundle)?;
        let mut z = Chain::empty();
        for start in bundle.indices().take_while(|&s| s <= index) {
            z.add_assign(&self.wire(start)?.cycle)?;
        }
        Ok(z)
    }

    /// Expands a bundle into the representative it generates over `bar`.
    ///
    /// Wires starting after the death index are ignored; the cycle changes
    /// only at wire starts inside the interval, giving one segment per start.
    pub fn extract_representative(&self, bundle: &Bundle, bar: Bar) -> Result<Representative, WireError> {
        self.bundle_degree(bundle)?;
        let starts: Vec<usize> = bundle.indices().take_while(|&s| s <= bar.death).collect();
        if starts.is_empty() {
            return Err(WireError::EmptyBundle(bar.death));
        }
        let split = starts.partition_point(|&s| s <= bar.birth);
        let mut z = Chain::empty();
        for &s in &starts[..split] {
            z.add_assign(&self.wire(s)?.cycle)?;
        }
        let mut segments = Vec::with_capacity(starts.len() - split + 1);
        let mut lo = bar.birth;
        for &s in &starts[split..] {
            segments.push(Segment {
                lo,
                hi: s - 1,
                chain: z.clone(),
            });
            z.add_assign(&self.wire(s)?.cycle)?;
            lo = s;
        }
        segments.push(Segment {
            lo,
            hi: bar.death,
            chain: z,
        });
        Ok(Representative { bar, segments })
    }
}

/// A maximal run `[lo, hi]` of indices sharing one cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub lo: usize,
    pub hi: usize,
    pub chain: Chain,
}

/// A per-index cycle sequence for a bar, stored as constant segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representative {
    pub bar: Bar,
    pub segments: Vec<Segment>,
}

impl Representative {
    /// Builds a representative from one cycle per index of `bar`, merging runs.
    pub fn from_cycles(bar: Bar, cycles: Vec<Chain>) -> Self {
        assert_eq!(cycles.len(), bar.death - bar.birth + 1, "one cycle per index");
        let mut segments: Vec<Segment> = Vec::new();
        for (k, chain) in cycles.into_iter().enumerate() {
            let alpha = bar.birth + k;
            match segments.last_mut() {
                Some(last) if last.chain == chain => last.hi = alpha,
                _ => segments.push(Segment { lo: alpha, hi: alpha, chain }),
            }
        }
        Representative { bar, segments }
    }

    /// Segments cover `[birth, death]` contiguously, in order, with no empty run.
    pub fn is_well_formed(&self) -> bool {
        let mut next = self.bar.birth;
        for seg in &self.segments {
            if seg.lo != next || seg.hi < seg.lo {
                return false;
            }
            next = seg.hi + 1;
        }
        !self.segments.is_empty() && next == self.bar.death + 1
    }

    pub fn cycle_at(&self, alpha: usize) -> Option<&Chain> {
        self.segments
            .iter()
            .find(|seg| seg.lo <= alpha && alpha <= seg.hi)
            .map(|seg| &seg.chain)
    }

    /// `(index, cycle)` for every index of the bar.
    pub fn cycles(&self) -> impl Iterator<Item = (usize, &Chain)> {
        self.segments
            .iter()
            .flat_map(|seg| (seg.lo..=seg.hi).map(move |a| (a, &seg.chain)))
    }

    /// Sum of two representatives of bars ending at the same index, where
    /// `self`'s birth precedes `later`'s in the birth order. The result
    /// represents `later`'s bar: before `self` is born it is `later`'s cycle,
    /// afterwards the index-wise sum.
    pub fn summed_into(&self, later: &Representative) -> Result<Representative, WireError> {
        if self.bar.death != later.bar.death {
            return Err(WireError::EndMismatch(self.bar.death, later.bar.death));
        }
        let bar = later.bar;
        let mut cycles = Vec::with_capacity(bar.death - bar.birth + 1);
        for (alpha, z_later) in later.cycles() {
            let z = match self.cycle_at(alpha) {
                Some(z_self) => z_self.add(z_later)?,
                None => z_later.clone(),
            };
            cycles.push(z);
        }
        Ok(Representative::from_cycles(bar, cycles))
    }
}
