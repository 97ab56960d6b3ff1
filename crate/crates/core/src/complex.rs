//! Simplices, Z₂ chains, and the live state of a changing complex.
//!
//! A [`Simplex`] is identified by its vertex tuple, so the same simplex
//! appearing in different complexes of a filtration is one object.
//! [`ComplexState`] tracks which simplices are currently present and the
//! id (arrow index of the most recent insertion) each one carries; ids are
//! only used to order simplices when computing pivots.

use std::fmt;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use thiserror::Error;

use crate::sorted;

pub type Vertex = u32;

/// Arrow index at which a live simplex was most recently inserted.
pub type LiveId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("simplex has no vertices")]
    EmptySimplex,
    #[error("vertices not strictly increasing: {0:?}")]
    NotIncreasing(Vec<Vertex>),
    #[error("cannot add chains of degree {left} and {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("chain mixes simplices of dimension {0} and {1}")]
    Inhomogeneous(usize, usize),
    #[error("simplex [{0}] is not in the complex")]
    NotLive(Simplex),
}

/// Reasons a single insertion or deletion is illegal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("faces of [{simplex}] missing (first missing: [{missing}])")]
    FacesMissing { simplex: Simplex, missing: Simplex },
    #[error("[{0}] is already in the complex")]
    AlreadyPresent(Simplex),
    #[error("[{0}] is absent from the complex")]
    Absent(Simplex),
    #[error("[{0}] still has cofaces in the complex")]
    HasCofaces(Simplex),
    #[error("id {id} is not larger than previously assigned id {last}")]
    StaleId { id: LiveId, last: LiveId },
}

/// An abstract simplex given by strictly increasing vertex ids.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(SmallVec<[Vertex; 4]>);

impl Simplex {
    pub fn new(vertices: impl IntoIterator<Item = Vertex>) -> Result<Self, ComplexError> {
        let verts: SmallVec<[Vertex; 4]> = vertices.into_iter().collect();
        if verts.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        if verts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ComplexError::NotIncreasing(verts.to_vec()));
        }
        Ok(Simplex(verts))
    }

    pub fn vertex(v: Vertex) -> Self {
        Simplex(smallvec::smallvec![v])
    }

    /// Builds a simplex from any vertex set, sorting and deduplicating.
    pub fn from_unsorted(vertices: impl IntoIterator<Item = Vertex>) -> Result<Self, ComplexError> {
        let mut verts: SmallVec<[Vertex; 4]> = vertices.into_iter().collect();
        verts.sort_unstable();
        verts.dedup();
        Simplex::new(verts)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces; empty for a vertex.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.0.binary_search(v).is_ok())
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// A Z₂ chain: a finite set of simplices of one dimension.
///
/// The empty chain carries no degree and can be added to anything.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Chain {
    simplices: Vec<Simplex>,
}

impl Chain {
    pub fn empty() -> Self {
        Chain::default()
    }

    /// Sums the given simplices over Z₂, so repeated simplices cancel in pairs.
    pub fn from_simplices(simplices: impl IntoIterator<Item = Simplex>) -> Result<Self, ComplexError> {
        let simplices = sorted::reduce_mod2(simplices.into_iter().collect());
        if let Some(first) = simplices.first() {
            if let Some(bad) = simplices.iter().find(|s| s.dim() != first.dim()) {
                return Err(ComplexError::Inhomogeneous(first.dim(), bad.dim()));
            }
        }
        Ok(Chain { simplices })
    }

    pub fn single(simplex: Simplex) -> Self {
        Chain { simplices: vec![simplex] }
    }

    /// Wraps an already sorted, duplicate-free, homogeneous list.
    pub(crate) fn from_sorted_unchecked(simplices: Vec<Simplex>) -> Self {
        debug_assert!(simplices.windows(2).all(|w| w[0] < w[1]));
        Chain { simplices }
    }

    pub fn degree(&self) -> Option<usize> {
        self.simplices.first().map(Simplex::dim)
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Simplex> {
        self.simplices.iter()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn contains(&self, simplex: &Simplex) -> bool {
        self.simplices.binary_search(simplex).is_ok()
    }

    fn check_degrees(&self, other: &Chain) -> Result<(), ComplexError> {
        match (self.degree(), other.degree()) {
            (Some(left), Some(right)) if left != right => Err(ComplexError::DegreeMismatch { left, right }),
            _ => Ok(()),
        }
    }

    pub fn add(&self, other: &Chain) -> Result<Chain, ComplexError> {
        self.check_degrees(other)?;
        Ok(Chain {
            simplices: sorted::symmetric_difference(&self.simplices, &other.simplices),
        })
    }

    pub fn add_assign(&mut self, other: &Chain) -> Result<(), ComplexError> {
        self.check_degrees(other)?;
        if !other.is_empty() {
            self.simplices = sorted::symmetric_difference(&self.simplices, &other.simplices);
        }
        Ok(())
    }

    pub fn boundary(&self) -> Chain {
        let facets = self.simplices.iter().flat_map(Simplex::facets).collect();
        Chain {
            simplices: sorted::reduce_mod2(facets),
        }
    }

    pub fn is_cycle(&self) -> bool {
        self.boundary().is_empty()
    }

    /// True when every simplex of the chain is live in `state`.
    pub fn is_subset_of(&self, state: &ComplexState) -> bool {
        self.simplices.iter().all(|s| state.contains(s))
    }
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.simplices.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a Chain {
    type Item = &'a Simplex;
    type IntoIter = std::slice::Iter<'a, Simplex>;

    fn into_iter(self) -> Self::IntoIter {
        self.simplices.iter()
    }
}

pub fn chain_add(a: &Chain, b: &Chain) -> Result<Chain, ComplexError> {
    a.add(b)
}

pub fn boundary(c: &Chain) -> Chain {
    c.boundary()
}

/// Largest live id among the chain's simplices, `None` for the empty chain.
pub fn pivot(c: &Chain, state: &ComplexState) -> Result<Option<LiveId>, ComplexError> {
    let mut best = None;
    for s in c {
        let id = state.live_id(s).ok_or_else(|| ComplexError::NotLive(s.clone()))?;
        best = best.max(Some(id));
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy)]
struct LiveEntry {
    id: LiveId,
    cofaces: u32,
}

/// The current complex of a replayed filtration.
#[derive(Debug, Clone, Default)]
pub struct ComplexState {
    live: FxHashMap<Simplex, LiveEntry>,
    last_id: Option<LiveId>,
}

impl ComplexState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn contains(&self, simplex: &Simplex) -> bool {
        self.live.contains_key(simplex)
    }

    pub fn live_id(&self, simplex: &Simplex) -> Option<LiveId> {
        self.live.get(simplex).map(|e| e.id)
    }

    pub fn has_cofaces(&self, simplex: &Simplex) -> bool {
        self.live.get(simplex).is_some_and(|e| e.cofaces > 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, LiveId)> {
        self.live.iter().map(|(s, e)| (s, e.id))
    }

    /// Live simplices ordered by (dimension, vertices).
    pub fn simplices_sorted(&self) -> Vec<Simplex> {
        let mut out: Vec<Simplex> = self.live.keys().cloned().collect();
        out.sort_unstable_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.cmp(b)));
        out
    }

    /// Checks that inserting `simplex` would be legal.
    pub fn check_insert(&self, simplex: &Simplex) -> Result<(), StepError> {
        if self.contains(simplex) {
            return Err(StepError::AlreadyPresent(simplex.clone()));
        }
        if let Some(missing) = simplex.facets().find(|f| !self.contains(f)) {
            return Err(StepError::FacesMissing {
                simplex: simplex.clone(),
                missing,
            });
        }
        Ok(())
    }

    /// Checks that removing `simplex` would be legal.
    pub fn check_remove(&self, simplex: &Simplex) -> Result<(), StepError> {
        match self.live.get(simplex) {
            None => Err(StepError::Absent(simplex.clone())),
            Some(e) if e.cofaces > 0 => Err(StepError::HasCofaces(simplex.clone())),
            Some(_) => Ok(()),
        }
    }

    pub fn insert(&mut self, simplex: Simplex, id: LiveId) -> Result<(), StepError> {
        self.check_insert(&simplex)?;
        if let Some(last) = self.last_id {
            if id <= last {
                return Err(StepError::StaleId { id, last });
            }
        }
        for f in simplex.facets() {
            if let Some(e) = self.live.get_mut(&f) {
                e.cofaces += 1;
            }
        }
        self.live.insert(simplex, LiveEntry { id, cofaces: 0 });
        self.last_id = Some(id);
        Ok(())
    }

    /// Removes a simplex without cofaces, returning the id it carried.
    pub fn remove(&mut self, simplex: &Simplex) -> Result<LiveId, StepError> {
        self.check_remove(simplex)?;
        let entry = self.live.remove(simplex).expect("checked above");
        for f in simplex.facets() {
            if let Some(e) = self.live.get_mut(&f) {
                e.cofaces -= 1;
            }
        }
        Ok(entry.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[Vertex]) -> Simplex {
        Simplex::new(v.iter().copied()).unwrap()
    }

    fn c(items: &[&[Vertex]]) -> Chain {
        Chain::from_simplices(items.iter().map(|v| s(v))).unwrap()
    }

    #[test]
    fn simplex_rejects_bad_vertex_lists() {
        assert_eq!(Simplex::new([]), Err(ComplexError::EmptySimplex));
        assert!(matches!(Simplex::new([1, 0]), Err(ComplexError::NotIncreasing(_))));
        assert!(matches!(Simplex::new([2, 2]), Err(ComplexError::NotIncreasing(_))));
        assert_eq!(s(&[0, 1, 2]).dim(), 2);
    }

    #[test]
    fn chain_add_examples() {
        // u=0, v=1, w=2
        assert_eq!(chain_add(&c(&[&[0], &[1]]), &c(&[&[1], &[2]])).unwrap(), c(&[&[0], &[2]]));
        let x = c(&[&[0, 1], &[1, 2]]);
        assert!(chain_add(&x, &x).unwrap().is_empty());
        assert_eq!(
            chain_add(&c(&[&[0, 1], &[0, 2]]), &c(&[&[0, 2], &[1, 2]])).unwrap(),
            c(&[&[0, 1], &[1, 2]])
        );
    }

    #[test]
    fn chain_add_degree_mismatch() {
        let err = chain_add(&c(&[&[0]]), &c(&[&[0, 1]])).unwrap_err();
        assert_eq!(err, ComplexError::DegreeMismatch { left: 0, right: 1 });
        // empty operands skip the check
        assert_eq!(chain_add(&Chain::empty(), &c(&[&[0, 1]])).unwrap(), c(&[&[0, 1]]));
    }

    #[test]
    fn inhomogeneous_chain_rejected() {
        assert!(Chain::from_simplices([s(&[0]), s(&[0, 1])]).is_err());
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(boundary(&c(&[&[0, 1]])), c(&[&[0], &[1]]));
        let tri = c(&[&[0, 1, 2]]);
        assert_eq!(boundary(&tri), c(&[&[0, 1], &[0, 2], &[1, 2]]));
        assert!(boundary(&boundary(&tri)).is_empty());
        assert!(boundary(&c(&[&[3]])).is_empty());
    }

    #[test]
    fn pivot_examples() {
        let mut st = ComplexState::new();
        st.insert(s(&[0]), 1).unwrap();
        st.insert(s(&[1]), 2).unwrap();
        assert_eq!(pivot(&c(&[&[0], &[1]]), &st).unwrap(), Some(2));
        assert_eq!(pivot(&Chain::empty(), &st).unwrap(), None);
        assert!(matches!(pivot(&c(&[&[7]]), &st), Err(ComplexError::NotLive(_))));
    }

    #[test]
    fn replay_rules() {
        let mut st = ComplexState::new();
        assert!(matches!(st.insert(s(&[0, 1]), 0), Err(StepError::FacesMissing { .. })));
        st.insert(s(&[0]), 0).unwrap();
        st.insert(s(&[1]), 1).unwrap();
        st.insert(s(&[0, 1]), 2).unwrap();
        assert!(matches!(st.insert(s(&[0]), 3), Err(StepError::AlreadyPresent(_))));
        assert!(matches!(st.remove(&s(&[0])), Err(StepError::HasCofaces(_))));
        assert_eq!(st.remove(&s(&[0, 1])), Ok(2));
        assert!(matches!(st.remove(&s(&[0, 1])), Err(StepError::Absent(_))));
        assert!(matches!(st.insert(s(&[0, 1]), 1), Err(StepError::StaleId { .. })));
        st.insert(s(&[0, 1]), 9).unwrap();
        assert_eq!(st.live_id(&s(&[0, 1])), Some(9));
    }

    fn arb_chain(deg: usize) -> impl Strategy<Value = Chain> {
        let simplex = proptest::sample::subsequence((0u32..7).collect::<Vec<_>>(), deg + 1)
            .prop_map(|v| Simplex::new(v).unwrap());
        proptest::collection::vec(simplex, 0..10).prop_map(|v| Chain::from_simplices(v).unwrap())
    }

    proptest! {
        #[test]
        fn chain_group_laws(a in arb_chain(1), b in arb_chain(1), d in arb_chain(1)) {
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().add(&d).unwrap(), a.add(&b.add(&d).unwrap()).unwrap());
            prop_assert!(a.add(&a).unwrap().is_empty());
            prop_assert_eq!(a.add(&Chain::empty()).unwrap(), a.clone());
        }

        #[test]
        fn boundary_is_linear(a in arb_chain(2), b in arb_chain(2)) {
            let lhs = a.add(&b).unwrap().boundary();
            let rhs = a.boundary().add(&b.boundary()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert!(a.boundary().boundary().is_empty());
        }

        #[test]
        fn pivot_of_sum_bounded(
            a in arb_chain(1),
            b in arb_chain(1),
            order in Just((0u32..7).flat_map(|x| (x + 1..7).map(move |y| [x, y])).collect::<Vec<_>>()).prop_shuffle(),
        ) {
            // every edge on 7 vertices is live; edge ids follow a shuffled insertion order
            let mut st = ComplexState::new();
            for v in 0u32..7 {
                st.insert(Simplex::vertex(v), v).unwrap();
            }
            for (k, e) in order.iter().enumerate() {
                st.insert(s(e), 7 + k as u32).unwrap();
            }
            let pa = pivot(&a, &st).unwrap();
            let pb = pivot(&b, &st).unwrap();
            let ps = pivot(&a.add(&b).unwrap(), &st).unwrap();
            prop_assert!(ps <= pa.max(pb));
            prop_assert_eq!(ps < pa.max(pb), pa.is_some() && pa == pb);
        }
    }
}
