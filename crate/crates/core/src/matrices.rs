//! The pivoted column families Z, B and C.
//!
//! Columns are sparse sorted lists of live ids. Z holds one cycle per active
//! homology bar, B one boundary per active boundary bar, and C one chain per
//! B column with `B[k] = ∂C[k]`. Pivots (largest id) of Z and B columns are
//! kept pairwise distinct; `pivots` maps each pivot to its owner.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::complex::{ComplexState, LiveId, Simplex};
use crate::order::{precedes, BirthKey};
use crate::sorted::symmetric_difference;
use crate::wires::Bundle;

/// Sorted live ids of a chain's simplices.
pub type IdChain = Vec<LiveId>;

pub(crate) fn pivot_of(chain: &[LiveId]) -> Option<LiveId> {
    chain.last().copied()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZColumn {
    pub chain: IdChain,
    pub birth: BirthKey,
    pub bundle: Bundle,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BcColumn {
    pub bchain: IdChain,
    pub cchain: IdChain,
    pub birth: BirthKey,
    pub bundle: Bundle,
    /// Degree of `bchain`.
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColRef {
    Z(usize),
    B(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Z,
    B,
    C,
}

/// One column (and bundle) summation: `source` was added into `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Summation {
    pub source: BirthKey,
    pub target: BirthKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("reduction left a residual with pivot {0} owned by no column")]
    Residual(LiveId),
    #[error("pivot collision not resolved within {0} summations")]
    PivotLoop(usize),
    #[error("summing columns of degree {0} and {1}")]
    DegreeMismatch(usize, usize),
    #[error("column became empty during summation")]
    EmptyColumn,
    #[error("no column {0:?}")]
    NoSuchColumn(ColRef),
}

#[derive(Debug, Clone, Default)]
pub struct MatrixTriple {
    z: Vec<Option<ZColumn>>,
    z_free: Vec<usize>,
    bc: Vec<Option<BcColumn>>,
    bc_free: Vec<usize>,
    pivots: FxHashMap<LiveId, ColRef>,
    /// For each live id, the B/C slots whose C chain contains it.
    c_index: FxHashMap<LiveId, Vec<usize>>,
}

fn insert_slot<T>(slots: &mut Vec<Option<T>>, free: &mut Vec<usize>, item: T) -> usize {
    match free.pop() {
        Some(k) => {
            slots[k] = Some(item);
            k
        }
        None => {
            slots.push(Some(item));
            slots.len() - 1
        }
    }
}

impl MatrixTriple {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn z(&self, slot: usize) -> Option<&ZColumn> {
        self.z.get(slot).and_then(Option::as_ref)
    }

    pub fn bc(&self, slot: usize) -> Option<&BcColumn> {
        self.bc.get(slot).and_then(Option::as_ref)
    }

    pub fn z_columns(&self) -> impl Iterator<Item = (usize, &ZColumn)> {
        self.z.iter().enumerate().filter_map(|(k, c)| c.as_ref().map(|c| (k, c)))
    }

    pub fn bc_columns(&self) -> impl Iterator<Item = (usize, &BcColumn)> {
        self.bc.iter().enumerate().filter_map(|(k, c)| c.as_ref().map(|c| (k, c)))
    }

    pub fn z_len(&self) -> usize {
        self.z.len() - self.z_free.len()
    }

    pub fn bc_len(&self) -> usize {
        self.bc.len() - self.bc_free.len()
    }

    fn z_mut(&mut self, slot: usize) -> &mut ZColumn {
        self.z[slot].as_mut().expect("live Z slot")
    }

    fn bc_mut(&mut self, slot: usize) -> &mut BcColumn {
        self.bc[slot].as_mut().expect("live B/C slot")
    }

    /// The cycle a Z or B column holds.
    pub fn cycle(&self, col: ColRef) -> Option<&IdChain> {
        match col {
            ColRef::Z(k) => self.z(k).map(|c| &c.chain),
            ColRef::B(k) => self.bc(k).map(|c| &c.bchain),
        }
    }

    pub fn birth(&self, col: ColRef) -> Option<BirthKey> {
        match col {
            ColRef::Z(k) => self.z(k).map(|c| c.birth),
            ColRef::B(k) => self.bc(k).map(|c| c.birth),
        }
    }

    fn degree(&self, col: ColRef) -> usize {
        match col {
            ColRef::Z(k) => self.z(k).expect("live").degree,
            ColRef::B(k) => self.bc(k).expect("live").degree,
        }
    }

    pub fn pivot_owner(&self, pivot: LiveId) -> Option<ColRef> {
        self.pivots.get(&pivot).copied()
    }

    /// Expresses the cycle `c` exactly as a sum of Z columns (`J`) and B
    /// columns (`I`) by cancelling its pivot against the unique owner until
    /// nothing is left.
    pub fn reduce_boundary(&self, c: &[LiveId]) -> Result<(Vec<usize>, Vec<usize>), MatrixError> {
        let mut cur = c.to_vec();
        let mut zs = Vec::new();
        let mut bs = Vec::new();
        while let Some(p) = pivot_of(&cur) {
            let owner = self.pivot_owner(p).ok_or(MatrixError::Residual(p))?;
            cur = symmetric_difference(&cur, self.cycle(owner).expect("pivot map is consistent"));
            match owner {
                ColRef::Z(k) => zs.push(k),
                ColRef::B(k) => bs.push(k),
            }
        }
        Ok((crate::sorted::reduce_mod2(zs), crate::sorted::reduce_mod2(bs)))
    }

    /// Adds a Z column without registering its pivot; follow with
    /// [`restore_distinct_pivots`](Self::restore_distinct_pivots).
    pub fn add_z_column(&mut self, col: ZColumn) -> ColRef {
        ColRef::Z(insert_slot(&mut self.z, &mut self.z_free, col))
    }

    /// Adds a B/C column pair without registering its pivot.
    pub fn add_bc_column(&mut self, col: BcColumn) -> ColRef {
        let ids = col.cchain.clone();
        let slot = insert_slot(&mut self.bc, &mut self.bc_free, col);
        self.toggle_c_index(slot, &ids);
        ColRef::B(slot)
    }

    pub fn delete_column(&mut self, col: ColRef) -> Result<(), MatrixError> {
        let pivot = match col {
            ColRef::Z(k) => {
                let c = self.z.get_mut(k).and_then(Option::take).ok_or(MatrixError::NoSuchColumn(col))?;
                self.z_free.push(k);
                pivot_of(&c.chain)
            }
            ColRef::B(k) => {
                let c = self.bc.get_mut(k).and_then(Option::take).ok_or(MatrixError::NoSuchColumn(col))?;
                self.bc_free.push(k);
                self.toggle_c_index(k, &c.cchain);
                pivot_of(&c.bchain)
            }
        };
        if let Some(p) = pivot {
            if self.pivots.get(&p) == Some(&col) {
                self.pivots.remove(&p);
            }
        }
        Ok(())
    }

    fn toggle_c_index(&mut self, slot: usize, ids: &[LiveId]) {
        for id in ids {
            let slots = self.c_index.entry(*id).or_default();
            if let Some(pos) = slots.iter().position(|&s| s == slot) {
                slots.swap_remove(pos);
                if slots.is_empty() {
                    self.c_index.remove(id);
                }
            } else {
                slots.push(slot);
            }
        }
    }

    /// Slots of columns whose designated chain contains the given id.
    pub fn columns_containing_id(&self, which: Which, id: LiveId) -> Vec<usize> {
        let mut out: Vec<usize> = match which {
            Which::Z => self
                .z_columns()
                .filter(|(_, c)| c.chain.binary_search(&id).is_ok())
                .map(|(k, _)| k)
                .collect(),
            Which::B => self
                .bc_columns()
                .filter(|(_, c)| c.bchain.binary_search(&id).is_ok())
                .map(|(k, _)| k)
                .collect(),
            Which::C => self.c_index.get(&id).cloned().unwrap_or_default(),
        };
        out.sort_unstable();
        out
    }

    pub fn columns_containing(&self, which: Which, simplex: &Simplex, state: &ComplexState) -> Vec<usize> {
        match state.live_id(simplex) {
            Some(id) => self.columns_containing_id(which, id),
            None => Vec::new(),
        }
    }

    /// Adds `source` into `target`: chains, C chains for B+B, and bundles.
    fn sum_into(&mut self, source: ColRef, target: ColRef) -> Result<Summation, MatrixError> {
        let (ds, dt) = (self.degree(source), self.degree(target));
        if ds != dt {
            return Err(MatrixError::DegreeMismatch(ds, dt));
        }
        let src_cycle = self.cycle(source).expect("live").clone();
        let (src_bundle, src_birth, src_c) = match source {
            ColRef::Z(k) => {
                let c = self.z(k).expect("live");
                (c.bundle.clone(), c.birth, None)
            }
            ColRef::B(k) => {
                let c = self.bc(k).expect("live");
                (c.bundle.clone(), c.birth, Some(c.cchain.clone()))
            }
        };
        let target_birth = match target {
            ColRef::Z(k) => {
                let col = self.z_mut(k);
                col.chain = symmetric_difference(&col.chain, &src_cycle);
                col.bundle.sum_assign(&src_bundle);
                if col.chain.is_empty() {
                    return Err(MatrixError::EmptyColumn);
                }
                col.birth
            }
            ColRef::B(k) => {
                let src_c = src_c.expect("only B columns are added into B columns");
                let col = self.bc_mut(k);
                col.bchain = symmetric_difference(&col.bchain, &src_cycle);
                col.cchain = symmetric_difference(&col.cchain, &src_c);
                col.bundle.sum_assign(&src_bundle);
                if col.bchain.is_empty() {
                    return Err(MatrixError::EmptyColumn);
                }
                let birth = col.birth;
                self.toggle_c_index(k, &src_c);
                birth
            }
        };
        Ok(Summation {
            source: src_birth,
            target: target_birth,
        })
    }

    /// Registers the pivot of `start`, resolving collisions by adding the
    /// ≺-earlier column into the ≺-later one until pivots are distinct again.
    /// Each round lowers the contested pivot, so at most `limit` rounds run.
    pub fn restore_distinct_pivots(&mut self, start: ColRef, limit: usize) -> Result<Vec<Summation>, MatrixError> {
        let mut events = Vec::new();
        let mut cur = start;
        loop {
            let p = pivot_of(self.cycle(cur).ok_or(MatrixError::NoSuchColumn(cur))?).ok_or(MatrixError::EmptyColumn)?;
            let other = match self.pivots.get(&p) {
                None => {
                    self.pivots.insert(p, cur);
                    return Ok(events);
                }
                Some(&o) if o == cur => return Ok(events),
                Some(&o) => o,
            };
            if events.len() >= limit {
                return Err(MatrixError::PivotLoop(limit));
            }
            let (bo, bc) = (self.birth(other).expect("live"), self.birth(cur).expect("live"));
            if precedes(&bo, &bc) {
                events.push(self.sum_into(other, cur)?);
            } else {
                events.push(self.sum_into(cur, other)?);
                self.pivots.insert(p, cur);
                cur = other;
            }
        }
    }

    /// Drops the pivot registration of a column whose chain is about to change.
    pub(crate) fn unregister_pivot(&mut self, col: ColRef) {
        if let Some(p) = self.cycle(col).and_then(|c| pivot_of(c)) {
            if self.pivots.get(&p) == Some(&col) {
                self.pivots.remove(&p);
            }
        }
    }

    pub(crate) fn z_column_mut(&mut self, slot: usize) -> &mut ZColumn {
        self.z_mut(slot)
    }

    /// Replaces the chains and bundle of a B/C column, keeping the C index in sync.
    pub(crate) fn set_bc(&mut self, slot: usize, bchain: IdChain, cchain: IdChain, bundle: Bundle) {
        let old_c = std::mem::take(&mut self.bc_mut(slot).cchain);
        self.toggle_c_index(slot, &old_c);
        self.toggle_c_index(slot, &cchain);
        let col = self.bc_mut(slot);
        col.bchain = bchain;
        col.cchain = cchain;
        col.bundle = bundle;
    }

    /// Adds `chain` into the C chain of a B/C column.
    pub(crate) fn add_to_c(&mut self, slot: usize, chain: &[LiveId]) {
        let col = self.bc_mut(slot);
        col.cchain = symmetric_difference(&col.cchain, chain);
        self.toggle_c_index(slot, chain);
    }

    /// Checks distinct pivots and that the pivot map and C index agree with
    /// the columns.
    pub fn check_structure(&self) -> Result<(), String> {
        let mut seen: FxHashMap<LiveId, ColRef> = FxHashMap::default();
        let cols = self
            .z_columns()
            .map(|(k, c)| (ColRef::Z(k), &c.chain))
            .chain(self.bc_columns().map(|(k, c)| (ColRef::B(k), &c.bchain)));
        for (col, chain) in cols {
            let p = pivot_of(chain).ok_or_else(|| format!("{col:?} is empty"))?;
            if let Some(prev) = seen.insert(p, col) {
                return Err(format!("{prev:?} and {col:?} share pivot {p}"));
            }
            if self.pivots.get(&p) != Some(&col) {
                return Err(format!("pivot map disagrees for {col:?} at {p}"));
            }
        }
        if seen.len() != self.pivots.len() {
            return Err("pivot map has stale entries".into());
        }
        let mut entries = 0;
        for (k, c) in self.bc_columns() {
            for id in &c.cchain {
                entries += 1;
                if !self.c_index.get(id).is_some_and(|v| v.contains(&k)) {
                    return Err(format!("C index misses slot {k} for id {id}"));
                }
            }
        }
        if entries != self.c_index.values().map(Vec::len).sum::<usize>() {
            return Err("C index has stale entries".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::Direction;

    fn zcol(chain: &[LiveId], birth: BirthKey, degree: usize) -> ZColumn {
        ZColumn {
            chain: chain.to_vec(),
            birth,
            bundle: Bundle::single(birth.index),
            degree,
        }
    }

    fn bccol(b: &[LiveId], c: &[LiveId], birth: BirthKey, degree: usize) -> BcColumn {
        BcColumn {
            bchain: b.to_vec(),
            cchain: c.to_vec(),
            birth,
            bundle: Bundle::single(birth.index),
            degree,
        }
    }

    #[test]
    fn reduce_f1_arrow2() {
        // u id 0, v id 1; ∂(uv) = u + v
        let mut m = MatrixTriple::new();
        let a = m.add_z_column(zcol(&[0], BirthKey::homology(1, Direction::Forward), 0));
        m.restore_distinct_pivots(a, 4).unwrap();
        let b = m.add_z_column(zcol(&[1], BirthKey::homology(2, Direction::Forward), 0));
        m.restore_distinct_pivots(b, 4).unwrap();
        let (j, i) = m.reduce_boundary(&[0, 1]).unwrap();
        assert_eq!(j, vec![0, 1]);
        assert!(i.is_empty());
        assert_eq!(m.reduce_boundary(&[]).unwrap(), (vec![], vec![]));
        assert_eq!(m.reduce_boundary(&[5]), Err(MatrixError::Residual(5)));
    }

    #[test]
    fn reduce_f2_arrow5() {
        // F2 ids: u0 v1 w2 uv3 uw4; B holds u+v (pivot 1) and u+w (pivot 2), Z holds {u}
        let mut m = MatrixTriple::new();
        for col in [
            m.add_z_column(zcol(&[0], BirthKey::homology(1, Direction::Forward), 0)),
            m.add_bc_column(bccol(&[0, 1], &[3], BirthKey::boundary(4), 0)),
            m.add_bc_column(bccol(&[0, 2], &[4], BirthKey::boundary(5), 0)),
        ] {
            assert!(m.restore_distinct_pivots(col, 4).unwrap().is_empty());
        }
        let (j, i) = m.reduce_boundary(&[1, 2]).unwrap();
        assert!(j.is_empty());
        assert_eq!(i, vec![0, 1]);
    }

    #[test]
    fn z_b_collision_adds_b_into_z() {
        let mut m = MatrixTriple::new();
        let z = m.add_z_column(zcol(&[0, 3], BirthKey::homology(2, Direction::Forward), 0));
        m.restore_distinct_pivots(z, 4).unwrap();
        let b = m.add_bc_column(bccol(&[1, 2], &[9], BirthKey::boundary(5), 0));
        assert!(m.restore_distinct_pivots(b, 4).unwrap().is_empty());
        let b2 = m.add_bc_column(bccol(&[2, 3], &[10], BirthKey::boundary(7), 0));
        let events = m.restore_distinct_pivots(b2, 4).unwrap();
        // pivot 3 clashes: B precedes H, so B goes into Z, whose new pivot 2
        // then clashes with the older B column
        let zkey = BirthKey::homology(2, Direction::Forward);
        assert_eq!(
            events,
            vec![
                Summation { source: BirthKey::boundary(7), target: zkey },
                Summation { source: BirthKey::boundary(5), target: zkey },
            ]
        );
        let zc = m.z(0).unwrap();
        assert_eq!(zc.chain, vec![0, 1]);
        assert_eq!(zc.bundle, Bundle::from_indices([2, 5, 7]));
        m.check_structure().unwrap();
    }

    #[test]
    fn b_b_collision_sums_c_chains() {
        let mut m = MatrixTriple::new();
        let b1 = m.add_bc_column(bccol(&[0, 2], &[5], BirthKey::boundary(3), 0));
        m.restore_distinct_pivots(b1, 4).unwrap();
        let b2 = m.add_bc_column(bccol(&[1, 2], &[6], BirthKey::boundary(6), 0));
        let events = m.restore_distinct_pivots(b2, 4).unwrap();
        assert_eq!(events.len(), 1);
        let c = m.bc(1).unwrap();
        assert_eq!(c.bchain, vec![0, 1]);
        assert_eq!(c.cchain, vec![5, 6]);
        assert_eq!(m.columns_containing_id(Which::C, 5), vec![0, 1]);
        m.check_structure().unwrap();
    }

    #[test]
    fn columns_containing_and_delete() {
        let mut m = MatrixTriple::new();
        let b = m.add_bc_column(bccol(&[0, 1], &[2], BirthKey::boundary(3), 0));
        m.restore_distinct_pivots(b, 4).unwrap();
        assert_eq!(m.columns_containing_id(Which::C, 2), vec![0]);
        assert_eq!(m.columns_containing_id(Which::B, 1), vec![0]);
        assert!(m.columns_containing_id(Which::Z, 1).is_empty());
        assert!(m.columns_containing_id(Which::C, 7).is_empty());
        m.delete_column(b).unwrap();
        assert!(m.columns_containing_id(Which::C, 2).is_empty());
        assert_eq!(m.delete_column(b), Err(MatrixError::NoSuchColumn(b)));
        m.check_structure().unwrap();
    }

    #[test]
    fn degree_tripwire() {
        let mut m = MatrixTriple::new();
        let z = m.add_z_column(zcol(&[3, 4], BirthKey::homology(2, Direction::Forward), 1));
        m.restore_distinct_pivots(z, 4).unwrap();
        let b = m.add_bc_column(bccol(&[1, 4], &[9], BirthKey::boundary(5), 0));
        assert_eq!(m.restore_distinct_pivots(b, 4), Err(MatrixError::DegreeMismatch(0, 1)));
    }
}
