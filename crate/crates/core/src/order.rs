//! The total order on birth indices that decides summation direction.

use std::cmp::Ordering;

use crate::bar::Module;
use crate::filtration::Direction;

/// A birth index together with what is born there and how the arrow into
/// it points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BirthKey {
    pub index: usize,
    pub module: Module,
    pub arrow_into: Direction,
}

impl BirthKey {
    pub fn homology(index: usize, arrow_into: Direction) -> Self {
        BirthKey {
            index,
            module: Module::H,
            arrow_into,
        }
    }

    /// Boundary births only happen across forward arrows.
    pub fn boundary(index: usize) -> Self {
        BirthKey {
            index,
            module: Module::B,
            arrow_into: Direction::Forward,
        }
    }
}

/// `a ≺ b`: may a representative born at `a` be added to one born at `b`.
///
/// Boundary births precede homology births; boundary births are ordered by
/// index; among homology births, a later forward birth comes after and a
/// later backward birth comes before.
pub fn precedes(a: &BirthKey, b: &BirthKey) -> bool {
    use Direction::*;
    use Module::*;
    match (a.module, b.module) {
        (B, H) => true,
        (H, B) => false,
        (B, B) => a.index < b.index,
        (H, H) => {
            (a.index < b.index && b.arrow_into == Forward) || (b.index < a.index && a.arrow_into == Backward)
        }
    }
}

/// Comparator form of [`precedes`] for sorting distinct keys.
pub fn compare(a: &BirthKey, b: &BirthKey) -> Ordering {
    if a == b {
        Ordering::Equal
    } else if precedes(a, b) {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}
