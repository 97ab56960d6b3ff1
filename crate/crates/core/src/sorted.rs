//! Merge helpers for strictly increasing slices.

/// Symmetric difference of two strictly increasing slices.
pub(crate) fn symmetric_difference<T: Ord + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Sorts and cancels repeated entries in pairs, i.e. reduces a multiset mod 2.
pub(crate) fn reduce_mod2<T: Ord>(mut items: Vec<T>) -> Vec<T> {
    items.sort_unstable();
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        if out.last() == Some(&item) {
            out.pop();
        } else {
            out.push(item);
        }
    }
    out
}
