//! Seeded generators for random valid zigzag filtrations.

use rand::seq::index::sample;
use rand::Rng;

use crate::complex::{ComplexState, LiveId, Simplex, Vertex};
use crate::filtration::{FiltrationStep, ZigzagFiltration};

#[derive(Debug, Clone)]
pub struct ZigzagParams {
    /// Vertices are drawn from `0..vertices`.
    pub vertices: u32,
    pub max_dim: usize,
    pub steps: usize,
    /// Probability of attempting an insertion at each step.
    pub insert_prob: f64,
    /// Complex size cap; at the cap only deletions happen.
    pub max_size: Option<usize>,
}

impl ZigzagParams {
    pub fn small(steps: usize) -> Self {
        ZigzagParams {
            vertices: 6,
            max_dim: 2,
            steps,
            insert_prob: 0.6,
            max_size: None,
        }
    }
}

fn insertable(state: &ComplexState, s: &Simplex) -> bool {
    state.check_insert(s).is_ok()
}

fn try_random_insert<R: Rng + ?Sized>(rng: &mut R, state: &ComplexState, p: &ZigzagParams) -> Option<Simplex> {
    let top = p.max_dim.min(p.vertices as usize - 1);
    for _ in 0..64 {
        let dim = rng.gen_range(0..=top);
        let verts = sample(rng, p.vertices as usize, dim + 1).into_iter().map(|v| v as Vertex);
        let s = Simplex::from_unsorted(verts).expect("non-empty sample");
        if insertable(state, &s) {
            return Some(s);
        }
    }
    if p.vertices <= 12 {
        let all = all_simplices(p.vertices, top);
        let cands: Vec<&Simplex> = all.iter().filter(|s| insertable(state, s)).collect();
        if !cands.is_empty() {
            return Some(cands[rng.gen_range(0..cands.len())].clone());
        }
    }
    None
}

fn random_delete<R: Rng + ?Sized>(rng: &mut R, state: &ComplexState) -> Option<Simplex> {
    let mut cands: Vec<&Simplex> = state
        .iter()
        .map(|(s, _)| s)
        .filter(|s| !state.has_cofaces(s))
        .collect();
    if cands.is_empty() {
        return None;
    }
    cands.sort_unstable();
    Some(cands[rng.gen_range(0..cands.len())].clone())
}

/// Every simplex on `0..vertices` of dimension at most `max_dim`.
pub fn all_simplices(vertices: u32, max_dim: usize) -> Vec<Simplex> {
    fn rec(start: u32, n: u32, k: usize, cur: &mut Vec<Vertex>, out: &mut Vec<Simplex>) {
        if cur.len() == k {
            out.push(Simplex::new(cur.iter().copied()).expect("increasing"));
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 1..=max_dim + 1 {
        rec(0, vertices, k, &mut Vec::new(), &mut out);
    }
    out
}

/// A random valid zigzag filtration of exactly `params.steps` arrows.
pub fn random_zigzag<R: Rng + ?Sized>(rng: &mut R, params: &ZigzagParams) -> ZigzagFiltration {
    assert!(params.vertices > 0, "need at least one vertex");
    let mut state = ComplexState::new();
    let mut steps = Vec::with_capacity(params.steps);
    while steps.len() < params.steps {
        let arrow = steps.len() as LiveId;
        let at_cap = params.max_size.is_some_and(|cap| state.len() >= cap);
        let want_insert = state.is_empty() || (!at_cap && rng.gen_bool(params.insert_prob));
        let step = if want_insert {
            try_random_insert(rng, &state, params)
                .map(FiltrationStep::insert)
                .or_else(|| random_delete(rng, &state).map(FiltrationStep::delete))
        } else {
            random_delete(rng, &state).map(FiltrationStep::delete)
        };
        let step = step.expect("a non-empty complex always has a removable simplex");
        match step.op {
            crate::filtration::Op::Insert => state.insert(step.simplex.clone(), arrow).expect("insertable"),
            crate::filtration::Op::Delete => {
                state.remove(&step.simplex).expect("removable");
            }
        }
        steps.push(step);
    }
    ZigzagFiltration::new(steps)
}

/// A random filtration of insertions only, stopping early once the full
/// complex on `vertices` up to `max_dim` is reached.
pub fn random_forward<R: Rng + ?Sized>(rng: &mut R, vertices: u32, max_dim: usize, steps: usize) -> ZigzagFiltration {
    let params = ZigzagParams {
        vertices,
        max_dim,
        steps,
        insert_prob: 1.0,
        max_size: None,
    };
    let mut state = ComplexState::new();
    let mut out = Vec::new();
    while out.len() < steps {
        let Some(s) = try_random_insert(rng, &state, &params) else {
            break;
        };
        state.insert(s.clone(), out.len() as LiveId).expect("insertable");
        out.push(FiltrationStep::insert(s));
    }
    ZigzagFiltration::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_filtrations_validate() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let f = random_zigzag(&mut rng, &ZigzagParams::small(80));
            assert_eq!(f.len(), 80);
            f.validate().unwrap();
        }
        let f = random_forward(&mut rng, 5, 3, 1000);
        assert!(f.is_all_forward());
        assert_eq!(f.len(), 30);
        f.validate().unwrap();
    }

    #[test]
    fn size_cap_respected() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let p = ZigzagParams {
            vertices: 30,
            max_dim: 2,
            steps: 2000,
            insert_prob: 0.7,
            max_size: Some(50),
        };
        let f = random_zigzag(&mut rng, &p);
        assert!(f.validate().unwrap().n <= 51);
    }

    #[test]
    fn all_simplices_counts() {
        assert_eq!(all_simplices(4, 3).len(), 15);
        assert_eq!(all_simplices(8, 1).len(), 8 + 28);
    }
}
