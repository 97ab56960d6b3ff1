//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::alloc::{GlobalAlloc, Layout, System};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use zigzag_core::engine::Engine;
use zigzag_core::order::compare;
use zigzag_core::random::{random_forward, random_zigzag, ZigzagParams};
use zigzag_core::rips::{oscillating_rips, PointCloud};
use zigzag_core::validator::{check_order_properties, classical_persistence, Verifier};
use zigzag_core::wires::Bundle;
use zigzag_core::{run, Bar, Chain, Direction, Module, PersistenceResult, Simplex, WireKind, ZigzagFiltration};

struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

const F1: &str = "i 0\ni 1\ni 0 1\nd 0 1\nd 1\n";
const F2: &str = "i 0\ni 1\ni 2\ni 0 1\ni 0 2\ni 1 2\ni 0 1 2\nd 0 1 2\n";

type Outcome = Result<String, String>;

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn bars(rows: &[(Module, usize, usize, usize)]) -> Vec<Bar> {
    let mut v: Vec<Bar> = rows.iter().map(|&(m, p, b, d)| Bar::new(m, p, b, d)).collect();
    v.sort();
    v
}

fn criterion_1() -> Outcome {
    use Module::{B, H};
    let start = Instant::now();
    let f1 = ZigzagFiltration::parse(F1).map_err(|e| e.to_string())?;
    let r1 = run(&f1).map_err(|e| e.to_string())?;
    let want1 = bars(&[(H, 0, 1, 5), (H, 0, 2, 2), (H, 0, 4, 4), (B, 0, 3, 3)]);
    ensure(r1.bars() == want1, || format!("F1 gave {:?}", r1.bars()))?;

    let f2 = ZigzagFiltration::parse(F2).map_err(|e| e.to_string())?;
    let r2 = run(&f2).map_err(|e| e.to_string())?;
    let want2 = bars(&[
        (H, 0, 1, 8),
        (H, 0, 2, 3),
        (H, 0, 3, 4),
        (H, 1, 6, 6),
        (H, 1, 8, 8),
        (B, 0, 4, 8),
        (B, 0, 5, 8),
        (B, 1, 7, 7),
    ]);
    ensure(r2.bars() == want2, || format!("F2 gave {:?}", r2.bars()))?;

    // the loop passes from H at 6 to B at 7 and back to H at 8
    let tri = Chain::from_simplices(
        [[0, 1], [0, 2], [1, 2]]
            .iter()
            .map(|v| Simplex::new(v.iter().copied()).expect("increasing")),
    )
    .map_err(|e| e.to_string())?;
    for (bar, kind) in [
        (Bar::new(H, 1, 6, 6), WireKind::NonBoundary),
        (Bar::new(B, 1, 7, 7), WireKind::Boundary),
        (Bar::new(H, 1, 8, 8), WireKind::NonBoundary),
    ] {
        let iv = r2.intervals.iter().find(|iv| iv.bar == bar).ok_or("missing bar")?;
        let rep = r2.representative(iv).map_err(|e| e.to_string())?;
        ensure(rep.segments.len() == 1 && rep.segments[0].chain == tri, || format!("{bar} is not carried by the loop"))?;
        let w = r2.wires.get(bar.birth).ok_or("missing wire")?;
        ensure(w.kind == kind && w.cycle == tri, || format!("wire {} has the wrong kind or cycle", bar.birth))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("F1 and F2 exact, loop interconnects 6 -> 7 -> 8, {:.3}s", t.as_secs_f64()))
}

struct Trial {
    f: ZigzagFiltration,
    result: PersistenceResult,
}

fn random_trials(count: usize) -> Vec<Trial> {
    let mut rng = StdRng::seed_from_u64(20240601);
    (0..count)
        .map(|k| {
            let params = ZigzagParams {
                vertices: rng.gen_range(3..=8),
                max_dim: 3,
                steps: rng.gen_range(1..=120),
                insert_prob: rng.gen_range(0.5..0.75),
                max_size: if k % 2 == 0 { None } else { Some(rng.gen_range(8..=40)) },
            };
            let f = random_zigzag(&mut rng, &params);
            let result = run(&f).expect("engine run");
            Trial { f, result }
        })
        .collect()
}

fn criterion_2(trials: &[Trial], elapsed_generation: Duration) -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut degrees = [0usize; 4];
    for (k, t) in trials.iter().enumerate() {
        ensure(t.f.len() <= 120, || format!("trial {k} has m = {}", t.f.len()))?;
        let v = Verifier::new(&t.f).map_err(|e| e.to_string())?;
        for j in 0..=t.f.len() {
            let oracle = v.oracle(j);
            for p in 0..=3 {
                let r = oracle.ranks(p);
                let count = |module| {
                    t.result
                        .intervals
                        .iter()
                        .filter(|iv| iv.bar.module == module && iv.bar.degree == p && iv.bar.contains(j))
                        .count()
                };
                let (h, b) = (count(Module::H), count(Module::B));
                ensure(h == r.homology && b == r.boundaries, || {
                    format!("trial {k} index {j} degree {p}: {h} H and {b} B bars, ranks {} and {}", r.homology, r.boundaries)
                })?;
                checked += 1;
            }
        }
        for iv in &t.result.intervals {
            degrees[iv.bar.degree.min(3)] += 1;
        }
    }
    let t = start.elapsed() + elapsed_generation;
    ensure(t < Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!(
        "{} filtrations, {checked} (index, degree) counts match, bars by degree {:?}, {:.1}s",
        trials.len(),
        degrees,
        t.as_secs_f64()
    ))
}

fn criterion_3(trials: &[Trial]) -> Outcome {
    let mut reps_checked = 0;
    for (k, t) in trials.iter().enumerate() {
        let v = Verifier::new(&t.f).map_err(|e| e.to_string())?;
        let reps = t.result.representatives().map_err(|e| format!("trial {k}: {e}"))?;
        for r in &reps {
            let cert = v.check_representative(r);
            ensure(cert.passed(), || format!("trial {k}: {cert}"))?;
            reps_checked += 1;
        }
        let cert = v.check_pairing(&t.result.bars(), &[Module::H, Module::B]);
        ensure(cert.passed(), || format!("trial {k}: {cert}"))?;
        for j in 0..=t.f.len() {
            v.check_pointwise_basis(&reps, j).map_err(|e| format!("trial {k}: {e}"))?;
        }
    }
    Ok(format!("{reps_checked} representatives certified, pairing and pointwise bases hold in all trials"))
}

fn criterion_4(trials: &[Trial]) -> Outcome {
    let (mut wires, mut bundles, mut iterations) = (0, 0, 0);
    for (k, t) in trials.iter().enumerate() {
        let v = Verifier::new(&t.f).map_err(|e| e.to_string())?;
        let store = &t.result.wires;
        for w in store.iter() {
            let cert = v.check_wire(w);
            ensure(cert.passed(), || format!("trial {k}: {cert}"))?;
            wires += 1;
        }
        let starts: Vec<usize> = store.iter().map(|w| w.start).collect();
        ensure(starts.windows(2).all(|p| p[0] < p[1]), || format!("trial {k}: two wires share a start"))?;
        for iv in &t.result.intervals {
            let bundle: &Bundle = &iv.bundle;
            ensure(bundle.indices().all(|s| store.get(s).is_some()), || {
                format!("trial {k}: bundle of {} names a missing wire", iv.bar)
            })?;
            if iv.bar.module == Module::B {
                ensure(bundle.indices().all(|s| store.get(s).map(|w| w.kind) == Some(WireKind::Boundary)), || {
                    format!("trial {k}: boundary bundle of {} has a non-boundary wire", iv.bar)
                })?;
            }
            let backward_birth = iv.bar.module == Module::H && t.f.direction(iv.bar.birth - 1) == Direction::Backward;
            if iv.bar.module == Module::B || backward_birth {
                v.check_boundary_prefix(store, bundle, iv.bar.birth)
                    .map_err(|e| format!("trial {k}: {}: {e}", iv.bar))?;
            }
            bundles += 1;
        }
        let mut e = Engine::new(&t.f).map_err(|e| e.to_string())?;
        e.check_invariants().map_err(|e| format!("trial {k} before arrow 0: {e}"))?;
        while e.step().map_err(|e| e.to_string())?.is_some() {
            e.check_invariants().map_err(|err| format!("trial {k} after arrow {}: {err}", e.index() - 1))?;
            iterations += 1;
        }
    }
    Ok(format!("{wires} wires, {bundles} bundles, invariants held at {iterations} iterations"))
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(77);
    let mut total_bars = 0;
    for k in 0..120 {
        let (vertices, steps) = (rng.gen_range(3..=8), rng.gen_range(1..=150));
        let f = random_forward(&mut rng, vertices, 3, steps);
        let engine = run(&f).map_err(|e| e.to_string())?.bars_of(Module::H);
        let classical = classical_persistence(&f).map_err(|e| e.to_string())?;
        ensure(engine == classical, || format!("filtration {k}: engine {engine:?} classical {classical:?}"))?;
        total_bars += engine.len();
    }
    Ok(format!("120 insert-only filtrations, {total_bars} bars identical"))
}

fn criterion_6(trials: &[Trial]) -> Outcome {
    let mut rng = StdRng::seed_from_u64(606);
    let mut pairs = 0;
    let mut kinds = std::collections::BTreeMap::new();
    for (k, t) in trials.iter().enumerate().cycle().take(4 * trials.len()) {
        if t.f.is_empty() || pairs >= 400 {
            if pairs >= 400 {
                break;
            }
            continue;
        }
        let i = rng.gen_range(1..=t.f.len());
        let prefix = t.f.prefix(i);
        let result = run(&prefix).map_err(|e| e.to_string())?;
        let v = Verifier::new(&prefix).map_err(|e| e.to_string())?;
        let mut alive: Vec<_> = result.intervals.iter().filter(|iv| iv.bar.death == i).collect();
        alive.sort_by(|a, b| compare(&a.birth_key, &b.birth_key));
        for (x, early) in alive.iter().enumerate() {
            for late in &alive[x + 1..] {
                if early.bar.degree != late.bar.degree || rng.gen_bool(0.5) {
                    continue;
                }
                let rep = result.representative(early).map_err(|e| e.to_string())?;
                let rep_late = result.representative(late).map_err(|e| e.to_string())?;
                ensure(v.check_representative(&rep).passed() && v.check_representative(&rep_late).passed(), || {
                    format!("trial {k} prefix {i}: summands not certified")
                })?;
                let sum = rep.summed_into(&rep_late).map_err(|e| e.to_string())?;
                let cert = v.check_representative(&sum);
                ensure(cert.passed(), || format!("trial {k} prefix {i}: {} into {}: {cert}", early.bar, late.bar))?;

                let bundle = early.bundle.sum(&late.bundle);
                let from_bundle = result.wires.extract_representative(&bundle, late.bar).map_err(|e| e.to_string())?;
                let cert = v.check_representative(&from_bundle);
                ensure(cert.passed(), || format!("trial {k} prefix {i}: bundle sum: {cert}"))?;
                for (alpha, z) in sum.cycles() {
                    let diff = z.add(from_bundle.cycle_at(alpha).expect("same bar")).map_err(|e| e.to_string())?;
                    ensure(v.oracle(alpha).bounds(&diff), || {
                        format!("trial {k} prefix {i}: sums of {} and {} differ at {alpha} by a non-boundary", early.bar, late.bar)
                    })?;
                }
                *kinds.entry((early.bar.module, late.bar.module)).or_insert(0) += 1;
                pairs += 1;
            }
        }
    }
    ensure(pairs >= 200, || format!("only {pairs} pairs found"))?;
    let kinds: Vec<String> = kinds.iter().map(|((a, b), n)| format!("{a}->{b}: {n}")).collect();
    Ok(format!("{pairs} pairs ({}) sum to certified representatives", kinds.join(", ")))
}

fn criterion_7(trials: &[Trial]) -> Outcome {
    let mut keys_total = 0;
    for (k, t) in trials.iter().enumerate() {
        let keys: Vec<_> = t.result.intervals.iter().map(|iv| iv.birth_key).collect();
        let cert = check_order_properties(&keys);
        ensure(cert.passed(), || format!("trial {k}: {cert}"))?;
        keys_total += keys.len();
    }
    Ok(format!("{} key sets, {keys_total} keys, all triples consistent", trials.len()))
}

fn timed_peak(f: &ZigzagFiltration) -> (f64, usize, usize) {
    let base = CURRENT.load(Ordering::Relaxed);
    PEAK.store(base, Ordering::Relaxed);
    let start = Instant::now();
    let result = run(f).expect("engine run");
    let t = start.elapsed().as_secs_f64();
    let peak = PEAK.load(Ordering::Relaxed) - base;
    (t, peak, result.stats.n)
}

fn criterion_8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(300);
    let cloud = PointCloud::random(&mut rng, 300, 2);
    let start = Instant::now();
    let f = oscillating_rips(&cloud, 2.0, 2.2, 2).map_err(|e| e.to_string())?;
    let generated = start.elapsed();
    let (t, _, n) = timed_peak(&f);
    let m = f.len();
    ensure((10_000..=100_000).contains(&m), || format!("Rips length {m} outside [1e4, 1e5]"))?;
    ensure(generated.as_secs_f64() + t < 600.0, || format!("Rips run took {t:.1}s"))?;

    let params = ZigzagParams {
        vertices: 12,
        max_dim: 3,
        steps: 80_000,
        insert_prob: 0.55,
        max_size: Some(60),
    };
    let long = random_zigzag(&mut StdRng::seed_from_u64(8), &params);
    let mut rungs = Vec::new();
    for m_k in [20_000, 40_000, 80_000] {
        let prefix = long.prefix(m_k);
        let mut best = (f64::INFINITY, 0, 0);
        for _ in 0..3 {
            let r = timed_peak(&prefix);
            best = (best.0.min(r.0), best.1.max(r.1), r.2);
        }
        rungs.push((m_k, best));
    }
    let mut notes = Vec::new();
    for w in rungs.windows(2) {
        let (m0, (t0, p0, _)) = w[0];
        let (m1, (t1, p1, _)) = w[1];
        let time_ratio = t1 / t0;
        let mem_ratio = p1 as f64 / p0 as f64;
        let linear = m1 as f64 / m0 as f64;
        notes.push(format!("{m0}->{m1}: time x{time_ratio:.2}, memory x{mem_ratio:.2}"));
        ensure(time_ratio <= 5.0, || format!("doubling {m0}->{m1} multiplied time by {time_ratio:.2}"))?;
        ensure(mem_ratio <= 1.3 * linear, || format!("doubling {m0}->{m1} multiplied peak memory by {mem_ratio:.2}"))?;
    }
    let cap = rungs.iter().map(|r| r.1 .2).max().unwrap_or(0);
    Ok(format!(
        "Rips m = {m}, n = {n}, {:.2}s; ladder at n <= {cap}: {}",
        generated.as_secs_f64() + t,
        notes.join("; ")
    ))
}

fn report(id: usize, name: &str, outcome: std::thread::Result<Outcome>) -> bool {
    let outcome = outcome.unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {id} ({name}): {detail}");
            true
        }
        Err(why) => {
            println!("FAIL criterion {id} ({name}): {why}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= report(1, "hand-derived barcodes", catch_unwind(criterion_1));

    let start = Instant::now();
    let trials = catch_unwind(|| random_trials(500));
    let generation = start.elapsed();
    match trials {
        Ok(trials) => {
            let trials = AssertUnwindSafe(&trials);
            ok &= report(2, "randomized oracle counts", catch_unwind(|| criterion_2(&trials, generation)));
            ok &= report(3, "representative certification", catch_unwind(|| criterion_3(&trials)));
            ok &= report(4, "wire and bundle structure", catch_unwind(|| criterion_4(&trials)));
            ok &= report(5, "classical cross-check", catch_unwind(criterion_5));
            ok &= report(6, "summation soundness", catch_unwind(|| criterion_6(&trials)));
            ok &= report(7, "order properties", catch_unwind(|| criterion_7(&trials)));
        }
        Err(_) => {
            for (id, name) in [(2, "randomized oracle counts"), (3, "representative certification"), (4, "wire and bundle structure"), (6, "summation soundness"), (7, "order properties")] {
                println!("FAIL criterion {id} ({name}): engine panicked on a random filtration");
            }
            ok = false;
            ok &= report(5, "classical cross-check", catch_unwind(criterion_5));
        }
    }
    ok &= report(8, "scaled performance", catch_unwind(criterion_8));
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
