//! One pass/fail line per acceptance criterion. Every tolerance is a named
//! constant below; the test fails if any criterion fails.

use dynsld::oracle::{
    cartesian_recursive, gen_random_forest, gen_theorem_instance, gen_update_stream, kruskal_sld, uf_threshold, Order,
    Profile, Update,
};
use dynsld::types::serialize_canonical;
use dynsld::{CartesianState, DendrogramState, Edge, EdgeKey, End, ParentMap, ThresholdParam, UpdateMode, Weight};
use dynsld_cli::bench::{run_bench, scaling_ratio};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::{ThreadPool, ThreadPoolBuilder};
use std::time::Instant;

const SOAK_SEEDS: std::ops::RangeInclusive<u64> = 1..=10;
const SOAK_N: usize = 256;
const SOAK_M: usize = 160;
const SOAK_OPS: usize = 1000;
const THEOREM_HEIGHTS: [usize; 3] = [2, 8, 64];
const MAX_NODE_VISITS: u64 = 2;
const SCALING_SPEC: &str = "random n=4096 m=2048 ops=30000 seed=7 profile=mixed inserts=10000";
const SCALING_C_MAX: f64 = 64.0;
const BATCH_SIZES: [usize; 3] = [2, 8, 32];
const BATCH_N: usize = 256;
const BATCH_PERMUTATIONS: usize = 3;
const QUERY_N: usize = 128;
const CARTESIAN_OPS: usize = 500;
const CARTESIAN_MAX_LEN: usize = 256;
const LEAF_OP_MAX_CHANGES: u64 = 2;
const INVERSE_PAIRS: usize = 1000;
const THREAD_HINTS: [usize; 3] = [1, 4, 8];

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn lib<T>(r: dynsld::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn pools() -> Vec<ThreadPool> {
    THREAD_HINTS.iter().map(|&k| ThreadPoolBuilder::new().num_threads(k).build().unwrap()).collect()
}

fn reference(d: &DendrogramState) -> Result<String, String> {
    Ok(serialize_canonical(&lib(kruskal_sld(d.num_vertices(), &d.edges()))?))
}

/// Longest root-directed chain over every component.
fn height(map: &ParentMap) -> u64 {
    let mut depth = std::collections::HashMap::new();
    let mut best = 0;
    for (e, p) in map.iter().rev() {
        let d = p.map_or(1, |p| depth[&p] + 1);
        depth.insert(*e, d);
        best = best.max(d);
    }
    best
}

fn depth_bound(h: u64) -> u64 {
    2 * ((h + 2) as f64).log2().ceil() as u64 + 2
}

struct SoakFindings {
    oracle: Result<(), String>,
    os_identity: Result<u64, String>,
    visits: Result<u64, String>,
    dc: Result<u64, String>,
    threads: Result<u64, String>,
    secs: [f64; 4],
}

/// Runs every soak stream once per mode and thread hint in lockstep and
/// records the findings for criteria 1, 3, 4, 6 and 11.
fn soak(pools: &[ThreadPool]) -> SoakFindings {
    let mut f =
        SoakFindings { oracle: Ok(()), os_identity: Ok(0), visits: Ok(0), dc: Ok(0), threads: Ok(0), secs: [0.0; 4] };
    let seq_h = UpdateMode::ALL.iter().position(|m| *m == UpdateMode::SeqH).unwrap();
    for seed in SOAK_SEEDS {
        let init = gen_random_forest(SOAK_N, SOAK_M, seed).unwrap();
        let stream = gen_update_stream(SOAK_N, &init, SOAK_OPS, seed + 1000, Profile::Mixed).unwrap();
        // states[mode][hint]
        let mut states: Vec<Vec<DendrogramState>> = UpdateMode::ALL
            .iter()
            .map(|_| pools.iter().map(|_| DendrogramState::build(SOAK_N, &init).unwrap()).collect())
            .collect();
        for (i, u) in stream.iter().enumerate() {
            let ctx = format!("seed {seed} op {i}");
            let mut per_mode = Vec::new();
            for (mi, mode) in UpdateMode::ALL.iter().enumerate() {
                let start = Instant::now();
                let mut outs = Vec::new();
                for (pi, pool) in pools.iter().enumerate() {
                    let d = &mut states[mi][pi];
                    let r = pool.install(|| d.apply_update(u, *mode));
                    outs.push((r, d.serialize()));
                }
                f.secs[mi] += start.elapsed().as_secs_f64();
                let (r0, s0) = match &outs[0] {
                    (Ok(r), s) => (r.clone(), s.clone()),
                    (Err(e), _) => {
                        f.oracle = Err(format!("{mode} {ctx}: {e}"));
                        return f;
                    }
                };
                if f.oracle.is_ok() {
                    match reference(&states[mi][0]) {
                        Ok(want) if want == s0 => {}
                        Ok(_) => f.oracle = Err(format!("{mode} {ctx}: serialization differs from reference")),
                        Err(e) => f.oracle = Err(e),
                    }
                }
                if let Ok(n) = &mut f.threads {
                    let same = outs
                        .iter()
                        .all(|(r, s)| r.as_ref().is_ok_and(|r| r.pointer_changes == r0.pointer_changes) && *s == s0);
                    if same {
                        *n += 1;
                    } else {
                        f.threads = Err(format!("{mode} {ctx}: thread hints disagree"));
                    }
                }
                if *mode == UpdateMode::SeqOs {
                    if let (Ok(n), Update::Insert(_)) = (&mut f.os_identity, u) {
                        *n += 1;
                        if let Some(m) = r0.merges.iter().find(|m| m.pws_queries != m.pointer_changes) {
                            f.os_identity =
                                Err(format!("{ctx}: {} searches for {} changes", m.pws_queries, m.pointer_changes));
                        }
                    }
                    if let Ok(v) = &mut f.visits {
                        *v = (*v).max(r0.max_node_visits);
                        if r0.max_node_visits > MAX_NODE_VISITS {
                            f.visits = Err(format!("{ctx}: a node was visited {} times", r0.max_node_visits));
                        }
                    }
                }
                if *mode == UpdateMode::ParOs {
                    if let Ok(n) = &mut f.dc {
                        let h = height(states[mi][0].parent_map());
                        if r0.max_depth > depth_bound(h) {
                            f.dc = Err(format!("{ctx}: depth {} > {} at height {h}", r0.max_depth, depth_bound(h)));
                        } else {
                            *n += r0.merges.len() as u64;
                        }
                    }
                }
                per_mode.push(s0);
            }
            let par_os = UpdateMode::ALL.iter().position(|m| *m == UpdateMode::ParOs).unwrap();
            if f.dc.is_ok() && per_mode[par_os] != per_mode[seq_h] {
                f.dc = Err(format!("{ctx}: par-os differs from seq-h"));
            }
        }
    }
    f
}

fn c1(f: &SoakFindings) -> Verdict {
    f.oracle.clone()?;
    let secs: Vec<String> = UpdateMode::ALL.iter().zip(f.secs).map(|(m, s)| format!("{m} {s:.1}s")).collect();
    Ok(format!("{} seeds x {SOAK_OPS} updates exact; {}", SOAK_SEEDS.count(), secs.join(", ")))
}

fn c2() -> Verdict {
    let mut seen = Vec::new();
    let mut ok = true;
    for h in THEOREM_HEIGHTS {
        let (n, edges, centers) = lib(gen_theorem_instance(h, 2))?;
        let want = 2 * h as u64 + 1;
        let mut counts = Vec::new();
        for mode in UpdateMode::ALL {
            let mut d = lib(DendrogramState::build(n, &edges))?;
            let before = d.serialize();
            let ins = lib(d.insert(centers[0], centers[1], Weight::of(0.0), mode))?;
            let del = lib(d.delete(centers[0], centers[1], mode))?;
            ensure!(d.serialize() == before, "h={h} {mode}: delete did not restore the serialization");
            counts.push((ins.pointer_changes, del.pointer_changes));
        }
        ensure!(counts.windows(2).all(|w| w[0] == w[1]), "h={h}: counts differ across modes {counts:?}");
        let (ins, del) = counts[0];
        ok &= ins == want && del == want;
        seen.push(format!("h={h}: insert {ins} delete {del} (want {want})"));
    }
    let detail = format!("{}; restores byte-for-byte in every mode", seen.join("; "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c3(f: &SoakFindings) -> Verdict {
    let n = f.os_identity.clone()?;
    Ok(format!("{n} seq-os insertions, searches equal changes in every merge"))
}

fn c4(f: &SoakFindings) -> Verdict {
    let v = f.visits.clone()?;
    Ok(format!("largest per-node visit count {v} (limit {MAX_NODE_VISITS})"))
}

fn c5() -> Verdict {
    let run = lib_cli(run_bench(SCALING_SPEC, UpdateMode::SeqOs, 1, false))?;
    let n = run.aggregate.num_vertices;
    let inserts: Vec<_> = run.reports.iter().filter(|(u, _)| matches!(u, Update::Insert(_))).collect();
    ensure!(inserts.len() == 10000, "{} inserts, want 10000", inserts.len());
    let c = inserts.iter().map(|(_, r)| scaling_ratio(n, r)).fold(0.0, f64::max);
    ensure!(
        (c - run.aggregate.fitted_c).abs() < 1e-12,
        "bench reports C={} but inserts give {c}",
        run.aggregate.fitted_c
    );
    ensure!(c <= SCALING_C_MAX, "C = {c:.3} > {SCALING_C_MAX}");
    Ok(format!("C = {c:.3} over {} inserts (limit {SCALING_C_MAX})", inserts.len()))
}

fn lib_cli<T>(r: dynsld_cli::CliResult<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn c6(f: &SoakFindings) -> Verdict {
    let n = f.dc.clone()?;
    Ok(format!("par-os equals seq-h on every update; {n} merges within 2*ceil(log2(h+2))+2"))
}

fn c7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_rounds = String::new();
    for k in BATCH_SIZES {
        let init = lib(gen_random_forest(BATCH_N, BATCH_N / 2, k as u64))?;
        let stream = lib(gen_update_stream(BATCH_N, &init, 1, 70 + k as u64, Profile::Batch(k)))?;
        let Update::BatchInsert(batch) = &stream[0] else { return Err("expected an insert batch".into()) };
        ensure!(batch.len() == k, "generated batch of {} for k={k}", batch.len());
        let bound = (4.0 * ((k + 2) as f64).log2()).ceil() as u64;
        let mut max_rounds = 0;
        for p in 0..BATCH_PERMUTATIONS {
            let mut perm = batch.clone();
            perm.shuffle(&mut rng);
            let mut fold = lib(DendrogramState::build(BATCH_N, &init))?;
            for e in &perm {
                lib(fold.insert(e.key.lo, e.key.hi, e.weight, UpdateMode::SeqH))?;
            }
            let mut keys: Vec<EdgeKey> = fold.edges().iter().map(|e| e.key).collect();
            keys.shuffle(&mut rng);
            keys.truncate(k);
            let mut fold_del = fold.clone();
            for key in &keys {
                lib(fold_del.delete(key.lo, key.hi, UpdateMode::SeqH))?;
            }
            for mode in UpdateMode::ALL {
                let mut d = lib(DendrogramState::build(BATCH_N, &init))?;
                let r = lib(d.batch_insert(&perm, mode))?;
                ensure!(d.serialize() == fold.serialize(), "k={k} perm {p} {mode}: batch insert differs from fold");
                ensure!(r.rounds <= bound, "k={k} {mode}: {} rounds > {bound}", r.rounds);
                max_rounds = max_rounds.max(r.rounds);
                lib(d.batch_delete(&keys, mode))?;
                ensure!(d.serialize() == fold_del.serialize(), "k={k} perm {p} {mode}: batch delete differs from fold");
            }
        }
        worst_rounds.push_str(&format!(" k={k}:{max_rounds}/{bound}"));
    }
    Ok(format!("folds equal; rounds used/bound{worst_rounds}"))
}

fn grid(d: &DendrogramState) -> Vec<f64> {
    let mut ws: Vec<f64> = d.edges().iter().map(|e| e.weight.value()).collect();
    ws.sort_by(f64::total_cmp);
    ws.dedup();
    ws.iter().flat_map(|w| [w.next_down(), *w, w.next_up()]).collect()
}

/// Every answer at every grid threshold, as text.
fn query_transcript(d: &DendrogramState, strict: bool) -> Result<String, String> {
    let n = d.num_vertices();
    let edges = d.edges();
    let mut out = String::new();
    for tau in grid(d) {
        let w = Weight::of(tau);
        let th = ThresholdParam { tau: w, strict };
        let parts = uf_threshold(n, &edges, w, strict);
        let flat = lib(d.flat_clustering(th))?;
        ensure!(flat == parts, "flat clustering differs at tau {tau}");
        let mut of = vec![0; n];
        for (i, p) in parts.iter().enumerate() {
            for &v in p {
                of[v as usize] = i;
            }
        }
        out.push_str(&format!("{flat:?}\n"));
        for u in 0..n as u32 {
            let rep = lib(d.cluster_report(u, th))?;
            ensure!(rep == parts[of[u as usize]], "report of {u} differs at tau {tau}");
            let size = lib(d.cluster_size(u, th))?;
            ensure!(size == rep.len(), "size of {u} differs at tau {tau}");
            let mut row = String::with_capacity(n);
            for t in 0..n as u32 {
                let q = lib(d.threshold_query(u, t, th))?;
                ensure!(q == (of[u as usize] == of[t as usize]), "threshold({u}, {t}) differs at tau {tau}");
                row.push(if q { '1' } else { '0' });
            }
            out.push_str(&format!("{size} {row}\n"));
        }
    }
    Ok(out)
}

fn query_forests() -> Vec<DendrogramState> {
    [(96, 1u64), (127, 2)]
        .iter()
        .map(|&(m, seed)| DendrogramState::build(QUERY_N, &gen_random_forest(QUERY_N, m, seed).unwrap()).unwrap())
        .collect()
}

fn c8() -> Verdict {
    let mut taus = 0;
    for d in query_forests() {
        for strict in [false, true] {
            query_transcript(&d, strict)?;
        }
        taus += grid(&d).len();
    }
    Ok(format!("2 forests, {taus} thresholds, inclusive and strict, all pairs exact"))
}

fn cartesian_stream(seed: u64, order: Order, distinct: bool) -> Result<u64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let value = |rng: &mut ChaCha8Rng| {
        let base = if distinct { rng.gen_range(0..1_000_000) } else { rng.gen_range(0..8) };
        Weight::of(base as f64)
    };
    let mut seq: Vec<Weight> = (0..rng.gen_range(0..64)).map(|_| value(&mut rng)).collect();
    let mut c = lib(CartesianState::build_array(&seq, order))?;
    let mut max_leaf = 0;
    for i in 0..CARTESIAN_OPS {
        match rng.gen_range(0..5) {
            0 if seq.len() < CARTESIAN_MAX_LEN => {
                let v = value(&mut rng);
                let end = if rng.gen_bool(0.5) { End::Front } else { End::Back };
                max_leaf = max_leaf.max(lib(c.leaf_insert(end, v))?.pointer_changes);
                match end {
                    End::Front => seq.insert(0, v),
                    End::Back => seq.push(v),
                }
            }
            1 if !seq.is_empty() => {
                let pos = if rng.gen_bool(0.5) { 0 } else { seq.len() - 1 };
                max_leaf = max_leaf.max(lib(c.leaf_delete(pos))?.pointer_changes);
                seq.remove(pos);
            }
            2 if seq.len() < CARTESIAN_MAX_LEN => {
                let pos = rng.gen_range(0..=seq.len());
                let v = value(&mut rng);
                lib(c.insert_at(pos, v))?;
                seq.insert(pos, v);
            }
            3 if !seq.is_empty() => {
                let pos = rng.gen_range(0..seq.len());
                lib(c.delete_at(pos))?;
                seq.remove(pos);
            }
            4 => {
                seq = (0..rng.gen_range(0..CARTESIAN_MAX_LEN)).map(|_| value(&mut rng)).collect();
                c = lib(CartesianState::build_array(&seq, order))?;
            }
            _ => continue,
        }
        ensure!(c.in_order() == seq, "seed {seed} op {i}: in-order sequence differs");
        ensure!(c.to_tree() == cartesian_recursive(&c.elements(), order), "seed {seed} op {i}: tree differs");
        ensure!(max_leaf <= LEAF_OP_MAX_CHANGES, "seed {seed} op {i}: end operation changed {max_leaf} pointers");
    }
    Ok(max_leaf)
}

fn c9() -> Verdict {
    let mut worst = 0;
    let mut streams = 0;
    for seed in 0..8 {
        for order in [Order::MinRoot, Order::MaxRoot] {
            worst = worst.max(cartesian_stream(seed, order, seed % 2 == 0)?);
            streams += 1;
        }
    }
    Ok(format!("{streams} streams of {CARTESIAN_OPS} ops exact; end ops changed at most {worst} pointers"))
}

fn c10() -> Verdict {
    let n = 256;
    let init = lib(gen_random_forest(n, 160, 10))?;
    let stream = lib(gen_update_stream(n, &init, INVERSE_PAIRS, 11, Profile::Mixed))?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut d = lib(DendrogramState::build(n, &init))?;
    let (mut ins_del, mut del_ins) = (0, 0);
    for (i, step) in stream.iter().enumerate() {
        let mode = UpdateMode::ALL[i % 4];
        let before = d.serialize();
        if i % 2 == 0 {
            // A fresh edge between two components.
            let (u, v) = loop {
                let (u, v) = (rng.gen_range(0..n as u32), rng.gen_range(0..n as u32));
                if u != v && !lib(d.forest_rc().connected(u, v))? {
                    break (u, v);
                }
            };
            let w = Weight::of(rng.gen_range(0..512) as f64);
            lib(d.insert(u, v, w, mode))?;
            lib(d.delete(u, v, mode))?;
            ins_del += 1;
        } else if let Some(e) = d.edges().choose(&mut rng).copied() {
            lib(d.delete(e.key.lo, e.key.hi, mode))?;
            lib(d.insert(e.key.lo, e.key.hi, e.weight, mode))?;
            del_ins += 1;
        }
        ensure!(d.serialize() == before, "pair {i} ({mode}) did not restore the serialization");
        lib(d.apply_update(step, mode))?;
    }
    Ok(format!("{ins_del} insert;delete and {del_ins} delete;insert pairs restored"))
}

fn c11(f: &SoakFindings, pools: &[ThreadPool]) -> Verdict {
    let steps = f.threads.clone()?;
    let specs = [
        "theorem h=64 stars=4",
        "random n=512 m=400 ops=2000 seed=7",
        "random n=256 m=128 ops=100 seed=3 profile=batch(8)",
    ];
    let mut benches = 0;
    for spec in specs {
        for mode in UpdateMode::ALL {
            let runs: Vec<(String, Vec<u64>)> = pools
                .iter()
                .map(|p| {
                    let run = p.install(|| run_bench(spec, mode, 2, false)).map_err(|e| e.to_string())?;
                    let json = serde_json::to_string(&run.aggregate).map_err(|e| e.to_string())?;
                    Ok((json, run.reports.iter().map(|(_, r)| r.pointer_changes).collect()))
                })
                .collect::<Result<_, String>>()?;
            ensure!(runs.windows(2).all(|w| w[0] == w[1]), "bench `{spec}` {mode} differs across thread hints");
            benches += 1;
        }
    }
    let d = &query_forests()[0];
    let answers: Vec<String> =
        pools.iter().map(|p| p.install(|| query_transcript(d, false))).collect::<Result<_, _>>()?;
    ensure!(answers.windows(2).all(|w| w[0] == w[1]), "query answers differ across thread hints");
    Ok(format!("hints {THREAD_HINTS:?}: {steps} soak steps, {benches} bench runs and query answers identical"))
}

#[test]
fn acceptance() {
    let pools = pools();
    let findings = soak(&pools);
    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "oracle soak", c1(&findings)),
        (2, "lower-bound instance counts", c2()),
        (3, "searches equal pointer changes", c3(&findings)),
        (4, "per-node visit bound", c4(&findings)),
        (5, "work scaling", c5()),
        (6, "divide-and-conquer merge", c6(&findings)),
        (7, "batch equivalence", c7()),
        (8, "query equivalence", c8()),
        (9, "cartesian trees", c9()),
        (10, "inverse pairs", c10()),
        (11, "determinism across thread hints", c11(&findings, &pools)),
    ];
    let mut failed = Vec::new();
    for (id, name, v) in &results {
        match v {
            Ok(detail) => println!("criterion {id:>2} PASS {name}: {detail}"),
            Err(why) => {
                println!("criterion {id:>2} FAIL {name}: {why}");
                failed.push(*id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn height_helper() {
    let map: ParentMap =
        [(Edge::of(0, 1, 1.0), Some(Edge::of(1, 2, 2.0))), (Edge::of(1, 2, 2.0), None), (Edge::of(3, 4, 1.0), None)]
            .into_iter()
            .collect();
    assert_eq!(height(&map), 2);
    assert_eq!(depth_bound(0), 4);
}
