//! Generated workloads with aggregate counters.

use crate::{op_name, CliError, CliResult};
use dynsld::oracle::{self, Profile, Update};
use dynsld::{DendrogramState, Edge, UpdateMode, UpdateReport};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

#[derive(Clone, Debug, PartialEq)]
pub enum BenchSpec {
    Theorem { h: usize, stars: usize },
    Random { n: usize, m: usize, ops: usize, seed: u64, profile: Profile, inserts: Option<usize> },
}

impl std::str::FromStr for BenchSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let bad = |m: String| CliError::Input(format!("bench spec `{s}`: {m}"));
        let mut words = s.split_whitespace();
        let kind = words.next().ok_or_else(|| bad("empty".into()))?;
        let mut kv = HashMap::new();
        for w in words {
            let (k, v) = w.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{w}`")))?;
            if kv.insert(k, v).is_some() {
                return Err(bad(format!("repeated key `{k}`")));
            }
        }
        let mut take = |k: &str| kv.remove(k);
        fn num<T: std::str::FromStr>(k: &str, v: Option<&str>) -> Result<T, String> {
            let v = v.ok_or_else(|| format!("missing `{k}`"))?;
            v.parse().map_err(|_| format!("invalid `{k}={v}`"))
        }
        let spec = match kind {
            "theorem" => BenchSpec::Theorem {
                h: num("h", take("h")).map_err(bad)?,
                stars: num("stars", take("stars")).map_err(bad)?,
            },
            "random" => BenchSpec::Random {
                n: num("n", take("n")).map_err(bad)?,
                m: num("m", take("m")).map_err(bad)?,
                ops: num("ops", take("ops")).map_err(bad)?,
                seed: num("seed", take("seed")).map_err(bad)?,
                profile: take("profile").unwrap_or("mixed").parse().map_err(|e: dynsld::Error| bad(e.to_string()))?,
                inserts: take("inserts").map(|v| num("inserts", Some(v))).transpose().map_err(bad)?,
            },
            other => return Err(bad(format!("unknown generator `{other}`"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(bad(format!("unknown key `{k}`")));
        }
        Ok(spec)
    }
}

/// The starting forest and update stream of one repetition.
pub fn workload(spec: &BenchSpec) -> CliResult<(usize, Vec<Edge>, Vec<Update>)> {
    let err = |e: dynsld::Error| CliError::Input(e.to_string());
    match *spec {
        BenchSpec::Theorem { h, stars } => {
            let (n, edges, centers) = oracle::gen_theorem_instance(h, stars).map_err(err)?;
            let e = Edge::of(centers[0], centers[1], 0.0);
            Ok((n, edges, vec![Update::Insert(e), Update::Delete(e.key)]))
        }
        BenchSpec::Random { n, m, ops, seed, profile, inserts } => {
            let edges = oracle::gen_random_forest(n, m, seed).map_err(err)?;
            let mut us = oracle::gen_update_stream(n, &edges, ops, seed.wrapping_add(1), profile).map_err(err)?;
            if let Some(k) = inserts {
                let cut =
                    us.iter().enumerate().filter(|(_, u)| matches!(u, Update::Insert(_))).nth(k.saturating_sub(1));
                match cut {
                    Some((i, _)) if k > 0 => us.truncate(i + 1),
                    _ if k == 0 => us.clear(),
                    _ => return Err(CliError::Input(format!("stream of {ops} ops has fewer than {k} inserts"))),
                }
            }
            Ok((n, edges, us))
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timing {
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OpAggregate {
    pub count: u64,
    pub mean_pointer_changes: f64,
    pub max_pointer_changes: u64,
    pub mean_pws_queries: f64,
    pub mean_rc_nodes_visited: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_secs: Option<Timing>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchAggregate {
    pub spec: String,
    pub mode: String,
    pub repetitions: usize,
    pub num_vertices: usize,
    pub ops: BTreeMap<&'static str, OpAggregate>,
    /// Largest `rc_nodes_visited / (c * log2(2 + n / c))` over inserts.
    pub fitted_c: f64,
    pub pointer_changes_total: u64,
    /// Hash of the final canonical serialization of the last repetition.
    pub final_digest: Option<String>,
}

pub struct BenchRun {
    pub aggregate: BenchAggregate,
    /// Every update with its report, over all repetitions.
    pub reports: Vec<(Update, UpdateReport)>,
}

/// Output-sensitivity constant of one update.
pub fn scaling_ratio(n: usize, r: &UpdateReport) -> f64 {
    let c = r.pointer_changes.max(1) as f64;
    r.rc_nodes_visited as f64 / (c * (2.0 + n as f64 / c).log2())
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let i = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[i - 1]
}

pub fn run_bench(spec_text: &str, mode: UpdateMode, repetitions: usize, timing: bool) -> CliResult<BenchRun> {
    let spec: BenchSpec = spec_text.parse()?;
    let (n, edges, updates) = workload(&spec)?;
    let mut reports = Vec::new();
    let mut digest = None;
    for _ in 0..repetitions {
        let mut d = DendrogramState::build(n, &edges).map_err(|e| CliError::Input(e.to_string()))?;
        for (i, u) in updates.iter().enumerate() {
            let r = d.apply_update(u, mode).map_err(|e| CliError::Input(format!("update {}: {e}", i + 1)))?;
            reports.push((u.clone(), r));
        }
        let mut h = std::collections::hash_map::DefaultHasher::new();
        d.serialize().hash(&mut h);
        digest = Some(format!("{:016x}", h.finish()));
    }
    let mut ops: BTreeMap<&'static str, OpAggregate> = BTreeMap::new();
    let mut times: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    let mut fitted_c: f64 = 0.0;
    let mut total = 0;
    for (u, r) in &reports {
        let a = ops.entry(op_name(u)).or_default();
        a.count += 1;
        a.mean_pointer_changes += r.pointer_changes as f64;
        a.max_pointer_changes = a.max_pointer_changes.max(r.pointer_changes);
        a.mean_pws_queries += r.pws_queries as f64;
        a.mean_rc_nodes_visited += r.rc_nodes_visited as f64;
        times.entry(op_name(u)).or_default().push(r.elapsed.as_secs_f64());
        total += r.pointer_changes;
        if matches!(u, Update::Insert(_)) {
            fitted_c = fitted_c.max(scaling_ratio(n, r));
        }
    }
    for (k, a) in ops.iter_mut() {
        let c = a.count as f64;
        a.mean_pointer_changes /= c;
        a.mean_pws_queries /= c;
        a.mean_rc_nodes_visited /= c;
        if timing {
            let t = times.get_mut(k).expect("timed op");
            t.sort_by(f64::total_cmp);
            a.elapsed_secs = Some(Timing {
                mean: t.iter().sum::<f64>() / c,
                p50: percentile(t, 0.5),
                p90: percentile(t, 0.9),
                p99: percentile(t, 0.99),
            });
        }
    }
    let aggregate = BenchAggregate {
        spec: spec_text.to_string(),
        mode: mode.to_string(),
        repetitions,
        num_vertices: n,
        ops,
        fitted_c,
        pointer_changes_total: total,
        final_digest: digest,
    };
    Ok(BenchRun { aggregate, reports })
}
