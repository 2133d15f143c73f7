//! File-driven front end over the dynamic dendrogram library.

pub mod bench;
pub mod format;

use dynsld::oracle::{self, kruskal_sld, Update};
use dynsld::types::serialize_canonical;
use dynsld::{CartesianState, DendrogramState, End, UpdateMode, UpdateReport};
use format::{CartesianOp, Query};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn lib_err(line: usize, e: dynsld::Error) -> CliError {
    CliError::Input(format!("line {line}: {e}"))
}

/// Runs `f` on a dedicated pool when a thread count is given.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub forest: PathBuf,
    pub updates: PathBuf,
    pub mode: UpdateMode,
    pub verify: bool,
    pub stats: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Print the final canonical serialization.
    pub dump: bool,
    /// Leave `elapsed` out of stats records.
    pub no_timing: bool,
    /// Corrupt the dendrogram after the update on this line.
    pub inject_fault: Option<usize>,
}

/// One stats line: the update's input line, its kind and its report.
#[derive(Serialize)]
struct StatsRecord<'a> {
    line: usize,
    op: &'static str,
    #[serde(flatten)]
    report: &'a UpdateReport,
}

pub fn op_name(u: &Update) -> &'static str {
    match u {
        Update::Insert(_) => "insert",
        Update::Delete(_) => "delete",
        Update::BatchInsert(_) => "batch_insert",
        Update::BatchDelete(_) => "batch_delete",
    }
}

pub fn stats_line(line: usize, u: &Update, r: &UpdateReport, no_timing: bool) -> String {
    let mut v = serde_json::to_value(StatsRecord { line, op: op_name(u), report: r }).expect("report serializes");
    if no_timing {
        v.as_object_mut().expect("record is an object").remove("elapsed");
    }
    v.to_string()
}

/// First differing line of two canonical serializations.
fn diff_report(got: &str, want: &str) -> String {
    let (g, w): (Vec<&str>, Vec<&str>) = (got.lines().collect(), want.lines().collect());
    let i = g.iter().zip(&w).position(|(a, b)| a != b).unwrap_or(g.len().min(w.len()));
    format!(
        "first difference at entry {}: maintained `{}`, reference `{}`",
        i + 1,
        g.get(i).unwrap_or(&"<end>"),
        w.get(i).unwrap_or(&"<end>")
    )
}

pub fn verify_state(d: &DendrogramState) -> Result<(), String> {
    let want = serialize_canonical(&kruskal_sld(d.num_vertices(), &d.edges()).map_err(|e| e.to_string())?);
    let got = d.serialize();
    if got == want {
        Ok(())
    } else {
        Err(diff_report(&got, &want))
    }
}

pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let forest = format::parse_forest(&read(&cfg.forest)?)?;
    let updates = format::parse_updates(&read(&cfg.updates)?)?;
    let mut stats: Option<Box<dyn Write + Send>> = match &cfg.stats {
        None => None,
        Some(p) => Some(Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        ))),
    };
    let dump = with_threads(cfg.threads, || -> CliResult<String> {
        let mut d =
            DendrogramState::build(forest.num_vertices, &forest.edges).map_err(|e| CliError::Input(e.to_string()))?;
        for (line, u) in &updates {
            let r = d.apply_update(u, cfg.mode).map_err(|e| lib_err(*line, e))?;
            if cfg.inject_fault == Some(*line) {
                d.inject_fault();
            }
            if let Some(s) = stats.as_mut() {
                writeln!(s, "{}", stats_line(*line, u, &r, cfg.no_timing))?;
            }
            if cfg.verify {
                verify_state(&d).map_err(|m| CliError::Mismatch(format!("after line {line}: {m}")))?;
            }
        }
        if let Some(s) = stats.as_mut() {
            s.flush()?;
        }
        Ok(d.serialize())
    })??;
    if cfg.dump {
        out.write_all(dump.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_query(forest: &Path, queries: &Path, strict: bool, out: &mut dyn Write) -> CliResult<()> {
    let f = format::parse_forest(&read(forest)?)?;
    let qs = format::parse_queries(&read(queries)?)?;
    let d = DendrogramState::build(f.num_vertices, &f.edges).map_err(|e| CliError::Input(e.to_string()))?;
    let th = |tau| dynsld::ThresholdParam { tau, strict };
    for (line, q) in qs {
        let ans = match q {
            Query::Threshold(s, t, tau) => d.threshold_query(s, t, th(tau)).map(|b| b.to_string()),
            Query::Size(u, tau) => d.cluster_size(u, th(tau)).map(|c| c.to_string()),
            Query::Report(u, tau) => d.cluster_report(u, th(tau)).map(|c| format::format_set(&c)),
            Query::Flat(tau) => d.flat_clustering(th(tau)).map(|c| format::format_clusters(&c)),
        }
        .map_err(|e| lib_err(line, e))?;
        writeln!(out, "{ans}")?;
    }
    Ok(())
}

pub fn cmd_cartesian(path: &Path, verify: bool, stats: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let file = format::parse_cartesian(&read(path)?)?;
    let mut c = CartesianState::build_array(&file.values, file.order).map_err(|e| CliError::Input(e.to_string()))?;
    let mut records = String::new();
    let check = |c: &CartesianState, line: usize| -> CliResult<()> {
        if verify {
            c.verify().map_err(|e| CliError::Mismatch(format!("after line {line}: {e}")))?;
        }
        Ok(())
    };
    check(&c, 1)?;
    for (line, op) in &file.ops {
        let r = match *op {
            CartesianOp::PushFront(v) => c.leaf_insert(End::Front, v),
            CartesianOp::PushBack(v) => c.leaf_insert(End::Back, v),
            CartesianOp::PopFront => c.leaf_delete(0),
            CartesianOp::PopBack => c.leaf_delete(c.len().saturating_sub(1)),
            CartesianOp::InsertAt(i, v) => c.insert_at(i, v),
            CartesianOp::DeleteAt(i) => c.delete_at(i),
        }
        .map_err(|e| lib_err(*line, e))?;
        records.push_str(&format!("{{\"line\":{line},\"pointer_changes\":{}}}\n", r.pointer_changes));
        check(&c, *line)?;
    }
    if let Some(p) = stats {
        std::fs::write(p, records)?;
    }
    let t = c.to_tree();
    let vals: Vec<String> = c.in_order().iter().map(|w| w.to_string()).collect();
    let parents: Vec<String> = t.parent.iter().map(|p| p.map_or("-".into(), |p| p.to_string())).collect();
    writeln!(out, "values {}", vals.join(" "))?;
    writeln!(out, "parents {}", parents.join(" "))?;
    Ok(())
}

/// Generator commands; each returns file text.
pub fn gen_forest(n: usize, m: usize, seed: u64) -> CliResult<String> {
    let edges = oracle::gen_random_forest(n, m, seed).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(format::write_forest(n, &edges))
}

pub fn gen_theorem(h: usize, stars: usize) -> CliResult<(String, String)> {
    let (n, edges, centers) = oracle::gen_theorem_instance(h, stars).map_err(|e| CliError::Input(e.to_string()))?;
    let e = dynsld::Edge::of(centers[0], centers[1], 0.0);
    let updates = vec![Update::Insert(e), Update::Delete(e.key)];
    Ok((format::write_forest(n, &edges), format::write_updates(&updates)))
}

pub fn gen_updates(forest: &Path, ops: usize, seed: u64, profile: &str) -> CliResult<String> {
    let f = format::parse_forest(&read(forest)?)?;
    let profile: oracle::Profile = profile.parse().map_err(|e: dynsld::Error| CliError::Input(e.to_string()))?;
    let us = oracle::gen_update_stream(f.num_vertices, &f.edges, ops, seed, profile)
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(format::write_updates(&us))
}
