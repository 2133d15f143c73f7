//! Edge insertion and deletion in four interchangeable modes, plus
//! homogeneous batches.

mod batch;
mod divide_conquer;
pub mod merge;
mod output_sensitive;

pub use batch::StarMergePlan;

use crate::dendrogram::DendrogramState;
use crate::error::{Error, Result};
use crate::oracle::Update;
use crate::types::{min_incident_edge, Edge, EdgeKey, MergeStats, Spine, UpdateReport, VertexId, Weight};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpdateMode {
    /// Pointer-chasing spines, linear merge.
    SeqH,
    /// Alternating predecessor searches, one per parent change.
    SeqOs,
    /// Spines unpacked from the dendrogram forest, fork-join merge.
    ParH,
    /// Median-split divide and conquer.
    ParOs,
}

impl UpdateMode {
    pub const ALL: [UpdateMode; 4] = [UpdateMode::SeqH, UpdateMode::SeqOs, UpdateMode::ParH, UpdateMode::ParOs];

    pub fn is_parallel(self) -> bool {
        matches!(self, UpdateMode::ParH | UpdateMode::ParOs)
    }
}

impl fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateMode::SeqH => "seq-h",
            UpdateMode::SeqOs => "seq-os",
            UpdateMode::ParH => "par-h",
            UpdateMode::ParOs => "par-os",
        })
    }
}

impl FromStr for UpdateMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq-h" => Ok(UpdateMode::SeqH),
            "seq-os" => Ok(UpdateMode::SeqOs),
            "par-h" => Ok(UpdateMode::ParH),
            "par-os" => Ok(UpdateMode::ParOs),
            _ => Err(Error::Invalid(format!("unknown mode {s:?}"))),
        }
    }
}

/// Parent changes found by one spine merge, before they are applied.
pub(crate) struct MergeOutcome {
    pub changes: Vec<(Edge, Option<Edge>)>,
    pub stats: MergeStats,
    pub spine_lengths: [u64; 2],
    pub max_node_visits: u32,
}

/// Remembers the first observed parent of every node touched during an
/// update so the net change count can be reported.
#[derive(Default)]
pub(crate) struct Tracker {
    original: HashMap<Edge, Option<Edge>>,
    added: Vec<Edge>,
}

impl Tracker {
    fn record(&mut self, d: &DendrogramState, changes: &[(Edge, Option<Edge>)]) {
        for (e, _) in changes {
            if !self.added.contains(e) {
                self.original.entry(*e).or_insert_with(|| d.parent(e));
            }
        }
    }

    fn net(&self, d: &DendrogramState) -> u64 {
        let moved = self.original.iter().filter(|(e, p)| d.parent(e) != **p).count();
        (moved + self.added.len()) as u64
    }
}

impl DendrogramState {
    pub(crate) fn spine_nodes(&self, head: Edge, mode: UpdateMode) -> Result<Vec<Edge>> {
        Ok(if mode.is_parallel() { self.extract_spine(head.key)? } else { self.chase_spine(head.key)? }.nodes)
    }

    /// Finds the parent changes that merge the spines headed by `a` and `b`.
    pub(crate) fn merge_heads(&self, a: Edge, b: Edge, mode: UpdateMode) -> Result<MergeOutcome> {
        match mode {
            UpdateMode::SeqOs => self.merge_alternating(a, b),
            UpdateMode::ParOs => self.merge_divide_conquer(a, b),
            UpdateMode::SeqH | UpdateMode::ParH => {
                let (sa, sb) = (self.spine_nodes(a, mode)?, self.spine_nodes(b, mode)?);
                let chain = if mode == UpdateMode::ParH {
                    merge::par_merge_sorted(&sa, &sb)
                } else {
                    merge::merge_sorted(&sa, &sb)
                };
                let changes = merge::chain_changes(&chain, |e| self.parent(e));
                Ok(MergeOutcome {
                    stats: MergeStats { pointer_changes: changes.len() as u64, ..MergeStats::default() },
                    changes,
                    spine_lengths: [sa.len() as u64, sb.len() as u64],
                    max_node_visits: 0,
                })
            }
        }
    }

    fn run_merge(&mut self, a: Edge, b: Edge, mode: UpdateMode, t: &mut Tracker, rep: &mut UpdateReport) -> Result<()> {
        let out = self.merge_heads(a, b, mode)?;
        t.record(self, &out.changes);
        self.apply_parent_changes(&out.changes, &[], &[])?;
        rep.pws_queries += out.stats.pws_queries;
        rep.median_queries += out.stats.median_queries;
        rep.max_depth = rep.max_depth.max(out.stats.depth);
        rep.max_node_visits = rep.max_node_visits.max(out.max_node_visits as u64);
        rep.spine_lengths.extend_from_slice(&out.spine_lengths);
        rep.dendrogram_height = rep.dendrogram_height.max(out.spine_lengths[0] + out.spine_lengths[1]);
        rep.merges.push(out.stats);
        Ok(())
    }

    fn finish(&self, mut rep: UpdateReport, start: Instant) -> UpdateReport {
        rep.rc_nodes_visited += self.take_visits();
        rep.elapsed = start.elapsed();
        rep
    }

    /// Merges two whole spines that live in different dendrogram components.
    pub fn merge_spines(&mut self, a: &Spine, b: &Spine, mode: UpdateMode) -> Result<UpdateReport> {
        let start = Instant::now();
        self.take_visits();
        let (Some(&ha), Some(&hb)) = (a.nodes.first(), b.nodes.first()) else {
            return Err(Error::Invalid("empty spine".into()));
        };
        for s in [a, b] {
            let top = *s.nodes.last().expect("non-empty");
            if !self.parent_map().contains_key(&s.nodes[0]) || self.root_of(s.nodes[0].key)? != top {
                return Err(Error::Invalid(format!("spine of {} does not end at its root", s.nodes[0].key)));
            }
        }
        if self.root_of(ha.key)? == self.root_of(hb.key)? {
            return Err(Error::SameComponent);
        }
        let mut rep = UpdateReport::default();
        let mut t = Tracker::default();
        self.run_merge(ha, hb, mode, &mut t, &mut rep)?;
        rep.pointer_changes = t.net(self);
        Ok(self.finish(rep, start))
    }

    pub(crate) fn check_insertable(&self, e: &Edge) -> Result<()> {
        self.forest.check_vertex(e.key.lo)?;
        self.forest.check_vertex(e.key.hi)?;
        if self.forest.edges.contains_key(&e.key) {
            return Err(Error::DuplicateEdge(e.key));
        }
        if self.forest_rc.connected(e.key.lo, e.key.hi)? {
            return Err(Error::WouldCreateCycle(e.key));
        }
        Ok(())
    }

    /// Inserts edge `(u, v)`: `e` first joins the spine at `u`, then the
    /// resulting spine of `e` merges with the spine at `v`.
    pub fn insert(&mut self, u: VertexId, v: VertexId, w: Weight, mode: UpdateMode) -> Result<UpdateReport> {
        let start = Instant::now();
        self.take_visits();
        let e = Edge { weight: w, key: EdgeKey::new(u, v)? };
        self.check_insertable(&e)?;
        let eu = min_incident_edge(&self.forest, u)?;
        let ev = min_incident_edge(&self.forest, v)?;
        self.forest.insert_edge(e);
        self.forest_rc.link(u, v, Some(e))?;
        self.insert_node(e);
        let mut t = Tracker { added: vec![e], ..Tracker::default() };
        let mut rep = UpdateReport::default();
        if let Some(eu) = eu {
            self.run_merge(eu, e, mode, &mut t, &mut rep)?;
        }
        if let Some(ev) = ev {
            self.run_merge(e, ev, mode, &mut t, &mut rep)?;
        }
        rep.dendrogram_height = rep.dendrogram_height.max(1);
        rep.pointer_changes = t.net(self);
        Ok(self.finish(rep, start))
    }

    /// Output-sensitive insertion; the same as `insert` in `SeqOs` mode.
    pub fn insert_output_sensitive(&mut self, u: VertexId, v: VertexId, w: Weight) -> Result<UpdateReport> {
        self.insert(u, v, w, UpdateMode::SeqOs)
    }

    /// Divide-and-conquer merge of two whole spines.
    pub fn merge_spines_dc(&mut self, a: &Spine, b: &Spine) -> Result<UpdateReport> {
        self.merge_spines(a, b, UpdateMode::ParOs)
    }

    /// Dispatches one update of a generated or parsed stream.
    pub fn apply_update(&mut self, u: &Update, mode: UpdateMode) -> Result<UpdateReport> {
        match u {
            Update::Insert(e) => self.insert(e.key.lo, e.key.hi, e.weight, mode),
            Update::Delete(k) => self.delete(k.lo, k.hi, mode),
            Update::BatchInsert(es) => self.batch_insert(es, mode),
            Update::BatchDelete(ks) => self.batch_delete(ks, mode),
        }
    }

    /// Minimum-rank edge at `x` once all of `gone` are removed.
    pub(crate) fn min_incident_without(&self, x: VertexId, gone: &HashSet<EdgeKey>) -> Option<Edge> {
        self.forest.adjacency[x as usize].iter().find(|f| !gone.contains(&f.key)).copied()
    }

    /// Keeps the nodes of `spine` on `side`'s half after a cut and chains
    /// them in their original order.
    pub(crate) fn unmerge_changes(
        &self,
        spine: &[Edge],
        side: VertexId,
        gone: &HashSet<EdgeKey>,
        mode: UpdateMode,
    ) -> Result<Vec<(Edge, Option<Edge>)>> {
        let live: Vec<Edge> = spine.iter().filter(|x| !gone.contains(&x.key)).copied().collect();
        let keep = if mode.is_parallel() {
            let pairs: Vec<(u32, u32)> = live.iter().map(|x| (x.key.lo, side)).collect();
            self.forest_rc.batch_connected(&pairs)?
        } else {
            live.iter().map(|x| self.forest_rc.connected(x.key.lo, side)).collect::<Result<Vec<_>>>()?
        };
        let kept: Vec<Edge> = if mode.is_parallel() {
            live.par_iter().zip(keep.par_iter()).filter(|(_, k)| **k).map(|(x, _)| *x).collect()
        } else {
            live.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect()
        };
        Ok(merge::chain_changes(&kept, |e| self.parent(e)))
    }

    /// Deletes edge `(u, v)` by filtering the two characteristic spines of
    /// the old dendrogram by side.
    pub fn delete(&mut self, u: VertexId, v: VertexId, mode: UpdateMode) -> Result<UpdateReport> {
        let start = Instant::now();
        self.take_visits();
        let key = EdgeKey::new(u, v)?;
        self.forest.check_vertex(key.hi)?;
        let e = self.forest.edge(key).ok_or(Error::NoSuchEdge(key))?;
        let mut rep = UpdateReport::default();
        let gone = HashSet::from([key]);
        let mut spines = Vec::new();
        for x in [u, v] {
            if let Some(h) = self.min_incident_without(x, &gone) {
                let s = self.spine_nodes(h, mode)?;
                rep.spine_lengths.push(s.len() as u64);
                spines.push((s, x));
            }
        }
        self.forest_rc.cut(u, v)?;
        self.forest.remove_edge(key);
        let mut changes = Vec::new();
        for (s, x) in &spines {
            changes.extend(self.unmerge_changes(s, *x, &gone, mode)?);
        }
        rep.merges.push(MergeStats { pointer_changes: changes.len() as u64, ..MergeStats::default() });
        rep.pointer_changes = self.apply_parent_changes(&changes, &[], &[e])?;
        rep.dendrogram_height = rep.spine_lengths.iter().copied().max().unwrap_or(1);
        Ok(self.finish(rep, start))
    }
}
