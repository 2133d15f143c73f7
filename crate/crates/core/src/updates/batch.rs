//! Homogeneous batches: star merges over a contracted incidence forest for
//! insertions, filtered spines over one batch cut for deletions.

use super::{merge, Tracker, UpdateMode};
use crate::dendrogram::DendrogramState;
use crate::error::{Error, Result};
use crate::types::{min_incident_edge, Edge, EdgeKey, MergeStats, UpdateReport, VertexId};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::time::Instant;

/// One leaf of a star: its new edge and the two spines that meet.
#[derive(Clone, Debug, PartialEq)]
pub struct StarLeaf {
    pub edge: Edge,
    /// Endpoint of `edge` inside the center component.
    pub attach: VertexId,
    /// Spine of `edge` in the leaf dendrogram, which already holds `edge`.
    pub spine: Vec<Edge>,
    /// Spine of the minimum-rank edge at `attach` in the center; empty if
    /// `attach` has no edges.
    pub center_spine: Vec<Edge>,
}

/// Where a piece of a leaf spine lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupKey {
    /// The center segment that starts at this split point.
    Segment(Edge),
    /// Below every center node on the spine of this attachment vertex.
    Attach(VertexId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarMergePlan {
    pub leaves: Vec<StarLeaf>,
    /// Nodes with two children in the union of the center spines.
    pub branching: BTreeSet<Edge>,
    /// Branching nodes plus the lowest node of every center spine.
    pub split_points: BTreeSet<Edge>,
    /// Segment start to (center nodes of the segment, split point above).
    pub segments: BTreeMap<Edge, (Vec<Edge>, Option<Edge>)>,
    /// Group to its pieces of leaf spines.
    pub groups: BTreeMap<GroupKey, Vec<Vec<Edge>>>,
}

impl StarMergePlan {
    pub fn new(leaves: Vec<StarLeaf>) -> Self {
        let mut children: HashMap<Edge, BTreeSet<Edge>> = HashMap::new();
        for l in &leaves {
            for w in l.center_spine.windows(2) {
                children.entry(w[1]).or_default().insert(w[0]);
            }
        }
        let branching: BTreeSet<Edge> = children.iter().filter(|(_, c)| c.len() >= 2).map(|(p, _)| *p).collect();
        let mut split_points = branching.clone();
        split_points.extend(leaves.iter().filter_map(|l| l.center_spine.first().copied()));
        let mut segments: BTreeMap<Edge, (Vec<Edge>, Option<Edge>)> = BTreeMap::new();
        for l in &leaves {
            let mut start: Option<Edge> = None;
            for &x in &l.center_spine {
                if split_points.contains(&x) {
                    if let Some(s) = start {
                        segments.get_mut(&s).expect("open segment").1 = Some(x);
                    }
                    if segments.contains_key(&x) {
                        // Everything above was already walked from another spine.
                        break;
                    }
                    segments.insert(x, (Vec::new(), None));
                    start = Some(x);
                }
                segments.get_mut(&start.expect("spine starts at a split point")).expect("segment").0.push(x);
            }
        }
        let mut groups: BTreeMap<GroupKey, Vec<Vec<Edge>>> = BTreeMap::new();
        for l in &leaves {
            let points: Vec<Edge> = l.center_spine.iter().filter(|x| split_points.contains(x)).copied().collect();
            let mut piece = Vec::new();
            let mut key = GroupKey::Attach(l.attach);
            let mut next = 0;
            for &x in &l.spine {
                while next < points.len() && points[next] < x {
                    if !piece.is_empty() {
                        groups.entry(key).or_default().push(std::mem::take(&mut piece));
                    }
                    key = GroupKey::Segment(points[next]);
                    next += 1;
                }
                piece.push(x);
            }
            if !piece.is_empty() {
                groups.entry(key).or_default().push(piece);
            }
        }
        StarMergePlan { leaves, branching, split_points, segments, groups }
    }
}

/// Rank-ordered merge of several sorted runs by balanced pairwise reduction.
fn merge_many(mut runs: Vec<Vec<Edge>>, parallel: bool) -> Vec<Edge> {
    while runs.len() > 1 {
        let pairs: Vec<(Vec<Edge>, Option<Vec<Edge>>)> = {
            let mut it = runs.into_iter();
            let mut out = Vec::new();
            while let Some(a) = it.next() {
                out.push((a, it.next()));
            }
            out
        };
        let step = |(a, b): (Vec<Edge>, Option<Vec<Edge>>)| match b {
            Some(b) => merge::merge_sorted(&a, &b),
            None => a,
        };
        runs = if parallel { pairs.into_par_iter().map(step).collect() } else { pairs.into_iter().map(step).collect() };
    }
    runs.pop().unwrap_or_default()
}

/// Small deterministic mixer for contraction priorities.
fn mix(v: u64, round: u64) -> u64 {
    let mut z = v ^ round.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Labels {
    parent: Vec<usize>,
}

impl Labels {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let n = self.parent[y];
            self.parent[y] = r;
            y = n;
        }
        r
    }
}

/// One round of tree contraction on the incidence forest: every leaf rakes
/// into its neighbour, and every degree-2 vertex without a leaf neighbour
/// whose priority beats its degree-2 neighbours compresses into its
/// smaller neighbour. Returns center -> [(leaf, edge index)].
fn contraction_round(ends: &[(usize, usize)], alive: &[usize], round: u64) -> BTreeMap<usize, Vec<(usize, usize)>> {
    let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &i in alive {
        let (a, b) = ends[i];
        adj.entry(a).or_default().push((b, i));
        adj.entry(b).or_default().push((a, i));
    }
    let deg = |v: usize| adj[&v].len();
    let prio = |v: usize| (mix(v as u64, round), v);
    let mut stars: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (&v, nb) in &adj {
        let joins = match nb.len() {
            1 => {
                let (w, _) = nb[0];
                deg(w) >= 2 || prio(v) < prio(w)
            }
            2 => nb.iter().all(|&(w, _)| deg(w) != 1 && (deg(w) != 2 || prio(v) < prio(w))),
            _ => false,
        };
        if joins {
            let &(w, i) = nb.iter().min().expect("neighbour");
            stars.entry(w).or_default().push((v, i));
        }
    }
    stars
}

impl DendrogramState {
    /// Checks a batch of insertions atomically and returns the offenders.
    fn reject_insert_batch(&self, edges: &[Edge]) -> Result<()> {
        let mut bad = Vec::new();
        let mut seen = HashSet::new();
        let mut label: HashMap<u32, u32> = HashMap::new();
        let mut uf = Labels { parent: Vec::new() };
        for e in edges {
            if e.key.hi as usize >= self.num_vertices() {
                return Err(Error::VertexOutOfRange(e.key.hi));
            }
            if !seen.insert(e.key) || self.forest.edges.contains_key(&e.key) {
                bad.push(e.key);
                continue;
            }
            let mut id = |x: u32| -> Result<usize> {
                let r = self.forest_rc.representative(x)?;
                let n = label.len() as u32;
                let l = *label.entry(r).or_insert(n) as usize;
                if l == uf.parent.len() {
                    uf.parent.push(l);
                }
                Ok(l)
            };
            let (a, b) = (id(e.key.lo)?, id(e.key.hi)?);
            let (ra, rb) = (uf.find(a), uf.find(b));
            if ra == rb {
                bad.push(e.key);
            } else {
                uf.parent[ra] = rb;
            }
        }
        match bad.len() {
            0 => Ok(()),
            _ => Err(Error::BatchRejected(bad)),
        }
    }

    /// Applies the rank-ordered merges described by `plan`.
    pub fn star_merge(&mut self, plan: &StarMergePlan, mode: UpdateMode) -> Result<UpdateReport> {
        let start = Instant::now();
        self.take_visits();
        let mut t = Tracker::default();
        let mut rep = UpdateReport::default();
        let changes = self.star_changes(plan, mode)?;
        t.record(self, &changes);
        self.apply_parent_changes(&changes, &[], &[])?;
        rep.merges.push(MergeStats { pointer_changes: changes.len() as u64, ..MergeStats::default() });
        rep.pointer_changes = t.net(self);
        Ok(self.finish(rep, start))
    }

    fn star_changes(&self, plan: &StarMergePlan, mode: UpdateMode) -> Result<Vec<(Edge, Option<Edge>)>> {
        let mut tasks: Vec<(Vec<Vec<Edge>>, Option<Edge>)> = Vec::new();
        for (key, pieces) in &plan.groups {
            let mut runs = pieces.clone();
            let top = match key {
                GroupKey::Segment(p) => {
                    let (nodes, above) = &plan.segments[p];
                    runs.push(nodes.clone());
                    *above
                }
                GroupKey::Attach(c) => {
                    plan.leaves.iter().find(|l| l.attach == *c).and_then(|l| l.center_spine.first().copied())
                }
            };
            tasks.push((runs, top));
        }
        let parallel = mode.is_parallel();
        let one = |(runs, top): &(Vec<Vec<Edge>>, Option<Edge>)| -> Vec<(Edge, Option<Edge>)> {
            let chain = merge_many(runs.clone(), parallel);
            chain
                .iter()
                .enumerate()
                .filter_map(|(i, e)| {
                    let p = chain.get(i + 1).copied().or(*top);
                    (self.parent(e) != p).then_some((*e, p))
                })
                .collect()
        };
        let per: Vec<Vec<(Edge, Option<Edge>)>> =
            if parallel { tasks.par_iter().map(one).collect() } else { tasks.iter().map(one).collect() };
        let mut out: BTreeMap<Edge, Option<Edge>> = BTreeMap::new();
        for (e, p) in per.into_iter().flatten() {
            if let Some(prev) = out.insert(e, p) {
                if prev != p {
                    return Err(Error::Cycle(e.key));
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Inserts edges that all join one center component to distinct leaf
    /// components.
    pub fn star_insert(&mut self, edges: &[Edge], mode: UpdateMode) -> Result<UpdateReport> {
        let start = Instant::now();
        self.take_visits();
        self.reject_insert_batch(edges)?;
        if edges.is_empty() {
            return Ok(self.finish(UpdateReport::default(), start));
        }
        let reps: Vec<(u32, u32)> = edges
            .iter()
            .map(|e| Ok((self.forest_rc.representative(e.key.lo)?, self.forest_rc.representative(e.key.hi)?)))
            .collect::<Result<_>>()?;
        let center = [reps[0].0, reps[0].1]
            .into_iter()
            .find(|c| reps.iter().all(|(a, b)| a == c || b == c))
            .ok_or(Error::NotAStar)?;
        let mut t = Tracker::default();
        let mut rep = UpdateReport::default();
        let star: Vec<(Edge, VertexId)> =
            edges.iter().zip(&reps).map(|(e, (a, _))| (*e, if *a == center { e.key.lo } else { e.key.hi })).collect();
        self.merge_stars(vec![star], mode, &mut t, &mut rep)?;
        rep.rounds = 1;
        rep.pointer_changes = t.net(self);
        Ok(self.finish(rep, start))
    }

    /// Runs a set of disjoint stars: each entry lists (edge, endpoint in the
    /// center component).
    fn merge_stars(
        &mut self,
        stars: Vec<Vec<(Edge, VertexId)>>,
        mode: UpdateMode,
        t: &mut Tracker,
        rep: &mut UpdateReport,
    ) -> Result<()> {
        // Minimum-rank edges before any of this round's edges exist.
        let mut pre = Vec::new();
        for star in &stars {
            let mut s = Vec::new();
            for &(e, c) in star {
                let l = e.key.other(c);
                s.push((e, c, min_incident_edge(&self.forest, l)?, min_incident_edge(&self.forest, c)?));
            }
            pre.push(s);
        }
        let all: Vec<Edge> = stars.iter().flatten().map(|(e, _)| *e).collect();
        for e in &all {
            self.forest.insert_edge(*e);
            self.insert_node(*e);
        }
        let links: Vec<(u32, u32, Option<Edge>)> = all.iter().map(|e| (e.key.lo, e.key.hi, Some(*e))).collect();
        self.forest_rc.batch_link(&links)?;
        t.added.extend_from_slice(&all);

        // New edge nodes join their leaf dendrograms first.
        let firsts: Vec<(Edge, Edge)> =
            pre.iter().flatten().filter_map(|&(e, _, el, _)| el.map(|el| (el, e))).collect();
        let run = |&(el, e): &(Edge, Edge)| self.merge_heads(el, e, mode);
        let outs = if mode.is_parallel() {
            firsts.par_iter().map(run).collect::<Result<Vec<_>>>()?
        } else {
            firsts.iter().map(run).collect::<Result<Vec<_>>>()?
        };
        let mut changes = Vec::new();
        for o in outs {
            rep.pws_queries += o.stats.pws_queries;
            rep.median_queries += o.stats.median_queries;
            rep.max_depth = rep.max_depth.max(o.stats.depth);
            rep.max_node_visits = rep.max_node_visits.max(o.max_node_visits as u64);
            rep.merges.push(o.stats);
            changes.extend(o.changes);
        }
        t.record(self, &changes);
        self.apply_parent_changes(&changes, &[], &[])?;

        let mut plans = Vec::new();
        for s in &pre {
            let mut leaves = Vec::new();
            for &(e, c, _, e0) in s {
                let spine = self.spine_nodes(e, mode)?;
                let center_spine = match e0 {
                    Some(e0) => self.spine_nodes(e0, mode)?,
                    None => Vec::new(),
                };
                rep.spine_lengths.push(spine.len() as u64);
                rep.spine_lengths.push(center_spine.len() as u64);
                rep.dendrogram_height = rep.dendrogram_height.max((spine.len() + center_spine.len()) as u64);
                leaves.push(StarLeaf { edge: e, attach: c, spine, center_spine });
            }
            plans.push(StarMergePlan::new(leaves));
        }
        let per = if mode.is_parallel() {
            plans.par_iter().map(|p| self.star_changes(p, mode)).collect::<Result<Vec<_>>>()?
        } else {
            plans.iter().map(|p| self.star_changes(p, mode)).collect::<Result<Vec<_>>>()?
        };
        let mut changes = Vec::new();
        for c in per {
            rep.merges.push(MergeStats { pointer_changes: c.len() as u64, ..MergeStats::default() });
            changes.extend(c);
        }
        t.record(self, &changes);
        self.apply_parent_changes(&changes, &[], &[])?;
        Ok(())
    }

    /// Inserts a batch whose edges keep the forest acyclic. The incidence
    /// forest over components is contracted in rounds; each round is a set
    /// of disjoint stars merged independently.
    pub fn batch_insert(&mut self, edges: &[Edge], mode: UpdateMode) -> Result<UpdateReport> {
        let start = Instant::now();
        self.take_visits();
        self.reject_insert_batch(edges)?;
        let mut label: HashMap<u32, usize> = HashMap::new();
        let mut ends = Vec::with_capacity(edges.len());
        for e in edges {
            let mut id = |x: u32| -> Result<usize> {
                let r = self.forest_rc.representative(x)?;
                let n = label.len();
                Ok(*label.entry(r).or_insert(n))
            };
            ends.push((id(e.key.lo)?, id(e.key.hi)?));
        }
        let mut uf = Labels { parent: (0..label.len()).collect() };
        let mut alive: Vec<usize> = (0..edges.len()).collect();
        let mut t = Tracker::default();
        let mut rep = UpdateReport::default();
        while !alive.is_empty() {
            let cur: Vec<(usize, usize)> = ends.iter().map(|&(a, b)| (uf.find(a), uf.find(b))).collect();
            let stars = contraction_round(&cur, &alive, rep.rounds);
            rep.rounds += 1;
            let mut used = HashSet::new();
            let mut batch = Vec::new();
            for (&center, leaves) in &stars {
                let mut star = Vec::new();
                for &(leaf, i) in leaves {
                    let e = edges[i];
                    let lo_label = uf.find(ends[i].0);
                    star.push((e, if lo_label == center { e.key.lo } else { e.key.hi }));
                    used.insert(i);
                    uf.parent[leaf] = center;
                }
                batch.push(star);
            }
            self.merge_stars(batch, mode, &mut t, &mut rep)?;
            alive.retain(|i| !used.contains(i));
        }
        rep.pointer_changes = t.net(self);
        Ok(self.finish(rep, start))
    }

    /// Deletes a batch of present edges: one cut of the forest, then every
    /// characteristic spine of the old dendrogram is filtered by side.
    /// Overlapping spines agree on every shared assignment.
    pub fn batch_delete(&mut self, keys: &[EdgeKey], mode: UpdateMode) -> Result<UpdateReport> {
        let start = Instant::now();
        self.take_visits();
        let mut gone = HashSet::new();
        let mut bad = Vec::new();
        let mut removed = Vec::new();
        for k in keys {
            match self.forest.edge(*k) {
                Some(e) if gone.insert(*k) => removed.push(e),
                _ => bad.push(*k),
            }
        }
        if !bad.is_empty() {
            return Err(Error::BatchRejected(bad));
        }
        let mut rep = UpdateReport::default();
        let mut spines = Vec::new();
        for e in &removed {
            for x in [e.key.lo, e.key.hi] {
                if let Some(h) = self.min_incident_without(x, &gone) {
                    let s = self.spine_nodes(h, mode)?;
                    rep.spine_lengths.push(s.len() as u64);
                    spines.push((s, x));
                }
            }
        }
        let cuts: Vec<(u32, u32)> = removed.iter().map(|e| (e.key.lo, e.key.hi)).collect();
        self.forest_rc.batch_cut(&cuts)?;
        for e in &removed {
            self.forest.remove_edge(e.key);
        }
        let unmerge = |(s, x): &(Vec<Edge>, VertexId)| self.unmerge_changes(s, *x, &gone, mode);
        let per = if mode.is_parallel() {
            spines.par_iter().map(unmerge).collect::<Result<Vec<_>>>()?
        } else {
            spines.iter().map(unmerge).collect::<Result<Vec<_>>>()?
        };
        let mut union: BTreeMap<Edge, Option<Edge>> = BTreeMap::new();
        for (e, p) in per.into_iter().flatten() {
            if let Some(prev) = union.insert(e, p) {
                if prev != p {
                    return Err(Error::Cycle(e.key));
                }
            }
        }
        let changes: Vec<(Edge, Option<Edge>)> = union.into_iter().collect();
        rep.merges.push(MergeStats { pointer_changes: changes.len() as u64, ..MergeStats::default() });
        rep.pointer_changes = self.apply_parent_changes(&changes, &[], &removed)?;
        rep.dendrogram_height = rep.spine_lengths.iter().copied().max().unwrap_or(1);
        rep.rounds = 1;
        Ok(self.finish(rep, start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::kruskal_sld;

    #[test]
    fn plan_groups_on_a_bare_path() {
        // Center 0-1-2-3 with weights 5,6,7: its dendrogram is one chain.
        let center = [Edge::of(0, 1, 5.0), Edge::of(1, 2, 6.0), Edge::of(2, 3, 7.0)];
        let leaf = StarLeaf {
            edge: Edge::of(3, 4, 1.0),
            attach: 3,
            spine: vec![Edge::of(3, 4, 1.0), Edge::of(4, 5, 6.5)],
            center_spine: vec![center[2]],
        };
        let plan = StarMergePlan::new(vec![leaf]);
        assert!(plan.branching.is_empty());
        assert_eq!(plan.groups[&GroupKey::Attach(3)], vec![vec![Edge::of(3, 4, 1.0), Edge::of(4, 5, 6.5)]]);
    }

    #[test]
    fn star_examples() {
        for mode in UpdateMode::ALL {
            let mut d = DendrogramState::build(3, &[]).unwrap();
            let r = d.star_insert(&[Edge::of(0, 1, 1.0), Edge::of(1, 2, 2.0)], mode).unwrap();
            assert_eq!(d.serialize(), "0-1 1 -> 1-2\n1-2 2 -> ROOT\n");
            assert_eq!(r.pointer_changes, 2);
            let mut d = DendrogramState::build(3, &[]).unwrap();
            d.batch_insert(&[Edge::of(0, 1, 1.0), Edge::of(1, 2, 2.0)], mode).unwrap();
            assert_eq!(d.serialize(), "0-1 1 -> 1-2\n1-2 2 -> ROOT\n");
            d.batch_delete(&[EdgeKey::of(0, 1), EdgeKey::of(1, 2)], mode).unwrap();
            assert!(d.parent_map().is_empty());
        }
    }

    #[test]
    fn star_errors() {
        let mut d = DendrogramState::build(6, &[]).unwrap();
        let err = d.star_insert(&[Edge::of(0, 1, 1.0), Edge::of(2, 3, 2.0)], UpdateMode::SeqH).unwrap_err();
        assert_eq!(err, Error::NotAStar);
        let err = d.batch_insert(&[Edge::of(0, 1, 1.0), Edge::of(1, 2, 2.0), Edge::of(0, 2, 3.0)], UpdateMode::SeqH);
        assert_eq!(err.unwrap_err(), Error::BatchRejected(vec![EdgeKey::of(0, 2)]));
        assert!(d.parent_map().is_empty());
        assert!(matches!(d.batch_delete(&[EdgeKey::of(0, 1)], UpdateMode::SeqH), Err(Error::BatchRejected(_))));
    }

    #[test]
    fn branching_center() {
        // Center: 0-1 (1), 1-2 (3), 2-3 (2); leaves attach at 0 and 3.
        let center = vec![Edge::of(0, 1, 1.0), Edge::of(1, 2, 3.0), Edge::of(2, 3, 2.0)];
        let mut all = center.clone();
        all.push(Edge::of(4, 5, 1.5));
        all.push(Edge::of(6, 7, 2.5));
        let batch = [Edge::of(0, 4, 0.5), Edge::of(3, 6, 2.2)];
        for mode in UpdateMode::ALL {
            let mut d = DendrogramState::build(8, &all).unwrap();
            d.batch_insert(&batch, mode).unwrap();
            let mut expect = all.clone();
            expect.extend_from_slice(&batch);
            assert_eq!(d.parent_map(), &kruskal_sld(8, &expect).unwrap(), "{mode}");
            d.validate().unwrap();
        }
    }
}
