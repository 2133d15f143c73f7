//! Brute-force references and instance generators.
//!
//! Nothing here shares code with the fast paths: the union-find, the edge
//! sort and the tree constructions are all local.

use crate::error::{Error, Result};
use crate::types::{Edge, EdgeKey, ParentMap, VertexId, Weight};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        self.parent[ra] = rb;
        Some(rb)
    }
}

fn rank_cmp(a: &Edge, b: &Edge) -> std::cmp::Ordering {
    a.weight.value().total_cmp(&b.weight.value()).then(a.key.lo.cmp(&b.key.lo)).then(a.key.hi.cmp(&b.key.hi))
}

/// Kruskal sweep: each union-find class remembers its top dendrogram node.
pub fn kruskal_sld(num_vertices: usize, edges: &[Edge]) -> Result<ParentMap> {
    let mut sorted = edges.to_vec();
    sorted.sort_by(rank_cmp);
    let mut uf = UnionFind::new(num_vertices);
    let mut top: Vec<Option<Edge>> = vec![None; num_vertices];
    let mut out = ParentMap::new();
    let mut keys = BTreeSet::new();
    for e in sorted {
        if e.key.hi as usize >= num_vertices {
            return Err(Error::VertexOutOfRange(e.key.hi));
        }
        if !keys.insert(e.key) {
            return Err(Error::DuplicateEdge(e.key));
        }
        let (a, b) = (uf.find(e.key.lo as usize), uf.find(e.key.hi as usize));
        if a == b {
            return Err(Error::WouldCreateCycle(e.key));
        }
        for t in [top[a], top[b]].into_iter().flatten() {
            out.insert(t, Some(e));
        }
        let r = uf.union(a, b).expect("distinct classes");
        top[r] = Some(e);
        out.insert(e, None);
    }
    Ok(out)
}

/// Parent assignments that differ between two maps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChangeSet {
    pub changed: Vec<(EdgeKey, Option<EdgeKey>, Option<EdgeKey>)>,
    pub added: Vec<EdgeKey>,
    pub removed: Vec<EdgeKey>,
}

impl ChangeSet {
    pub fn len(&self) -> usize {
        self.changed.len() + self.added.len() + self.removed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every key mentioned by the change set.
    pub fn keys(&self) -> BTreeSet<EdgeKey> {
        self.changed.iter().map(|c| c.0).chain(self.added.iter().copied()).chain(self.removed.iter().copied()).collect()
    }
}

pub fn diff(a: &ParentMap, b: &ParentMap) -> ChangeSet {
    let by_key = |m: &ParentMap| -> BTreeMap<EdgeKey, Option<EdgeKey>> {
        m.iter().map(|(e, p)| (e.key, p.map(|p| p.key))).collect()
    };
    let (ka, kb) = (by_key(a), by_key(b));
    let mut cs = ChangeSet::default();
    for (k, pa) in &ka {
        match kb.get(k) {
            None => cs.removed.push(*k),
            Some(pb) if pb != pa => cs.changed.push((*k, *pa, *pb)),
            _ => {}
        }
    }
    for k in kb.keys() {
        if !ka.contains_key(k) {
            cs.added.push(*k);
        }
    }
    cs
}

/// `num_stars` disjoint stars of `h` leaves each. Star `i` (1-based) has
/// leaf edges of weight `i, s + i, 2s + i, ...` with `s = num_stars`, so
/// leaf weights interleave across stars. Returns the vertex count, the
/// edges and the star centers.
pub fn gen_theorem_instance(h: usize, num_stars: usize) -> Result<(usize, Vec<Edge>, Vec<VertexId>)> {
    if h < 1 || num_stars < 2 {
        return Err(Error::Invalid(format!("invalid sizes h={} stars={}", h, num_stars)));
    }
    let n = num_stars * (h + 1);
    let mut edges = Vec::with_capacity(num_stars * h);
    let mut centers = Vec::with_capacity(num_stars);
    for i in 1..=num_stars {
        let c = ((i - 1) * (h + 1)) as VertexId;
        centers.push(c);
        for j in 0..h {
            let w = (i + num_stars * j) as f64;
            edges.push(Edge::of(c, c + 1 + j as VertexId, w));
        }
    }
    Ok((n, edges, centers))
}

fn component_labels(n: usize, edges: &BTreeMap<EdgeKey, Edge>) -> Vec<usize> {
    let mut uf = UnionFind::new(n);
    for k in edges.keys() {
        uf.union(k.lo as usize, k.hi as usize);
    }
    (0..n).map(|v| uf.find(v)).collect()
}

/// Integer-valued weights from a small range so that ties are common.
fn random_weight(rng: &mut ChaCha8Rng, n: usize) -> Weight {
    Weight::of(rng.gen_range(0..(2 * n.max(4))) as f64)
}

/// A random forest on `n` vertices with exactly `num_edges` edges.
pub fn gen_random_forest(n: usize, num_edges: usize, seed: u64) -> Result<Vec<Edge>> {
    if num_edges > n.saturating_sub(1) {
        return Err(Error::Invalid(format!("{} edges do not fit a forest on {} vertices", num_edges, n)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(num_edges);
    while edges.len() < num_edges {
        let u = rng.gen_range(0..n as VertexId);
        let v = rng.gen_range(0..n as VertexId);
        if u != v && uf.union(u as usize, v as usize).is_some() {
            edges.push(Edge { weight: random_weight(&mut rng, n), key: EdgeKey::of(u, v) });
        }
    }
    Ok(edges)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Update {
    Insert(Edge),
    Delete(EdgeKey),
    BatchInsert(Vec<Edge>),
    BatchDelete(Vec<EdgeKey>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    InsertHeavy,
    DeleteHeavy,
    Mixed,
    Batch(usize),
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "insert-heavy" => Ok(Profile::InsertHeavy),
            "delete-heavy" => Ok(Profile::DeleteHeavy),
            "mixed" => Ok(Profile::Mixed),
            _ => s
                .strip_prefix("batch(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|k| k.parse().ok())
                .filter(|&k: &usize| k > 0)
                .map(Profile::Batch)
                .ok_or_else(|| Error::Invalid(format!("unknown profile {}", s))),
        }
    }
}

/// Picks up to `k` new edges joining distinct components without closing
/// a cycle among themselves.
fn pick_links(rng: &mut ChaCha8Rng, n: usize, edges: &BTreeMap<EdgeKey, Edge>, k: usize) -> Vec<Edge> {
    let labels = component_labels(n, edges);
    let mut uf = UnionFind::new(n);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < k && attempts < 64 * k + 64 {
        attempts += 1;
        let u = rng.gen_range(0..n as VertexId);
        let v = rng.gen_range(0..n as VertexId);
        if u != v && uf.union(labels[u as usize], labels[v as usize]).is_some() {
            out.push(Edge { weight: random_weight(rng, n), key: EdgeKey::of(u, v) });
        }
    }
    out
}

/// A replayable update stream that keeps the forest valid at every step.
pub fn gen_update_stream(n: usize, initial: &[Edge], ops: usize, seed: u64, profile: Profile) -> Result<Vec<Update>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: BTreeMap<EdgeKey, Edge> = initial.iter().map(|e| (e.key, *e)).collect();
    if edges.len() != initial.len() {
        return Err(Error::Invalid("duplicate initial edges".into()));
    }
    if n < 2 {
        return Err(Error::Invalid("need at least two vertices".into()));
    }
    let mut out = Vec::with_capacity(ops);
    for _ in 0..ops {
        let p_insert = match profile {
            Profile::InsertHeavy => 0.8,
            Profile::DeleteHeavy => 0.2,
            Profile::Mixed | Profile::Batch(_) => 0.5,
        };
        let k = match profile {
            Profile::Batch(k) => k,
            _ => 1,
        };
        let full = edges.len() + 1 >= n;
        let insert = !full && (edges.is_empty() || rng.gen_bool(p_insert));
        if insert {
            let batch = pick_links(&mut rng, n, &edges, k);
            for e in &batch {
                edges.insert(e.key, *e);
            }
            match profile {
                Profile::Batch(_) => out.push(Update::BatchInsert(batch)),
                _ => out.push(Update::Insert(batch[0])),
            }
        } else {
            let mut keys: Vec<EdgeKey> = edges.keys().copied().collect();
            keys.shuffle(&mut rng);
            keys.truncate(k);
            for key in &keys {
                edges.remove(key);
            }
            match profile {
                Profile::Batch(_) => out.push(Update::BatchDelete(keys)),
                _ => out.push(Update::Delete(keys[0])),
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    MinRoot,
    MaxRoot,
}

/// A rooted binary tree over sequence positions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryTree {
    pub root: Option<usize>,
    pub parent: Vec<Option<usize>>,
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
}

/// Recursive construction: the root is the extreme element (ties go to the
/// larger stable id), left and right subtrees are built on either side.
pub fn cartesian_recursive(values: &[(Weight, u64)], order: Order) -> BinaryTree {
    let n = values.len();
    let mut t = BinaryTree { root: None, parent: vec![None; n], left: vec![None; n], right: vec![None; n] };
    fn key(x: (Weight, u64), order: Order) -> (f64, u64) {
        match order {
            Order::MaxRoot => (x.0.value(), x.1),
            Order::MinRoot => (-x.0.value(), x.1),
        }
    }
    fn build(vals: &[(Weight, u64)], lo: usize, hi: usize, order: Order, t: &mut BinaryTree) -> Option<usize> {
        if lo >= hi {
            return None;
        }
        let mut best = lo;
        for i in lo + 1..hi {
            let (a, b) = (key(vals[i], order), key(vals[best], order));
            if a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).is_gt() {
                best = i;
            }
        }
        let l = build(vals, lo, best, order, t);
        let r = build(vals, best + 1, hi, order, t);
        t.left[best] = l;
        t.right[best] = r;
        for c in [l, r].into_iter().flatten() {
            t.parent[c] = Some(best);
        }
        Some(best)
    }
    t.root = build(values, 0, n, order, &mut t);
    t
}

/// Partition after merging every edge with weight `<= tau` (or `< tau`
/// when `strict`); clusters sorted by smallest member.
pub fn uf_threshold(num_vertices: usize, edges: &[Edge], tau: Weight, strict: bool) -> Vec<Vec<VertexId>> {
    let mut uf = UnionFind::new(num_vertices);
    for e in edges {
        let keep = if strict { e.weight.value() < tau.value() } else { e.weight.value() <= tau.value() };
        if keep {
            uf.union(e.key.lo as usize, e.key.hi as usize);
        }
    }
    let mut groups: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    for v in 0..num_vertices {
        groups.entry(uf.find(v)).or_default().push(v as VertexId);
    }
    let mut out: Vec<Vec<VertexId>> = groups.into_values().collect();
    out.sort();
    out
}

/// Predecessor and successor of `w` in a strictly increasing sequence.
pub fn linear_pws<T: Ord + Copy>(seq: &[T], w: T) -> (Option<T>, Option<T>) {
    let mut pred = None;
    let mut succ = None;
    for &x in seq {
        if x < w {
            pred = Some(x);
        } else if x > w && succ.is_none() {
            succ = Some(x);
        }
    }
    (pred, succ)
}

pub fn linear_median<T: Copy>(seq: &[T]) -> Option<T> {
    seq.get(seq.len() / 2).copied()
}
