//! Identifiers, weights, the rank order on edges, parent maps and the
//! per-update instrumentation record.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Duration;

pub type VertexId = u32;

/// A finite 64-bit weight, totally ordered by `f64::total_cmp`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Weight(f64);

impl Weight {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            // -0.0 and 0.0 would otherwise be distinct under total_cmp.
            Ok(Weight(if value == 0.0 { 0.0 } else { value }))
        } else {
            Err(Error::NonFiniteWeight)
        }
    }

    /// Panics on non-finite input; meant for literals and generated data.
    pub fn of(value: f64) -> Self {
        Self::new(value).expect("finite weight")
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::ops::Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight::of(-self.0)
    }
}

impl TryFrom<f64> for Weight {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Weight::new(v)
    }
}

impl From<Weight> for f64 {
    fn from(w: Weight) -> f64 {
        w.0
    }
}

impl PartialEq for Weight {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Weight {}
impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Rust's shortest round-trip formatting.
        write!(f, "{}", self.0)
    }
}

/// Canonical unordered vertex pair, `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub lo: VertexId,
    pub hi: VertexId,
}

impl EdgeKey {
    pub fn new(u: VertexId, v: VertexId) -> Result<Self> {
        match u.cmp(&v) {
            Ordering::Less => Ok(EdgeKey { lo: u, hi: v }),
            Ordering::Greater => Ok(EdgeKey { lo: v, hi: u }),
            Ordering::Equal => Err(Error::SelfLoop(u)),
        }
    }

    pub fn of(u: VertexId, v: VertexId) -> Self {
        Self::new(u, v).expect("distinct endpoints")
    }

    pub fn other(self, x: VertexId) -> VertexId {
        if x == self.lo {
            self.hi
        } else {
            self.lo
        }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

/// A weighted forest edge. The derived order is (weight, lo, hi), which is
/// the rank order used everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub weight: Weight,
    pub key: EdgeKey,
}

impl std::hash::Hash for Weight {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state)
    }
}

impl Edge {
    pub fn new(u: VertexId, v: VertexId, w: f64) -> Result<Self> {
        Ok(Edge { weight: Weight::new(w)?, key: EdgeKey::new(u, v)? })
    }

    pub fn of(u: VertexId, v: VertexId, w: f64) -> Self {
        Edge { weight: Weight::of(w), key: EdgeKey::of(u, v) }
    }

    /// Largest possible rank with the given weight.
    pub fn weight_ceiling(w: Weight) -> Self {
        Edge { weight: w, key: EdgeKey { lo: u32::MAX - 1, hi: u32::MAX } }
    }

    /// Smallest possible rank with the given weight.
    pub fn weight_floor(w: Weight) -> Self {
        Edge { weight: w, key: EdgeKey { lo: 0, hi: 1 } }
    }

    pub fn lo(&self) -> VertexId {
        self.key.lo
    }

    pub fn hi(&self) -> VertexId {
        self.key.hi
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.key, self.weight)
    }
}

pub fn rank_less(a: &Edge, b: &Edge) -> bool {
    a < b
}

/// Parent pointers of the dendrogram, keyed in rank order. `None` is ROOT.
pub type ParentMap = BTreeMap<Edge, Option<Edge>>;

/// One line per node, in rank order: `u-v w -> x-y` or `u-v w -> ROOT`.
pub fn serialize_canonical(map: &ParentMap) -> String {
    let mut out = String::new();
    for (e, p) in map {
        match p {
            Some(p) => out.push_str(&format!("{} -> {}\n", e, p.key)),
            None => out.push_str(&format!("{} -> ROOT\n", e)),
        }
    }
    out
}

/// Heap order and termination of every root walk.
pub fn check_parent_map(map: &ParentMap) -> Result<()> {
    for (e, p) in map {
        if let Some(p) = p {
            if !map.contains_key(p) {
                return Err(Error::NoSuchEdge(p.key));
            }
            if p <= e {
                return Err(Error::HeapViolation { node: e.key, parent: p.key });
            }
        }
    }
    // Strictly increasing ranks along every walk rule out cycles.
    Ok(())
}

/// A root-directed path of dendrogram nodes, lowest rank first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spine {
    pub nodes: Vec<Edge>,
    /// Smallest vertex of the forest component the spine lives in.
    pub component: Option<VertexId>,
}

impl Spine {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.nodes.windows(2).all(|w| w[0] < w[1])
    }
}

/// Counters for a single spine merge.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeStats {
    pub pointer_changes: u64,
    pub pws_queries: u64,
    pub median_queries: u64,
    pub depth: u64,
}

/// Instrumentation produced by every update.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub pointer_changes: u64,
    pub pws_queries: u64,
    pub median_queries: u64,
    pub rc_nodes_visited: u64,
    pub spine_lengths: Vec<u64>,
    pub dendrogram_height: u64,
    #[serde(with = "duration_secs")]
    pub elapsed: Duration,
    pub merges: Vec<MergeStats>,
    pub rounds: u64,
    pub max_depth: u64,
    pub max_node_visits: u64,
}

impl UpdateReport {
    /// Adds the counters of `other`; heights and maxima take the larger value.
    pub fn absorb(&mut self, other: &UpdateReport) {
        self.pointer_changes += other.pointer_changes;
        self.pws_queries += other.pws_queries;
        self.median_queries += other.median_queries;
        self.rc_nodes_visited += other.rc_nodes_visited;
        self.spine_lengths.extend_from_slice(&other.spine_lengths);
        self.dendrogram_height = self.dendrogram_height.max(other.dendrogram_height);
        self.elapsed += other.elapsed;
        self.merges.extend(other.merges.iter().cloned());
        self.rounds += other.rounds;
        self.max_depth = self.max_depth.max(other.max_depth);
        self.max_node_visits = self.max_node_visits.max(other.max_node_visits);
    }
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Ok(Duration::from_secs_f64(secs.max(0.0)))
    }
}

/// The input forest with rank-ordered adjacency.
#[derive(Clone, Debug, Default)]
pub struct ForestState {
    pub num_vertices: usize,
    pub edges: BTreeMap<EdgeKey, Edge>,
    pub adjacency: Vec<BTreeSet<Edge>>,
}

impl ForestState {
    pub fn new(num_vertices: usize) -> Self {
        ForestState { num_vertices, edges: BTreeMap::new(), adjacency: vec![BTreeSet::new(); num_vertices] }
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.num_vertices {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v))
        }
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.adjacency.push(BTreeSet::new());
        self.num_vertices += 1;
        (self.num_vertices - 1) as VertexId
    }

    /// Adds the edge without any cycle check.
    pub fn insert_edge(&mut self, e: Edge) {
        self.edges.insert(e.key, e);
        self.adjacency[e.key.lo as usize].insert(e);
        self.adjacency[e.key.hi as usize].insert(e);
    }

    pub fn remove_edge(&mut self, key: EdgeKey) -> Option<Edge> {
        let e = self.edges.remove(&key)?;
        self.adjacency[key.lo as usize].remove(&e);
        self.adjacency[key.hi as usize].remove(&e);
        Some(e)
    }

    pub fn edge(&self, key: EdgeKey) -> Option<Edge> {
        self.edges.get(&key).copied()
    }

    pub fn edge_list(&self) -> Vec<Edge> {
        self.edges.values().copied().collect()
    }
}

/// The rank-minimum edge incident to `v`.
pub fn min_incident_edge(f: &ForestState, v: VertexId) -> Result<Option<Edge>> {
    f.check_vertex(v)?;
    Ok(f.adjacency[v as usize].first().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_less_examples() {
        assert!(rank_less(&Edge::of(0, 1, 1.0), &Edge::of(2, 3, 2.0)));
        assert!(rank_less(&Edge::of(0, 1, 1.0), &Edge::of(0, 2, 1.0)));
        let a = Edge::of(0, 1, 1.0);
        assert!(!rank_less(&a, &a));
    }

    #[test]
    fn rank_order_is_total_on_small_sets() {
        let mut es = Vec::new();
        for w in [0.0, 1.0, 1.5] {
            for lo in 0..3 {
                for hi in lo + 1..4 {
                    es.push(Edge::of(lo, hi, w));
                }
            }
        }
        for a in &es {
            for b in &es {
                let ab = rank_less(a, b);
                let ba = rank_less(b, a);
                assert!(!(ab && ba));
                assert_eq!(a == b, !ab && !ba);
                for c in &es {
                    if ab && rank_less(b, c) {
                        assert!(rank_less(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn weights_reject_non_finite() {
        assert_eq!(Weight::new(f64::NAN), Err(Error::NonFiniteWeight));
        assert_eq!(Weight::new(f64::INFINITY), Err(Error::NonFiniteWeight));
        assert_eq!(Weight::of(-0.0), Weight::of(0.0));
    }

    #[test]
    fn weight_display_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e300, -2.5e-300, 7.0] {
            let s = Weight::of(v).to_string();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    fn path_fixture() -> ForestState {
        let mut f = ForestState::new(4);
        for e in [Edge::of(0, 1, 5.0), Edge::of(1, 2, 1.0), Edge::of(2, 3, 3.0)] {
            f.insert_edge(e);
        }
        f
    }

    #[test]
    fn min_incident_on_path_fixture() {
        let mut f = path_fixture();
        assert_eq!(min_incident_edge(&f, 1).unwrap(), Some(Edge::of(1, 2, 1.0)));
        assert_eq!(min_incident_edge(&f, 0).unwrap(), Some(Edge::of(0, 1, 5.0)));
        let iso = f.add_vertex();
        assert_eq!(min_incident_edge(&f, iso).unwrap(), None);
        assert_eq!(min_incident_edge(&f, 99), Err(Error::VertexOutOfRange(99)));
    }

    #[test]
    fn canonical_format() {
        let mut m = ParentMap::new();
        m.insert(Edge::of(1, 2, 1.0), Some(Edge::of(2, 3, 3.0)));
        m.insert(Edge::of(2, 3, 3.0), None);
        assert_eq!(serialize_canonical(&m), "1-2 1 -> 2-3\n2-3 3 -> ROOT\n");
        assert!(check_parent_map(&m).is_ok());
        m.insert(Edge::of(2, 3, 3.0), Some(Edge::of(1, 2, 1.0)));
        assert!(matches!(check_parent_map(&m), Err(Error::HeapViolation { .. })));
    }
}
