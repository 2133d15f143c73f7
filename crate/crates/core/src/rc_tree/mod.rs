//! Rake-compress forest over an arbitrary weighted forest.
//!
//! Contraction proceeds in rounds. In every round each live vertex looks at
//! its degree and the degrees and priorities of its neighbours and either
//! stays alive, rakes into its only neighbour, compresses between its two
//! neighbours, or finalizes an isolated component. The vertex `v` that
//! contracts owns the cluster `Cluster::Vertex(v)`; base edges own
//! `Cluster::Edge(id)`. Decisions depend only on the current forest, so the
//! hierarchy is a canonical function of the forest and updates can re-run
//! contraction on the affected vertices alone.

mod contract;
mod query;
mod search;

pub use query::{Item, PathDecomposition};
pub use search::{MonotoneSearcher, Pws};

use crate::error::{Error, Result};
use crate::types::EdgeKey;
use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::atomic::{AtomicU64, Ordering};

/// Height ceiling asserted by `audit`: `8·log2(n+2)+8` rounds.
pub fn height_bound(n: usize) -> usize {
    (8.0 * ((n + 2) as f64).log2() + 8.0).floor() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cluster {
    /// Formed when the vertex contracts.
    Vertex(u32),
    /// A base edge.
    Edge(u32),
}

/// How a cluster was formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Base {
        ends: [u32; 2],
    },
    Rake {
        to: u32,
        edge: Cluster,
    },
    /// `ends[0] < ends[1]`; `edges[i]` joins `ends[i]` to the contracted
    /// vertex.
    Compress {
        ends: [u32; 2],
        edges: [Cluster; 2],
    },
    Root,
}

impl Shape {
    pub fn boundaries(&self) -> &[u32] {
        match self {
            Shape::Base { ends } | Shape::Compress { ends, .. } => ends,
            Shape::Rake { to, .. } => std::slice::from_ref(to),
            Shape::Root => &[],
        }
    }
}

/// Cluster aggregates. Path fields cover the interior of a binary
/// cluster's path (boundary vertices excluded); subtree fields cover every
/// base vertex inside the cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Agg<W> {
    pub path_len: u32,
    pub vmin: Option<(W, u32)>,
    pub vmax: Option<(W, u32)>,
    pub emax: Option<(W, u32)>,
    pub size: u32,
    pub min_vertex: u32,
    pub all_max: Option<(W, u32)>,
}

impl<W> Default for Agg<W> {
    fn default() -> Self {
        Agg { path_len: 0, vmin: None, vmax: None, emax: None, size: 0, min_vertex: u32::MAX, all_max: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Node<W> {
    pub shape: Shape,
    pub agg: Agg<W>,
    pub children: Vec<Cluster>,
    pub parent: Option<Cluster>,
}

/// A vertex's view of one contraction round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Level {
    /// Live neighbours and the binary cluster joining them, sorted.
    pub adj: Vec<(u32, Cluster)>,
    /// Clusters raked into this vertex during the round.
    pub raked: Vec<Cluster>,
}

#[derive(Clone, Debug)]
pub(crate) struct BaseEdge<W> {
    pub ends: [u32; 2],
    pub weight: Option<W>,
}

pub trait RcWeight: Copy + Ord + Debug + Send + Sync {}
impl<T: Copy + Ord + Debug + Send + Sync> RcWeight for T {}

pub struct RCForest<W: RcWeight> {
    pub(crate) vweight: Vec<Option<W>>,
    pub(crate) levels: Vec<Vec<Level>>,
    pub(crate) fate: Vec<Shape>,
    pub(crate) vnode: Vec<Node<W>>,
    pub(crate) edges: Vec<Option<BaseEdge<W>>>,
    pub(crate) enode: Vec<Option<Node<W>>>,
    free_edges: Vec<u32>,
    edge_index: HashMap<(u32, u32), u32>,
    visits: AtomicU64,
}

impl<W: RcWeight> Clone for RCForest<W> {
    fn clone(&self) -> Self {
        RCForest {
            vweight: self.vweight.clone(),
            levels: self.levels.clone(),
            fate: self.fate.clone(),
            vnode: self.vnode.clone(),
            edges: self.edges.clone(),
            enode: self.enode.clone(),
            free_edges: self.free_edges.clone(),
            edge_index: self.edge_index.clone(),
            visits: AtomicU64::new(self.visits.load(Ordering::Relaxed)),
        }
    }
}

fn ordered(u: u32, v: u32) -> (u32, u32) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn key_of(u: u32, v: u32) -> EdgeKey {
    let (lo, hi) = ordered(u, v);
    EdgeKey { lo, hi }
}

impl<W: RcWeight> RCForest<W> {
    /// `n` isolated vertices without weights.
    pub fn new(n: usize) -> Self {
        Self::with_vertex_weights(vec![None; n])
    }

    pub fn with_vertex_weights(weights: Vec<Option<W>>) -> Self {
        let n = weights.len();
        let mut f = RCForest {
            vweight: weights,
            levels: vec![vec![Level::default()]; n],
            fate: vec![Shape::Root; n],
            vnode: vec![Node { shape: Shape::Root, agg: Agg::default(), children: Vec::new(), parent: None }; n],
            edges: Vec::new(),
            enode: Vec::new(),
            free_edges: Vec::new(),
            edge_index: HashMap::new(),
            visits: AtomicU64::new(0),
        };
        let all: Vec<u32> = (0..n as u32).collect();
        f.propagate(all, Vec::new());
        f.visits.store(0, Ordering::Relaxed);
        f
    }

    /// Builds the forest in one contraction pass.
    pub fn from_edges(weights: Vec<Option<W>>, edges: &[(u32, u32, Option<W>)]) -> Result<Self> {
        let mut f = Self::with_vertex_weights(weights);
        f.batch_link(edges)?;
        f.visits.store(0, Ordering::Relaxed);
        Ok(f)
    }

    pub fn num_vertices(&self) -> usize {
        self.vweight.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_index.len()
    }

    pub(crate) fn check(&self, v: u32) -> Result<()> {
        if (v as usize) < self.vweight.len() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v))
        }
    }

    pub(crate) fn visit(&self, k: u64) {
        self.visits.fetch_add(k, Ordering::Relaxed);
    }

    /// Hierarchy nodes touched since the last call.
    pub fn take_visits(&self) -> u64 {
        self.visits.swap(0, Ordering::Relaxed)
    }

    pub fn add_vertex(&mut self, weight: Option<W>) -> u32 {
        let v = self.vweight.len() as u32;
        self.vweight.push(weight);
        self.levels.push(vec![Level::default()]);
        self.fate.push(Shape::Root);
        self.vnode.push(Node { shape: Shape::Root, agg: Agg::default(), children: Vec::new(), parent: None });
        self.propagate(vec![v], Vec::new());
        v
    }

    pub fn vertex_weight(&self, v: u32) -> Option<W> {
        self.vweight.get(v as usize).copied().flatten()
    }

    pub fn set_vertex_weight(&mut self, v: u32, weight: Option<W>) -> Result<()> {
        self.check(v)?;
        self.vweight[v as usize] = weight;
        self.refresh(vec![Cluster::Vertex(v)]);
        Ok(())
    }

    pub fn edge_id(&self, u: u32, v: u32) -> Option<u32> {
        self.edge_index.get(&ordered(u, v)).copied()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edge_id(u, v).is_some()
    }

    pub fn edge_weight(&self, id: u32) -> Option<W> {
        self.edges.get(id as usize).and_then(|e| e.as_ref()).and_then(|e| e.weight)
    }

    pub fn edge_ends(&self, id: u32) -> Option<[u32; 2]> {
        self.edges.get(id as usize).and_then(|e| e.as_ref()).map(|e| e.ends)
    }

    pub fn link(&mut self, u: u32, v: u32, weight: Option<W>) -> Result<()> {
        self.batch_link(&[(u, v, weight)])
    }

    pub fn cut(&mut self, u: u32, v: u32) -> Result<()> {
        self.batch_cut(&[(u, v)])
    }

    /// Links every edge or none of them.
    pub fn batch_link(&mut self, links: &[(u32, u32, Option<W>)]) -> Result<()> {
        if links.is_empty() {
            return Ok(());
        }
        let mut bad = Vec::new();
        let mut uf: HashMap<u32, u32> = HashMap::new();
        fn find(uf: &mut HashMap<u32, u32>, x: u32) -> u32 {
            let p = *uf.get(&x).unwrap_or(&x);
            if p == x {
                return x;
            }
            let r = find(uf, p);
            uf.insert(x, r);
            r
        }
        for &(u, v, _) in links {
            self.check(u)?;
            self.check(v)?;
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let (ru, rv) = (self.root_cluster(u), self.root_cluster(v));
            let key = |c: Cluster| match c {
                Cluster::Vertex(x) => x,
                Cluster::Edge(_) => unreachable!("edge clusters are never roots"),
            };
            let (a, b) = (find(&mut uf, key(ru)), find(&mut uf, key(rv)));
            if a == b {
                bad.push(key_of(u, v));
            } else {
                uf.insert(a, b);
            }
        }
        if !bad.is_empty() {
            if links.len() == 1 {
                let (u, v, _) = links[0];
                return Err(Error::AlreadyConnected(u, v));
            }
            return Err(Error::BatchRejected(bad));
        }
        let mut touched = Vec::with_capacity(2 * links.len());
        let mut new_edges = Vec::with_capacity(links.len());
        for &(u, v, weight) in links {
            let id = match self.free_edges.pop() {
                Some(id) => id,
                None => {
                    self.edges.push(None);
                    self.enode.push(None);
                    (self.edges.len() - 1) as u32
                }
            };
            let ends = [u.min(v), u.max(v)];
            self.edges[id as usize] = Some(BaseEdge { ends, weight });
            self.enode[id as usize] =
                Some(Node { shape: Shape::Base { ends }, agg: Agg::default(), children: Vec::new(), parent: None });
            self.edge_index.insert(ordered(u, v), id);
            for (a, b) in [(u, v), (v, u)] {
                let adj = &mut self.levels[a as usize][0].adj;
                let pos = adj.partition_point(|&(t, _)| t < b);
                adj.insert(pos, (b, Cluster::Edge(id)));
            }
            touched.push(u);
            touched.push(v);
            new_edges.push(Cluster::Edge(id));
        }
        self.propagate(touched, new_edges);
        Ok(())
    }

    /// Cuts every edge or none of them.
    pub fn batch_cut(&mut self, cuts: &[(u32, u32)]) -> Result<()> {
        if cuts.is_empty() {
            return Ok(());
        }
        let mut seen = std::collections::HashSet::new();
        let mut bad = Vec::new();
        for &(u, v) in cuts {
            self.check(u)?;
            self.check(v)?;
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if self.edge_id(u, v).is_none() || !seen.insert(ordered(u, v)) {
                bad.push(key_of(u, v));
            }
        }
        if !bad.is_empty() {
            if cuts.len() == 1 {
                return Err(Error::NoSuchEdge(bad[0]));
            }
            return Err(Error::BatchRejected(bad));
        }
        let mut touched = Vec::with_capacity(2 * cuts.len());
        for &(u, v) in cuts {
            let id = self.edge_index.remove(&ordered(u, v)).expect("validated");
            self.edges[id as usize] = None;
            self.enode[id as usize] = None;
            self.free_edges.push(id);
            for (a, b) in [(u, v), (v, u)] {
                let adj = &mut self.levels[a as usize][0].adj;
                let pos = adj.iter().position(|&(t, _)| t == b).expect("adjacent");
                adj.remove(pos);
            }
            touched.push(u);
            touched.push(v);
        }
        self.propagate(touched, Vec::new());
        Ok(())
    }

    pub(crate) fn node(&self, c: Cluster) -> &Node<W> {
        match c {
            Cluster::Vertex(v) => &self.vnode[v as usize],
            Cluster::Edge(e) => self.enode[e as usize].as_ref().expect("live edge cluster"),
        }
    }

    pub fn agg(&self, c: Cluster) -> &Agg<W> {
        &self.node(c).agg
    }

    pub fn shape(&self, c: Cluster) -> Shape {
        self.node(c).shape
    }

    pub fn parent(&self, c: Cluster) -> Option<Cluster> {
        self.node(c).parent
    }

    /// Number of contraction rounds, i.e. the hierarchy height above the
    /// base level.
    pub fn height(&self) -> usize {
        self.levels.iter().map(|l| l.len()).max().unwrap_or(0)
    }

    /// One line per hierarchy node, `level kind children... aggregates...`,
    /// ordered by (level, min base vertex).
    pub fn dump(&self) -> String {
        let mut rows: Vec<(usize, u32, String)> = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            if let Some(e) = e {
                rows.push((0, e.ends[0], format!("0 base e{} {}-{} w={:?}", id, e.ends[0], e.ends[1], e.weight)));
            }
        }
        for v in 0..self.vweight.len() {
            let n = &self.vnode[v];
            let kind = match n.shape {
                Shape::Rake { .. } => "unary",
                Shape::Compress { .. } => "binary",
                Shape::Root => "root",
                Shape::Base { .. } => "base",
            };
            let kids: Vec<String> = n.children.iter().map(fmt_cluster).collect();
            rows.push((
                self.levels[v].len(),
                n.agg.min_vertex,
                format!(
                    "{} {} v{} [{}] len={} size={} vmin={:?} vmax={:?} emax={:?}",
                    self.levels[v].len(),
                    kind,
                    v,
                    kids.join(" "),
                    n.agg.path_len,
                    n.agg.size,
                    n.agg.vmin,
                    n.agg.vmax,
                    n.agg.emax
                ),
            ));
        }
        rows.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
        let mut out = String::new();
        for (_, _, s) in rows {
            out.push_str(&s);
            out.push('\n');
        }
        out
    }
}

fn fmt_cluster(c: &Cluster) -> String {
    match c {
        Cluster::Vertex(v) => format!("v{}", v),
        Cluster::Edge(e) => format!("e{}", e),
    }
}

impl<W: RcWeight> RCForest<W> {
    /// Compares the hierarchy with one built from scratch over the same
    /// base forest and checks the height ceiling.
    pub fn audit(&self) -> Result<()> {
        let n = self.num_vertices();
        let mut fresh = RCForest::with_vertex_weights(self.vweight.clone());
        fresh.edges = self.edges.clone();
        fresh.edge_index = self.edge_index.clone();
        fresh.free_edges = self.free_edges.clone();
        let mut live = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            fresh.enode.push(None);
            if let Some(e) = e {
                fresh.enode[id] = Some(Node {
                    shape: Shape::Base { ends: e.ends },
                    agg: Agg::default(),
                    children: Vec::new(),
                    parent: None,
                });
                for (a, b) in [(e.ends[0], e.ends[1]), (e.ends[1], e.ends[0])] {
                    fresh.levels[a as usize][0].adj.push((b, Cluster::Edge(id as u32)));
                }
                live.push(Cluster::Edge(id as u32));
            }
        }
        for l in fresh.levels.iter_mut() {
            l[0].adj.sort_unstable();
        }
        fresh.propagate((0..n as u32).collect(), live);
        if fresh.levels != self.levels || fresh.fate != self.fate {
            return Err(Error::ForestMismatch("contraction differs from a fresh build".into()));
        }
        if fresh.vnode != self.vnode {
            return Err(Error::ForestMismatch("vertex clusters differ from a fresh build".into()));
        }
        if fresh.enode != self.enode {
            return Err(Error::ForestMismatch("edge clusters differ from a fresh build".into()));
        }
        let h = self.height();
        if h > height_bound(self.num_vertices()) {
            return Err(Error::ForestMismatch(format!("height {} over bound", h)));
        }
        Ok(())
    }
}
