//! Round-by-round contraction with change propagation, followed by a
//! bottom-up refresh of the clusters whose contents changed.

use super::{Agg, Cluster, Level, Node, RCForest, RcWeight, Shape};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

const SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Per-round priority; ties (which need a hash collision) fall back to id.
pub(crate) fn prio(v: u32, round: usize) -> (u64, u32) {
    (splitmix64(v as u64 ^ ((round as u64) << 32) ^ SALT), v)
}

fn min_opt<T: Ord>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

fn max_opt<T: Ord>(a: Option<T>, b: Option<T>) -> Option<T> {
    a.max(b)
}

impl<W: RcWeight> RCForest<W> {
    fn deg(&self, t: u32, r: usize) -> usize {
        self.levels[t as usize][r].adj.len()
    }

    /// Decision of live vertex `v` at round `r`; `None` keeps it alive.
    fn decide(&self, v: u32, r: usize) -> Option<Shape> {
        let adj = &self.levels[v as usize][r].adj;
        match adj.len() {
            0 => Some(Shape::Root),
            1 => {
                let (t, edge) = adj[0];
                let dt = self.deg(t, r);
                if dt >= 2 || (dt == 1 && prio(v, r) < prio(t, r)) {
                    Some(Shape::Rake { to: t, edge })
                } else {
                    None
                }
            }
            2 => {
                for &(t, _) in adj {
                    let dt = self.deg(t, r);
                    if dt == 1 || (dt == 2 && prio(t, r) < prio(v, r)) {
                        return None;
                    }
                }
                Some(Shape::Compress { ends: [adj[0].0, adj[1].0], edges: [adj[0].1, adj[1].1] })
            }
            _ => None,
        }
    }

    fn decision_at(&self, t: u32, r: usize, fresh: &HashMap<u32, Option<Shape>>) -> Option<Shape> {
        if let Some(d) = fresh.get(&t) {
            return *d;
        }
        if self.levels[t as usize].len() > r + 1 {
            None
        } else {
            Some(self.fate[t as usize])
        }
    }

    /// Re-runs contraction for the vertices whose round-0 adjacency changed,
    /// then refreshes aggregates of every affected cluster.
    pub(crate) fn propagate(&mut self, touched: Vec<u32>, mut dirty: Vec<Cluster>) {
        let mut changed = touched;
        changed.sort_unstable();
        changed.dedup();
        let mut r = 0usize;
        while !changed.is_empty() {
            let mut decide_set = changed.clone();
            for &v in &changed {
                decide_set.extend(self.levels[v as usize][r].adj.iter().map(|&(t, _)| t));
            }
            decide_set.sort_unstable();
            decide_set.dedup();
            let fresh: HashMap<u32, Option<Shape>> = decide_set.iter().map(|&v| (v, self.decide(v, r))).collect();
            self.visit(decide_set.len() as u64);

            let mut cand = decide_set.clone();
            for &v in &decide_set {
                cand.extend(self.levels[v as usize][r].adj.iter().map(|&(t, _)| t));
            }
            cand.sort_unstable();
            cand.dedup();

            let changed_set: HashSet<u32> = changed.iter().copied().collect();
            let mut updates = Vec::with_capacity(cand.len());
            for &v in &cand {
                let dv = self.decision_at(v, r, &fresh);
                let mut raked = Vec::new();
                let mut next = Vec::new();
                for &(t, c) in &self.levels[v as usize][r].adj {
                    match self.decision_at(t, r, &fresh) {
                        None => next.push((t, c)),
                        Some(Shape::Rake { .. }) => raked.push(Cluster::Vertex(t)),
                        Some(Shape::Compress { ends, .. }) => {
                            let other = if ends[0] == v { ends[1] } else { ends[0] };
                            next.push((other, Cluster::Vertex(t)));
                        }
                        Some(s) => unreachable!("neighbour {} of {} has shape {:?}", t, v, s),
                    }
                }
                next.sort_unstable();
                updates.push((v, dv, raked, next));
            }

            let mut next_changed = Vec::new();
            for (v, dv, raked, next) in updates {
                let vi = v as usize;
                let old = if self.levels[vi].len() > r + 1 { None } else { Some(self.fate[vi]) };
                if self.levels[vi][r].raked != raked {
                    self.levels[vi][r].raked = raked;
                    dirty.push(Cluster::Vertex(v));
                }
                if old != dv {
                    dirty.push(Cluster::Vertex(v));
                }
                match dv {
                    Some(shape) => {
                        self.levels[vi].truncate(r + 1);
                        self.fate[vi] = shape;
                        if changed_set.contains(&v) {
                            dirty.push(Cluster::Vertex(v));
                        }
                    }
                    None => {
                        if self.levels[vi].len() > r + 1 {
                            if self.levels[vi][r + 1].adj != next {
                                self.levels[vi][r + 1].adj = next;
                                next_changed.push(v);
                            }
                        } else {
                            self.levels[vi].push(Level { adj: next, raked: Vec::new() });
                            next_changed.push(v);
                        }
                    }
                }
            }
            changed = next_changed;
            r += 1;
        }
        self.refresh(dirty);
    }

    fn round_key(&self, c: Cluster) -> usize {
        match c {
            Cluster::Edge(_) => 0,
            Cluster::Vertex(v) => self.levels[v as usize].len(),
        }
    }

    fn build_node(&self, c: Cluster) -> Option<Node<W>> {
        match c {
            Cluster::Edge(e) => {
                let base = self.edges[e as usize].as_ref()?;
                let agg = Agg { emax: base.weight.map(|w| (w, e)), ..Agg::default() };
                Some(Node { shape: Shape::Base { ends: base.ends }, agg, children: Vec::new(), parent: None })
            }
            Cluster::Vertex(v) => {
                let vi = v as usize;
                let shape = self.fate[vi];
                let mut children: Vec<Cluster> = match shape {
                    Shape::Rake { edge, .. } => vec![edge],
                    Shape::Compress { edges, .. } => edges.to_vec(),
                    _ => Vec::new(),
                };
                for level in &self.levels[vi] {
                    children.extend_from_slice(&level.raked);
                }
                let own = self.vweight[vi].map(|w| (w, v));
                let mut agg = Agg { size: 1, min_vertex: v, all_max: own, ..Agg::default() };
                for &ch in &children {
                    let a = &self.node(ch).agg;
                    agg.size += a.size;
                    agg.min_vertex = agg.min_vertex.min(a.min_vertex);
                    agg.all_max = max_opt(agg.all_max, a.all_max);
                }
                if let Shape::Compress { edges, .. } = shape {
                    let (a, b) = (&self.node(edges[0]).agg, &self.node(edges[1]).agg);
                    agg.path_len = a.path_len + 1 + b.path_len;
                    agg.vmin = min_opt(min_opt(a.vmin, b.vmin), own);
                    agg.vmax = max_opt(max_opt(a.vmax, b.vmax), own);
                    agg.emax = max_opt(a.emax, b.emax);
                }
                let parent = self.vnode[vi].parent;
                Some(Node { shape, agg, children, parent })
            }
        }
    }

    /// Recomputes the given clusters bottom-up, climbing while contents change.
    pub(crate) fn refresh(&mut self, dirty: Vec<Cluster>) {
        let mut heap = BinaryHeap::new();
        let mut queued = HashSet::new();
        for c in dirty {
            if queued.insert(c) {
                heap.push(Reverse((self.round_key(c), c)));
            }
        }
        let mut work = 0u64;
        while let Some(Reverse((_, c))) = heap.pop() {
            queued.remove(&c);
            work += 1;
            let Some(mut node) = self.build_node(c) else { continue };
            let old_parent = match c {
                Cluster::Vertex(v) => self.vnode[v as usize].parent,
                Cluster::Edge(e) => self.enode[e as usize].as_ref().and_then(|n| n.parent),
            };
            node.parent = if matches!(node.shape, Shape::Root) { None } else { old_parent };
            for &ch in &node.children {
                match ch {
                    Cluster::Vertex(x) => self.vnode[x as usize].parent = Some(c),
                    Cluster::Edge(e) => {
                        if let Some(n) = self.enode[e as usize].as_mut() {
                            n.parent = Some(c);
                        }
                    }
                }
            }
            let slot = match c {
                Cluster::Vertex(v) => &mut self.vnode[v as usize],
                Cluster::Edge(e) => self.enode[e as usize].as_mut().expect("live edge"),
            };
            let unchanged = slot.shape == node.shape && slot.agg == node.agg && slot.children == node.children;
            *slot = node;
            if !unchanged {
                if let Some(p) = slot.parent {
                    if queued.insert(p) {
                        heap.push(Reverse((self.round_key(p), p)));
                    }
                }
            }
        }
        self.visit(work);
    }
}
