//! Connectivity, path decomposition and subtree queries.

use super::{Cluster, RCForest, RcWeight, Shape};
use crate::error::{Error, Result};
use rayon::prelude::*;

/// One element of a decomposed path between two vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Item {
    /// A single path vertex.
    Vertex(u32),
    /// The interior of a binary cluster's path, traversed `from` -> `to`.
    Piece { cluster: Cluster, from: u32, to: u32 },
}

impl Item {
    fn reversed(self) -> Item {
        match self {
            Item::Piece { cluster, from, to } => Item::Piece { cluster, from: to, to: from },
            v => v,
        }
    }
}

/// The path `u -> v` as binary clusters separated by boundary vertices.
/// `items` excludes `u` and `v` themselves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathDecomposition {
    pub u: u32,
    pub v: u32,
    pub items: Vec<Item>,
    /// Number of vertices on the path, endpoints included.
    pub total_length: usize,
}

impl PathDecomposition {
    pub fn clusters(&self) -> Vec<Cluster> {
        self.items
            .iter()
            .filter_map(|it| match it {
                Item::Piece { cluster, .. } => Some(*cluster),
                Item::Vertex(_) => None,
            })
            .collect()
    }

    /// Items with the endpoints added as vertices.
    pub fn full_items(&self) -> Vec<Item> {
        let mut out = Vec::with_capacity(self.items.len() + 2);
        out.push(Item::Vertex(self.u));
        if self.u != self.v {
            out.extend_from_slice(&self.items);
            out.push(Item::Vertex(self.v));
        }
        out
    }
}

/// Paths from a fixed vertex to each boundary of the cluster containing it.
type BoundaryPaths = Vec<(u32, Vec<Item>)>;

impl<W: RcWeight> RCForest<W> {
    /// Clusters from `Vertex(v)` up to the root of its component.
    pub(crate) fn ancestors(&self, v: u32) -> Vec<Cluster> {
        let mut out = vec![Cluster::Vertex(v)];
        let mut c = Cluster::Vertex(v);
        while let Some(p) = self.node(c).parent {
            out.push(p);
            c = p;
        }
        self.visit(out.len() as u64);
        out
    }

    pub(crate) fn root_cluster(&self, v: u32) -> Cluster {
        let mut c = Cluster::Vertex(v);
        let mut steps = 1;
        while let Some(p) = self.node(c).parent {
            c = p;
            steps += 1;
        }
        self.visit(steps);
        c
    }

    pub fn connected(&self, u: u32, v: u32) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        Ok(u == v || self.root_cluster(u) == self.root_cluster(v))
    }

    /// Smallest vertex id of the component, read from the root cluster.
    pub fn representative(&self, v: u32) -> Result<u32> {
        self.check(v)?;
        Ok(self.node(self.root_cluster(v)).agg.min_vertex)
    }

    pub fn batch_connected(&self, pairs: &[(u32, u32)]) -> Result<Vec<bool>> {
        for &(u, v) in pairs {
            self.check(u)?;
            self.check(v)?;
        }
        Ok(pairs.par_iter().map(|&(u, v)| u == v || self.root_cluster(u) == self.root_cluster(v)).collect())
    }

    pub fn component_size(&self, v: u32) -> Result<usize> {
        self.check(v)?;
        Ok(self.node(self.root_cluster(v)).agg.size as usize)
    }

    /// The weight-maximum vertex of `v`'s component.
    pub fn component_max_vertex(&self, v: u32) -> Result<Option<(W, u32)>> {
        self.check(v)?;
        Ok(self.node(self.root_cluster(v)).agg.all_max)
    }

    /// Paths from `v` to the boundaries of each ancestor cluster, bottom-up.
    fn climb(&self, chain: &[Cluster], v: u32, upto: usize) -> BoundaryPaths {
        let mut paths: BoundaryPaths = match self.node(Cluster::Vertex(v)).shape {
            Shape::Rake { to, edge } => vec![(to, vec![Item::Piece { cluster: edge, from: v, to }])],
            Shape::Compress { ends, edges } => {
                (0..2).map(|i| (ends[i], vec![Item::Piece { cluster: edges[i], from: v, to: ends[i] }])).collect()
            }
            _ => Vec::new(),
        };
        for w in chain[..=upto].windows(2) {
            let Cluster::Vertex(p) = w[1] else { unreachable!("edge clusters have no children") };
            let pnode = self.node(w[1]);
            let to_p = paths.iter().find(|(b, _)| *b == p).map(|(_, its)| its.clone()).unwrap_or_default();
            let mut next = Vec::with_capacity(2);
            match pnode.shape {
                Shape::Rake { to, edge } => next.push((to, self.extend_via(&paths, &to_p, p, to, edge))),
                Shape::Compress { ends, edges } => {
                    for i in 0..2 {
                        next.push((ends[i], self.extend_via(&paths, &to_p, p, ends[i], edges[i])));
                    }
                }
                _ => {}
            }
            paths = next;
        }
        paths
    }

    fn extend_via(&self, paths: &BoundaryPaths, to_p: &[Item], p: u32, c: u32, edge: Cluster) -> Vec<Item> {
        if let Some((_, its)) = paths.iter().find(|(b, _)| *b == c) {
            return its.clone();
        }
        let mut its = to_p.to_vec();
        its.push(Item::Vertex(p));
        its.push(Item::Piece { cluster: edge, from: p, to: c });
        its
    }

    pub fn path_decomposition(&self, u: u32, v: u32) -> Result<PathDecomposition> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(PathDecomposition { u, v, items: Vec::new(), total_length: 1 });
        }
        let cu = self.ancestors(u);
        let cv = self.ancestors(v);
        if cu.last() != cv.last() {
            return Err(Error::NotConnected(u, v));
        }
        // Lowest common ancestor: strip the shared suffix.
        let (mut i, mut j) = (cu.len() - 1, cv.len() - 1);
        while i > 0 && j > 0 && cu[i - 1] == cv[j - 1] {
            i -= 1;
            j -= 1;
        }
        let lca = cu[i];
        let Cluster::Vertex(l) = lca else { unreachable!() };
        let items = if l == u {
            let from_v = self.climb(&cv, v, j - 1);
            let its = lookup(&from_v, u);
            its.iter().rev().map(|it| it.reversed()).collect()
        } else if l == v {
            lookup(&self.climb(&cu, u, i - 1), v)
        } else {
            let mut its = lookup(&self.climb(&cu, u, i - 1), l);
            its.push(Item::Vertex(l));
            let back = lookup(&self.climb(&cv, v, j - 1), l);
            its.extend(back.iter().rev().map(|it| it.reversed()));
            its
        };
        let total_length = 2 + items
            .iter()
            .map(|it| match it {
                Item::Vertex(_) => 1,
                Item::Piece { cluster, .. } => self.node(*cluster).agg.path_len as usize,
            })
            .sum::<usize>();
        Ok(PathDecomposition { u, v, items, total_length })
    }

    /// Interior vertices of a binary cluster in `from -> to` order.
    pub(crate) fn unpack_into(&self, cluster: Cluster, from: u32, out: &mut Vec<u32>) {
        if let Shape::Compress { ends, edges } = self.node(cluster).shape {
            let Cluster::Vertex(x) = cluster else { unreachable!() };
            let (first, second) = if from == ends[0] { (0, 1) } else { (1, 0) };
            self.unpack_into(edges[first], ends[first], out);
            out.push(x);
            self.unpack_into(edges[second], x, out);
        }
    }

    fn unpack_par(&self, cluster: Cluster, from: u32) -> Vec<u32> {
        const SEQUENTIAL: u32 = 256;
        let node = self.node(cluster);
        if node.agg.path_len <= SEQUENTIAL {
            let mut out = Vec::with_capacity(node.agg.path_len as usize);
            self.unpack_into(cluster, from, &mut out);
            return out;
        }
        let Shape::Compress { ends, edges } = node.shape else { unreachable!() };
        let Cluster::Vertex(x) = cluster else { unreachable!() };
        let (first, second) = if from == ends[0] { (0, 1) } else { (1, 0) };
        let (mut a, b) =
            rayon::join(|| self.unpack_par(edges[first], ends[first]), || self.unpack_par(edges[second], x));
        a.push(x);
        a.extend(b);
        a
    }

    /// The full `u -> v` vertex sequence, unpacked in parallel.
    pub fn extract_path(&self, u: u32, v: u32) -> Result<Vec<u32>> {
        let pd = self.path_decomposition(u, v)?;
        let parts: Vec<Vec<u32>> = pd
            .full_items()
            .par_iter()
            .map(|it| match *it {
                Item::Vertex(x) => vec![x],
                Item::Piece { cluster, from, .. } => self.unpack_par(cluster, from),
            })
            .collect();
        let mut out = Vec::with_capacity(pd.total_length);
        for p in parts {
            out.extend(p);
        }
        self.visit(out.len() as u64);
        Ok(out)
    }

    /// The weight-maximum edge on the path, as `(weight, edge id)`.
    pub fn path_max_edge(&self, u: u32, v: u32) -> Result<Option<(W, u32)>> {
        if u == v {
            self.check(u)?;
            return Err(Error::SameVertex(u));
        }
        let pd = self.path_decomposition(u, v)?;
        Ok(pd
            .items
            .iter()
            .filter_map(|it| match it {
                Item::Piece { cluster, .. } => self.node(*cluster).agg.emax,
                Item::Vertex(_) => None,
            })
            .max())
    }

    /// The neighbour of `v` on the path from `v` to `r`.
    fn next_toward(&self, v: u32, r: u32) -> Result<u32> {
        let pd = self.path_decomposition(v, r)?;
        Ok(match pd.items.first() {
            None => r,
            Some(Item::Vertex(x)) => *x,
            Some(&Item::Piece { cluster, from, to }) => {
                let mut c = cluster;
                loop {
                    let Shape::Compress { ends, edges } = self.node(c).shape else { break to };
                    let Cluster::Vertex(x) = c else { unreachable!() };
                    let sub = edges[if from == ends[0] { 0 } else { 1 }];
                    if self.node(sub).agg.path_len == 0 {
                        break x;
                    }
                    c = sub;
                }
            }
        })
    }

    /// Material on `v`'s side of the base edge `(q, v)`: single vertices and
    /// whole clusters.
    fn side_of(&self, q: u32, v: u32) -> (Vec<u32>, Vec<Cluster>) {
        let mut c = Cluster::Edge(self.edge_id(q, v).expect("adjacent"));
        let mut on_v: Vec<(u32, bool)> = vec![(q, false), (v, true)];
        let (mut singles, mut whole) = (Vec::new(), Vec::new());
        let mut steps = 0;
        while let Some(p) = self.node(c).parent {
            steps += 1;
            let Cluster::Vertex(px) = p else { unreachable!() };
            let pside = on_v.iter().find(|(b, _)| *b == px).map(|(_, s)| *s).expect("boundary");
            let pnode = self.node(p);
            if pside {
                singles.push(px);
                whole.extend(pnode.children.iter().copied().filter(|&ch| ch != c));
            }
            on_v = pnode
                .shape
                .boundaries()
                .iter()
                .map(|&b| (b, on_v.iter().find(|(x, _)| *x == b).map(|(_, s)| *s).unwrap_or(pside)))
                .collect();
            c = p;
        }
        self.visit(steps + whole.len() as u64);
        (singles, whole)
    }

    /// Number of vertices whose path to `root` passes through `v`.
    pub fn subtree_size(&self, root: u32, v: u32) -> Result<usize> {
        if !self.connected(root, v)? {
            return Err(Error::NotConnected(root, v));
        }
        if root == v {
            return self.component_size(v);
        }
        let q = self.next_toward(v, root)?;
        let (singles, whole) = self.side_of(q, v);
        Ok(singles.len() + whole.iter().map(|&c| self.node(c).agg.size as usize).sum::<usize>())
    }

    /// The vertices counted by `subtree_size`, in no particular order.
    pub fn subtree_vertices(&self, root: u32, v: u32) -> Result<Vec<u32>> {
        if !self.connected(root, v)? {
            return Err(Error::NotConnected(root, v));
        }
        let mut out = Vec::new();
        if root == v {
            self.collect_vertices(self.root_cluster(v), &mut out);
            return Ok(out);
        }
        let q = self.next_toward(v, root)?;
        let (singles, whole) = self.side_of(q, v);
        out.extend(singles);
        for c in whole {
            self.collect_vertices(c, &mut out);
        }
        Ok(out)
    }

    fn collect_vertices(&self, c: Cluster, out: &mut Vec<u32>) {
        if let Cluster::Vertex(x) = c {
            out.push(x);
        }
        for &ch in &self.node(c).children {
            self.collect_vertices(ch, out);
        }
    }
}

fn lookup(paths: &BoundaryPaths, b: u32) -> Vec<Item> {
    paths.iter().find(|(x, _)| *x == b).map(|(_, its)| its.clone()).expect("boundary path")
}
