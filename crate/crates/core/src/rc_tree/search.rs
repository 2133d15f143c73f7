//! Path weight search and path median on weight-monotone paths.

use super::{Cluster, Item, RCForest, RcWeight, Shape};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// Predecessor and successor vertices of a query weight on a path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pws {
    pub pred: Option<u32>,
    pub succ: Option<u32>,
}

struct Frame {
    owner: Option<Cluster>,
    items: Vec<Item>,
    pos: usize,
}

/// A resumable search over a path whose vertex weights strictly increase
/// from `u` to `v`. Each query continues from where the previous one
/// stopped, so a batch of increasing queries touches every hierarchy node
/// at most twice: once on the way down and once on the way back up.
pub struct MonotoneSearcher<'a, W: RcWeight> {
    forest: &'a RCForest<W>,
    frames: Vec<Frame>,
    last_below: Option<u32>,
    last_seen: Option<W>,
    last_query: Option<W>,
    visits: HashMap<Cluster, u32>,
    total: u64,
    len: usize,
}

impl<'a, W: RcWeight> MonotoneSearcher<'a, W> {
    pub fn new(forest: &'a RCForest<W>, u: u32, v: u32) -> Result<Self> {
        let pd = forest.path_decomposition(u, v)?;
        Ok(MonotoneSearcher {
            forest,
            frames: vec![Frame { owner: None, items: pd.full_items(), pos: 0 }],
            last_below: None,
            last_seen: None,
            last_query: None,
            visits: HashMap::new(),
            total: 0,
            len: pd.total_length,
        })
    }

    fn bump(&mut self, c: Cluster) {
        *self.visits.entry(c).or_default() += 1;
        self.total += 1;
        self.forest.visit(1);
    }

    /// Largest number of visits to any single hierarchy node so far.
    pub fn max_node_visits(&self) -> u32 {
        self.visits.values().copied().max().unwrap_or(0)
    }

    pub fn total_visits(&self) -> u64 {
        self.total
    }

    /// Number of vertices on the searched path.
    pub fn path_len(&self) -> usize {
        self.len
    }

    fn see(&mut self, w: W) -> Result<()> {
        if matches!(self.last_seen, Some(s) if s >= w) {
            return Err(Error::NonMonotonePath);
        }
        self.last_seen = Some(w);
        Ok(())
    }

    pub fn query(&mut self, w: W) -> Result<Pws> {
        if matches!(self.last_query, Some(q) if q >= w) {
            return Err(Error::NonIncreasingQueries);
        }
        self.last_query = Some(w);
        let mut pred_override: Option<Option<u32>> = None;
        loop {
            while let Some(top) = self.frames.last() {
                if top.pos < top.items.len() {
                    break;
                }
                self.frames.pop();
                if let Some(parent) = self.frames.last() {
                    if parent.pos < parent.items.len() {
                        if let Some(owner) = parent.owner {
                            self.bump(owner);
                        }
                    }
                }
            }
            let Some(top) = self.frames.last() else {
                return Ok(Pws { pred: pred_override.unwrap_or(self.last_below), succ: None });
            };
            match top.items[top.pos] {
                Item::Vertex(x) => {
                    let wx = self.forest.vertex_weight(x).ok_or(Error::NonMonotonePath)?;
                    if wx > w {
                        return Ok(Pws { pred: pred_override.unwrap_or(self.last_below), succ: Some(x) });
                    }
                    self.see(wx)?;
                    if wx == w {
                        pred_override = Some(self.last_below);
                    }
                    self.last_below = Some(x);
                    self.frames.last_mut().expect("frame").pos += 1;
                }
                Item::Piece { cluster, from, to } => {
                    let node = self.forest.node(cluster);
                    if node.agg.path_len == 0 {
                        self.frames.last_mut().expect("frame").pos += 1;
                        continue;
                    }
                    let (Some(lo), Some(hi)) = (node.agg.vmin, node.agg.vmax) else {
                        return Err(Error::NonMonotonePath);
                    };
                    if matches!(self.last_seen, Some(s) if s >= lo.0) {
                        return Err(Error::NonMonotonePath);
                    }
                    if hi.0 < w {
                        self.last_seen = Some(hi.0);
                        self.last_below = Some(hi.1);
                        self.frames.last_mut().expect("frame").pos += 1;
                    } else if lo.0 > w {
                        return Ok(Pws { pred: pred_override.unwrap_or(self.last_below), succ: Some(lo.1) });
                    } else {
                        let Shape::Compress { ends, edges } = node.shape else {
                            return Err(Error::NonMonotonePath);
                        };
                        let Cluster::Vertex(x) = cluster else { unreachable!() };
                        let (a, b) = if from == ends[0] { (0, 1) } else { (1, 0) };
                        let items = vec![
                            Item::Piece { cluster: edges[a], from, to: x },
                            Item::Vertex(x),
                            Item::Piece { cluster: edges[b], from: x, to },
                        ];
                        self.frames.last_mut().expect("frame").pos += 1;
                        self.frames.push(Frame { owner: Some(cluster), items, pos: 0 });
                        self.bump(cluster);
                    }
                }
            }
        }
    }
}

impl<W: RcWeight> RCForest<W> {
    pub fn searcher(&self, u: u32, v: u32) -> Result<MonotoneSearcher<'_, W>> {
        MonotoneSearcher::new(self, u, v)
    }

    /// Path weight search with strict inequalities on both sides.
    pub fn pws(&self, u: u32, v: u32, w: W) -> Result<Pws> {
        self.searcher(u, v)?.query(w)
    }

    /// Answers increasing queries over one path decomposition. Also returns
    /// the largest per-node visit count.
    pub fn pws_monotone_batch(&self, u: u32, v: u32, ws: &[W]) -> Result<(Vec<Pws>, u32)> {
        if ws.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::NonIncreasingQueries);
        }
        let mut s = self.searcher(u, v)?;
        let out = ws.iter().map(|&w| s.query(w)).collect::<Result<Vec<_>>>()?;
        Ok((out, s.max_node_visits()))
    }

    /// The vertex at index `⌊ℓ/2⌋` of the `ℓ`-vertex path `u -> v`.
    pub fn path_median(&self, u: u32, v: u32) -> Result<u32> {
        let pd = self.path_decomposition(u, v)?;
        let mut k = pd.total_length / 2;
        for it in pd.full_items() {
            match it {
                Item::Vertex(x) => {
                    if k == 0 {
                        return Ok(x);
                    }
                    k -= 1;
                }
                Item::Piece { cluster, from, .. } => {
                    let len = self.node(cluster).agg.path_len as usize;
                    if k < len {
                        return Ok(self.index_in(cluster, from, k));
                    }
                    k -= len;
                }
            }
        }
        unreachable!("median index lies on the path")
    }

    fn index_in(&self, mut cluster: Cluster, mut from: u32, mut k: usize) -> u32 {
        loop {
            self.visit(1);
            let Shape::Compress { ends, edges } = self.node(cluster).shape else {
                unreachable!("index inside an empty cluster")
            };
            let Cluster::Vertex(x) = cluster else { unreachable!() };
            let (a, b) = if from == ends[0] { (0, 1) } else { (1, 0) };
            let la = self.node(edges[a]).agg.path_len as usize;
            if k < la {
                cluster = edges[a];
            } else if k == la {
                return x;
            } else {
                k -= la + 1;
                cluster = edges[b];
                from = x;
            }
        }
    }
}
