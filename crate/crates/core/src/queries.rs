//! Threshold clustering queries answered from the maintained dendrogram.

use crate::dendrogram::DendrogramState;
use crate::error::{Error, Result};
use crate::types::{min_incident_edge, Edge, VertexId, Weight};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A merge threshold. Inclusive merges every edge with weight `<= tau`;
/// strict merges only edges with weight `< tau`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdParam {
    pub tau: Weight,
    pub strict: bool,
}

impl ThresholdParam {
    pub fn inclusive(tau: Weight) -> Self {
        ThresholdParam { tau, strict: false }
    }

    pub fn strict(tau: Weight) -> Self {
        ThresholdParam { tau, strict: true }
    }

    /// Every edge that merges ranks at or below this sentinel.
    fn sentinel(&self) -> Edge {
        if self.strict {
            Edge::weight_floor(self.tau)
        } else {
            Edge::weight_ceiling(self.tau)
        }
    }

    pub fn merges(&self, e: &Edge) -> bool {
        if self.strict {
            *e < self.sentinel()
        } else {
            *e <= self.sentinel()
        }
    }
}

impl From<Weight> for ThresholdParam {
    fn from(tau: Weight) -> Self {
        ThresholdParam::inclusive(tau)
    }
}

impl DendrogramState {
    /// Whether `s` and `t` share a cluster at the threshold.
    pub fn threshold_query(&self, s: VertexId, t: VertexId, th: impl Into<ThresholdParam>) -> Result<bool> {
        let th = th.into();
        self.forest.check_vertex(s)?;
        self.forest.check_vertex(t)?;
        if s == t {
            return Ok(true);
        }
        match self.forest_rc.path_max_edge(s, t) {
            Ok(Some((e, _))) => Ok(th.merges(&e)),
            Ok(None) => Ok(true),
            Err(Error::NotConnected(..)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// The highest node on the spine of `u`'s lightest edge that merges at
    /// the threshold, and the root of that spine.
    fn cluster_top(&self, u: VertexId, th: &ThresholdParam) -> Result<Option<(u32, u32)>> {
        let Some(e) = min_incident_edge(&self.forest, u)? else {
            return Ok(None);
        };
        if !th.merges(&e) {
            return Ok(None);
        }
        let s = self.slot(e.key)?;
        let r = self.slot(self.root_of(e.key)?.key)?;
        let w = th.sentinel();
        // `e` itself ranks below the sentinel, so a predecessor exists.
        let b = self.sld_rc.pws(s, r, w)?.pred.expect("lightest edge merges");
        Ok(Some((b, r)))
    }

    /// Number of vertices in `u`'s cluster.
    pub fn cluster_size(&self, u: VertexId, th: impl Into<ThresholdParam>) -> Result<usize> {
        let th = th.into();
        self.forest.check_vertex(u)?;
        Ok(match self.cluster_top(u, &th)? {
            None => 1,
            Some((b, r)) => self.sld_rc.subtree_size(r, b)? + 1,
        })
    }

    /// The vertices of `u`'s cluster, ascending.
    pub fn cluster_report(&self, u: VertexId, th: impl Into<ThresholdParam>) -> Result<Vec<VertexId>> {
        let th = th.into();
        self.forest.check_vertex(u)?;
        let Some((b, r)) = self.cluster_top(u, &th)? else {
            return Ok(vec![u]);
        };
        let mut out = BTreeSet::new();
        for x in self.sld_rc.subtree_vertices(r, b)? {
            let e = self.node_at(x);
            out.insert(e.key.lo);
            out.insert(e.key.hi);
        }
        Ok(out.into_iter().collect())
    }

    /// Every cluster at the threshold, ordered by smallest member.
    pub fn flat_clustering(&self, th: impl Into<ThresholdParam>) -> Result<Vec<Vec<VertexId>>> {
        let th = th.into();
        let mut covered = vec![false; self.num_vertices()];
        let mut clusters = Vec::new();
        for (e, p) in self.parent_map() {
            if !th.merges(e) {
                // Keys ascend in rank, so nothing later merges either.
                break;
            }
            if p.is_some_and(|p| th.merges(&p)) {
                continue;
            }
            let s = self.slot(e.key)?;
            let r = self.slot(self.root_of(e.key)?.key)?;
            let mut members = BTreeSet::new();
            for x in self.sld_rc.subtree_vertices(r, s)? {
                let f = self.node_at(x);
                members.insert(f.key.lo);
                members.insert(f.key.hi);
            }
            for &v in &members {
                covered[v as usize] = true;
            }
            clusters.push(members.into_iter().collect::<Vec<_>>());
        }
        for (v, c) in covered.iter().enumerate() {
            if !c {
                clusters.push(vec![v as VertexId]);
            }
        }
        clusters.sort();
        Ok(clusters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_fixture() -> DendrogramState {
        DendrogramState::build(4, &[Edge::of(0, 1, 5.0), Edge::of(1, 2, 1.0), Edge::of(2, 3, 3.0)]).unwrap()
    }

    #[test]
    fn fixture_answers() {
        let d = path_fixture();
        let w = Weight::of;
        assert!(!d.threshold_query(0, 3, w(4.0)).unwrap());
        assert!(d.threshold_query(0, 3, w(5.0)).unwrap());
        assert!(!d.threshold_query(0, 3, ThresholdParam::strict(w(5.0))).unwrap());
        assert!(d.threshold_query(2, 2, w(-1.0)).unwrap());
        assert_eq!(d.cluster_size(1, w(3.0)).unwrap(), 3);
        assert_eq!(d.cluster_size(1, ThresholdParam::strict(w(3.0))).unwrap(), 2);
        assert_eq!(d.cluster_size(0, w(0.5)).unwrap(), 1);
        assert_eq!(d.cluster_size(0, w(9.0)).unwrap(), 4);
        assert_eq!(d.cluster_report(1, w(3.0)).unwrap(), vec![1, 2, 3]);
        assert_eq!(d.flat_clustering(w(3.0)).unwrap(), vec![vec![0], vec![1, 2, 3]]);
        assert_eq!(d.flat_clustering(w(0.0)).unwrap(), vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(d.flat_clustering(w(5.0)).unwrap(), vec![vec![0, 1, 2, 3]]);
        assert!(matches!(d.cluster_size(9, w(1.0)), Err(Error::VertexOutOfRange(9))));
    }

    #[test]
    fn isolated_vertices() {
        let d = DendrogramState::build(3, &[Edge::of(0, 1, 1.0)]).unwrap();
        assert_eq!(d.cluster_report(2, Weight::of(10.0)).unwrap(), vec![2]);
        assert!(!d.threshold_query(0, 2, Weight::of(10.0)).unwrap());
    }
}
