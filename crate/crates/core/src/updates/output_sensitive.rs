//! Alternating predecessor walk: one search per parent change.

use super::MergeOutcome;
use crate::dendrogram::DendrogramState;
use crate::error::Result;
use crate::types::{Edge, MergeStats};

impl DendrogramState {
    /// Discovers the parent changes of merging the spines headed by `a` and
    /// `b` without touching the structure. Each spine gets one resumable
    /// searcher, and its queries arrive in increasing rank.
    pub(crate) fn merge_alternating(&self, a: Edge, b: Edge) -> Result<MergeOutcome> {
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        let searcher = |head: Edge| -> Result<_> {
            let s = self.slot(head.key)?;
            let top = self.slot(self.root_of(head.key)?.key)?;
            self.sld_rc.searcher(s, top)
        };
        let mut spines = [searcher(lo)?, searcher(hi)?];
        let lens = [spines[0].path_len() as u64, spines[1].path_len() as u64];
        let mut changes = Vec::new();
        // Search the low spine for the node that must now point at `target`.
        let mut side = 0;
        let mut target = hi;
        loop {
            let found = spines[side].query(target)?;
            let x = self.node_at(found.pred.expect("spine head ranks below the target"));
            changes.push((x, Some(target)));
            match self.parent(&x) {
                None => break,
                Some(p) => {
                    target = p;
                    side ^= 1;
                }
            }
        }
        let c = changes.len() as u64;
        let max_visits = spines.iter().map(|s| s.max_node_visits()).max().unwrap_or(0);
        Ok(MergeOutcome {
            changes,
            stats: MergeStats { pointer_changes: c, pws_queries: c, median_queries: 0, depth: 0 },
            spine_lengths: lens,
            max_node_visits: max_visits,
        })
    }
}
