//! Divide-and-conquer spine merge driven by median and predecessor queries.

use super::MergeOutcome;
use crate::dendrogram::DendrogramState;
use crate::error::Result;
use crate::types::{Edge, MergeStats};

/// A contiguous piece `lo..=hi` of a spine.
#[derive(Clone, Copy, Debug)]
struct Sub {
    lo: Edge,
    hi: Edge,
}

#[derive(Default)]
struct Found {
    runs: Vec<Sub>,
    pws: u64,
    medians: u64,
    depth: u64,
}

impl DendrogramState {
    fn pws_sub(&self, s: Sub, w: Edge) -> Result<(Option<Edge>, Option<Edge>)> {
        let r = self.sld_rc.pws(self.slot(s.lo.key)?, self.slot(s.hi.key)?, w)?;
        Ok((r.pred.map(|x| self.node_at(x)), r.succ.map(|x| self.node_at(x))))
    }

    fn dc(&self, a: Option<Sub>, b: Option<Sub>, designated_a: bool) -> Result<Found> {
        let (a, b) = match (a, b) {
            (None, None) => return Ok(Found::default()),
            (Some(s), None) | (None, Some(s)) => return Ok(Found { runs: vec![s], ..Found::default() }),
            (Some(a), Some(b)) => {
                if designated_a {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        };
        let m = self.node_at(self.sld_rc.path_median(self.slot(a.lo.key)?, self.slot(a.hi.key)?)?);
        let (xv, yv) = self.pws_sub(b, m)?;
        let mut pws = 1;
        // x_u below x_v and y_u above y_v bound the run of `a` that holds m.
        let (xu, mid_lo) = match xv {
            Some(x) => {
                pws += 1;
                let (p, s) = self.pws_sub(a, x)?;
                (p, s.expect("median lies above x_v"))
            }
            None => (None, a.lo),
        };
        let (mid_hi, yu) = match yv {
            Some(y) => {
                pws += 1;
                let (p, s) = self.pws_sub(a, y)?;
                (p.expect("median lies below y_v"), s)
            }
            None => (a.hi, None),
        };
        let lower_a = xu.map(|x| Sub { lo: a.lo, hi: x });
        let lower_b = xv.map(|x| Sub { lo: b.lo, hi: x });
        let upper_a = yu.map(|y| Sub { lo: y, hi: a.hi });
        let upper_b = yv.map(|y| Sub { lo: y, hi: b.hi });
        // The other spine leads the next level; `a` sits first in both calls.
        let (lower, upper) = rayon::join(|| self.dc(lower_a, lower_b, false), || self.dc(upper_a, upper_b, false));
        let (lower, upper) = (lower?, upper?);
        let mut runs = lower.runs;
        runs.push(Sub { lo: mid_lo, hi: mid_hi });
        runs.extend(upper.runs);
        Ok(Found {
            runs,
            pws: pws + lower.pws + upper.pws,
            medians: 1 + lower.medians + upper.medians,
            depth: 1 + lower.depth.max(upper.depth),
        })
    }

    /// Discovers the parent changes of merging the spines headed by `a` and
    /// `b`. The merged order is a list of alternating runs; each boundary
    /// between runs is one parent change.
    pub(crate) fn merge_divide_conquer(&self, a: Edge, b: Edge) -> Result<MergeOutcome> {
        let sa = Sub { lo: a, hi: self.root_of(a.key)? };
        let sb = Sub { lo: b, hi: self.root_of(b.key)? };
        let len = |s: Sub| -> Result<u64> {
            Ok(self.sld_rc.path_decomposition(self.slot(s.lo.key)?, self.slot(s.hi.key)?)?.total_length as u64)
        };
        let lens = [len(sa)?, len(sb)?];
        let found = self.dc(Some(sa), Some(sb), true)?;
        let changes: Vec<(Edge, Option<Edge>)> = found.runs.windows(2).map(|w| (w[0].hi, Some(w[1].lo))).collect();
        Ok(MergeOutcome {
            stats: MergeStats {
                pointer_changes: changes.len() as u64,
                pws_queries: found.pws,
                median_queries: found.medians,
                depth: found.depth,
            },
            changes,
            spine_lengths: lens,
            max_node_visits: 0,
        })
    }
}
