//! Rank-ordered merging of two spines given as explicit node lists.

use crate::types::Edge;
use rayon::prelude::*;

const SEQ_CUTOFF: usize = 2048;

pub fn merge_sorted(a: &[Edge], b: &[Edge]) -> Vec<Edge> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Fork-join merge: split the longer input at its middle, binary-search the
/// split value in the other, and merge both halves independently.
pub fn par_merge_sorted(a: &[Edge], b: &[Edge]) -> Vec<Edge> {
    let mut out = vec![Edge::of(0, 1, 0.0); a.len() + b.len()];
    par_merge_into(a, b, &mut out);
    out
}

fn par_merge_into(a: &[Edge], b: &[Edge], out: &mut [Edge]) {
    if a.len() + b.len() <= SEQ_CUTOFF {
        out.copy_from_slice(&merge_sorted(a, b));
        return;
    }
    let (a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mid = a.len() / 2;
    let j = b.partition_point(|x| *x < a[mid]);
    let (lo, hi) = out.split_at_mut(mid + j);
    rayon::join(|| par_merge_into(&a[..mid], &b[..j], lo), || par_merge_into(&a[mid..], &b[j..], hi));
}

/// Parent assignments that turn `chain` into a single root path, keeping
/// only those that differ from `current`.
pub fn chain_changes<F>(chain: &[Edge], current: F) -> Vec<(Edge, Option<Edge>)>
where
    F: Fn(&Edge) -> Option<Edge> + Sync,
{
    chain
        .par_iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let p = chain.get(i + 1).copied();
            (current(e) != p).then_some((*e, p))
        })
        .collect()
}
