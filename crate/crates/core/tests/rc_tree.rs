use dynsld::rc_tree::{height_bound, RCForest};
use dynsld::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, VecDeque};

/// Plain adjacency-list forest used as the reference.
struct Naive {
    adj: Vec<BTreeSet<u32>>,
}

impl Naive {
    fn new(n: usize) -> Self {
        Naive { adj: vec![BTreeSet::new(); n] }
    }

    fn path(&self, u: u32, v: u32) -> Option<Vec<u32>> {
        let n = self.adj.len();
        let mut prev = vec![u32::MAX; n];
        let mut q = VecDeque::from([u]);
        prev[u as usize] = u;
        while let Some(x) = q.pop_front() {
            for &y in &self.adj[x as usize] {
                if prev[y as usize] == u32::MAX {
                    prev[y as usize] = x;
                    q.push_back(y);
                }
            }
        }
        if prev[v as usize] == u32::MAX {
            return None;
        }
        let mut out = vec![v];
        let mut x = v;
        while x != u {
            x = prev[x as usize];
            out.push(x);
        }
        out.reverse();
        Some(out)
    }

    fn below(&self, root: u32, v: u32) -> usize {
        // Vertices whose path to root passes through v.
        (0..self.adj.len() as u32).filter(|&x| self.path(x, root).is_some_and(|p| p.contains(&v))).count()
    }
}

fn random_ops(seed: u64, n: usize, steps: usize) -> (RCForest<i64>, Naive) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f: RCForest<i64> = RCForest::new(n);
    let mut naive = Naive::new(n);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for _ in 0..steps {
        if edges.is_empty() || rng.gen_bool(0.6) {
            let u = rng.gen_range(0..n as u32);
            let v = rng.gen_range(0..n as u32);
            if u == v || naive.path(u, v).is_some() {
                assert!(f.link(u, v, Some(0)).is_err());
                continue;
            }
            f.link(u, v, Some(rng.gen_range(0..100))).unwrap();
            naive.adj[u as usize].insert(v);
            naive.adj[v as usize].insert(u);
            edges.push((u, v));
        } else {
            let i = rng.gen_range(0..edges.len());
            let (u, v) = edges.swap_remove(i);
            f.cut(u, v).unwrap();
            naive.adj[u as usize].remove(&v);
            naive.adj[v as usize].remove(&u);
        }
    }
    (f, naive)
}

#[test]
fn link_cut_basics() {
    let mut f: RCForest<i64> = RCForest::new(3);
    f.link(0, 1, None).unwrap();
    assert!(f.connected(0, 1).unwrap());
    assert_eq!(f.component_size(0).unwrap(), 2);
    assert_eq!(f.link(1, 0, None), Err(Error::AlreadyConnected(1, 0)));
    f.cut(0, 1).unwrap();
    assert!(!f.connected(0, 1).unwrap());
    assert!(matches!(f.cut(0, 1), Err(Error::NoSuchEdge(_))));
    f.audit().unwrap();
}

#[test]
fn batch_link_rejects_cycles_atomically() {
    let mut f: RCForest<i64> = RCForest::new(4);
    f.batch_link(&[]).unwrap();
    let before = f.dump();
    let err = f.batch_link(&[(0, 1, None), (1, 2, None), (2, 0, None)]).unwrap_err();
    assert!(matches!(err, Error::BatchRejected(_)));
    assert_eq!(f.dump(), before);
    f.batch_link(&[(0, 1, None), (0, 2, None), (0, 3, None)]).unwrap();
    let mut g: RCForest<i64> = RCForest::new(4);
    for v in 1..4 {
        g.link(0, v, None).unwrap();
    }
    for v in 0..4 {
        assert_eq!(f.representative(v).unwrap(), g.representative(v).unwrap());
    }
    // Incremental and batch construction yield the same canonical hierarchy.
    assert_eq!(f.dump(), g.dump());
}

#[test]
fn path_decomposition_small_cases() {
    let mut f: RCForest<i64> = RCForest::new(3);
    let pd = f.path_decomposition(1, 1).unwrap();
    assert!(pd.clusters().is_empty());
    assert_eq!(pd.total_length, 1);
    f.link(0, 1, None).unwrap();
    let pd = f.path_decomposition(0, 1).unwrap();
    assert_eq!(pd.clusters().len(), 1);
    assert_eq!(pd.total_length, 2);
    assert_eq!(f.extract_path(0, 1).unwrap(), vec![0, 1]);
    assert_eq!(f.extract_path(2, 2).unwrap(), vec![2]);
    assert_eq!(f.path_decomposition(0, 2), Err(Error::NotConnected(0, 2)));
}

#[test]
fn path_max_on_fixture() {
    let f: RCForest<i64> =
        RCForest::from_edges(vec![None; 4], &[(0, 1, Some(5)), (1, 2, Some(1)), (2, 3, Some(3))]).unwrap();
    let (w, id) = f.path_max_edge(0, 3).unwrap().unwrap();
    assert_eq!(w, 5);
    assert_eq!(f.edge_ends(id), Some([0, 1]));
    assert_eq!(f.path_max_edge(2, 3).unwrap().unwrap().0, 3);
    assert_eq!(f.path_max_edge(2, 2), Err(Error::SameVertex(2)));
}

#[test]
fn incremental_matches_fresh_build() {
    for seed in 0..12 {
        let (f, _) = random_ops(seed, 48, 300);
        f.audit().unwrap();
    }
}

#[test]
fn connectivity_matches_bfs() {
    let (f, naive) = random_ops(7, 64, 400);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let pairs: Vec<(u32, u32)> = (0..100).map(|_| (rng.gen_range(0..64), rng.gen_range(0..64))).collect();
    let got = f.batch_connected(&pairs).unwrap();
    for (i, &(u, v)) in pairs.iter().enumerate() {
        assert_eq!(got[i], naive.path(u, v).is_some());
        assert_eq!(f.connected(u, v).unwrap(), got[i]);
        assert_eq!(f.representative(u).unwrap() == f.representative(v).unwrap(), got[i]);
    }
}

#[test]
fn paths_match_bfs_for_all_pairs() {
    let (f, naive) = random_ops(3, 64, 200);
    for u in 0..64u32 {
        for v in 0..64u32 {
            match naive.path(u, v) {
                None => assert!(f.extract_path(u, v).is_err()),
                Some(p) => {
                    assert_eq!(f.extract_path(u, v).unwrap(), p, "path {}->{}", u, v);
                    let pd = f.path_decomposition(u, v).unwrap();
                    assert_eq!(pd.total_length, p.len());
                    assert_eq!(f.path_median(u, v).unwrap(), p[p.len() / 2]);
                }
            }
        }
    }
}

#[test]
fn path_max_matches_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 64u32;
    let mut links = Vec::new();
    let mut naive = Naive::new(n as usize);
    let mut w = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let weight = rng.gen_range(0..1000i64) * 1000 + v as i64;
        links.push((u, v, Some(weight)));
        naive.adj[u as usize].insert(v);
        naive.adj[v as usize].insert(u);
        w.push(((u, v), weight));
    }
    let f = RCForest::from_edges(vec![None; n as usize], &links).unwrap();
    let weight_of =
        |a: u32, b: u32| w.iter().find(|((x, y), _)| (*x == a && *y == b) || (*x == b && *y == a)).unwrap().1;
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let p = naive.path(u, v).unwrap();
            let best = p.windows(2).map(|e| weight_of(e[0], e[1])).max().unwrap();
            assert_eq!(f.path_max_edge(u, v).unwrap().unwrap().0, best);
        }
    }
}

#[test]
fn subtree_sizes_match_dfs() {
    let (f, naive) = random_ops(11, 40, 200);
    for root in 0..40u32 {
        for v in 0..40u32 {
            if naive.path(root, v).is_none() {
                assert!(f.subtree_size(root, v).is_err());
                continue;
            }
            let expect = naive.below(root, v);
            assert_eq!(f.subtree_size(root, v).unwrap(), expect, "root {} v {}", root, v);
            let mut got = f.subtree_vertices(root, v).unwrap();
            got.sort_unstable();
            let want: Vec<u32> = (0..40u32).filter(|&x| naive.path(x, root).unwrap_or_default().contains(&v)).collect();
            assert_eq!(got, want);
        }
    }
}

/// A path 0..n with vertex weights given by `ws`, linked in shuffled order.
fn weighted_path(ws: &[i64], seed: u64) -> RCForest<i64> {
    let n = ws.len();
    let mut f = RCForest::with_vertex_weights(ws.iter().map(|&w| Some(w)).collect());
    let mut order: Vec<u32> = (1..n as u32).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for v in order {
        f.link(v - 1, v, None).unwrap();
    }
    f
}

fn linear(ws: &[i64], w: i64) -> (Option<u32>, Option<u32>) {
    let pred = ws.iter().rposition(|&x| x < w).map(|i| i as u32);
    let succ = ws.iter().position(|&x| x > w).map(|i| i as u32);
    (pred, succ)
}

#[test]
fn pws_examples() {
    let f = weighted_path(&[1, 3, 5], 0);
    let r = f.pws(0, 2, 4).unwrap();
    assert_eq!((r.pred, r.succ), (Some(1), Some(2)));
    let r = f.pws(0, 2, 0).unwrap();
    assert_eq!((r.pred, r.succ), (None, Some(0)));
    let r = f.pws(0, 2, 10).unwrap();
    assert_eq!((r.pred, r.succ), (Some(2), None));
    let r = f.pws(0, 2, 3).unwrap();
    assert_eq!((r.pred, r.succ), (Some(0), Some(2)));

    let g = weighted_path(&[1, 3, 5, 7], 1);
    let (res, _) = g.pws_monotone_batch(0, 3, &[2, 4, 6]).unwrap();
    let pairs: Vec<_> = res.iter().map(|p| (p.pred, p.succ)).collect();
    assert_eq!(pairs, vec![(Some(0), Some(1)), (Some(1), Some(2)), (Some(2), Some(3))]);
    assert_eq!(g.pws_monotone_batch(0, 3, &[4, 2]).unwrap_err(), Error::NonIncreasingQueries);
}

#[test]
fn pws_detects_non_monotone_paths() {
    let f = weighted_path(&[1, 9, 5, 7], 2);
    assert_eq!(f.pws(0, 3, 100).unwrap_err(), Error::NonMonotonePath);
}

#[test]
fn monotone_batch_visits_each_node_at_most_twice() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 512;
    let mut ws: Vec<i64> = (0..n).map(|_| rng.gen_range(0..1_000_000)).collect();
    ws.sort_unstable();
    ws.dedup();
    let f = weighted_path(&ws, 3);
    let last = ws.len() as u32 - 1;
    let mut qs: Vec<i64> = (0..64).map(|_| rng.gen_range(-10..1_000_010)).collect();
    qs.sort_unstable();
    qs.dedup();
    let (res, max_visits) = f.pws_monotone_batch(0, last, &qs).unwrap();
    assert!(max_visits <= 2);
    for (i, &q) in qs.iter().enumerate() {
        assert_eq!((res[i].pred, res[i].succ), linear(&ws, q));
        let single = f.pws(0, last, q).unwrap();
        assert_eq!(single, res[i]);
    }
    assert!(f.height() <= height_bound(ws.len()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_pws_and_median_match_scan(
        raw in proptest::collection::btree_set(-1000i64..1000, 1..80),
        qs in proptest::collection::btree_set(-1100i64..1100, 1..20),
        seed in 0u64..1000,
    ) {
        let ws: Vec<i64> = raw.into_iter().collect();
        let f = weighted_path(&ws, seed);
        let last = ws.len() as u32 - 1;
        let qs: Vec<i64> = qs.into_iter().collect();
        let (res, visits) = f.pws_monotone_batch(0, last, &qs).unwrap();
        prop_assert!(visits <= 2);
        for (i, &q) in qs.iter().enumerate() {
            prop_assert_eq!((res[i].pred, res[i].succ), linear(&ws, q));
        }
        prop_assert_eq!(f.path_median(0, last).unwrap(), (ws.len() / 2) as u32);
        prop_assert_eq!(f.path_median(last, 0).unwrap(), last - (ws.len() / 2) as u32);
    }

    #[test]
    fn prop_random_updates_keep_hierarchy_canonical(seed in 0u64..10_000, n in 2usize..40) {
        let (f, naive) = random_ops(seed, n, 4 * n);
        f.audit().unwrap();
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                prop_assert_eq!(f.connected(u, v).unwrap(), naive.path(u, v).is_some());
            }
        }
    }
}
