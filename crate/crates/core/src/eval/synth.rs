//! Four-class synthetic grid: {well-connected, bottlenecked} x
//! {triangle-rich, triangle-free}.
//!
//! * 0 (A): near-regular expander with triangle-closing insertions.
//! * 1 (B): random bipartite expander, so no triangles.
//! * 2 (C): two dense communities joined by one or two bridges.
//! * 3 (D): two bipartite communities joined by one or two bridges.

use crate::families::with_degree_features;
use crate::graph::{Graph, GraphDataset};
use crate::rng::{self, Rng};
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    /// Node-count range of the single-block classes A and B.
    pub expander_nodes: (usize, usize),
    /// Average degree of A before triangle closing.
    pub expander_degree: f64,
    /// Average degree of B.
    pub bipartite_degree: f64,
    /// Triangle-closing insertions per node in A.
    pub closures_per_node: f64,
    /// Community-size range of C and D.
    pub community_nodes: (usize, usize),
    /// Edge probability inside C communities.
    pub dense_p: f64,
    /// Cross-side edge probability inside D communities.
    pub bipartite_p: f64,
    /// Width of the one-hot degree features.
    pub feature_width: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            expander_nodes: (16, 24),
            expander_degree: 4.0,
            bipartite_degree: 5.0,
            closures_per_node: 1.5,
            community_nodes: (8, 12),
            dense_p: 0.7,
            bipartite_p: 0.95,
            feature_width: 12,
        }
    }
}

fn even_in(r: &mut Rng, lo: usize, hi: usize) -> usize {
    let n = r.random_range(lo..=hi);
    if n % 2 == 1 {
        if n < hi {
            n + 1
        } else {
            n - 1
        }
    } else {
        n
    }
}

fn build(n: usize, edges: BTreeSet<(usize, usize)>) -> Graph {
    Graph::unit_features(n, edges.into_iter().collect()).expect("generator emits valid edges")
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Union of random Hamiltonian cycles until the average degree is reached.
fn class_a(spec: &SynthSpec, r: &mut Rng) -> Graph {
    let n = r.random_range(spec.expander_nodes.0..=spec.expander_nodes.1);
    let mut e = BTreeSet::new();
    let target = (spec.expander_degree * n as f64 / 2.0) as usize;
    while e.len() < target {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(r);
        for i in 0..n {
            if e.len() >= target {
                break;
            }
            e.insert(key(order[i], order[(i + 1) % n]));
        }
    }
    let mut adj = alloc::vec![BTreeSet::new(); n];
    for &(u, v) in &e {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let closures = (spec.closures_per_node * n as f64) as usize;
    let mut added = 0;
    let mut tries = 0;
    while added < closures && tries < 100 * n {
        tries += 1;
        let v = r.random_range(0..n);
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        if nb.len() < 2 {
            continue;
        }
        let a = nb[r.random_range(0..nb.len())];
        let b = nb[r.random_range(0..nb.len())];
        if a != b && e.insert(key(a, b)) {
            adj[a].insert(b);
            adj[b].insert(a);
            added += 1;
        }
    }
    build(n, e)
}

/// Random bipartite graph on an alternating Hamiltonian cycle.
fn bipartite_block(
    n: usize,
    extra_degree: f64,
    r: &mut Rng,
    offset: usize,
    e: &mut BTreeSet<(usize, usize)>,
) {
    let half = n / 2;
    let mut left: Vec<usize> = (0..half).collect();
    let mut right: Vec<usize> = (half..n).collect();
    left.shuffle(r);
    right.shuffle(r);
    let start = e.len();
    for i in 0..half {
        e.insert(key(offset + left[i], offset + right[i]));
        e.insert(key(offset + right[i], offset + left[(i + 1) % half]));
    }
    let target = start + (extra_degree * n as f64 / 2.0) as usize;
    let max = start + half * half;
    while e.len() < target.min(max) {
        let a = r.random_range(0..half);
        let b = r.random_range(half..n);
        e.insert(key(offset + a, offset + b));
    }
}

fn class_b(spec: &SynthSpec, r: &mut Rng) -> Graph {
    let n = even_in(r, spec.expander_nodes.0, spec.expander_nodes.1);
    let mut e = BTreeSet::new();
    bipartite_block(n, spec.bipartite_degree, r, 0, &mut e);
    build(n, e)
}

fn dense_block(k: usize, p: f64, r: &mut Rng, offset: usize, e: &mut BTreeSet<(usize, usize)>) {
    // a Hamiltonian path keeps the community connected
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(r);
    for w in order.windows(2) {
        e.insert(key(offset + w[0], offset + w[1]));
    }
    for u in 0..k {
        for v in u + 1..k {
            if r.random::<f64>() < p {
                e.insert((offset + u, offset + v));
            }
        }
    }
}

fn bridges(k1: usize, k2: usize, r: &mut Rng, e: &mut BTreeSet<(usize, usize)>) {
    let count = r.random_range(1..=2);
    let mut left: Vec<usize> = (0..k1).collect();
    let mut right: Vec<usize> = (k1..k1 + k2).collect();
    left.shuffle(r);
    right.shuffle(r);
    for i in 0..count {
        e.insert((left[i], right[i]));
    }
}

fn class_c(spec: &SynthSpec, r: &mut Rng) -> Graph {
    let (lo, hi) = spec.community_nodes;
    let k1 = r.random_range(lo..=hi);
    let k2 = r.random_range(lo..=hi);
    let mut e = BTreeSet::new();
    dense_block(k1, spec.dense_p, r, 0, &mut e);
    dense_block(k2, spec.dense_p, r, k1, &mut e);
    bridges(k1, k2, r, &mut e);
    build(k1 + k2, e)
}

fn class_d(spec: &SynthSpec, r: &mut Rng) -> Graph {
    let (lo, hi) = spec.community_nodes;
    let k1 = even_in(r, lo, hi);
    let k2 = even_in(r, lo, hi);
    let mut e = BTreeSet::new();
    let deg = spec.bipartite_p * (k1 / 2) as f64;
    bipartite_block(k1, deg, r, 0, &mut e);
    let deg = spec.bipartite_p * (k2 / 2) as f64;
    bipartite_block(k2, deg, r, k1, &mut e);
    bridges(k1, k2, r, &mut e);
    build(k1 + k2, e)
}

pub const CLASS_NAMES: [&str; 4] = ["A", "B", "C", "D"];

/// Generates one graph of `class` (0..4).
pub fn synthetic_graph(spec: &SynthSpec, class: usize, seed: u64) -> Graph {
    let mut r = rng::rng(seed);
    let g = match class {
        0 => class_a(spec, &mut r),
        1 => class_b(spec, &mut r),
        2 => class_c(spec, &mut r),
        3 => class_d(spec, &mut r),
        _ => panic!("synthetic class {class} out of range"),
    };
    with_degree_features(&g, spec.feature_width).with_label(Some(class as i64))
}

/// `count_per_class` graphs of each class, interleaved A, B, C, D, A, ...
pub fn synthetic_dataset(spec: &SynthSpec, count_per_class: usize, seed: u64) -> GraphDataset {
    let mut graphs = Vec::with_capacity(4 * count_per_class);
    let mut ids: Vec<String> = Vec::with_capacity(4 * count_per_class);
    for i in 0..count_per_class {
        for class in 0..4 {
            graphs.push(synthetic_graph(
                spec,
                class,
                rng::derive(seed, &[class as u64, i as u64]),
            ));
            ids.push(format!("{}{i}", CLASS_NAMES[class]));
        }
    }
    GraphDataset::new("synthetic", graphs, ids).expect("shared feature width")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodge::enumerate_triangles;
    use crate::spectral::lambda2;

    #[test]
    fn class_invariants() {
        let spec = SynthSpec::default();
        for s in 0..30 {
            let b = synthetic_graph(&spec, 1, s);
            let d = synthetic_graph(&spec, 3, s);
            assert!(enumerate_triangles(&b).is_empty());
            assert!(enumerate_triangles(&d).is_empty());
            for class in 0..4 {
                let g = synthetic_graph(&spec, class, s);
                assert!(g.is_connected(), "class {class} seed {s}");
                assert!((12..=24).contains(&g.n()));
            }
            let c = synthetic_graph(&spec, 2, s);
            assert!(lambda2(&c).unwrap() < 0.2);
            assert!(enumerate_triangles(&c).len() >= 10);
        }
    }

    #[test]
    fn dataset_is_reproducible() {
        let spec = SynthSpec::default();
        let a = synthetic_dataset(&spec, 5, 11);
        assert_eq!(a.graphs(), synthetic_dataset(&spec, 5, 11).graphs());
        assert_eq!(a.len(), 20);
        assert_eq!(a.class_indices().unwrap().1, 4);
    }
}
