//! Named graph families with unit features.

use crate::graph::Graph;
use crate::rng;
use alloc::vec::Vec;
use rand::Rng;

pub fn complete(n: usize) -> Graph {
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            e.push((u, v));
        }
    }
    Graph::unit_features(n, e).expect("valid complete graph")
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3);
    Graph::unit_features(n, (0..n).map(|i| (i, (i + 1) % n)).collect()).expect("valid cycle")
}

pub fn path(n: usize) -> Graph {
    Graph::unit_features(n, (1..n).map(|i| (i - 1, i)).collect()).expect("valid path")
}

pub fn star(n: usize) -> Graph {
    Graph::unit_features(n, (1..n).map(|i| (0, i)).collect()).expect("valid star")
}

pub fn empty(n: usize) -> Graph {
    Graph::unit_features(n, Vec::new()).expect("valid edgeless graph")
}

/// Two `K_k` joined by a single bridge between node `k - 1` and node `k`.
pub fn barbell(k: usize) -> Graph {
    let mut e = Vec::new();
    for base in [0, k] {
        for u in 0..k {
            for v in u + 1..k {
                e.push((base + u, base + v));
            }
        }
    }
    e.push((k - 1, k));
    Graph::unit_features(2 * k, e).expect("valid barbell")
}

/// Two 4-cycles sharing node 0.
pub fn figure_eight() -> Graph {
    Graph::unit_features(
        7,
        alloc::vec![
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 0),
            (0, 4),
            (4, 5),
            (5, 6),
            (6, 0)
        ],
    )
    .expect("valid figure eight")
}

/// Erdos-Renyi `G(n, p)`.
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng::rng(seed);
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.random::<f64>() < p {
                e.push((u, v));
            }
        }
    }
    Graph::unit_features(n, e).expect("valid gnp graph")
}

/// Uniform random labelled tree (random attachment).
pub fn random_tree(n: usize, seed: u64) -> Graph {
    let mut r = rng::rng(seed);
    let e = (1..n).map(|v| (r.random_range(0..v), v)).collect();
    Graph::unit_features(n, e).expect("valid tree")
}

/// Replaces the features with a one-hot encoding of `min(degree, width - 1)`.
pub fn with_degree_features(g: &Graph, width: usize) -> Graph {
    let mut x = crate::linalg::Matrix::zeros(g.n(), width);
    for (i, d) in g.degrees().into_iter().enumerate() {
        x.set(i, d.min(width - 1), 1.0);
    }
    Graph::new(g.n(), g.edges().to_vec(), x, g.label()).expect("same structure")
}

/// Twenty small mixed-family graphs with one-hot degree features, used for
/// training smoke runs.
pub fn toy_dataset(seed: u64) -> crate::graph::GraphDataset {
    let mut graphs = Vec::with_capacity(20);
    for i in 0..4u64 {
        let n = 6 + i as usize;
        graphs.push(complete(n - 1));
        graphs.push(cycle(n + 2));
        graphs.push(barbell(3 + (i as usize % 2)));
        graphs.push(random_tree(n + 3, rng::derive(seed, &[0, i])));
        graphs.push(gnp(n + 4, 0.4, rng::derive(seed, &[1, i])));
    }
    let graphs = graphs
        .into_iter()
        .enumerate()
        .map(|(i, g)| with_degree_features(&g, 8).with_label(Some((i % 5) as i64)))
        .collect();
    crate::graph::GraphDataset::from_graphs("toy", graphs).expect("toy graphs share feature width")
}
