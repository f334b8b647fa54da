//! Undirected simple graphs with node features, plus the two stochastic
//! augmentations used to build contrastive views.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

/// Undirected simple graph. Edges are stored once as `(u, v)` with `u < v`,
/// sorted lexicographically; that order is the fixed edge order used by the
/// incidence matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    features: Matrix,
    label: Option<i64>,
}

impl Graph {
    /// Validates and canonicalizes. Edges may be given in either
    /// orientation; self-loops and duplicates are rejected.
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize)>,
        features: Matrix,
        label: Option<i64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if features.rows != n {
            return Err(Error::FeatureRows {
                rows: features.rows,
                n,
            });
        }
        if features.cols == 0 {
            return Err(Error::FeatureDim {
                expected: 1,
                found: 0,
            });
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            for node in [a, b] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }
        Ok(Self {
            n,
            edges: canon,
            features,
            label,
        })
    }

    /// Graph whose features are the all-ones `n x 1` matrix.
    pub fn unit_features(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(n, edges, Matrix::filled(n, 1, 1.0), None)
    }

    pub fn with_label(mut self, label: Option<i64>) -> Self {
        self.label = label;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols
    }

    pub fn label(&self) -> Option<i64> {
        self.label
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// Sorted adjacency lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    /// Position of `{a, b}` in the fixed edge order.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).ok()
    }

    pub fn connected_components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut comps = self.n;
        for &(u, v) in &self.edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
                comps -= 1;
            }
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components() == 1
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        assert_eq!(perm.len(), self.n);
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        let mut features = Matrix::zeros(self.n, self.features.cols);
        for i in 0..self.n {
            features
                .row_mut(perm[i])
                .copy_from_slice(self.features.row(i));
        }
        Self::new(self.n, edges, features, self.label)
    }

    fn with_edges(&self, edges: Vec<(usize, usize)>) -> Self {
        Self {
            n: self.n,
            edges,
            features: self.features.clone(),
            label: self.label,
        }
    }

    fn with_features(&self, features: Matrix) -> Self {
        Self {
            n: self.n,
            edges: self.edges.clone(),
            features,
            label: self.label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    pub p_edge: f64,
    pub p_feat: f64,
    pub seed: u64,
}

impl AugmentConfig {
    pub fn new(p_edge: f64, p_feat: f64, seed: u64) -> Result<Self> {
        check_probability(p_edge)?;
        check_probability(p_feat)?;
        Ok(Self {
            p_edge,
            p_feat,
            seed,
        })
    }

    /// Edge drop followed by feature masking, each on its own sub-stream.
    pub fn apply(&self, g: &Graph) -> Result<Graph> {
        let dropped = augment_edge_drop(g, self.p_edge, rng::derive(self.seed, &[0]))?;
        augment_feature_mask(&dropped, self.p_feat, rng::derive(self.seed, &[1]))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Probability(p))
    }
}

/// Keeps each undirected edge independently with probability `1 - p_edge`.
/// The mask is drawn once per undirected edge, so the adjacency stays
/// symmetric.
pub fn augment_edge_drop(g: &Graph, p_edge: f64, seed: u64) -> Result<Graph> {
    check_probability(p_edge)?;
    let mut rng = rng::rng(seed);
    let kept = g
        .edges
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() >= p_edge)
        .collect();
    Ok(g.with_edges(kept))
}

/// Zeroes each feature entry independently with probability `p_feat`.
pub fn augment_feature_mask(g: &Graph, p_feat: f64, seed: u64) -> Result<Graph> {
    check_probability(p_feat)?;
    let mut rng = rng::rng(seed);
    let mut features = g.features.clone();
    for x in &mut features.data {
        if rng.random::<f64>() < p_feat {
            *x = 0.0;
        }
    }
    Ok(g.with_features(features))
}

/// Ordered collection of graphs sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    pub name: String,
    graphs: Vec<Graph>,
    ids: Vec<String>,
}

impl GraphDataset {
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, ids: Vec<String>) -> Result<Self> {
        if graphs.len() != ids.len() {
            return Err(Error::DimensionMismatch {
                what: "graph ids",
                expected: graphs.len(),
                found: ids.len(),
            });
        }
        if let Some(first) = graphs.first() {
            let f = first.feature_dim();
            if let Some(g) = graphs.iter().find(|g| g.feature_dim() != f) {
                return Err(Error::FeatureDim {
                    expected: f,
                    found: g.feature_dim(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            graphs,
            ids,
        })
    }

    /// Ids default to the decimal graph index.
    pub fn from_graphs(name: impl Into<String>, graphs: Vec<Graph>) -> Result<Self> {
        let ids = (0..graphs.len()).map(|i| alloc::format!("{i}")).collect();
        Self::new(name, graphs, ids)
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.graphs.first().map(Graph::feature_dim)
    }

    /// Labels as dense class indices `0..k` in order of first appearance of
    /// the sorted distinct labels. `None` if any graph is unlabeled.
    pub fn class_indices(&self) -> Option<(Vec<usize>, usize)> {
        let labels: Option<Vec<i64>> = self.graphs.iter().map(Graph::label).collect();
        let labels = labels?;
        let mut distinct = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let idx = labels
            .iter()
            .map(|l| distinct.binary_search(l).expect("label present"))
            .collect();
        Some((idx, distinct.len()))
    }
}
