//! Clique complex of a graph up to dimension two: oriented incidence
//! matrices `B1` (node-edge) and `B2` (edge-triangle) and the 1-Hodge
//! Laplacian `L1 = B1^T B1 + B2 B2^T`.
//!
//! Edges are oriented from the smaller to the larger node id. Each triangle
//! `(a, b, c)` with `a < b < c` is traversed `a -> b -> c -> a`, which agrees
//! with the stored orientation of `(a, b)` and `(b, c)` and opposes `(a, c)`.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::SymMatrix;
use crate::spectral::smallest_values;
use alloc::vec;
use alloc::vec::Vec;

pub type Triangle = (usize, usize, usize);

/// Column-compressed sparse matrix with small integer entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    /// Per column, `(row, value)` sorted by row.
    columns: Vec<Vec<(usize, i64)>>,
}

impl IncidenceMatrix {
    pub fn new(rows: usize, columns: Vec<Vec<(usize, i64)>>) -> Self {
        let mut columns = columns;
        for col in &mut columns {
            col.sort_unstable();
        }
        Self { rows, columns }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> &[(usize, i64)] {
        &self.columns[c]
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.columns[c]
            .binary_search_by_key(&r, |&(row, _)| row)
            .map_or(0, |i| self.columns[c][i].1)
    }

    /// Nonzeros as `(row, col, value)`, column-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)))
    }

    /// Exact integer product `self * other`.
    pub fn mul(&self, other: &IncidenceMatrix) -> IncidenceMatrix {
        assert_eq!(self.cols(), other.rows, "inner dimensions differ");
        let columns = other
            .columns
            .iter()
            .map(|col| {
                let mut acc = vec![0i64; self.rows];
                for &(k, b) in col {
                    for &(r, a) in &self.columns[k] {
                        acc[r] += a * b;
                    }
                }
                acc.into_iter()
                    .enumerate()
                    .filter(|&(_, v)| v != 0)
                    .collect()
            })
            .collect();
        IncidenceMatrix {
            rows: self.rows,
            columns,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    fn negate_column(&mut self, c: usize) {
        self.columns[c].iter_mut().for_each(|e| e.1 = -e.1);
    }

    fn negate_row(&mut self, r: usize) {
        for col in &mut self.columns {
            for e in col.iter_mut().filter(|e| e.0 == r) {
                e.1 = -e.1;
            }
        }
    }
}

/// All 3-cliques `(a, b, c)`, `a < b < c`, in lexicographic order.
///
/// Forward algorithm: for each edge `(u, v)` intersect the higher-numbered
/// neighbor lists of `u` and `v`.
pub fn enumerate_triangles(g: &Graph) -> Vec<Triangle> {
    let mut higher = vec![Vec::new(); g.n()];
    for &(u, v) in g.edges() {
        higher[u].push(v);
    }
    // edges are sorted, so each list already is
    let mut out = Vec::new();
    for u in 0..g.n() {
        for &v in &higher[u] {
            let (a, b) = (&higher[u], &higher[v]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    core::cmp::Ordering::Less => i += 1,
                    core::cmp::Ordering::Greater => j += 1,
                    core::cmp::Ordering::Equal => {
                        out.push((u, v, a[i]));
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    out
}

/// `n x m`: `-1` at the tail `u_e`, `+1` at the head `v_e` of every edge.
pub fn incidence_b1(g: &Graph) -> IncidenceMatrix {
    let columns = g
        .edges()
        .iter()
        .map(|&(u, v)| vec![(u, -1), (v, 1)])
        .collect();
    IncidenceMatrix::new(g.n(), columns)
}

/// `m x T`: `+1` on `(a, b)` and `(b, c)`, `-1` on `(a, c)`.
pub fn incidence_b2(g: &Graph, triangles: &[Triangle]) -> Result<IncidenceMatrix> {
    let columns = triangles
        .iter()
        .map(|&(a, b, c)| {
            let idx = |x, y| g.edge_index(x, y).ok_or(Error::NotAClique(a, b, c));
            Ok(vec![(idx(a, b)?, 1), (idx(b, c)?, 1), (idx(a, c)?, -1)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IncidenceMatrix::new(g.m(), columns))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HodgeComplex {
    pub edge_order: Vec<(usize, usize)>,
    pub triangles: Vec<Triangle>,
    pub b1: IncidenceMatrix,
    pub b2: IncidenceMatrix,
}

impl HodgeComplex {
    pub fn new(g: &Graph) -> Self {
        let triangles = enumerate_triangles(g);
        let b2 = incidence_b2(g, &triangles).expect("enumerated triangles are cliques");
        Self {
            edge_order: g.edges().to_vec(),
            triangles,
            b1: incidence_b1(g),
            b2,
        }
    }

    /// `B1^T B1 + B2 B2^T`.
    pub fn laplacian(&self) -> Result<SymMatrix> {
        let m = self.edge_order.len();
        if m == 0 {
            return Err(Error::EmptyEdgeSet);
        }
        // rows of B1: edges incident to each node with their signs
        let mut by_node: Vec<Vec<(usize, i64)>> = vec![Vec::new(); self.b1.rows()];
        for (r, e, s) in self.b1.triplets() {
            by_node[r].push((e, s));
        }
        let outer = |entries: &[(usize, i64)], out: &mut Vec<(usize, usize, f64)>| {
            for (i, &(e, se)) in entries.iter().enumerate() {
                for &(f, sf) in &entries[i..] {
                    out.push((e, f, (se * sf) as f64));
                }
            }
        };
        let mut triplets = Vec::new();
        for row in &by_node {
            outer(row, &mut triplets);
        }
        for t in 0..self.b2.cols() {
            outer(self.b2.column(t), &mut triplets);
        }
        Ok(SymMatrix::from_triplets(m, triplets))
    }

    /// Reverses the stored orientation of edge `e`: negates column `e` of
    /// `B1` and row `e` of `B2`.
    pub fn flip_edge(&mut self, e: usize) {
        self.b1.negate_column(e);
        self.b2.negate_row(e);
        let (u, v) = self.edge_order[e];
        self.edge_order[e] = (v, u);
    }
}

pub fn hodge_laplacian_1(g: &Graph) -> Result<SymMatrix> {
    HodgeComplex::new(g).laplacian()
}

/// The `min(d_h, m)` smallest eigenvalues of `L1`, ascending and clipped,
/// right-padded with zeros to length `d_h`. Edgeless graphs give `d_h`
/// zeros.
pub fn hodge_spectrum(g: &Graph, d_h: usize) -> Result<Vec<f64>> {
    if d_h == 0 {
        return Err(Error::HodgeDim);
    }
    let mut values = if g.m() == 0 {
        Vec::new()
    } else {
        smallest_values(&hodge_laplacian_1(g)?, d_h)
    };
    values.resize(d_h, 0.0);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;
    use crate::linalg::{symmetric_eigenvalues, Matrix};

    #[test]
    fn triangle_counts() {
        assert!(enumerate_triangles(&cycle(5)).is_empty());
        assert_eq!(
            enumerate_triangles(&complete(4)),
            vec![(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        );
        assert_eq!(enumerate_triangles(&complete(5)).len(), 10);
    }

    #[test]
    fn b1_examples() {
        let k2 = incidence_b1(&complete(2));
        assert_eq!(k2.column(0), &[(0, -1), (1, 1)]);
        let k3 = incidence_b1(&complete(3));
        let dense: Vec<Vec<i64>> = (0..3)
            .map(|c| (0..3).map(|r| k3.get(r, c)).collect())
            .collect();
        assert_eq!(dense, vec![vec![-1, 1, 0], vec![-1, 0, 1], vec![0, -1, 1]]);
        let none = incidence_b1(&empty(4));
        assert_eq!((none.rows(), none.cols()), (4, 0));
    }

    #[test]
    fn b2_examples() {
        let k3 = complete(3);
        let b2 = incidence_b2(&k3, &enumerate_triangles(&k3)).unwrap();
        assert_eq!(
            (0..3).map(|r| b2.get(r, 0)).collect::<Vec<_>>(),
            vec![1, -1, 1]
        );

        let c4 = cycle(4);
        let b2 = incidence_b2(&c4, &enumerate_triangles(&c4)).unwrap();
        assert_eq!((b2.rows(), b2.cols()), (4, 0));

        // K4 minus (0,3): triangles (0,1,2) and (1,2,3) share edge (1,2)
        let g = Graph::unit_features(4, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        let hc = HodgeComplex::new(&g);
        assert_eq!(hc.triangles, vec![(0, 1, 2), (1, 2, 3)]);
        let shared = g.edge_index(1, 2).unwrap();
        assert_ne!(hc.b2.get(shared, 0), 0);
        assert_ne!(hc.b2.get(shared, 1), 0);
        assert!(hc.b1.mul(&hc.b2).is_zero());
        assert_eq!(
            incidence_b2(&g, &[(0, 1, 3)]),
            Err(Error::NotAClique(0, 1, 3))
        );
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(hodge_laplacian_1(&complete(3)).unwrap().to_dense(), {
            let mut m = Matrix::identity(3);
            m.data.iter_mut().for_each(|x| *x *= 3.0);
            m
        });
        assert_eq!(
            hodge_laplacian_1(&complete(2)).unwrap().to_dense().data,
            vec![2.0]
        );
        let c4 = symmetric_eigenvalues(&hodge_laplacian_1(&cycle(4)).unwrap().to_dense());
        assert_eq!(c4.iter().filter(|v| v.abs() < 1e-8).count(), 1);
        assert_eq!(hodge_laplacian_1(&empty(3)), Err(Error::EmptyEdgeSet));
    }

    #[test]
    fn spectrum_examples() {
        let k3 = hodge_spectrum(&complete(3), 3).unwrap();
        assert!(k3.iter().all(|v| (v - 3.0).abs() < 1e-12));
        let k2 = hodge_spectrum(&complete(2), 4).unwrap();
        assert!((k2[0] - 2.0).abs() < 1e-12);
        assert_eq!(&k2[1..], &[0.0, 0.0, 0.0]);
        assert_eq!(hodge_spectrum(&cycle(4), 1).unwrap(), vec![0.0]);
        assert_eq!(hodge_spectrum(&empty(5), 3).unwrap(), vec![0.0; 3]);
        assert_eq!(hodge_spectrum(&complete(3), 0), Err(Error::HodgeDim));
    }

    #[test]
    fn betti_numbers() {
        let kernel = |g: &Graph| {
            symmetric_eigenvalues(&hodge_laplacian_1(g).unwrap().to_dense())
                .iter()
                .filter(|v| v.abs() < 1e-8)
                .count()
        };
        assert_eq!(kernel(&random_tree(12, 4)), 0);
        assert_eq!(kernel(&cycle(4)), 1);
        assert_eq!(kernel(&cycle(6)), 1);
        assert_eq!(kernel(&complete(3)), 0);
        assert_eq!(kernel(&figure_eight()), 2);
    }

    #[test]
    fn flipping_an_edge_keeps_the_spectrum() {
        let g = gnp(9, 0.5, 11);
        let base = symmetric_eigenvalues(&hodge_laplacian_1(&g).unwrap().to_dense());
        for e in 0..g.m() {
            let mut hc = HodgeComplex::new(&g);
            hc.flip_edge(e);
            assert!(hc.b1.mul(&hc.b2).is_zero());
            let flipped = symmetric_eigenvalues(&hc.laplacian().unwrap().to_dense());
            for (a, b) in base.iter().zip(&flipped) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
