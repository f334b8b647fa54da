//! Normalized graph Laplacian, smallest-eigenvalue extraction and an
//! exhaustive conductance oracle.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{
    lanczos_smallest, symmetric_eigen, symmetric_eigenvalues, LanczosOptions, SymMatrix,
};
use alloc::vec;
use alloc::vec::Vec;

/// Eigenvalues with magnitude below this are reported as exactly zero.
pub const CLIP_THRESHOLD: f64 = 1e-10;
/// Residual bound `||M v - lambda v||` for reported eigenpairs.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Largest dimension handled by the dense solver under [`SolverPolicy::Auto`].
pub const DENSE_MAX_DIM: usize = 512;
/// Exhaustive cut enumeration is limited to this many nodes.
pub const ORACLE_MAX_NODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverPolicy {
    /// Dense up to [`DENSE_MAX_DIM`], Lanczos above.
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending, clipped.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub solver: Solver,
}

#[inline]
pub fn clip(x: f64) -> f64 {
    if libm::fabs(x) < CLIP_THRESHOLD {
        0.0
    } else {
        x
    }
}

/// `I - D^{-1/2} A D^{-1/2}`, with `D^{-1/2}_ii = 0` for isolated nodes.
pub fn normalized_laplacian(g: &Graph) -> SymMatrix {
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .into_iter()
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                1.0 / libm::sqrt(d as f64)
            }
        })
        .collect();
    let diag = (0..g.n()).map(|i| (i, i, 1.0));
    let off = g
        .edges()
        .iter()
        .map(|&(u, v)| (u, v, -inv_sqrt[u] * inv_sqrt[v]));
    SymMatrix::from_triplets(g.n(), diag.chain(off))
}

/// The `min(k, dim)` smallest eigenvalues with residuals.
pub fn smallest_eigenvalues(m: &SymMatrix, k: usize) -> Spectrum {
    smallest_eigenvalues_with(m, k, SolverPolicy::Auto)
}

pub fn smallest_eigenvalues_with(m: &SymMatrix, k: usize, policy: SolverPolicy) -> Spectrum {
    let k = k.min(m.dim());
    let iterative = match policy {
        SolverPolicy::Auto => m.dim() > DENSE_MAX_DIM,
        SolverPolicy::Dense => false,
        SolverPolicy::Iterative => true,
    };
    if iterative {
        if let Some((values, vectors)) = lanczos_smallest(m, k, LanczosOptions::for_dim(m.dim())) {
            let residuals = values
                .iter()
                .zip(&vectors)
                .map(|(&lambda, v)| residual(m, lambda, v))
                .collect();
            return Spectrum {
                eigenvalues: values.into_iter().map(clip).collect(),
                residuals,
                solver: Solver::Iterative,
            };
        }
    }
    dense_spectrum(m, k)
}

fn residual(m: &SymMatrix, lambda: f64, v: &[f64]) -> f64 {
    let mut mv = vec![0.0; v.len()];
    m.matvec(v, &mut mv);
    libm::sqrt(
        mv.iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
            .sum(),
    )
}

fn dense_spectrum(m: &SymMatrix, k: usize) -> Spectrum {
    let eig = symmetric_eigen(&m.to_dense());
    let n = m.dim();
    let mut residuals = Vec::with_capacity(k);
    for j in 0..k {
        let v: Vec<f64> = (0..n).map(|r| eig.vectors.get(r, j)).collect();
        residuals.push(residual(m, eig.values[j], &v));
    }
    Spectrum {
        eigenvalues: eig.values[..k].iter().copied().map(clip).collect(),
        residuals,
        solver: Solver::Dense,
    }
}

/// Smallest `min(k, dim)` eigenvalues, clipped, without eigenvectors. This is
/// the path used when computing signatures.
pub fn smallest_values(m: &SymMatrix, k: usize) -> Vec<f64> {
    let k = k.min(m.dim());
    if m.dim() > DENSE_MAX_DIM {
        if let Some((values, _)) = lanczos_smallest(m, k, LanczosOptions::for_dim(m.dim())) {
            return values.into_iter().map(clip).collect();
        }
    }
    let mut values = symmetric_eigenvalues(&m.to_dense());
    values.truncate(k);
    values.into_iter().map(clip).collect()
}

/// Second-smallest eigenvalue of the normalized Laplacian.
///
/// Disconnected graphs return exactly 0. An isolated node contributes an
/// eigenvalue of 1 (not 0) under the zero-degree convention, so the
/// multiplicity of 0 alone does not detect it.
pub fn lambda2(g: &Graph) -> Result<f64> {
    if g.n() < 2 {
        return Err(Error::SingleNode);
    }
    if !g.is_connected() {
        return Ok(0.0);
    }
    Ok(smallest_values(&normalized_laplacian(g), 2)[1])
}

/// Conductance `min_S cut(S) / min(vol S, vol S^c)` by enumerating all
/// `2^(n-1) - 1` bipartitions.
pub fn brute_force_cheeger(g: &Graph) -> Result<f64> {
    let n = g.n();
    if n > ORACLE_MAX_NODES {
        return Err(Error::OracleTooLarge(n));
    }
    if n < 2 {
        return Err(Error::SingleNode);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let deg = g.degrees();
    let total: usize = deg.iter().sum();
    let mut best = f64::INFINITY;
    // node n - 1 always on the complement side
    for mask in 1u32..(1u32 << (n - 1)) {
        let in_s = |i: usize| i < n - 1 && mask >> i & 1 == 1;
        let vol: usize = (0..n - 1).filter(|&i| in_s(i)).map(|i| deg[i]).sum();
        let cut = g
            .edges()
            .iter()
            .filter(|&&(u, v)| in_s(u) != in_s(v))
            .count();
        let denom = vol.min(total - vol);
        let phi = cut as f64 / denom as f64;
        if phi < best {
            best = phi;
        }
    }
    Ok(best)
}
