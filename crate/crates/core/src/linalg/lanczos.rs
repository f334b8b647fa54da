//! Lanczos with full reorthogonalization and locking, for a few of the
//! smallest eigenpairs of a sparse symmetric matrix.
//!
//! Each run works on the complement of the already-locked eigenvectors and
//! locks the smallest converged Ritz pairs. A single Krylov sequence only
//! sees one copy of a repeated eigenvalue, so once `k` pairs are locked a
//! verification run checks that the deflated operator has nothing below the
//! current `k`-th value; anything found there is locked as well.

use super::{dot, norm, tridiagonal_eigen, SymMatrix};
use crate::rng;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Residual target for `||M v - theta v||`.
    pub tol: f64,
    /// Budget of matrix-vector products over all runs.
    pub max_iter: usize,
    pub seed: u64,
}

impl LanczosOptions {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            tol: 1e-8,
            max_iter: 4 * dim.max(1),
            seed: 0x1a2c_2057,
        }
    }
}

/// Returns `min(k, dim)` smallest eigenvalues (ascending) with unit
/// eigenvectors, or `None` when the iteration budget runs out.
pub fn lanczos_smallest(
    m: &SymMatrix,
    k: usize,
    opts: LanczosOptions,
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let dim = m.dim();
    let k = k.min(dim);
    if k == 0 {
        return Some((Vec::new(), Vec::new()));
    }
    let mut rng = rng::rng(opts.seed);
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut budget = opts.max_iter;
    // Internal target is tighter than the contract so the recomputed true
    // residual stays under `tol`.
    let target = opts.tol * 0.1;

    loop {
        let verifying = locked.len() >= k;
        let need = if verifying { 1 } else { k - locked.len() };
        if locked.len() == dim {
            break;
        }
        let found = run(m, &locked, need, target, &mut budget, &mut rng)?;
        if found.is_empty() {
            // deflated space exhausted
            break;
        }
        if verifying {
            let kth = locked[k - 1].0;
            let (theta, _) = &found[0];
            if *theta >= kth - opts.tol {
                break;
            }
        }
        for pair in found {
            let at = locked.partition_point(|(v, _)| *v <= pair.0);
            locked.insert(at, pair);
        }
    }

    locked.truncate(k);
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut mv = vec![0.0; dim];
    for (theta, v) in locked {
        m.matvec(&v, &mut mv);
        let r: f64 = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - theta * b) * (a - theta * b))
            .sum();
        if libm::sqrt(r) > opts.tol {
            return None;
        }
        values.push(theta);
        vectors.push(v);
    }
    Some((values, vectors))
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], locked: &[(f64, Vec<f64>)]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in basis.iter().chain(locked.iter().map(|(_, v)| v)) {
            let c = dot(w, q);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn random_start(
    dim: usize,
    basis: &[Vec<f64>],
    locked: &[(f64, Vec<f64>)],
    rng: &mut rng::Rng,
) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let before = norm(&q);
        orthogonalize(&mut q, basis, locked);
        let nq = norm(&q);
        if nq > 1e-8 * before {
            q.iter_mut().for_each(|x| *x /= nq);
            return Some(q);
        }
    }
    None
}

/// One Lanczos run on the complement of `locked`. Returns up to `need`
/// converged Ritz pairs from the bottom of the spectrum.
fn run(
    m: &SymMatrix,
    locked: &[(f64, Vec<f64>)],
    need: usize,
    target: f64,
    budget: &mut usize,
    rng: &mut rng::Rng,
) -> Option<Vec<(f64, Vec<f64>)>> {
    let dim = m.dim();
    let space = dim - locked.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    // beta[j] couples basis[j] and basis[j + 1]; zero marks a restart
    let mut beta: Vec<f64> = Vec::new();

    let Some(q0) = random_start(dim, &basis, locked, rng) else {
        return Some(Vec::new());
    };
    basis.push(q0);
    let mut w = vec![0.0; dim];
    let mut since_check = 0usize;
    loop {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let j = basis.len() - 1;
        m.matvec(&basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        orthogonalize(&mut w, &basis, locked);
        let b = norm(&w);
        let exhausted = basis.len() == space;
        since_check += 1;

        let check_every = (basis.len() / 10).clamp(1, 20);
        if exhausted || since_check >= check_every || b < 1e-10 {
            since_check = 0;
            let t = tridiagonal_eigen(&alpha, &beta);
            let want = need.min(basis.len());
            let last = basis.len() - 1;
            let converged =
                exhausted || (0..want).all(|i| libm::fabs(b * t.vectors.get(last, i)) <= target);
            if converged {
                let pairs = (0..want)
                    .map(|i| {
                        let mut y = vec![0.0; dim];
                        for (r, q) in basis.iter().enumerate() {
                            let s = t.vectors.get(r, i);
                            y.iter_mut().zip(q).for_each(|(yv, qv)| *yv += s * qv);
                        }
                        let ny = norm(&y);
                        y.iter_mut().for_each(|v| *v /= ny);
                        (t.values[i], y)
                    })
                    .collect();
                return Some(pairs);
            }
        }

        if b < 1e-10 {
            // invariant subspace: restart orthogonally, decoupled in T
            match random_start(dim, &basis, locked, rng) {
                Some(q) => {
                    beta.push(0.0);
                    basis.push(q);
                }
                None => return Some(Vec::new()),
            }
        } else {
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{symmetric_eigenvalues, Matrix};

    fn path_laplacian(n: usize) -> SymMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            let deg = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            t.push((i, i, deg));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        SymMatrix::from_triplets(n, t)
    }

    #[test]
    fn path_spectrum_matches_dense() {
        let m = path_laplacian(40);
        let dense = symmetric_eigenvalues(&m.to_dense());
        let (vals, _) = lanczos_smallest(&m, 5, LanczosOptions::for_dim(40)).unwrap();
        for (a, b) in vals.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn repeated_eigenvalues_are_all_found() {
        // block diagonal with three copies of the same 4-node path: every
        // eigenvalue has multiplicity three
        let block = path_laplacian(4);
        let mut t = Vec::new();
        for b in 0..3 {
            for &(r, c, v) in block.entries() {
                t.push((4 * b + r, 4 * b + c, v));
            }
        }
        let m = SymMatrix::from_triplets(12, t);
        let (vals, vecs) = lanczos_smallest(&m, 4, LanczosOptions::for_dim(12)).unwrap();
        assert!(vals[0].abs() < 1e-9 && vals[1].abs() < 1e-9 && vals[2].abs() < 1e-9);
        let second = 2.0 - 2.0_f64.sqrt();
        assert!((vals[3] - second).abs() < 1e-9, "{vals:?}");
        for v in &vecs {
            assert!((norm(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_matrix() {
        let m = SymMatrix::from_dense(&Matrix::identity(5));
        let (vals, _) = lanczos_smallest(&m, 3, LanczosOptions::for_dim(5)).unwrap();
        assert_eq!(vals.len(), 3);
        assert!(vals.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
}
