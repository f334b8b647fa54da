//! Cheeger-Hodge joint signature: a uniform discretization of the Cheeger
//! interval `[lambda2 / 2, sqrt(2 lambda2)]` concatenated with
//! `log(1 + mu)` of the lowest 1-Hodge eigenvalues.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hodge::hodge_spectrum;
use crate::spectral::{lambda2, CLIP_THRESHOLD};
use alloc::vec::Vec;

pub const DEFAULT_D_C: usize = 8;
pub const DEFAULT_D_H: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct JointSignature {
    pub cheeger: Vec<f64>,
    pub hodge: Vec<f64>,
    /// Trailing Hodge entries that were zero-padded because the graph has
    /// fewer than `d_h` edges.
    pub padded_hodge_count: usize,
}

impl JointSignature {
    pub fn len(&self) -> usize {
        self.cheeger.len() + self.hodge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `cheeger || hodge`
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.cheeger);
        v.extend_from_slice(&self.hodge);
        v
    }
}

/// `h_j = lambda2/2 + (j-1)/(d_c-1) * (sqrt(2 lambda2) - lambda2/2)`, `j = 1..=d_c`.
/// Extended continuously to `lambda2 = 0` (all zeros).
pub fn cheeger_signature(lambda2: f64, d_c: usize) -> Result<Vec<f64>> {
    if d_c < 2 {
        return Err(Error::CheegerDim(d_c));
    }
    if lambda2 < 0.0 || !lambda2.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!(
            "lambda2 must be >= 0, got {lambda2}"
        )));
    }
    let lo = lambda2 / 2.0;
    let hi = libm::sqrt(2.0 * lambda2);
    let steps = (d_c - 1) as f64;
    Ok((0..d_c)
        .map(|j| lo + (j as f64 / steps) * (hi - lo))
        .collect())
}

/// Elementwise `log(1 + mu)`.
pub fn hodge_signature(mu: &[f64]) -> Result<Vec<f64>> {
    mu.iter()
        .map(|&m| {
            if m < -CLIP_THRESHOLD || m.is_nan() {
                Err(Error::NegativeHodgeEigenvalue(m))
            } else {
                Ok(libm::log1p(m.max(0.0)))
            }
        })
        .collect()
}

pub fn joint_signature(g: &Graph, d_c: usize, d_h: usize) -> Result<JointSignature> {
    if d_c < 2 {
        return Err(Error::CheegerDim(d_c));
    }
    if d_h == 0 {
        return Err(Error::HodgeDim);
    }
    let cheeger = cheeger_signature(lambda2(g)?, d_c)?;
    let hodge = hodge_signature(&hodge_spectrum(g, d_h)?)?;
    Ok(JointSignature {
        cheeger,
        hodge,
        padded_hodge_count: d_h.saturating_sub(g.m()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;
    use alloc::vec;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn cheeger_examples() {
        assert_eq!(cheeger_signature(0.0, 5).unwrap(), vec![0.0; 5]);
        assert_eq!(cheeger_signature(2.0, 3).unwrap(), vec![1.0, 1.5, 2.0]);
        assert_close(
            &cheeger_signature(4.0 / 3.0, 2).unwrap(),
            &[2.0 / 3.0, 1.632_993_161_855_452],
            1e-12,
        );
        assert_eq!(cheeger_signature(1.0, 1), Err(Error::CheegerDim(1)));
    }

    #[test]
    fn hodge_examples() {
        assert_eq!(hodge_signature(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
        assert_close(
            &hodge_signature(&[3.0, 3.0, 3.0]).unwrap(),
            &[4.0_f64.ln(); 3],
            1e-12,
        );
        assert_close(
            &hodge_signature(&[0.0, 2.0]).unwrap(),
            &[0.0, 3.0_f64.ln()],
            1e-12,
        );
        assert_eq!(
            hodge_signature(&[-0.5]),
            Err(Error::NegativeHodgeEigenvalue(-0.5))
        );
    }

    #[test]
    fn joint_examples() {
        let e = joint_signature(&empty(4), 2, 2).unwrap();
        assert_eq!(e.values(), vec![0.0; 4]);
        assert_eq!(e.padded_hodge_count, 2);

        let k3 = joint_signature(&complete(3), 2, 3).unwrap();
        let l4 = 4.0_f64.ln();
        assert_close(&k3.values(), &[0.75, 3.0_f64.sqrt(), l4, l4, l4], 1e-10);
        assert_eq!(k3.padded_hodge_count, 0);

        let c4 = joint_signature(&cycle(4), 2, 1).unwrap();
        assert_close(&c4.values(), &[0.5, 2.0_f64.sqrt(), 0.0], 1e-10);
    }

    #[test]
    fn disconnected_graph_has_zero_cheeger_block() {
        let g =
            Graph::unit_features(6, vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let s = joint_signature(&g, 8, 14).unwrap();
        assert!(s.cheeger.iter().all(|&x| x == 0.0));
        assert!(s.hodge.iter().all(|&x| x >= 0.0));
        assert_eq!(s.len(), 22);
    }
}
