//! NT-Xent over cosine similarities between two batches of embeddings.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use alloc::vec;
use alloc::vec::Vec;

/// Which candidates enter the softmax denominator for anchor `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Denominator {
    /// All `j`, including the positive pair. Bounded below by zero.
    #[default]
    Standard,
    /// Only `j != i`. Can go negative.
    PaperLiteral,
}

impl core::fmt::Display for Denominator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Denominator::Standard => "standard",
            Denominator::PaperLiteral => "paper_literal",
        })
    }
}

impl core::str::FromStr for Denominator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "paper_literal" => Ok(Self::PaperLiteral),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown ntxent denominator {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NtXent {
    pub loss: f64,
    pub d_first: Vec<Vec<f64>>,
    pub d_second: Vec<Vec<f64>>,
}

pub fn ntxent_loss(
    first: &[Vec<f64>],
    second: &[Vec<f64>],
    tau: f64,
    mode: Denominator,
) -> Result<f64> {
    Ok(ntxent_with_grad(first, second, tau, mode)?.loss)
}

/// `mean_i [ -s_ii / tau + log sum_{j in D_i} exp(s_ij / tau) ]` with
/// `s_ij = cos(first_i, second_j)`, plus its gradient with respect to both
/// batches.
pub fn ntxent_with_grad(
    first: &[Vec<f64>],
    second: &[Vec<f64>],
    tau: f64,
    mode: Denominator,
) -> Result<NtXent> {
    let n = first.len();
    if second.len() != n {
        return Err(Error::DimensionMismatch {
            what: "ntxent batch",
            expected: n,
            found: second.len(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidConfig(alloc::format!(
            "ntxent needs a batch of >= 2, got {n}"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "temperature must be > 0, got {tau}"
        )));
    }
    let dim = first[0].len();
    if let Some(bad) = first.iter().chain(second).find(|z| z.len() != dim) {
        return Err(Error::DimensionMismatch {
            what: "embedding",
            expected: dim,
            found: bad.len(),
        });
    }
    let unit = |zs: &[Vec<f64>]| -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let mut units = Vec::with_capacity(zs.len());
        let mut norms = Vec::with_capacity(zs.len());
        for (i, z) in zs.iter().enumerate() {
            let nz = norm(z);
            if !(nz > 0.0) || !nz.is_finite() {
                return Err(Error::DegenerateEmbedding(i));
            }
            units.push(z.iter().map(|x| x / nz).collect());
            norms.push(nz);
        }
        Ok((units, norms))
    };
    let (u, nu) = unit(first)?;
    let (w, nw) = unit(second)?;

    let sim: Vec<Vec<f64>> = u
        .iter()
        .map(|ui| w.iter().map(|wj| dot(ui, wj)).collect())
        .collect();
    let scale = 1.0 / n as f64;
    let mut loss = 0.0;
    // d loss / d s_ij
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        let include = |j: usize| mode == Denominator::Standard || j != i;
        let max = (0..n)
            .filter(|&j| include(j))
            .map(|j| sim[i][j] / tau)
            .fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = (0..n)
            .filter(|&j| include(j))
            .map(|j| libm::exp(sim[i][j] / tau - max))
            .sum();
        let lse = max + libm::log(z);
        loss += -sim[i][i] / tau + lse;
        for j in (0..n).filter(|&j| include(j)) {
            g[i][j] += scale * libm::exp(sim[i][j] / tau - lse) / tau;
        }
        g[i][i] -= scale / tau;
    }
    loss *= scale;

    let mut d_first = vec![vec![0.0; dim]; n];
    let mut d_second = vec![vec![0.0; dim]; n];
    for i in 0..n {
        for j in 0..n {
            let gij = g[i][j];
            if gij == 0.0 {
                continue;
            }
            let s = sim[i][j];
            for k in 0..dim {
                d_first[i][k] += gij * (w[j][k] - s * u[i][k]) / nu[i];
                d_second[j][k] += gij * (u[i][k] - s * w[j][k]) / nw[j];
            }
        }
    }
    Ok(NtXent {
        loss,
        d_first,
        d_second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_similarity_gives_log_n() {
        let z = vec![vec![1.0, 2.0, -0.5]; 4];
        let l = ntxent_loss(&z, &z, 0.2, Denominator::Standard).unwrap();
        assert!((l - 4.0_f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_negative_pair() {
        let z = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let std = ntxent_loss(&z, &z, 1.0, Denominator::Standard).unwrap();
        let e = core::f64::consts::E;
        assert!((std - -(e / (e + 1.0)).ln()).abs() < 1e-12);
        assert!((std - 0.313_262).abs() < 1e-6);
        let lit = ntxent_loss(&z, &z, 1.0, Denominator::PaperLiteral).unwrap();
        assert!((lit + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let z = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        assert_eq!(
            ntxent_loss(&z, &z, 1.0, Denominator::Standard),
            Err(Error::DegenerateEmbedding(1))
        );
        let one = vec![vec![1.0]];
        assert!(ntxent_loss(&one, &one, 1.0, Denominator::Standard).is_err());
        let two = vec![vec![1.0], vec![2.0]];
        assert!(ntxent_loss(&two, &two, 0.0, Denominator::Standard).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let a = vec![
            vec![0.3, -1.0, 0.7],
            vec![1.2, 0.4, -0.2],
            vec![-0.5, 0.9, 0.1],
        ];
        let b = vec![
            vec![0.1, -0.8, 0.9],
            vec![1.0, 0.2, 0.3],
            vec![-0.7, 1.1, -0.4],
        ];
        for mode in [Denominator::Standard, Denominator::PaperLiteral] {
            let r = ntxent_with_grad(&a, &b, 0.5, mode).unwrap();
            let h = 1e-6;
            for i in 0..3 {
                for k in 0..3 {
                    let mut ap = a.clone();
                    let mut am = a.clone();
                    ap[i][k] += h;
                    am[i][k] -= h;
                    let fd = (ntxent_loss(&ap, &b, 0.5, mode).unwrap()
                        - ntxent_loss(&am, &b, 0.5, mode).unwrap())
                        / (2.0 * h);
                    assert!((fd - r.d_first[i][k]).abs() < 1e-7);
                    let mut bp = b.clone();
                    let mut bm = b.clone();
                    bp[i][k] += h;
                    bm[i][k] -= h;
                    let fd = (ntxent_loss(&a, &bp, 0.5, mode).unwrap()
                        - ntxent_loss(&a, &bm, 0.5, mode).unwrap())
                        / (2.0 * h);
                    assert!((fd - r.d_second[i][k]).abs() < 1e-7);
                }
            }
        }
    }
}
