//! k-fold multinomial logistic regression on frozen embeddings.

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::linalg::{dot, norm};
use crate::rng;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingSource {
    Geo,
    Signature,
    Concat,
}

impl core::fmt::Display for EmbeddingSource {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            EmbeddingSource::Geo => "geo",
            EmbeddingSource::Signature => "signature",
            EmbeddingSource::Concat => "concat",
        })
    }
}

impl core::str::FromStr for EmbeddingSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geo" => Ok(Self::Geo),
            "signature" => Ok(Self::Signature),
            "concat" => Ok(Self::Concat),
            other => Err(Error::InvalidConfig(format!(
                "unknown embedding source {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub k_folds: usize,
    pub l2: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            k_folds: 5,
            l2: 1e-3,
            iterations: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// Mean of `per_fold`.
    pub accuracy: f64,
    pub per_fold: Vec<f64>,
    pub n_classes: usize,
    pub embedding_source: EmbeddingSource,
}

/// Fold index of each sample. Depends only on `(seed, n)`: a seeded
/// permutation dealt round-robin into `k` folds.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::rng(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    fn fit(rows: &[&[f64]]) -> Self {
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            mean.iter_mut().zip(*r).for_each(|(m, x)| *m += x / n);
        }
        let mut var = vec![0.0; d];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(*r).zip(&mean) {
                *v += (x - m) * (x - m) / n;
            }
        }
        // constant columns are centred but not scaled
        let scale = var
            .into_iter()
            .map(|v| {
                let s = libm::sqrt(v);
                if s > 1e-12 {
                    1.0 / s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    /// Standardized row with a trailing 1 for the bias.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = x
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) * s)
            .collect();
        out.push(1.0);
        out
    }
}

/// Multinomial logistic regression, weights `d x c` row-major with the bias
/// as the last row.
struct Softmax {
    w: Vec<f64>,
    d: usize,
    c: usize,
}

impl Softmax {
    fn probs(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.c];
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                s.iter_mut()
                    .zip(&self.w[i * self.c..(i + 1) * self.c])
                    .for_each(|(a, w)| *a += xi * w);
            }
        }
        let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        s.iter_mut().for_each(|v| *v = libm::exp(*v - m));
        let z: f64 = s.iter().sum();
        s.iter_mut().for_each(|v| *v /= z);
        s
    }

    fn predict(&self, x: &[f64]) -> usize {
        let p = self.probs(x);
        (0..self.c).fold(0, |best, j| if p[j] > p[best] { j } else { best })
    }

    /// Full-batch gradient descent on mean cross-entropy plus
    /// `l2/2 * |W|^2` (bias row excluded).
    fn fit(x: &[Vec<f64>], y: &[usize], c: usize, l2: f64, iterations: usize) -> Self {
        let d = x[0].len();
        let n = x.len() as f64;
        let step = 1.0 / (0.5 * gram_max_eigenvalue(x) + l2);
        let mut model = Self {
            w: vec![0.0; d * c],
            d,
            c,
        };
        let mut grad = vec![0.0; d * c];
        for _ in 0..iterations {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (xi, &yi) in x.iter().zip(y) {
                let mut p = model.probs(xi);
                p[yi] -= 1.0;
                for (k, xk) in xi.iter().enumerate() {
                    if *xk != 0.0 {
                        grad[k * c..(k + 1) * c]
                            .iter_mut()
                            .zip(&p)
                            .for_each(|(g, pj)| *g += xk * pj / n);
                    }
                }
            }
            for k in 0..model.d - 1 {
                for j in 0..c {
                    grad[k * c + j] += l2 * model.w[k * c + j];
                }
            }
            model
                .w
                .iter_mut()
                .zip(&grad)
                .for_each(|(w, g)| *w -= step * g);
        }
        model
    }
}

/// Largest eigenvalue of `X^T X / n` by power iteration.
fn gram_max_eigenvalue(x: &[Vec<f64>]) -> f64 {
    let d = x[0].len();
    let n = x.len() as f64;
    let mut v = vec![1.0 / libm::sqrt(d as f64); d];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut next = vec![0.0; d];
        for row in x {
            let s = dot(row, &v);
            next.iter_mut().zip(row).for_each(|(a, r)| *a += s * r / n);
        }
        let nn = norm(&next);
        if nn == 0.0 {
            return 0.0;
        }
        let converged = libm::fabs(nn - lambda) <= 1e-10 * nn;
        lambda = nn;
        v = next.into_iter().map(|a| a / nn).collect();
        if converged {
            break;
        }
    }
    lambda
}

/// Cross-validated accuracy of a linear classifier on `embeddings`.
/// `labels` are class indices; every class in `0..=max` must have at least
/// `k_folds` samples.
pub fn linear_probe<E: Executor>(
    embeddings: &[Vec<f64>],
    labels: &[usize],
    source: EmbeddingSource,
    config: &ProbeConfig,
    exec: &E,
) -> Result<ProbeResult> {
    if embeddings.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            what: "probe labels",
            expected: embeddings.len(),
            found: labels.len(),
        });
    }
    if config.k_folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "k_folds must be >= 2, got {}",
            config.k_folds
        )));
    }
    let c = labels.iter().max().map_or(0, |m| m + 1);
    if c < 2 {
        return Err(Error::TooFewClasses(c));
    }
    let mut counts = vec![0usize; c];
    labels.iter().for_each(|&l| counts[l] += 1);
    if let Some((class, &count)) = counts.iter().enumerate().find(|(_, &n)| n < config.k_folds) {
        return Err(Error::TooFewSamples {
            class,
            count,
            folds: config.k_folds,
        });
    }
    let d = embeddings[0].len();
    if let Some(bad) = embeddings.iter().find(|e| e.len() != d) {
        return Err(Error::DimensionMismatch {
            what: "embedding width",
            expected: d,
            found: bad.len(),
        });
    }
    if embeddings.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("non-finite embedding".into()));
    }
    let fold = fold_assignment(embeddings.len(), config.k_folds, config.seed);
    let per_fold = exec.map(config.k_folds, |f| {
        let train: Vec<usize> = (0..fold.len()).filter(|&i| fold[i] != f).collect();
        let test: Vec<usize> = (0..fold.len()).filter(|&i| fold[i] == f).collect();
        let rows: Vec<&[f64]> = train.iter().map(|&i| &embeddings[i][..]).collect();
        let std = Standardizer::fit(&rows);
        let x: Vec<Vec<f64>> = rows.iter().map(|r| std.apply(r)).collect();
        let y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let model = Softmax::fit(&x, &y, c, config.l2, config.iterations);
        let hits = test
            .iter()
            .filter(|&&i| model.predict(&std.apply(&embeddings[i])) == labels[i])
            .count();
        hits as f64 / test.len() as f64
    });
    let accuracy = per_fold.iter().sum::<f64>() / per_fold.len() as f64;
    Ok(ProbeResult {
        accuracy,
        per_fold,
        n_classes: c,
        embedding_source: source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use rand::Rng;

    fn probe(x: &[Vec<f64>], y: &[usize], seed: u64) -> Result<ProbeResult> {
        let config = ProbeConfig {
            seed,
            ..ProbeConfig::default()
        };
        linear_probe(x, y, EmbeddingSource::Signature, &config, &Sequential)
    }

    #[test]
    fn folds_partition_and_ignore_labels() {
        let f = fold_assignment(23, 5, 4);
        let mut sizes = [0; 5];
        f.iter().for_each(|&k| sizes[k] += 1);
        assert_eq!(sizes, [5, 5, 5, 4, 4]);
        assert_eq!(f, fold_assignment(23, 5, 4));
        assert_ne!(f, fold_assignment(23, 5, 5));
    }

    #[test]
    fn separated_clusters_are_perfect() {
        let mut r = rng::rng(1);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            x.push(vec![s + 0.05 * r.random::<f64>(), 0.05 * r.random::<f64>()]);
            y.push(i % 2);
        }
        let res = probe(&x, &y, 0).unwrap();
        assert_eq!(res.accuracy, 1.0);
        assert_eq!(res.per_fold.len(), 5);
        assert_eq!(res.n_classes, 2);
    }

    #[test]
    fn shuffled_labels_are_near_chance() {
        let mut total = 0.0;
        for seed in 0..20 {
            let mut r = rng::rng(100 + seed);
            let x: Vec<Vec<f64>> = (0..60)
                .map(|_| (0..4).map(|_| r.random::<f64>()).collect())
                .collect();
            let mut y: Vec<usize> = (0..60).map(|i| i % 2).collect();
            y.shuffle(&mut r);
            total += probe(&x, &y, seed).unwrap().accuracy;
        }
        let mean = total / 20.0;
        assert!((0.35..=0.65).contains(&mean), "{mean}");
    }

    #[test]
    fn rejects_small_classes() {
        let x = vec![vec![0.0]; 8];
        assert_eq!(
            probe(&x, &[0, 0, 0, 0, 0, 1, 1, 1], 0),
            Err(Error::TooFewSamples {
                class: 1,
                count: 3,
                folds: 5
            })
        );
        assert_eq!(probe(&x, &[0; 8], 0), Err(Error::TooFewClasses(1)));
    }

    #[test]
    fn deterministic_per_seed() {
        let mut r = rng::rng(9);
        let x: Vec<Vec<f64>> = (0..30).map(|_| vec![r.random(), r.random()]).collect();
        let y: Vec<usize> = (0..30).map(|i| (i % 3 == 0) as usize).collect();
        assert_eq!(probe(&x, &y, 3).unwrap(), probe(&x, &y, 3).unwrap());
    }
}
