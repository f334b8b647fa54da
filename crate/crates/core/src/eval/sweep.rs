//! Robustness sweep: perturb every graph at increasing strength, then
//! re-embed and re-probe, and measure how far joint signatures move.

use super::probe::{linear_probe, EmbeddingSource, ProbeConfig};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph::{augment_edge_drop, augment_feature_mask, Graph, GraphDataset};
use crate::model::ModelParams;
use crate::rng;
use crate::signature::joint_signature;
use crate::training::{embed_with_signature, Ablation, TrainConfig};
use alloc::format;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    EdgeDrop,
    FeatureMask,
}

impl PerturbationKind {
    fn tag(self) -> u64 {
        match self {
            PerturbationKind::EdgeDrop => 0,
            PerturbationKind::FeatureMask => 1,
        }
    }

    pub fn apply(self, g: &Graph, level: f64, seed: u64) -> Result<Graph> {
        match self {
            PerturbationKind::EdgeDrop => augment_edge_drop(g, level, seed),
            PerturbationKind::FeatureMask => augment_feature_mask(g, level, seed),
        }
    }
}

impl core::fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            PerturbationKind::EdgeDrop => "edge_drop",
            PerturbationKind::FeatureMask => "feature_mask",
        })
    }
}

impl core::str::FromStr for PerturbationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge_drop" => Ok(Self::EdgeDrop),
            "feature_mask" => Ok(Self::FeatureMask),
            other => Err(Error::InvalidConfig(format!(
                "unknown perturbation kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub levels: Vec<f64>,
    /// Perturbation draws averaged for the displacement column.
    pub seeds: usize,
    /// Leading draws that are also embedded and probed.
    pub probe_seeds: usize,
    pub probe: ProbeConfig,
    /// Root of the perturbation seeds, independent of training seeds.
    pub seed: u64,
}

impl SweepConfig {
    /// `0.05, 0.10, ..., 0.50`.
    pub fn default_levels() -> Vec<f64> {
        (1..=10).map(|i| i as f64 / 20.0).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidConfig("no sweep levels".into()));
        }
        for (i, &l) in self.levels.iter().enumerate() {
            if !(0.0..=0.5).contains(&l) {
                return Err(Error::InvalidConfig(format!(
                    "sweep level {l} outside [0, 0.5]"
                )));
            }
            if i > 0 && l <= self.levels[i - 1] {
                return Err(Error::InvalidConfig(
                    "sweep levels must be strictly increasing".into(),
                ));
            }
        }
        if self.seeds == 0 || self.probe_seeds == 0 || self.probe_seeds > self.seeds {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= probe_seeds <= seeds, got {} and {}",
                self.probe_seeds, self.seeds
            )));
        }
        Ok(())
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            levels: Self::default_levels(),
            seeds: 100,
            probe_seeds: 3,
            probe: ProbeConfig::default(),
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub kind: PerturbationKind,
    pub level: f64,
    pub seed_count: usize,
    /// Mean probe accuracy over the probe draws.
    pub probe_accuracy: f64,
    /// Mean over draws and graphs of `|sig(perturbed) - sig(clean)|_2`.
    pub mean_sig_l2_displacement: f64,
}

/// Seed of draw `draw` for graph `graph`. Shared across levels, so a
/// higher edge-drop level removes a superset of the edges.
fn perturb_seed(root: u64, kind: PerturbationKind, draw: usize, graph: usize) -> u64 {
    rng::derive(root, &[kind.tag(), draw as u64, graph as u64])
}

/// One row per `(kind, level)`, kinds outermost.
pub fn robustness_sweep<E: Executor>(
    dataset: &GraphDataset,
    params: &ModelParams,
    train: &TrainConfig,
    kinds: &[PerturbationKind],
    sweep: &SweepConfig,
    exec: &E,
) -> Result<Vec<SweepRow>> {
    sweep.validate()?;
    let (labels, _) = dataset
        .class_indices()
        .ok_or_else(|| Error::InvalidConfig("sweep needs a labelled dataset".into()))?;
    let graphs = dataset.graphs();
    let clean: Vec<Vec<f64>> = exec
        .map(graphs.len(), |i| {
            Ok(joint_signature(&graphs[i], train.d_c, train.d_h)?.values())
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let source = if train.ablation == Ablation::NoCh {
        EmbeddingSource::Geo
    } else {
        EmbeddingSource::Concat
    };
    let mut rows = Vec::with_capacity(kinds.len() * sweep.levels.len());
    for &kind in kinds {
        for &level in &sweep.levels {
            let mut displacement = 0.0;
            let mut accuracy = 0.0;
            for draw in 0..sweep.seeds {
                let probe = draw < sweep.probe_seeds;
                let per_graph: Vec<(f64, Option<Vec<f64>>)> = exec
                    .map(graphs.len(), |i| {
                        let g =
                            kind.apply(&graphs[i], level, perturb_seed(sweep.seed, kind, draw, i))?;
                        let sig = if kind == PerturbationKind::FeatureMask {
                            // signatures only see structure
                            clean[i].clone()
                        } else {
                            joint_signature(&g, train.d_c, train.d_h)?.values()
                        };
                        let d = sig
                            .iter()
                            .zip(&clean[i])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>();
                        let emb = if probe {
                            Some(embed_with_signature(params, &g, sig, train)?)
                        } else {
                            None
                        };
                        Ok((libm::sqrt(d), emb))
                    })
                    .into_iter()
                    .collect::<Result<_>>()?;
                displacement += per_graph.iter().map(|p| p.0).sum::<f64>() / graphs.len() as f64;
                if probe {
                    let emb: Vec<Vec<f64>> = per_graph
                        .into_iter()
                        .map(|p| p.1.expect("probe draw"))
                        .collect();
                    accuracy += linear_probe(&emb, &labels, source, &sweep.probe, exec)?.accuracy;
                }
            }
            rows.push(SweepRow {
                kind,
                level,
                seed_count: sweep.seeds,
                probe_accuracy: accuracy / sweep.probe_seeds as f64,
                mean_sig_l2_displacement: displacement / sweep.seeds as f64,
            });
        }
    }
    Ok(rows)
}

/// Spearman rank correlation, average ranks for ties. `None` when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = alloc::vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / libm::sqrt(vx * vy))
}
