//! Dual NT-Xent objective and the pretraining loop.
//!
//! For each graph in a batch two views are drawn (edge drop, then feature
//! masking). The geometry branch encodes each view with the GCN; the
//! Cheeger-Hodge branch maps each view's joint signature through its head.
//! The loss is `lambda_geo * NTXent(z_geo) + lambda_ch * NTXent(z_ch)`.

mod ntxent;
mod optim;

pub use ntxent::{ntxent_loss, ntxent_with_grad, Denominator, NtXent};
pub use optim::Adam;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph::{AugmentConfig, Graph, GraphDataset};
use crate::model::{gcn_backward, gcn_forward, GcnOutput, MlpCache, ModelParams, ModelShape};
use crate::rng;
use crate::signature::{joint_signature, DEFAULT_D_C, DEFAULT_D_H};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ablation {
    #[default]
    Full,
    /// Cheeger block of the signature zeroed before the head.
    NoCheeger,
    /// Hodge block zeroed.
    NoHodge,
    /// Cheeger-Hodge branch removed (`lambda_ch = 0`).
    NoCh,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::Full,
        Ablation::NoCheeger,
        Ablation::NoHodge,
        Ablation::NoCh,
    ];
}

impl core::fmt::Display for Ablation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Ablation::Full => "full",
            Ablation::NoCheeger => "no_cheeger",
            Ablation::NoHodge => "no_hodge",
            Ablation::NoCh => "no_ch",
        })
    }
}

impl core::str::FromStr for Ablation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "no_cheeger" => Ok(Self::NoCheeger),
            "no_hodge" => Ok(Self::NoHodge),
            "no_ch" => Ok(Self::NoCh),
            other => Err(Error::InvalidConfig(format!("unknown ablation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub tau: f64,
    pub lambda_geo: f64,
    pub lambda_ch: f64,
    pub p_edge: f64,
    pub p_feat: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub ablation: Ablation,
    pub ntxent_denominator: Denominator,
    pub d_c: usize,
    pub d_h: usize,
    pub hidden: usize,
    pub layers: usize,
    pub emb_dim: usize,
    pub head_hidden: usize,
    pub geo_head: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            tau: 0.2,
            lambda_geo: 1.0,
            lambda_ch: 1.0,
            p_edge: 0.2,
            p_feat: 0.2,
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            ablation: Ablation::Full,
            ntxent_denominator: Denominator::Standard,
            d_c: DEFAULT_D_C,
            d_h: DEFAULT_D_H,
            hidden: 64,
            layers: 3,
            emb_dim: 64,
            head_hidden: 64,
            geo_head: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if !(self.tau > 0.0) {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        if !(self.lambda_geo >= 0.0) || !(self.lambda_ch >= 0.0) {
            return bad("loss weights must be >= 0".into());
        }
        for p in [self.p_edge, self.p_feat] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Probability(p));
            }
        }
        if self.batch_size < 2 {
            return bad(format!("batch_size must be >= 2, got {}", self.batch_size));
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0".into());
        }
        if self.d_c < 2 {
            return Err(Error::CheegerDim(self.d_c));
        }
        if self.d_h == 0 {
            return Err(Error::HodgeDim);
        }
        Ok(())
    }

    /// `lambda_ch` after the ablation is applied.
    pub fn effective_lambda_ch(&self) -> f64 {
        if self.ablation == Ablation::NoCh {
            0.0
        } else {
            self.lambda_ch
        }
    }

    pub fn model_shape(&self, in_dim: usize) -> ModelShape {
        ModelShape {
            in_dim,
            hidden: self.hidden,
            layers: self.layers,
            emb_dim: self.emb_dim,
            head_hidden: self.head_hidden,
            sig_dim: self.d_c + self.d_h,
            geo_head: self.geo_head,
        }
    }
}

/// Joint signature with the ablation's block zeroed.
pub fn ablated_signature(g: &Graph, config: &TrainConfig) -> Result<Vec<f64>> {
    Ok(ablate(
        joint_signature(g, config.d_c, config.d_h)?.values(),
        config,
    ))
}

/// Zeroes the block of a joint signature that the ablation removes.
pub fn ablate(mut v: Vec<f64>, config: &TrainConfig) -> Vec<f64> {
    match config.ablation {
        Ablation::NoCheeger => v[..config.d_c].iter_mut().for_each(|x| *x = 0.0),
        Ablation::NoHodge => v[config.d_c..].iter_mut().for_each(|x| *x = 0.0),
        Ablation::Full | Ablation::NoCh => {}
    }
    v
}

#[derive(Debug, Clone)]
pub struct View {
    pub graph: Graph,
    /// Present when the Cheeger-Hodge branch is active.
    pub signature: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ViewPair {
    pub first: View,
    pub second: View,
}

/// Seed of view `view` of dataset graph `graph_index` at `epoch`.
pub fn view_seed(run_seed: u64, epoch: usize, graph_index: usize, view: usize) -> u64 {
    rng::derive(run_seed, &[epoch as u64, graph_index as u64, view as u64])
}

pub fn make_view(g: &Graph, config: &TrainConfig, seed: u64) -> Result<View> {
    let graph = AugmentConfig::new(config.p_edge, config.p_feat, seed)?.apply(g)?;
    let signature = if config.effective_lambda_ch() > 0.0 {
        Some(ablated_signature(&graph, config)?)
    } else {
        None
    };
    Ok(View { graph, signature })
}

pub fn make_pair(
    g: &Graph,
    config: &TrainConfig,
    epoch: usize,
    graph_index: usize,
) -> Result<ViewPair> {
    Ok(ViewPair {
        first: make_view(g, config, view_seed(config.seed, epoch, graph_index, 0))?,
        second: make_view(g, config, view_seed(config.seed, epoch, graph_index, 1))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossParts {
    pub total: f64,
    /// Geometry NT-Xent (unweighted); 0 when `lambda_geo = 0`.
    pub geo: f64,
    /// Cheeger-Hodge NT-Xent (unweighted); 0 when the branch is off.
    pub ch: f64,
}

struct PairForward {
    geo: Option<[GcnOutput; 2]>,
    ch: Option<[(Vec<f64>, MlpCache); 2]>,
}

fn forward_pair(
    params: &ModelParams,
    pair: &ViewPair,
    use_geo: bool,
    use_ch: bool,
) -> Result<PairForward> {
    let geo = if use_geo {
        Some([
            gcn_forward(params, &pair.first.graph)?,
            gcn_forward(params, &pair.second.graph)?,
        ])
    } else {
        None
    };
    let ch = if use_ch {
        fn sig(v: &View) -> Result<&[f64]> {
            v.signature.as_deref().ok_or_else(|| {
                Error::InvalidConfig("view has no signature but the CH branch is on".into())
            })
        }
        Some([
            params.ch_head.forward_cached(sig(&pair.first)?)?,
            params.ch_head.forward_cached(sig(&pair.second)?)?,
        ])
    } else {
        None
    };
    Ok(PairForward { geo, ch })
}

fn collect<'a>(
    forwards: &'a [PairForward],
    pick: impl Fn(&'a PairForward) -> Option<(&'a [f64], &'a [f64])>,
) -> Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut a = Vec::with_capacity(forwards.len());
    let mut b = Vec::with_capacity(forwards.len());
    for f in forwards {
        let (x, y) = pick(f)?;
        a.push(x.to_vec());
        b.push(y.to_vec());
    }
    Some((a, b))
}

struct BranchLosses {
    parts: LossParts,
    geo: Option<NtXent>,
    ch: Option<NtXent>,
}

fn branch_losses(forwards: &[PairForward], config: &TrainConfig) -> Result<BranchLosses> {
    let lambda_ch = config.effective_lambda_ch();
    let mut parts = LossParts::default();
    let geo = match collect(forwards, |f| {
        f.geo.as_ref().map(|g| (&g[0].z[..], &g[1].z[..]))
    }) {
        Some((a, b)) => {
            let r = ntxent_with_grad(&a, &b, config.tau, config.ntxent_denominator)?;
            parts.geo = r.loss;
            Some(r)
        }
        None => None,
    };
    let ch = match collect(forwards, |f| {
        f.ch.as_ref().map(|c| (&c[0].0[..], &c[1].0[..]))
    }) {
        Some((a, b)) => {
            let r = ntxent_with_grad(&a, &b, config.tau, config.ntxent_denominator)?;
            parts.ch = r.loss;
            Some(r)
        }
        None => None,
    };
    parts.total = config.lambda_geo * parts.geo + lambda_ch * parts.ch;
    Ok(BranchLosses { parts, geo, ch })
}

fn forward_all<E: Executor>(
    params: &ModelParams,
    pairs: &[ViewPair],
    config: &TrainConfig,
    exec: &E,
) -> Result<Vec<PairForward>> {
    config.validate()?;
    let use_geo = config.lambda_geo > 0.0;
    let use_ch = config.effective_lambda_ch() > 0.0;
    exec.map(pairs.len(), |i| {
        forward_pair(params, &pairs[i], use_geo, use_ch)
    })
    .into_iter()
    .collect()
}

/// Batch objective without gradients.
pub fn total_loss<E: Executor>(
    params: &ModelParams,
    pairs: &[ViewPair],
    config: &TrainConfig,
    exec: &E,
) -> Result<LossParts> {
    let forwards = forward_all(params, pairs, config, exec)?;
    if forwards.iter().all(|f| f.geo.is_none() && f.ch.is_none()) {
        return Ok(LossParts::default());
    }
    Ok(branch_losses(&forwards, config)?.parts)
}

/// Batch objective and its exact gradient with respect to every parameter.
/// Per-graph backward passes run through `exec`; their gradients are summed
/// in batch order.
pub fn loss_and_grad<E: Executor>(
    params: &ModelParams,
    pairs: &[ViewPair],
    config: &TrainConfig,
    exec: &E,
) -> Result<(LossParts, ModelParams)> {
    let forwards = forward_all(params, pairs, config, exec)?;
    let mut grad = params.zeros_like();
    if forwards.iter().all(|f| f.geo.is_none() && f.ch.is_none()) {
        return Ok((LossParts::default(), grad));
    }
    let losses = branch_losses(&forwards, config)?;
    let lambda_geo = config.lambda_geo;
    let lambda_ch = config.effective_lambda_ch();
    let scaled = |v: &[f64], s: f64| v.iter().map(|x| x * s).collect::<Vec<f64>>();
    let per_graph: Vec<ModelParams> = exec.map(forwards.len(), |i| {
        let mut g = params.zeros_like();
        if let (Some(out), Some(nt)) = (&forwards[i].geo, &losses.geo) {
            gcn_backward(
                params,
                &out[0].cache,
                &scaled(&nt.d_first[i], lambda_geo),
                &mut g,
            );
            gcn_backward(
                params,
                &out[1].cache,
                &scaled(&nt.d_second[i], lambda_geo),
                &mut g,
            );
        }
        if let (Some(out), Some(nt)) = (&forwards[i].ch, &losses.ch) {
            params.ch_head.backward(
                &out[0].1,
                &scaled(&nt.d_first[i], lambda_ch),
                &mut g.ch_head,
            );
            params.ch_head.backward(
                &out[1].1,
                &scaled(&nt.d_second[i], lambda_ch),
                &mut g.ch_head,
            );
        }
        g
    });
    for g in &per_graph {
        grad.add_assign(g);
    }
    grad.check_finite("gradient")?;
    Ok((losses.parts, grad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    /// 1-based.
    pub epoch: usize,
    pub total: f64,
    pub geo: f64,
    pub ch: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub trace: Vec<EpochLoss>,
}

/// Batches of `batch_size` over `order`; a trailing singleton joins the
/// previous batch since NT-Xent needs two samples.
pub fn batches(order: &[usize], batch_size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = order.chunks(batch_size).collect();
    if out.len() >= 2 && out.last().is_some_and(|b| b.len() == 1) {
        out.pop();
        let start = (out.len() - 1) * batch_size;
        let last = out.len() - 1;
        out[last] = &order[start..];
    }
    out
}

pub fn init_params(dataset: &GraphDataset, config: &TrainConfig) -> Result<ModelParams> {
    let in_dim = dataset
        .feature_dim()
        .ok_or_else(|| Error::InvalidConfig("empty dataset".into()))?;
    ModelParams::init(
        config.model_shape(in_dim),
        rng::derive(config.seed, &[u64::MAX]),
    )
}

/// Runs `epochs` passes of shuffled mini-batches with Adam. Deterministic
/// for a fixed config and seed, independent of the executor.
pub fn pretrain<E: Executor>(
    dataset: &GraphDataset,
    config: &TrainConfig,
    exec: &E,
) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "pretraining needs at least 2 graphs, dataset has {}",
            dataset.len()
        )));
    }
    let mut params = init_params(dataset, config)?;
    let mut adam = Adam::new(&params, config.learning_rate);
    let graphs = dataset.graphs();
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..graphs.len()).collect();
        order.shuffle(&mut rng::rng(rng::derive(
            config.seed,
            &[epoch as u64, u64::MAX - 1],
        )));
        let mut sums = LossParts::default();
        for (b, batch) in batches(&order, config.batch_size).into_iter().enumerate() {
            let pairs: Vec<ViewPair> = exec
                .map(batch.len(), |i| {
                    make_pair(&graphs[batch[i]], config, epoch, batch[i])
                })
                .into_iter()
                .collect::<Result<_>>()?;
            let (loss, grad) = match loss_and_grad(&params, &pairs, config, exec) {
                Err(Error::NonFiniteGradient(_)) => {
                    return Err(Error::NonFiniteLoss {
                        epoch: epoch + 1,
                        batch: b,
                    })
                }
                other => other?,
            };
            if !loss.total.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: b,
                });
            }
            adam.step(&mut params, &grad);
            let w = batch.len() as f64;
            sums.total += w * loss.total;
            sums.geo += w * loss.geo;
            sums.ch += w * loss.ch;
        }
        let n = graphs.len() as f64;
        trace.push(EpochLoss {
            epoch: epoch + 1,
            total: sums.total / n,
            geo: sums.geo / n,
            ch: sums.ch / n,
        });
    }
    Ok(TrainOutcome { params, trace })
}

/// Downstream representation of a clean graph: mean-pooled GCN readout,
/// followed by the CH head output on the (ablated) signature unless the
/// branch is disabled.
pub fn embed(params: &ModelParams, g: &Graph, config: &TrainConfig) -> Result<Vec<f64>> {
    let sig = if config.ablation == Ablation::NoCh {
        Vec::new()
    } else {
        joint_signature(g, config.d_c, config.d_h)?.values()
    };
    embed_with_signature(params, g, sig, config)
}

/// [`embed`] with the raw joint signature of `g` already computed. The
/// signature is ignored under `no_ch`.
pub fn embed_with_signature(
    params: &ModelParams,
    g: &Graph,
    sig: Vec<f64>,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    let mut out = gcn_forward(params, g)?.pooled;
    if config.ablation != Ablation::NoCh {
        out.extend(params.ch_head.forward(&ablate(sig, config))?);
    }
    Ok(out)
}

pub fn embed_all<E: Executor>(
    params: &ModelParams,
    graphs: &[Graph],
    config: &TrainConfig,
    exec: &E,
) -> Result<Vec<Vec<f64>>> {
    exec.map(graphs.len(), |i| embed(params, &graphs[i], config))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub block: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    /// Some ReLU changed sign between `+step` and `-step`, so the central
    /// difference straddles a kink and is not a valid reference.
    pub kink: bool,
}

impl GradCheck {
    /// `|a - n| / max(|a|, |n|, floor)`; the floor keeps near-zero entries
    /// from amplifying rounding noise.
    pub fn relative_error(&self, floor: f64) -> f64 {
        (self.analytic - self.numeric).abs()
            / self.analytic.abs().max(self.numeric.abs()).max(floor)
    }
}

fn relu_pattern(
    params: &ModelParams,
    pairs: &[ViewPair],
    config: &TrainConfig,
) -> Result<Vec<bool>> {
    let mut out = Vec::new();
    for f in forward_all(params, pairs, config, &crate::exec::Sequential)? {
        for g in f.geo.iter().flatten() {
            g.cache.relu_signs(&mut out);
        }
        for c in f.ch.iter().flatten() {
            c.1.relu_signs(&mut out);
        }
    }
    Ok(out)
}

/// Compares analytic gradients with central differences on parameters drawn
/// uniformly (with replacement) using `seed`. Draws continue until `samples`
/// of them are kink-free; kinked draws are returned too, flagged.
pub fn gradient_check(
    params: &ModelParams,
    pairs: &[ViewPair],
    config: &TrainConfig,
    samples: usize,
    step: f64,
    seed: u64,
) -> Result<Vec<GradCheck>> {
    let (_, grad) = loss_and_grad(params, pairs, config, &crate::exec::Sequential)?;
    let layout: Vec<(String, usize)> = params
        .tensors()
        .into_iter()
        .map(|(n, _, _, d)| (n, d.len()))
        .collect();
    let total: usize = layout.iter().map(|l| l.1).sum();
    let grads: Vec<Vec<f64>> = grad.tensors().into_iter().map(|t| t.3.to_vec()).collect();
    let mut r = rng::rng(seed);
    let mut out = Vec::with_capacity(samples);
    let mut smooth = 0;
    while smooth < samples {
        if out.len() >= 10 * samples.max(1) {
            return Err(Error::InvalidConfig(
                "gradient check: too many draws straddle a ReLU kink".into(),
            ));
        }
        let mut flat = rand::Rng::random_range(&mut r, 0..total);
        let mut block = 0;
        while flat >= layout[block].1 {
            flat -= layout[block].1;
            block += 1;
        }
        let shifted = |delta: f64| {
            let mut p = params.clone();
            p.tensors_mut()[block][flat] += delta;
            p
        };
        let (up, down) = (shifted(step), shifted(-step));
        let numeric = (total_loss(&up, pairs, config, &crate::exec::Sequential)?.total
            - total_loss(&down, pairs, config, &crate::exec::Sequential)?.total)
            / (2.0 * step);
        let kink = relu_pattern(&up, pairs, config)? != relu_pattern(&down, pairs, config)?;
        if !kink {
            smooth += 1;
        }
        out.push(GradCheck {
            block: layout[block].0.clone(),
            index: flat,
            analytic: grads[block][flat],
            numeric,
            kink,
        });
    }
    Ok(out)
}
