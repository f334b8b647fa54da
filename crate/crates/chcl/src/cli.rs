//! `chcl` subcommands.

use crate::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use crate::config::RunConfig;
use crate::edgelist::{load_edge_list, save_edge_list};
use crate::error::{write, Error, Result};
use crate::exec::Pool;
use crate::fmt_f64;
use crate::manifest::Manifest;
use chcl_core::eval::{
    linear_probe, robustness_sweep, synthetic_dataset, EmbeddingSource, SynthSpec,
};
use chcl_core::model::gcn_forward;
use chcl_core::signature::joint_signature;
use chcl_core::training::{embed_all, pretrain};
use chcl_core::{Ablation, Executor, GraphDataset, TrainConfig};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "chcl",
    version,
    about = "Cheeger-Hodge contrastive learning on small graphs"
)]
pub struct Cli {
    /// Worker threads; 0 means one per logical core.
    #[arg(long, global = true, env = "CHCL_WORKERS", default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the joint signature of every graph as CSV.
    Signature {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Pretrain a model; writes checkpoint.txt, loss_trace.csv and manifest.txt.
    Pretrain {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated linear probe on embeddings or raw signatures.
    Probe {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        /// Trained checkpoint; required unless --source signature.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// geo, signature or concat.
        #[arg(long, default_value = "concat")]
        source: EmbeddingSource,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Robustness sweep of a trained checkpoint; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and probe every ablation over several seeds; writes ablation.csv.
    Ablate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the four-class synthetic benchmark as an edge list.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Output edge-list file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Input {
    /// Edge-list dataset.
    #[arg(long, conflicts_with = "tu", required_unless_present = "tu")]
    pub data: Option<PathBuf>,
    /// TU dataset given as DIR/NAME.
    #[arg(long, value_name = "DIR/NAME")]
    pub tu: Option<PathBuf>,
}

impl Input {
    fn load(&self) -> Result<GraphDataset> {
        match (&self.data, &self.tu) {
            (Some(p), _) => load_edge_list(p),
            (None, Some(prefix)) => {
                let dir = prefix.parent().unwrap_or(Path::new("."));
                let name = prefix
                    .file_name()
                    .ok_or_else(|| Error::Usage("--tu needs DIR/NAME".into()))?
                    .to_string_lossy();
                crate::tu::load_tu(dir, &name)
            }
            (None, None) => Err(Error::Usage("one of --data or --tu is required".into())),
        }
    }

    fn describe(&self) -> String {
        match (&self.data, &self.tu) {
            (Some(p), _) => p.display().to_string(),
            (None, Some(p)) => format!("tu:{}", p.display()),
            _ => String::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Per-key overrides; names follow the config keys.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub lambda_geo: Option<String>,
    #[arg(long)]
    pub lambda_ch: Option<String>,
    #[arg(long)]
    pub p_edge: Option<String>,
    #[arg(long)]
    pub p_feat: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    #[arg(long)]
    pub batch_size: Option<String>,
    #[arg(long, alias = "lr")]
    pub learning_rate: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub ablation: Option<String>,
    #[arg(long)]
    pub ntxent_denominator: Option<String>,
    #[arg(long = "dc", alias = "d-c")]
    pub d_c: Option<String>,
    #[arg(long = "dh", alias = "d-h")]
    pub d_h: Option<String>,
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub layers: Option<String>,
    #[arg(long)]
    pub emb_dim: Option<String>,
    #[arg(long)]
    pub head_hidden: Option<String>,
    #[arg(long)]
    pub geo_head: Option<String>,
    #[arg(long)]
    pub k_folds: Option<String>,
    #[arg(long)]
    pub probe_seed: Option<String>,
    /// Comma-separated strengths.
    #[arg(long = "levels", alias = "sweep-levels")]
    pub sweep_levels: Option<String>,
    /// Comma-separated: edge_drop, feature_mask.
    #[arg(long = "kinds", alias = "sweep-kinds")]
    pub sweep_kinds: Option<String>,
    #[arg(long)]
    pub sweep_seeds: Option<String>,
    #[arg(long)]
    pub sweep_probe_seeds: Option<String>,
    #[arg(long)]
    pub sweep_seed: Option<String>,
    #[arg(long)]
    pub ablate_seeds: Option<String>,
    #[arg(long = "per-class", alias = "synth-per-class")]
    pub synth_per_class: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, &Option<String>); 27] {
        [
            ("tau", &self.tau),
            ("lambda_geo", &self.lambda_geo),
            ("lambda_ch", &self.lambda_ch),
            ("p_edge", &self.p_edge),
            ("p_feat", &self.p_feat),
            ("epochs", &self.epochs),
            ("batch_size", &self.batch_size),
            ("learning_rate", &self.learning_rate),
            ("seed", &self.seed),
            ("ablation", &self.ablation),
            ("ntxent_denominator", &self.ntxent_denominator),
            ("d_c", &self.d_c),
            ("d_h", &self.d_h),
            ("hidden", &self.hidden),
            ("layers", &self.layers),
            ("emb_dim", &self.emb_dim),
            ("head_hidden", &self.head_hidden),
            ("geo_head", &self.geo_head),
            ("k_folds", &self.k_folds),
            ("probe_seed", &self.probe_seed),
            ("sweep_levels", &self.sweep_levels),
            ("sweep_kinds", &self.sweep_kinds),
            ("sweep_seeds", &self.sweep_seeds),
            ("sweep_probe_seeds", &self.sweep_probe_seeds),
            ("sweep_seed", &self.sweep_seed),
            ("ablate_seeds", &self.ablate_seeds),
            ("synth_per_class", &self.synth_per_class),
        ]
    }
}

impl Common {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        if let Some(p) = &self.config {
            c.apply_file(p)?;
        }
        for (k, v) in self.overrides.pairs() {
            if let Some(v) = v {
                c.set(k, v)
                    .map_err(|m| Error::Usage(format!("--{}: {m}", k.replace('_', "-"))))?;
            }
        }
        c.train.validate()?;
        Ok(c)
    }
}

fn labels(data: &GraphDataset) -> Result<Vec<usize>> {
    data.class_indices()
        .map(|l| l.0)
        .ok_or_else(|| Error::Usage("probing needs every graph to carry a label".into()))
}

fn signatures<E: Executor>(
    data: &GraphDataset,
    t: &TrainConfig,
    exec: &E,
) -> Result<Vec<Vec<f64>>> {
    let g = data.graphs();
    Ok(exec
        .map(g.len(), |i| {
            joint_signature(&g[i], t.d_c, t.d_h).map(|s| s.values())
        })
        .into_iter()
        .collect::<chcl_core::Result<_>>()?)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

/// Uses the checkpoint's architecture, keeping the run's other settings.
fn with_checkpoint_dims(mut t: TrainConfig, c: &Checkpoint) -> TrainConfig {
    let s = c.params.shape;
    t.d_c = c.d_c;
    t.d_h = c.d_h;
    t.hidden = s.hidden;
    t.layers = s.layers;
    t.emb_dim = s.emb_dim;
    t.head_hidden = s.head_hidden;
    t.geo_head = s.geo_head;
    t
}

pub fn loss_trace_csv(trace: &[chcl_core::training::EpochLoss]) -> String {
    let mut out = String::from("epoch,mean_total,mean_geo,mean_ch\n");
    for e in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.epoch,
            fmt_f64(e.total),
            fmt_f64(e.geo),
            fmt_f64(e.ch)
        ));
    }
    out
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let pool = Pool::new(cli.workers);
    match cli.command {
        Command::Signature { input, common, out } => {
            let cfg = common.resolve()?;
            let data = input.load()?;
            let t = &cfg.train;
            let sigs = signatures(&data, t, &pool)?;
            let mut csv = String::from("graph_id,d_c,d_h");
            for j in 1..=t.d_c + t.d_h {
                csv.push_str(&format!(",v_{j}"));
            }
            csv.push('\n');
            for (id, s) in data.ids().iter().zip(&sigs) {
                csv.push_str(&format!("{id},{},{}", t.d_c, t.d_h));
                for v in s {
                    csv.push(',');
                    csv.push_str(&fmt_f64(*v));
                }
                csv.push('\n');
            }
            write(&out, &csv)?;
            Manifest::new("signature")
                .record("data", input.describe())
                .record("out", out.display())
                .record("workers", pool.workers())
                .save(&cfg, &manifest_path(&out))
        }
        Command::Pretrain { input, common, out } => {
            let cfg = common.resolve()?;
            let data = input.load()?;
            let result = pretrain(&data, &cfg.train, &pool)?;
            let ckpt = Checkpoint {
                params: result.params,
                d_c: cfg.train.d_c,
                d_h: cfg.train.d_h,
            };
            save_checkpoint(&ckpt, &out.join("checkpoint.txt"))?;
            write(&out.join("loss_trace.csv"), &loss_trace_csv(&result.trace))?;
            Manifest::new("pretrain")
                .record("data", input.describe())
                .record("out", out.display())
                .record("workers", pool.workers())
                .save(&cfg, &out.join("manifest.txt"))
        }
        Command::Probe {
            input,
            common,
            checkpoint,
            source,
            out,
        } => {
            let cfg = common.resolve()?;
            let data = input.load()?;
            let y = labels(&data)?;
            let ckpt = checkpoint.as_deref().map(load_checkpoint).transpose()?;
            let train = match &ckpt {
                Some(c) => with_checkpoint_dims(cfg.train.clone(), c),
                None => cfg.train.clone(),
            };
            let x = match (source, &ckpt) {
                (EmbeddingSource::Signature, _) => signatures(&data, &train, &pool)?,
                (_, None) => {
                    return Err(Error::Usage(format!(
                        "--source {source} needs --checkpoint"
                    )))
                }
                (EmbeddingSource::Geo, Some(c)) => {
                    let g = data.graphs();
                    pool.map(g.len(), |i| gcn_forward(&c.params, &g[i]).map(|o| o.pooled))
                        .into_iter()
                        .collect::<chcl_core::Result<_>>()?
                }
                (EmbeddingSource::Concat, Some(c)) => {
                    embed_all(&c.params, data.graphs(), &train, &pool)?
                }
            };
            let res = linear_probe(&x, &y, source, &cfg.probe(), &pool)?;
            let mut csv = String::from("source,fold,accuracy\n");
            for (f, a) in res.per_fold.iter().enumerate() {
                csv.push_str(&format!("{source},{f},{}\n", fmt_f64(*a)));
            }
            csv.push_str(&format!("{source},mean,{}\n", fmt_f64(res.accuracy)));
            write(&out, &csv)?;
            let mut m = Manifest::new("probe")
                .record("data", input.describe())
                .record("source", source)
                .record("out", out.display())
                .record("workers", pool.workers());
            if let Some(p) = &checkpoint {
                m = m.record("checkpoint", p.display());
            }
            m.save(&cfg, &manifest_path(&out))
        }
        Command::Sweep {
            input,
            common,
            checkpoint,
            out,
        } => {
            let cfg = common.resolve()?;
            let data = input.load()?;
            let ckpt = load_checkpoint(&checkpoint)?;
            let train = with_checkpoint_dims(cfg.train.clone(), &ckpt);
            let rows = robustness_sweep(
                &data,
                &ckpt.params,
                &train,
                &cfg.sweep_kinds,
                &cfg.sweep(),
                &pool,
            )?;
            let mut csv =
                String::from("kind,level,seed_count,probe_accuracy,mean_sig_l2_displacement\n");
            for r in rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.kind,
                    fmt_f64(r.level),
                    r.seed_count,
                    fmt_f64(r.probe_accuracy),
                    fmt_f64(r.mean_sig_l2_displacement)
                ));
            }
            write(&out.join("sweep.csv"), &csv)?;
            Manifest::new("sweep")
                .record("data", input.describe())
                .record("checkpoint", checkpoint.display())
                .record("out", out.display())
                .record("workers", pool.workers())
                .save(&cfg, &out.join("manifest.txt"))
        }
        Command::Ablate { input, common, out } => {
            let cfg = common.resolve()?;
            let data = input.load()?;
            let y = labels(&data)?;
            let mut table = String::from(
                "ablation,seed_count,median_accuracy,mean_accuracy,min_accuracy,max_accuracy\n",
            );
            let mut runs = String::from("ablation,seed,accuracy\n");
            for ablation in Ablation::ALL {
                let mut accs = Vec::with_capacity(cfg.ablate_seeds);
                for k in 0..cfg.ablate_seeds {
                    let train = TrainConfig {
                        ablation,
                        seed: cfg.train.seed.wrapping_add(k as u64),
                        ..cfg.train.clone()
                    };
                    let params = pretrain(&data, &train, &pool)?.params;
                    let x = embed_all(&params, data.graphs(), &train, &pool)?;
                    let source = if ablation == Ablation::NoCh {
                        EmbeddingSource::Geo
                    } else {
                        EmbeddingSource::Concat
                    };
                    let acc = linear_probe(&x, &y, source, &cfg.probe(), &pool)?.accuracy;
                    runs.push_str(&format!("{ablation},{},{}\n", train.seed, fmt_f64(acc)));
                    accs.push(acc);
                }
                if accs.is_empty() {
                    return Err(Error::Usage("ablate_seeds must be at least 1".into()));
                }
                let mean = accs.iter().sum::<f64>() / accs.len() as f64;
                let (lo, hi) = accs
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                        (a.min(x), b.max(x))
                    });
                table.push_str(&format!(
                    "{ablation},{},{},{},{},{}\n",
                    accs.len(),
                    fmt_f64(median(&mut accs)),
                    fmt_f64(mean),
                    fmt_f64(lo),
                    fmt_f64(hi)
                ));
            }
            write(&out.join("ablation.csv"), &table)?;
            write(&out.join("ablation_runs.csv"), &runs)?;
            Manifest::new("ablate")
                .record("data", input.describe())
                .record("out", out.display())
                .record("workers", pool.workers())
                .save(&cfg, &out.join("manifest.txt"))
        }
        Command::Synth { common, out } => {
            let cfg = common.resolve()?;
            let data =
                synthetic_dataset(&SynthSpec::default(), cfg.synth_per_class, cfg.train.seed);
            save_edge_list(&data, &out)?;
            Manifest::new("synth")
                .record("out", out.display())
                .save(&cfg, &manifest_path(&out))
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("chcl: error: {e}");
            eprintln!("run `chcl --help` for usage");
            1
        }
    }
}
