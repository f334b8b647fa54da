//! Flat `key = value` run configuration. Keys are the [`TrainConfig`]
//! field names plus the evaluation settings below. Precedence is
//! flags > file > defaults.

use crate::error::{read, Error, Result};
use chcl_core::eval::{PerturbationKind, SweepConfig};
use chcl_core::TrainConfig;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub k_folds: usize,
    pub probe_seed: u64,
    pub sweep_levels: Vec<f64>,
    pub sweep_kinds: Vec<PerturbationKind>,
    pub sweep_seeds: usize,
    pub sweep_probe_seeds: usize,
    pub sweep_seed: u64,
    /// Training seeds per ablation: `seed, seed + 1, ...`.
    pub ablate_seeds: usize,
    pub synth_per_class: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sweep = SweepConfig::default();
        Self {
            train: TrainConfig::default(),
            k_folds: sweep.probe.k_folds,
            probe_seed: sweep.probe.seed,
            sweep_levels: sweep.levels,
            sweep_kinds: vec![PerturbationKind::EdgeDrop, PerturbationKind::FeatureMask],
            sweep_seeds: sweep.seeds,
            sweep_probe_seeds: sweep.probe_seeds,
            sweep_seed: sweep.seed,
            ablate_seeds: 5,
            synth_per_class: 40,
        }
    }
}

/// Keys that manifests carry for the record; a config file may contain
/// them and they are skipped.
pub const RECORD_KEYS: &[&str] = &[
    "command",
    "data",
    "tu",
    "checkpoint",
    "out",
    "source",
    "workers",
    "version",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value {value:?} for {key}"))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let t = &mut self.train;
        match key {
            "tau" => t.tau = parse(key, value)?,
            "lambda_geo" => t.lambda_geo = parse(key, value)?,
            "lambda_ch" => t.lambda_ch = parse(key, value)?,
            "p_edge" => t.p_edge = parse(key, value)?,
            "p_feat" => t.p_feat = parse(key, value)?,
            "epochs" => t.epochs = parse(key, value)?,
            "batch_size" => t.batch_size = parse(key, value)?,
            "learning_rate" => t.learning_rate = parse(key, value)?,
            "seed" => t.seed = parse(key, value)?,
            "ablation" => {
                t.ablation = value.parse().map_err(|e: chcl_core::Error| e.to_string())?
            }
            "ntxent_denominator" => {
                t.ntxent_denominator = value.parse().map_err(|e: chcl_core::Error| e.to_string())?
            }
            "d_c" => t.d_c = parse(key, value)?,
            "d_h" => t.d_h = parse(key, value)?,
            "hidden" => t.hidden = parse(key, value)?,
            "layers" => t.layers = parse(key, value)?,
            "emb_dim" => t.emb_dim = parse(key, value)?,
            "head_hidden" => t.head_hidden = parse(key, value)?,
            "geo_head" => t.geo_head = parse(key, value)?,
            "k_folds" => self.k_folds = parse(key, value)?,
            "probe_seed" => self.probe_seed = parse(key, value)?,
            "sweep_levels" => self.sweep_levels = parse_list(key, value)?,
            "sweep_kinds" => {
                self.sweep_kinds = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|e: chcl_core::Error| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "sweep_seeds" => self.sweep_seeds = parse(key, value)?,
            "sweep_probe_seeds" => self.sweep_probe_seeds = parse(key, value)?,
            "sweep_seed" => self.sweep_seed = parse(key, value)?,
            "ablate_seeds" => self.ablate_seeds = parse(key, value)?,
            "synth_per_class" => self.synth_per_class = parse(key, value)?,
            k if RECORD_KEYS.contains(&k) => {}
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    /// Every setting as `(key, value)` in a fixed order; feeding these back
    /// through [`Self::set`] reproduces `self`.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let t = &self.train;
        vec![
            ("tau", t.tau.to_string()),
            ("lambda_geo", t.lambda_geo.to_string()),
            ("lambda_ch", t.lambda_ch.to_string()),
            ("p_edge", t.p_edge.to_string()),
            ("p_feat", t.p_feat.to_string()),
            ("epochs", t.epochs.to_string()),
            ("batch_size", t.batch_size.to_string()),
            ("learning_rate", t.learning_rate.to_string()),
            ("seed", t.seed.to_string()),
            ("ablation", t.ablation.to_string()),
            ("ntxent_denominator", t.ntxent_denominator.to_string()),
            ("d_c", t.d_c.to_string()),
            ("d_h", t.d_h.to_string()),
            ("hidden", t.hidden.to_string()),
            ("layers", t.layers.to_string()),
            ("emb_dim", t.emb_dim.to_string()),
            ("head_hidden", t.head_hidden.to_string()),
            ("geo_head", t.geo_head.to_string()),
            ("k_folds", self.k_folds.to_string()),
            ("probe_seed", self.probe_seed.to_string()),
            ("sweep_levels", join(&self.sweep_levels)),
            ("sweep_kinds", join(&self.sweep_kinds)),
            ("sweep_seeds", self.sweep_seeds.to_string()),
            ("sweep_probe_seeds", self.sweep_probe_seeds.to_string()),
            ("sweep_seed", self.sweep_seed.to_string()),
            ("ablate_seeds", self.ablate_seeds.to_string()),
            ("synth_per_class", self.synth_per_class.to_string()),
        ]
    }

    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, i + 1, "expected `key = value`"))?;
            self.set(k.trim(), v.trim())
                .map_err(|m| Error::parse(path, i + 1, m))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&read(path)?, path)
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            levels: self.sweep_levels.clone(),
            seeds: self.sweep_seeds,
            probe_seeds: self.sweep_probe_seeds,
            probe: self.probe(),
            seed: self.sweep_seed,
        }
    }

    pub fn probe(&self) -> chcl_core::eval::ProbeConfig {
        chcl_core::eval::ProbeConfig {
            k_folds: self.k_folds,
            seed: self.probe_seed,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chcl_core::Ablation;

    #[test]
    fn pairs_round_trip() {
        let mut c = RunConfig::default();
        c.train.tau = 0.1 + 0.2;
        c.train.ablation = Ablation::NoHodge;
        c.sweep_levels = vec![0.0, 0.05, 0.3];
        c.sweep_kinds = vec![PerturbationKind::FeatureMask];
        let text: String = c
            .pairs()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let mut back = RunConfig::default();
        back.apply_text(&text, Path::new("x")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let mut c = RunConfig::default();
        let e = c
            .apply_text("# comment\ntau = 0.5\nfoo = 1\n", Path::new("x"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 3") && e.contains("foo"), "{e}");
        assert!(c.apply_text("epochs = -1\n", Path::new("x")).is_err());
        assert!(c.apply_text("epochs 4\n", Path::new("x")).is_err());
        c.apply_text(
            "command = pretrain\nepochs = 4 # trailing\n",
            Path::new("x"),
        )
        .unwrap();
        assert_eq!(c.train.epochs, 4);
    }
}
