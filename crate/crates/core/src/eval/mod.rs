//! Downstream evaluation: linear probe, robustness sweep, synthetic data.

pub mod probe;
pub mod sweep;
pub mod synth;

pub use probe::{fold_assignment, linear_probe, EmbeddingSource, ProbeConfig, ProbeResult};
pub use sweep::{robustness_sweep, spearman, PerturbationKind, SweepConfig, SweepRow};
pub use synth::{synthetic_dataset, synthetic_graph, SynthSpec};
