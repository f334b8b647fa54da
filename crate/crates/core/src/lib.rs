//! Cheeger-Hodge joint signatures and dual-branch contrastive pretraining
//! for small undirected graphs.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem, threads or the command line lives in the `chcl` crate.
//!
//! Pipeline:
//!
//! ```text
//! Graph --augment--> view --+--> GCN encoder --> mean readout --> head --> z_geo
//!                           |
//!                           +--> lambda_2(L0_norm) --> Cheeger interval  --+
//!                           +--> low spectrum of L1 --> log(1 + mu)      --+--> head --> z_ch
//! ```
//!
//! Both embeddings are trained with NT-Xent over the two views of each graph
//! in a batch.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod eval;
pub mod exec;
pub mod families;
pub mod graph;
pub mod hodge;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod signature;
pub mod spectral;
pub mod training;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use graph::{AugmentConfig, Graph, GraphDataset};
pub use hodge::HodgeComplex;
pub use linalg::{Matrix, SymMatrix};
pub use model::{ModelParams, ModelShape};
pub use signature::JointSignature;
pub use spectral::{Solver, SolverPolicy, Spectrum};
pub use training::{Ablation, Denominator, TrainConfig};
