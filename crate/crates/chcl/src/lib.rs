//! Filesystem formats, a thread-pool executor and the `chcl` command line
//! on top of [`chcl_core`].

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod edgelist;
pub mod error;
pub mod exec;
pub mod manifest;
pub mod tu;

pub use error::{Error, Result};
pub use exec::Pool;

/// 17 significant digits, round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
