//! Per-run manifest: the resolved configuration plus the run's inputs, in
//! the config file format so it can be passed back with `--config`.

use crate::config::RunConfig;
use crate::error::{write, Result};
use std::path::Path;

pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            entries: vec![
                ("command".into(), command.into()),
                ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ],
        }
    }

    pub fn record(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self, config: &RunConfig) -> String {
        let mut out = String::from("# chcl run manifest\n");
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        for (k, v) in config.pairs() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn save(&self, config: &RunConfig, path: &Path) -> Result<()> {
        write(path, &self.render(config))
    }
}
