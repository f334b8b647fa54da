//! Text checkpoint: a dims header, then one named row-major block per
//! parameter tensor.
//!
//! ```text
//! chcl-checkpoint v1
//! in_dim 1
//! ...
//! block gcn.0.weight 1 64
//! <64 values>
//! ...
//! end
//! ```

use crate::error::{read, write, Error, Result};
use crate::fmt_f64;
use chcl_core::{ModelParams, ModelShape};
use std::fmt::Write as _;
use std::path::Path;

pub const MAGIC: &str = "chcl-checkpoint v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub d_c: usize,
    pub d_h: usize,
}

pub fn format_checkpoint(c: &Checkpoint) -> String {
    let s = c.params.shape;
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    for (k, v) in [
        ("in_dim", s.in_dim),
        ("hidden", s.hidden),
        ("layers", s.layers),
        ("emb_dim", s.emb_dim),
        ("head_hidden", s.head_hidden),
        ("d_c", c.d_c),
        ("d_h", c.d_h),
    ] {
        writeln!(out, "{k} {v}").unwrap();
    }
    writeln!(out, "geo_head {}", s.geo_head).unwrap();
    for (name, rows, cols, data) in c.params.tensors() {
        writeln!(out, "block {name} {rows} {cols}").unwrap();
        for r in 0..rows {
            let row: Vec<String> = data[r * cols..(r + 1) * cols]
                .iter()
                .map(|&x| fmt_f64(x))
                .collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    writeln!(out, "end").unwrap();
    out
}

pub fn parse_checkpoint(text: &str, path: &Path) -> Result<Checkpoint> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| {
            Error::parse(path, 0, format!("unexpected end of file, expected {what}"))
        })
    };
    let (l, magic) = next("header")?;
    if magic != MAGIC {
        return Err(Error::parse(
            path,
            l,
            format!("not a checkpoint (expected {MAGIC:?})"),
        ));
    }
    let mut dims = [0usize; 7];
    for (slot, key) in dims.iter_mut().zip([
        "in_dim",
        "hidden",
        "layers",
        "emb_dim",
        "head_hidden",
        "d_c",
        "d_h",
    ]) {
        let (l, line) = next(key)?;
        *slot = line
            .strip_prefix(key)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, l, format!("expected `{key} <count>`")))?;
    }
    let (l, line) = next("geo_head")?;
    let geo_head = match line.strip_prefix("geo_head").map(str::trim) {
        Some("true") => true,
        Some("false") => false,
        _ => return Err(Error::parse(path, l, "expected `geo_head true|false`")),
    };
    let [in_dim, hidden, layers, emb_dim, head_hidden, d_c, d_h] = dims;
    let shape = ModelShape {
        in_dim,
        hidden,
        layers,
        emb_dim,
        head_hidden,
        sig_dim: d_c + d_h,
        geo_head,
    };
    let mut blocks = Vec::new();
    loop {
        let (l, line) = next("block or end")?;
        if line == "end" {
            break;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (name, rows, cols) = match parts.as_slice() {
            ["block", name, r, c] => match (r.parse::<usize>(), c.parse::<usize>()) {
                (Ok(r), Ok(c)) => (name.to_string(), r, c),
                _ => return Err(Error::parse(path, l, "bad block dimensions")),
            },
            _ => {
                return Err(Error::parse(
                    path,
                    l,
                    "expected `block <name> <rows> <cols>`",
                ))
            }
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (l, row) = next("block row")?;
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(path, l, format!("bad value {t:?}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != cols {
                return Err(Error::parse(
                    path,
                    l,
                    format!("expected {cols} values, found {}", vals.len()),
                ));
            }
            data.extend(vals);
        }
        blocks.push((name, rows, cols, data));
    }
    let params = ModelParams::from_tensors(shape, blocks)
        .map_err(|e| Error::parse(path, 0, e.to_string()))?;
    Ok(Checkpoint { params, d_c, d_h })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    parse_checkpoint(&read(path)?, path)
}

pub fn save_checkpoint(c: &Checkpoint, path: &Path) -> Result<()> {
    write(path, &format_checkpoint(c))
}
