//! Plain-text edge-list datasets.
//!
//! ```text
//! # graph g0 label=1
//! n 3
//! f 2
//! 0.5 1
//! 1 0
//! 0 0
//! e 0 1
//! e 1 2
//! ```
//!
//! The `f` block is optional; without it every node gets the feature `1`.
//! Other lines starting with `#` and blank lines are ignored.

use crate::error::{read, write, Error, Result};
use crate::fmt_f64;
use chcl_core::{Graph, GraphDataset, Matrix};
use std::fmt::Write as _;
use std::path::Path;

struct Block {
    id: String,
    label: Option<i64>,
    header_line: usize,
    n: Option<usize>,
    width: Option<usize>,
    rows: Vec<Vec<f64>>,
    edges: Vec<(usize, usize)>,
}

impl Block {
    fn finish(self, path: &Path) -> Result<(String, Graph)> {
        let n = self.n.ok_or_else(|| {
            Error::parse(
                path,
                self.header_line,
                format!("graph {} has no `n` line", self.id),
            )
        })?;
        let features = match self.width {
            Some(w) => {
                if self.rows.len() != n {
                    return Err(Error::parse(
                        path,
                        self.header_line,
                        format!(
                            "graph {}: expected {n} feature rows, found {}",
                            self.id,
                            self.rows.len()
                        ),
                    ));
                }
                let data = self.rows.into_iter().flatten().collect();
                Matrix {
                    rows: n,
                    cols: w,
                    data,
                }
            }
            None => Matrix::filled(n, 1, 1.0),
        };
        let g = Graph::new(n, self.edges, features, self.label)
            .map_err(|e| Error::parse(path, self.header_line, format!("graph {}: {e}", self.id)))?;
        Ok((self.id, g))
    }
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<GraphDataset> {
    let mut done: Vec<(String, Graph)> = Vec::new();
    let mut cur: Option<Block> = None;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::parse(path, line_no, msg);
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.split_whitespace();
            if parts.next() != Some("graph") {
                continue;
            }
            if let Some(b) = cur.take() {
                done.push(b.finish(path)?);
            }
            let id = parts
                .next()
                .ok_or_else(|| err("graph header without id".into()))?
                .to_string();
            let mut label = None;
            for p in parts {
                let v = p
                    .strip_prefix("label=")
                    .ok_or_else(|| err(format!("unexpected token {p:?} in graph header")))?;
                label = Some(
                    v.parse::<i64>()
                        .map_err(|_| err(format!("bad label {v:?}")))?,
                );
            }
            cur = Some(Block {
                id,
                label,
                header_line: line_no,
                n: None,
                width: None,
                rows: Vec::new(),
                edges: Vec::new(),
            });
            continue;
        }
        let b = cur
            .as_mut()
            .ok_or_else(|| err("data before the first `# graph` header".into()))?;
        let mut parts = line.split_whitespace();
        let head = parts.next().expect("non-empty line");
        let mut count = |what: &str| -> Result<usize> {
            let v = parts.next().ok_or_else(|| err(format!("missing {what}")))?;
            v.parse::<usize>()
                .map_err(|_| err(format!("bad {what} {v:?}")))
        };
        match head {
            "n" if b.n.is_none() => b.n = Some(count("node count")?),
            "f" if b.width.is_none() && b.n.is_some() => {
                let w = count("feature width")?;
                if w == 0 {
                    return Err(err("feature width must be positive".into()));
                }
                b.width = Some(w);
            }
            "e" => {
                let n = b.n.ok_or_else(|| err("edge before `n` line".into()))?;
                let u = count("node id")?;
                let v = count("node id")?;
                if u >= n || v >= n {
                    return Err(err(format!("node id out of range ({u}, {v}) for n = {n}")));
                }
                if b.width.is_some() && b.rows.len() < n {
                    return Err(err("edge inside the feature block".into()));
                }
                b.edges.push((u, v));
            }
            _ if b.width.is_some() && b.edges.is_empty() => {
                let w = b.width.expect("checked");
                let row: Vec<f64> = line
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| err(format!("bad feature value {t:?}")))
                    })
                    .collect::<Result<_>>()?;
                if row.len() != w {
                    return Err(err(format!(
                        "expected {w} feature values, found {}",
                        row.len()
                    )));
                }
                if row.iter().any(|x| !x.is_finite()) {
                    return Err(err("non-finite feature value".into()));
                }
                if b.rows.len() == b.n.unwrap_or(0) {
                    return Err(err("too many feature rows".into()));
                }
                b.rows.push(row);
            }
            other => return Err(err(format!("unexpected line starting with {other:?}"))),
        }
    }
    if let Some(b) = cur.take() {
        done.push(b.finish(path)?);
    }
    let (ids, graphs): (Vec<String>, Vec<Graph>) = done.into_iter().unzip();
    GraphDataset::new(name, graphs, ids).map_err(|e| Error::parse(path, 0, e.to_string()))
}

pub fn load_edge_list(path: &Path) -> Result<GraphDataset> {
    parse_edge_list(&read(path)?, path)
}

fn is_unit(g: &Graph) -> bool {
    g.feature_dim() == 1 && g.features().data.iter().all(|&x| x == 1.0)
}

pub fn format_edge_list(data: &GraphDataset) -> String {
    let mut out = String::new();
    for (g, id) in data.graphs().iter().zip(data.ids()) {
        match g.label() {
            Some(l) => writeln!(out, "# graph {id} label={l}"),
            None => writeln!(out, "# graph {id}"),
        }
        .expect("string write");
        writeln!(out, "n {}", g.n()).expect("string write");
        if !is_unit(g) {
            writeln!(out, "f {}", g.feature_dim()).expect("string write");
            for r in 0..g.n() {
                let row: Vec<String> = g.features().row(r).iter().map(|&x| fmt_f64(x)).collect();
                writeln!(out, "{}", row.join(" ")).expect("string write");
            }
        }
        for &(u, v) in g.edges() {
            writeln!(out, "e {u} {v}").expect("string write");
        }
    }
    out
}

pub fn save_edge_list(data: &GraphDataset, path: &Path) -> Result<()> {
    write(path, &format_edge_list(data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<GraphDataset> {
        parse_edge_list(s, Path::new("t.el"))
    }

    #[test]
    fn one_block() {
        let d = parse("# graph a label=2\nn 3\ne 0 1\ne 1 2\n").unwrap();
        assert_eq!(d.len(), 1);
        let g = &d.graphs()[0];
        assert_eq!((g.n(), g.edges()), (3, &[(0, 1), (1, 2)][..]));
        assert_eq!(g.label(), Some(2));
        assert_eq!(g.features(), &Matrix::filled(3, 1, 1.0));
        assert_eq!(d.ids(), ["a"]);
    }

    #[test]
    fn out_of_range_reports_line() {
        let e = parse("# graph a\nn 3\ne 0 1\ne 2 5\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 4") && e.contains("out of range"), "{e}");
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(parse("# graph a\nn 3\ne 1 1\n").is_err());
        assert!(parse("# graph a\nn 3\ne 0 1\ne 1 0\n").is_err());
        assert!(parse("n 3\n").is_err());
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("# just a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn features_round_trip() {
        let text =
            "# graph x label=-1\nn 2\nf 2\n0.1 2\n-3 1e-300\ne 0 1\n# graph y\nn 1\nf 2\n0 0\n";
        let d = parse(text).unwrap();
        assert_eq!(d.graphs()[0].features().data, vec![0.1, 2.0, -3.0, 1e-300]);
        let again = parse(&format_edge_list(&d)).unwrap();
        assert_eq!(again, d);
        assert!(parse("# graph x\nn 2\nf 2\n0.1 2\ne 0 1\n").is_err());
        assert!(parse("# graph x\nn 1\nf 2\n0.1\n").is_err());
    }
}
