//! TU benchmark layout: `<NAME>_A.txt`, `<NAME>_graph_indicator.txt`,
//! `<NAME>_graph_labels.txt` and optionally `<NAME>_node_labels.txt`, all
//! with 1-based node and graph ids.

use crate::error::{read, Error, Result};
use chcl_core::{Graph, GraphDataset, Matrix};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

fn file(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

fn numbers(path: &Path, text: &str, per_line: usize) -> Result<Vec<(usize, Vec<i64>)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<i64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| Error::parse(path, i + 1, format!("bad integer {t:?}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != per_line {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {per_line} values, found {}", vals.len()),
            ));
        }
        out.push((i + 1, vals));
    }
    Ok(out)
}

/// Loads dataset `name` from `dir`. Node labels, if present, become one-hot
/// features over the sorted distinct label values; otherwise every node
/// gets the feature `1`.
pub fn load_tu(dir: &Path, name: &str) -> Result<GraphDataset> {
    let ind_path = file(dir, name, "graph_indicator");
    let indicator: Vec<usize> = numbers(&ind_path, &read(&ind_path)?, 1)?
        .into_iter()
        .map(|(line, v)| {
            usize::try_from(v[0])
                .ok()
                .filter(|&g| g >= 1)
                .ok_or_else(|| Error::parse(&ind_path, line, "graph ids start at 1"))
        })
        .collect::<Result<_>>()?;
    let lab_path = file(dir, name, "graph_labels");
    let labels: Vec<i64> = numbers(&lab_path, &read(&lab_path)?, 1)?
        .into_iter()
        .map(|v| v.1[0])
        .collect();
    let n_graphs = labels.len();
    if let Some(&g) = indicator.iter().find(|&&g| g > n_graphs) {
        return Err(Error::parse(
            &ind_path,
            0,
            format!("graph id {g} but only {n_graphs} labels"),
        ));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_graphs];
    let mut local = Vec::with_capacity(indicator.len());
    for (i, &g) in indicator.iter().enumerate() {
        local.push(members[g - 1].len());
        members[g - 1].push(i);
    }

    let node_path = file(dir, name, "node_labels");
    let one_hot = if node_path.exists() {
        let nl: Vec<i64> = numbers(&node_path, &read(&node_path)?, 1)?
            .into_iter()
            .map(|v| v.1[0])
            .collect();
        if nl.len() != indicator.len() {
            return Err(Error::parse(
                &node_path,
                0,
                format!("{} node labels for {} nodes", nl.len(), indicator.len()),
            ));
        }
        let distinct: Vec<i64> = nl
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Some((nl, distinct))
    } else {
        None
    };

    let a_path = file(dir, name, "A");
    let mut directed: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); n_graphs];
    for (line, v) in numbers(&a_path, &read(&a_path)?, 2)? {
        let node = |x: i64| -> Result<usize> {
            usize::try_from(x)
                .ok()
                .filter(|&i| i >= 1 && i <= indicator.len())
                .map(|i| i - 1)
                .ok_or_else(|| Error::parse(&a_path, line, format!("node id {x} out of range")))
        };
        let (a, b) = (node(v[0])?, node(v[1])?);
        if a == b {
            return Err(Error::parse(
                &a_path,
                line,
                format!("self-loop on node {}", a + 1),
            ));
        }
        let g = indicator[a];
        if indicator[b] != g {
            return Err(Error::parse(
                &a_path,
                line,
                "edge joins two different graphs",
            ));
        }
        if !directed[g - 1].insert((local[a], local[b])) {
            return Err(Error::parse(&a_path, line, "repeated edge"));
        }
    }

    let mut graphs = Vec::with_capacity(n_graphs);
    for g in 0..n_graphs {
        let n = members[g].len();
        let edges: Vec<(usize, usize)> = directed[g]
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let features = match &one_hot {
            Some((nl, distinct)) => {
                let mut x = Matrix::zeros(n, distinct.len().max(1));
                for i in 0..n {
                    let l = nl[members[g][i]];
                    x.set(i, distinct.binary_search(&l).expect("label listed"), 1.0);
                }
                x
            }
            None => Matrix::filled(n, 1, 1.0),
        };
        graphs.push(Graph::new(n, edges, features, Some(labels[g]))?);
    }
    let ids = (1..=n_graphs).map(|i| i.to_string()).collect();
    Ok(GraphDataset::new(name, graphs, ids)?)
}
