//! Whitespace-separated edge lists.
//!
//! ```text
//! # comment lines start with '#'
//! # nodes: 4        optional, fixes the vertex count
//! # directed         optional, edges are (source, target)
//! 0 1
//! 1 2 0.25           optional third column: per-edge weight/probability
//! ```
//!
//! Repeated pairs are dropped (the first occurrence wins), which is what
//! contact-log exports usually need.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Graph, GraphError};

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeList {
    pub graph: Graph,
    /// Third-column values indexed by edge id, when the file has them.
    pub weights: Option<Vec<f64>>,
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<EdgeList, GraphError> {
    let text = fs::read_to_string(path).map_err(|e| GraphError::Io(e.to_string()))?;
    parse_edge_list(&text)
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList, GraphError> {
    let mut declared_n: Option<usize> = None;
    let mut directed = false;
    let mut rows: Vec<(usize, usize, Option<f64>)> = Vec::new();
    let mut weighted: Option<bool> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| GraphError::Parse { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("nodes:") {
                let n = rest
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad node count {:?}", rest.trim())))?;
                declared_n = Some(n);
            } else if comment == "directed" {
                directed = true;
            }
            continue;
        }

        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(format!("expected 2 or 3 fields, found {}", fields.len())));
        }
        let vertex = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("invalid vertex id {s:?}")))
        };
        let (u, v) = (vertex(fields[0])?, vertex(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => Some(
                s.parse::<f64>()
                    .ok()
                    .filter(|w| w.is_finite())
                    .ok_or_else(|| err(format!("invalid weight {s:?}")))?,
            ),
            None => None,
        };
        match weighted {
            None => weighted = Some(w.is_some()),
            Some(has) if has != w.is_some() => {
                return Err(err("inconsistent number of columns".into()))
            }
            _ => {}
        }
        if u == v {
            return Err(err(format!("self-loop at vertex {u}")));
        }
        rows.push((u, v, w));
    }

    let max_id = rows.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = match declared_n {
        Some(n) if n < max_id => {
            return Err(GraphError::Parse {
                line: 0,
                message: format!("declared {n} nodes but vertex {} appears", max_id - 1),
            })
        }
        Some(n) => n,
        None => max_id,
    };

    let mut graph = Graph::new(n, directed);
    let mut weights = Vec::new();
    for (u, v, w) in rows {
        match graph.add_edge(u, v) {
            Ok(_) => weights.push(w.unwrap_or(0.0)),
            Err(GraphError::DuplicateEdge(..)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(EdgeList {
        graph,
        weights: weighted.unwrap_or(false).then_some(weights),
    })
}

/// Writes live edges in id order. `weights`, when given, is indexed by id.
pub fn write_edge_list<W: Write>(
    g: &Graph,
    weights: Option<&[f64]>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "# nodes: {}", g.n())?;
    if g.is_directed() {
        writeln!(out, "# directed")?;
    }
    for (id, u, v) in g.edges() {
        match weights {
            Some(w) => writeln!(out, "{u} {v} {}", w[id])?,
            None => writeln!(out, "{u} {v}")?,
        }
    }
    Ok(())
}

pub fn save_edge_list(
    g: &Graph,
    weights: Option<&[f64]>,
    path: impl AsRef<Path>,
) -> Result<(), GraphError> {
    let mut buf = Vec::new();
    write_edge_list(g, weights, &mut buf).map_err(|e| GraphError::Io(e.to_string()))?;
    fs::write(path, buf).map_err(|e| GraphError::Io(e.to_string()))
}
