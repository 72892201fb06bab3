use std::io::{BufRead, Write};

use thiserror::Error;

use super::{GraphError, StaticGraph};

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header promised {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Writes `n m` followed by one `u v` line per edge (u < v).
pub fn write_edge_list<W: Write>(g: &StaticGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", g.n(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<StaticGraph, EdgeListError> {
    let mut lines = input.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (hline, header) = lines.next().ok_or(EdgeListError::Parse { line: 1, msg: "missing header".into() })?;
    let header = header?;
    let (n, m) = parse_pair(&header, hline)?;
    let mut edges = Vec::with_capacity(m);
    for (line, text) in lines {
        let text = text?;
        let (u, v) = parse_pair(&text, line)?;
        if u >= v {
            return Err(EdgeListError::Parse { line, msg: format!("expected u < v, got {u} {v}") });
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(EdgeListError::EdgeCount { expected: m, found: edges.len() });
    }
    Ok(StaticGraph::from_edges(n, edges)?)
}

fn parse_pair(text: &str, line: usize) -> Result<(usize, usize), EdgeListError> {
    let mut it = text.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(EdgeListError::Parse { line, msg: format!("expected two integers, got {text:?}") }),
    }
}
