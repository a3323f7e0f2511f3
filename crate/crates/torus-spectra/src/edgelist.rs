//! Plain-text edge lists.
//!
//! ```text
//! # optional comments
//! n 4
//! 0 1
//! 1 2
//! ```
//!
//! The header gives the node count; each further line is one undirected
//! edge between 0-based node indices. [`write`] emits edges as `i j` with
//! `i < j` in sorted order, so output is canonical.

use std::io::{BufRead, Write};

use thiserror::Error;
use torus_spectra_core::topology::TopologyError;
use torus_spectra_core::Graph;

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `n <count>` header")]
    MissingHeader,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> EdgeListError {
    EdgeListError::Syntax { line, message: message.into() }
}

fn parse_index(token: &str, line: usize) -> Result<usize, EdgeListError> {
    token.parse().map_err(|_| syntax(line, format!("`{token}` is not a node index")))
}

pub fn read<R: BufRead>(reader: R) -> Result<Graph, EdgeListError> {
    let mut count = None;
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        match (count, fields.as_slice()) {
            (None, ["n", value]) => count = Some(parse_index(value, line_no)?),
            (None, _) => return Err(EdgeListError::MissingHeader),
            (Some(_), [a, b]) => edges.push((parse_index(a, line_no)?, parse_index(b, line_no)?)),
            (Some(_), _) => return Err(syntax(line_no, "expected two node indices")),
        }
    }
    let n = count.ok_or(EdgeListError::MissingHeader)?;
    Ok(Graph::from_edges(n, edges)?)
}

pub fn read_path(path: &std::path::Path) -> Result<Graph, EdgeListError> {
    read(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write<W: Write>(graph: &Graph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "n {}", graph.node_count())?;
    for (i, j) in graph.edges() {
        writeln!(out, "{i} {j}")?;
    }
    out.flush()
}
