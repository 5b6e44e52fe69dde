use std::fmt::Write;

use super::Graph;
use crate::error::{Error, Result};

/// Parses the edge-list text format: the first data line holds the vertex
/// count, every following line one `u v` pair. `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::EdgeListParse { line: line_no, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let number = |s: &str| s.parse::<usize>().map_err(|_| err(format!("`{s}` is not a vertex id")));
        match (n, fields.as_slice()) {
            (None, [count]) => n = Some(number(count)?),
            (None, _) => return Err(err("expected the vertex count".into())),
            (Some(_), [u, v]) => edges.push((number(u)?, number(v)?)),
            (Some(_), _) => return Err(err(format!("expected `u v`, found `{line}`"))),
        }
    }
    let n = n.ok_or(Error::EdgeListParse {
        line: 0,
        message: "missing vertex count".into(),
    })?;
    Graph::new(n, edges)
}

pub fn to_edge_list(g: &Graph) -> String {
    let mut out = format!("{}\n", g.num_vertices());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// `graph G { ... }` with every vertex declared in ascending order, then the
/// edges in canonical order.
pub fn to_dot(g: &Graph) -> String {
    let mut out = String::from("graph G {\n");
    for v in g.vertices() {
        let _ = writeln!(out, "  {v};");
    }
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "  {u} -- {v};");
    }
    out.push_str("}\n");
    out
}
