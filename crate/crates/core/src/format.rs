//! Line-based graph text format.
//!
//! ```text
//! # comment
//! inputs u1 u2
//! outputs y1 y2
//! node w
//! edge u1 y1
//! ```
//!
//! `node` declares a node that may have no edges. Duplicate `edge` lines
//! collapse to one.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::RawDigraph;

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_graph_str(text: &str) -> Result<RawDigraph> {
    let mut inputs: Option<[String; 2]> = None;
    let mut outputs: Option<[String; 2]> = None;
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut edge_order = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let (keyword, args) = (words[0], &words[1..]);
        let arity = match keyword {
            "edge" | "inputs" | "outputs" => 2,
            "node" => 1,
            other => return Err(parse_error(line_no, format!("unknown keyword `{other}`"))),
        };
        if args.len() != arity {
            return Err(parse_error(
                line_no,
                format!("`{keyword}` takes {arity} identifier(s), found {}", args.len()),
            ));
        }
        if let Some(bad) = args.iter().find(|a| !is_identifier(a)) {
            return Err(parse_error(line_no, format!("invalid identifier `{bad}`")));
        }
        let pair = || [args[0].to_string(), args.get(1).unwrap_or(&"").to_string()];
        match keyword {
            "edge" => {
                let e = (args[0].to_string(), args[1].to_string());
                nodes.insert(e.0.clone());
                nodes.insert(e.1.clone());
                if edges.insert(e.clone()) {
                    edge_order.push(e);
                }
            }
            "node" => {
                nodes.insert(args[0].to_string());
            }
            "inputs" => {
                if inputs.replace(pair()).is_some() {
                    return Err(parse_error(line_no, "duplicate `inputs` line"));
                }
            }
            _ => {
                if outputs.replace(pair()).is_some() {
                    return Err(parse_error(line_no, "duplicate `outputs` line"));
                }
            }
        }
    }
    let inputs = inputs.ok_or(Error::MissingTerminals("inputs"))?;
    let outputs = outputs.ok_or(Error::MissingTerminals("outputs"))?;
    RawDigraph::new(nodes, edge_order, inputs, outputs)
}

pub fn parse_graph_file(path: &Path) -> Result<RawDigraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_graph_str(&text)
}

/// Canonical text: terminals, edge-free non-terminal nodes, then the
/// distinct edges sorted. `parse_graph_str` inverts it exactly.
pub fn write_graph(g: &RawDigraph) -> String {
    let mut out = String::new();
    out.push_str(&format!("inputs {} {}\n", g.inputs()[0], g.inputs()[1]));
    out.push_str(&format!("outputs {} {}\n", g.outputs()[0], g.outputs()[1]));
    let terminals: BTreeSet<&String> = g.inputs().iter().chain(g.outputs().iter()).collect();
    let touched: BTreeSet<&String> = g.edges().iter().flat_map(|(a, b)| [a, b]).collect();
    for v in g.nodes() {
        if !terminals.contains(v) && !touched.contains(v) {
            out.push_str(&format!("node {v}\n"));
        }
    }
    let edges: BTreeSet<&(String, String)> = g.edges().iter().collect();
    for (a, b) in edges {
        out.push_str(&format!("edge {a} {b}\n"));
    }
    out
}
