//! Portable stream files: one JSON object per line with fields `t`,
//! `label`, `segment_tag`, `directed`, `nodes` (id + attribute array)
//! and `edges` (from, to, attribute array). UTF-8, LF line endings.
//!
//! Graph ids are not part of the wire format; readers synthesize
//! `g{t:06}` so that `read(write(x)) = x` holds for generator output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeRecord, NodeRecord};
use crate::io::atomic_write;

/// One labeled stream element.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamRecord {
    pub t: u64,
    pub graph: AttributedGraph,
    pub label: usize,
    pub segment_tag: String,
}

#[derive(Serialize, Deserialize)]
struct LineNode {
    id: String,
    attributes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LineEdge {
    from: String,
    to: String,
    attributes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Line {
    t: u64,
    label: usize,
    segment_tag: String,
    directed: bool,
    nodes: Vec<LineNode>,
    edges: Vec<LineEdge>,
}

/// Stable id for the record at position `t` of a stream file.
pub fn stream_graph_id(t: u64) -> String {
    format!("g{t:06}")
}

pub fn write_stream(records: &[StreamRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for r in records {
        let line = Line {
            t: r.t,
            label: r.label,
            segment_tag: r.segment_tag.clone(),
            directed: r.graph.directed,
            nodes: r
                .graph
                .nodes
                .iter()
                .map(|n| LineNode {
                    id: n.node_id.clone(),
                    attributes: n.attributes.clone(),
                })
                .collect(),
            edges: r
                .graph
                .edges
                .iter()
                .map(|e| LineEdge {
                    from: e.from_id.clone(),
                    to: e.to_id.clone(),
                    attributes: e.attributes.clone(),
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("stream line serializes"));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_stream(path: &Path) -> Result<Vec<StreamRecord>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut records = Vec::new();
    let mut last_t = 0u64;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw).map_err(|e| Error::StreamFormat {
            path: path.display().to_string(),
            line: line_no,
            msg: e.to_string(),
        })?;
        if line.t <= last_t {
            return Err(Error::StreamFormat {
                path: path.display().to_string(),
                line: line_no,
                msg: format!("t={} does not increase (previous {})", line.t, last_t),
            });
        }
        last_t = line.t;
        let node_attr_dim = line.nodes.first().map_or(0, |n| n.attributes.len());
        let edge_attr_dim = line.edges.first().map_or(0, |e| e.attributes.len());
        let graph = AttributedGraph::new(
            stream_graph_id(line.t),
            line.nodes
                .into_iter()
                .map(|n| NodeRecord::new(n.id, n.attributes))
                .collect(),
            line.edges
                .into_iter()
                .map(|e| EdgeRecord::new(e.from, e.to, e.attributes))
                .collect(),
            line.directed,
            node_attr_dim,
            edge_attr_dim,
        );
        let violations = graph.validate();
        if !violations.is_empty() {
            return Err(Error::StreamFormat {
                path: path.display().to_string(),
                line: line_no,
                msg: format!("invalid graph: {}", violations[0]),
            });
        }
        records.push(StreamRecord {
            t: line.t,
            graph,
            label: line.label,
            segment_tag: line.segment_tag,
        });
    }
    Ok(records)
}
