//! Attributed-graph data model shared by every other module.
//!
//! Graphs are immutable after construction. Node identity is the string
//! `node_id`; matrix positions follow the stored node-list order, so
//! adjacency matrices are deterministic across runs.

use std::collections::{HashMap, HashSet};
use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node with a d-dimensional real attribute vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node_id: String,
    pub attributes: Vec<f64>,
}

impl NodeRecord {
    pub fn new(node_id: impl Into<String>, attributes: Vec<f64>) -> Self {
        Self {
            node_id: node_id.into(),
            attributes,
        }
    }
}

/// An edge between two named nodes with a c-dimensional attribute vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub from_id: String,
    pub to_id: String,
    pub attributes: Vec<f64>,
}

impl EdgeRecord {
    pub fn new(from_id: impl Into<String>, to_id: impl Into<String>, attributes: Vec<f64>) -> Self {
        Self {
            from_id: from_id.into(),
            to_id: to_id.into(),
            attributes,
        }
    }
}

/// An attributed graph: ordered nodes, an edge list, and per-graph
/// attribute dimensions. Undirected graphs store each edge exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributedGraph {
    pub id: String,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub directed: bool,
    pub node_attr_dim: usize,
    pub edge_attr_dim: usize,
}

/// A single invariant violation found by [`AttributedGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateNodeId {
        node_index: usize,
        node_id: String,
    },
    MissingEndpoint {
        edge_index: usize,
        node_id: String,
    },
    SelfLoop {
        edge_index: usize,
        node_id: String,
    },
    DuplicateEdge {
        edge_index: usize,
        from_id: String,
        to_id: String,
    },
    NodeAttrDim {
        node_index: usize,
        expected: usize,
        got: usize,
    },
    EdgeAttrDim {
        edge_index: usize,
        expected: usize,
        got: usize,
    },
    NonFiniteNodeAttr {
        node_index: usize,
    },
    NonFiniteEdgeAttr {
        edge_index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNodeId {
                node_index,
                node_id,
            } => {
                write!(f, "node {node_index}: duplicate node id '{node_id}'")
            }
            Violation::MissingEndpoint {
                edge_index,
                node_id,
            } => {
                write!(f, "edge {edge_index}: endpoint '{node_id}' does not exist")
            }
            Violation::SelfLoop {
                edge_index,
                node_id,
            } => {
                write!(f, "edge {edge_index}: self-loop on '{node_id}'")
            }
            Violation::DuplicateEdge {
                edge_index,
                from_id,
                to_id,
            } => {
                write!(
                    f,
                    "edge {edge_index}: duplicate edge ('{from_id}', '{to_id}')"
                )
            }
            Violation::NodeAttrDim {
                node_index,
                expected,
                got,
            } => {
                write!(
                    f,
                    "node {node_index}: attribute length {got}, expected {expected}"
                )
            }
            Violation::EdgeAttrDim {
                edge_index,
                expected,
                got,
            } => {
                write!(
                    f,
                    "edge {edge_index}: attribute length {got}, expected {expected}"
                )
            }
            Violation::NonFiniteNodeAttr { node_index } => {
                write!(f, "node {node_index}: non-finite attribute value")
            }
            Violation::NonFiniteEdgeAttr { edge_index } => {
                write!(f, "edge {edge_index}: non-finite attribute value")
            }
        }
    }
}

impl AttributedGraph {
    pub fn new(
        id: impl Into<String>,
        nodes: Vec<NodeRecord>,
        edges: Vec<EdgeRecord>,
        directed: bool,
        node_attr_dim: usize,
        edge_attr_dim: usize,
    ) -> Self {
        Self {
            id: id.into(),
            nodes,
            edges,
            directed,
            node_attr_dim,
            edge_attr_dim,
        }
    }

    /// Copy of this graph under a different id. Memories and caches key
    /// graphs by id, so ingestion re-tags graphs to keep ids unique.
    pub fn with_id(&self, id: impl Into<String>) -> Self {
        let mut g = self.clone();
        g.id = id.into();
        g
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Map from node id to list position.
    pub fn node_index(&self) -> HashMap<&str, usize> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.node_id.as_str(), i))
            .collect()
    }

    /// Checks every structural invariant and returns one entry per
    /// violation. An empty report means the graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();

        let mut seen_ids: HashMap<&str, usize> = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if seen_ids.insert(node.node_id.as_str(), i).is_some() {
                violations.push(Violation::DuplicateNodeId {
                    node_index: i,
                    node_id: node.node_id.clone(),
                });
            }
            if node.attributes.len() != self.node_attr_dim {
                violations.push(Violation::NodeAttrDim {
                    node_index: i,
                    expected: self.node_attr_dim,
                    got: node.attributes.len(),
                });
            }
            if node.attributes.iter().any(|a| !a.is_finite()) {
                violations.push(Violation::NonFiniteNodeAttr { node_index: i });
            }
        }

        let index = self.node_index();
        let mut seen_pairs: HashSet<(usize, usize)> = HashSet::new();
        for (i, edge) in self.edges.iter().enumerate() {
            let from = index.get(edge.from_id.as_str()).copied();
            let to = index.get(edge.to_id.as_str()).copied();
            if from.is_none() {
                violations.push(Violation::MissingEndpoint {
                    edge_index: i,
                    node_id: edge.from_id.clone(),
                });
            }
            if to.is_none() {
                violations.push(Violation::MissingEndpoint {
                    edge_index: i,
                    node_id: edge.to_id.clone(),
                });
            }
            if let (Some(a), Some(b)) = (from, to) {
                if a == b {
                    violations.push(Violation::SelfLoop {
                        edge_index: i,
                        node_id: edge.from_id.clone(),
                    });
                } else {
                    let key = if self.directed || a < b {
                        (a, b)
                    } else {
                        (b, a)
                    };
                    if !seen_pairs.insert(key) {
                        violations.push(Violation::DuplicateEdge {
                            edge_index: i,
                            from_id: edge.from_id.clone(),
                            to_id: edge.to_id.clone(),
                        });
                    }
                }
            }
            if edge.attributes.len() != self.edge_attr_dim {
                violations.push(Violation::EdgeAttrDim {
                    edge_index: i,
                    expected: self.edge_attr_dim,
                    got: edge.attributes.len(),
                });
            }
            if edge.attributes.iter().any(|a| !a.is_finite()) {
                violations.push(Violation::NonFiniteEdgeAttr { edge_index: i });
            }
        }

        violations
    }

    /// Errors with the full violation report unless the graph is valid.
    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGraph {
                id: self.id.clone(),
                violations,
            })
        }
    }

    /// N x N binary adjacency matrix in stored node order. Symmetric for
    /// undirected graphs, zero diagonal always.
    pub fn adjacency(&self) -> Result<Array2<u8>> {
        self.ensure_valid()?;
        let n = self.nodes.len();
        let index = self.node_index();
        let mut a = Array2::zeros((n, n));
        for edge in &self.edges {
            let i = index[edge.from_id.as_str()];
            let j = index[edge.to_id.as_str()];
            a[(i, j)] = 1;
            if !self.directed {
                a[(j, i)] = 1;
            }
        }
        Ok(a)
    }
}

/// Rejects the pair unless both graphs are valid and share attribute
/// dimensions. A dimension is only compared when both sides carry the
/// corresponding elements; an empty graph is comparable with anything.
pub fn check_comparable(g1: &AttributedGraph, g2: &AttributedGraph) -> Result<()> {
    g1.ensure_valid()?;
    g2.ensure_valid()?;
    let node_mismatch =
        g1.num_nodes() > 0 && g2.num_nodes() > 0 && g1.node_attr_dim != g2.node_attr_dim;
    let edge_mismatch =
        g1.num_edges() > 0 && g2.num_edges() > 0 && g1.edge_attr_dim != g2.edge_attr_dim;
    if node_mismatch || edge_mismatch {
        return Err(Error::DimensionMismatch {
            left: g1.id.clone(),
            right: g2.id.clone(),
            left_node: g1.node_attr_dim,
            left_edge: g1.edge_attr_dim,
            right_node: g2.node_attr_dim,
            right_edge: g2.edge_attr_dim,
        });
    }
    Ok(())
}
