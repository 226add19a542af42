//! Readers for the IAM graph-repository formats: GXL graph documents and
//! CXL corpus indexes. Covers the IAM subset of GXL — `float`, `int` and
//! `string` typed attributes under node and edge elements.

use std::collections::BTreeMap;

use roxmltree::{Document, Node, ParsingOptions};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeRecord, NodeRecord};

/// Declares how symbolic (string) attributes are encoded: attribute name
/// to its ordered category list, one-hot encoded in that order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    #[serde(default)]
    pub symbolic: BTreeMap<String, Vec<String>>,
}

fn gxl_err(msg: impl Into<String>, doc: Option<(&Document, usize)>) -> Error {
    let location = doc.map(|(d, byte)| {
        let pos = d.text_pos_at(byte);
        format!("line {}, column {}", pos.row, pos.col)
    });
    Error::Gxl {
        msg: msg.into(),
        location,
    }
}

fn node_location<'a, 'input>(
    doc: &'a Document<'input>,
    node: Node<'a, 'input>,
) -> Option<(&'a Document<'input>, usize)> {
    Some((doc, node.range().start))
}

/// Extracts the attribute vector of a node or edge element: numeric
/// attributes are taken in declared order, string attributes expand to
/// their one-hot block per the schema.
fn attribute_vector(doc: &Document, element: Node, schema: &AttributeSchema) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for attr in element.children().filter(|c| c.has_tag_name("attr")) {
        let name = attr.attribute("name").unwrap_or("");
        let value_el = attr.children().find(|c| c.is_element()).ok_or_else(|| {
            gxl_err(
                format!("attribute '{name}' has no value element"),
                node_location(doc, attr),
            )
        })?;
        let text = value_el.text().unwrap_or("").trim();
        match value_el.tag_name().name() {
            "float" | "int" | "double" | "Float" | "Integer" => {
                let parsed: f64 = text.parse().map_err(|_| {
                    gxl_err(
                        format!("attribute '{name}' has non-numeric value '{text}'"),
                        node_location(doc, value_el),
                    )
                })?;
                values.push(parsed);
            }
            "string" | "String" => {
                let categories = schema.symbolic.get(name).ok_or_else(|| {
                    gxl_err(
                        format!("string attribute '{name}' is not declared in the schema"),
                        node_location(doc, value_el),
                    )
                })?;
                let index = categories.iter().position(|c| c == text).ok_or_else(|| {
                    gxl_err(
                        format!("value '{text}' of attribute '{name}' is not in the schema"),
                        node_location(doc, value_el),
                    )
                })?;
                for i in 0..categories.len() {
                    values.push(f64::from(u8::from(i == index)));
                }
            }
            other => {
                return Err(gxl_err(
                    format!("unknown attribute type <{other}> for '{name}'"),
                    node_location(doc, value_el),
                ));
            }
        }
    }
    Ok(values)
}

/// IAM files carry a DOCTYPE declaration, which roxmltree refuses
/// unless DTDs are explicitly allowed.
fn parse_document(text: &str) -> std::result::Result<Document<'_>, roxmltree::Error> {
    let options = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    Document::parse_with_options(text, options)
}

/// Parses a single-graph GXL document.
pub fn parse_gxl(text: &str, schema: &AttributeSchema) -> Result<AttributedGraph> {
    let doc = parse_document(text).map_err(|e| Error::Gxl {
        msg: e.to_string(),
        location: None,
    })?;
    let graph_el = doc
        .descendants()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| gxl_err("document has no <graph> element", None))?;
    let id = graph_el
        .attribute("id")
        .ok_or_else(|| gxl_err("<graph> element has no id", node_location(&doc, graph_el)))?
        .to_string();
    let directed = match graph_el.attribute("edgemode") {
        Some("undirected") => false,
        Some("directed") | Some("defaultdirected") | None => true,
        Some("defaultundirected") => false,
        Some(other) => {
            return Err(gxl_err(
                format!("unknown edgemode '{other}'"),
                node_location(&doc, graph_el),
            ));
        }
    };

    let mut nodes = Vec::new();
    for node_el in graph_el.children().filter(|c| c.has_tag_name("node")) {
        let node_id = node_el
            .attribute("id")
            .ok_or_else(|| gxl_err("<node> has no id", node_location(&doc, node_el)))?;
        let attributes = attribute_vector(&doc, node_el, schema)?;
        nodes.push(NodeRecord::new(node_id, attributes));
    }

    let mut edges = Vec::new();
    for edge_el in graph_el.children().filter(|c| c.has_tag_name("edge")) {
        let from = edge_el
            .attribute("from")
            .ok_or_else(|| gxl_err("<edge> has no 'from'", node_location(&doc, edge_el)))?;
        let to = edge_el
            .attribute("to")
            .ok_or_else(|| gxl_err("<edge> has no 'to'", node_location(&doc, edge_el)))?;
        for endpoint in [from, to] {
            if !nodes.iter().any(|n| n.node_id == endpoint) {
                return Err(gxl_err(
                    format!("edge endpoint '{endpoint}' is not a declared node"),
                    node_location(&doc, edge_el),
                ));
            }
        }
        let attributes = attribute_vector(&doc, edge_el, schema)?;
        edges.push(EdgeRecord::new(from, to, attributes));
    }

    let node_attr_dim = nodes.first().map_or(0, |n| n.attributes.len());
    let edge_attr_dim = edges.first().map_or(0, |e| e.attributes.len());
    let graph = AttributedGraph::new(id, nodes, edges, directed, node_attr_dim, edge_attr_dim);
    let violations = graph.validate();
    if let Some(v) = violations.first() {
        return Err(gxl_err(format!("invalid graph '{}': {v}", graph.id), None));
    }
    Ok(graph)
}

/// Parses a CXL corpus index into `(filename, label)` pairs. Labels map
/// the `classes` list to 1..K in declared order; entries of other
/// classes are skipped.
pub fn parse_cxl(text: &str, classes: &[String]) -> Result<Vec<(String, usize)>> {
    if classes.is_empty() {
        return Err(Error::Cxl {
            msg: "class filter is empty".into(),
            location: None,
        });
    }
    let doc = parse_document(text).map_err(|e| Error::Cxl {
        msg: e.to_string(),
        location: None,
    })?;
    let mut present: Vec<&str> = Vec::new();
    let mut entries = Vec::new();
    for el in doc.descendants().filter(|n| n.is_element()) {
        let (Some(file), Some(class)) = (el.attribute("file"), el.attribute("class")) else {
            continue;
        };
        if !present.contains(&class) {
            present.push(class);
        }
        if let Some(pos) = classes.iter().position(|c| c == class) {
            entries.push((file.to_string(), pos + 1));
        }
    }
    for wanted in classes {
        if !present.iter().any(|c| c == wanted) {
            return Err(Error::Cxl {
                msg: format!("class '{wanted}' does not appear in the index"),
                location: None,
            });
        }
    }
    if entries.is_empty() {
        return Err(Error::Cxl {
            msg: "index yields no entries".into(),
            location: None,
        });
    }
    Ok(entries)
}
