//! Synthetic drifting graph streams from per-class templates.
//!
//! Each emitted graph is a distorted copy of its class template: Gaussian
//! jitter on node positions (std relative to the template's coordinate
//! extent), Bernoulli presence flips per node pair, and Bernoulli single
//! node insertion/deletion. Streams are a pure function of the spec and
//! its seed.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeRecord, NodeRecord};
use crate::io::stream::{stream_graph_id, StreamRecord};

/// Node positions and edge list of one class template.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassTemplate {
    pub name: String,
    pub nodes: Vec<[f64; 2]>,
    pub edges: Vec<(usize, usize)>,
}

/// Distortion strength: position noise std (relative to the template
/// extent), per-pair edge flip probability, and node insert/delete
/// probability.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DistortionLevel {
    pub position_noise: f64,
    pub edge_flip: f64,
    pub node_change: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Segment {
    pub count: usize,
    pub level: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticStreamSpec {
    pub templates: Vec<ClassTemplate>,
    pub segments: Vec<Segment>,
    /// Extra or overriding level definitions; merged over the built-ins.
    #[serde(default)]
    pub levels: BTreeMap<String, DistortionLevel>,
    pub warm_start_per_class: usize,
    pub seed: u64,
}

/// Built-in levels: clean, medium and high distortion.
pub fn default_levels() -> BTreeMap<String, DistortionLevel> {
    BTreeMap::from([
        (
            "none".to_string(),
            DistortionLevel {
                position_noise: 0.0,
                edge_flip: 0.0,
                node_change: 0.0,
            },
        ),
        (
            "med".to_string(),
            DistortionLevel {
                position_noise: 0.1,
                edge_flip: 0.1,
                node_change: 0.05,
            },
        ),
        (
            "high".to_string(),
            DistortionLevel {
                position_noise: 0.3,
                edge_flip: 0.3,
                node_change: 0.15,
            },
        ),
    ])
}

/// Hand-drawn capital letters A, I and Z as connected point graphs.
pub fn letter_templates() -> Vec<ClassTemplate> {
    vec![
        ClassTemplate {
            name: "A".into(),
            nodes: vec![[0.0, 0.0], [0.4, 1.2], [0.8, 0.0], [0.2, 0.6], [0.6, 0.6]],
            edges: vec![(0, 3), (3, 1), (1, 4), (4, 2), (3, 4)],
        },
        ClassTemplate {
            name: "I".into(),
            nodes: vec![[0.4, 0.0], [0.4, 0.6], [0.4, 1.2]],
            edges: vec![(0, 1), (1, 2)],
        },
        ClassTemplate {
            name: "Z".into(),
            nodes: vec![[0.0, 1.2], [0.8, 1.2], [0.0, 0.0], [0.8, 0.0]],
            edges: vec![(0, 1), (1, 2), (2, 3)],
        },
    ]
}

impl SyntheticStreamSpec {
    /// Built-in levels overlaid with the spec's own definitions; a spec
    /// entry named like a built-in replaces it.
    pub fn effective_levels(&self) -> BTreeMap<String, DistortionLevel> {
        let mut levels = default_levels();
        levels.extend(self.levels.iter().map(|(k, v)| (k.clone(), *v)));
        levels
    }

    pub fn validate(&self) -> Result<()> {
        if self.templates.len() < 2 {
            return Err(Error::Config("need at least 2 class templates".into()));
        }
        for t in &self.templates {
            if t.nodes.len() < 2 {
                return Err(Error::Config(format!(
                    "template '{}' needs at least 2 nodes",
                    t.name
                )));
            }
            for &(a, b) in &t.edges {
                if a >= t.nodes.len() || b >= t.nodes.len() || a == b {
                    return Err(Error::Config(format!(
                        "template '{}' has a bad edge ({a}, {b})",
                        t.name
                    )));
                }
            }
        }
        if self.segments.is_empty() {
            return Err(Error::Config("need at least one stream segment".into()));
        }
        let levels = self.effective_levels();
        for s in &self.segments {
            if s.count == 0 {
                return Err(Error::Config(format!(
                    "segment '{}' has zero count",
                    s.level
                )));
            }
            let level = levels.get(&s.level).ok_or_else(|| {
                Error::Config(format!("undefined distortion level '{}'", s.level))
            })?;
            for p in [level.edge_flip, level.node_change] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!(
                        "probability {p} outside [0, 1] in level '{}'",
                        s.level
                    )));
                }
            }
            if !(level.position_noise >= 0.0 && level.position_noise.is_finite()) {
                return Err(Error::Config(format!(
                    "position noise must be non-negative in level '{}'",
                    s.level
                )));
            }
        }
        if self.warm_start_per_class == 0 {
            return Err(Error::Config(
                "warm_start_per_class must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.templates.len()
    }
}

/// Generates the warm-start block (exactly `warm_start_per_class` graphs
/// per class at the first segment's level) and the stream (classes drawn
/// uniformly at random within each segment).
pub fn generate_synthetic(
    spec: &SyntheticStreamSpec,
) -> Result<(Vec<StreamRecord>, Vec<StreamRecord>)> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let k = spec.num_classes();
    let levels = spec.effective_levels();

    let first_level_name = &spec.segments[0].level;
    let first_level = levels[first_level_name];
    let mut warm = Vec::with_capacity(k * spec.warm_start_per_class);
    let mut warm_t = 0u64;
    for class in 1..=k {
        for _ in 0..spec.warm_start_per_class {
            warm_t += 1;
            let graph = distorted_sample(
                &spec.templates[class - 1],
                first_level,
                &mut rng,
                stream_graph_id(warm_t),
            );
            warm.push(StreamRecord {
                t: warm_t,
                graph,
                label: class,
                segment_tag: first_level_name.clone(),
            });
        }
    }

    let total: usize = spec.segments.iter().map(|s| s.count).sum();
    let mut stream = Vec::with_capacity(total);
    let mut t = 0u64;
    for segment in &spec.segments {
        let level = levels[&segment.level];
        for _ in 0..segment.count {
            t += 1;
            let class = rng.random_range(1..=k);
            let graph = distorted_sample(
                &spec.templates[class - 1],
                level,
                &mut rng,
                stream_graph_id(t),
            );
            stream.push(StreamRecord {
                t,
                graph,
                label: class,
                segment_tag: segment.level.clone(),
            });
        }
    }
    Ok((warm, stream))
}

fn template_extent(template: &ClassTemplate) -> f64 {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in &template.nodes {
        for d in 0..2 {
            min[d] = min[d].min(p[d]);
            max[d] = max[d].max(p[d]);
        }
    }
    let extent = (max[0] - min[0]).max(max[1] - min[1]);
    if extent > 0.0 {
        extent
    } else {
        1.0
    }
}

/// One distorted sample. Disconnected outcomes are redrawn up to 10
/// times, then emitted as-is.
fn distorted_sample(
    template: &ClassTemplate,
    level: DistortionLevel,
    rng: &mut ChaCha20Rng,
    id: String,
) -> AttributedGraph {
    let extent = template_extent(template);
    let mut last = distort_once(template, level, extent, rng);
    for _ in 0..10 {
        if is_connected(last.0.len(), &last.1) {
            break;
        }
        last = distort_once(template, level, extent, rng);
    }
    let (positions, edges) = last;
    let nodes = positions
        .iter()
        .enumerate()
        .map(|(i, p)| NodeRecord::new(format!("n{i}"), p.to_vec()))
        .collect();
    let edge_records = edges
        .iter()
        .map(|&(a, b)| EdgeRecord::new(format!("n{a}"), format!("n{b}"), vec![]))
        .collect();
    AttributedGraph::new(id, nodes, edge_records, false, 2, 0)
}

fn distort_once(
    template: &ClassTemplate,
    level: DistortionLevel,
    extent: f64,
    rng: &mut ChaCha20Rng,
) -> (Vec<[f64; 2]>, Vec<(usize, usize)>) {
    let mut positions = template.nodes.clone();
    if level.position_noise > 0.0 {
        let noise = Normal::new(0.0, level.position_noise * extent).expect("std finite");
        for p in &mut positions {
            p[0] += noise.sample(rng);
            p[1] += noise.sample(rng);
        }
    }

    let mut present: Vec<(usize, usize)> = Vec::new();
    let n = positions.len();
    let template_set: std::collections::HashSet<(usize, usize)> = template
        .edges
        .iter()
        .map(|&(a, b)| if a < b { (a, b) } else { (b, a) })
        .collect();
    for a in 0..n {
        for b in (a + 1)..n {
            let mut has = template_set.contains(&(a, b));
            if level.edge_flip > 0.0 && rng.random_bool(level.edge_flip) {
                has = !has;
            }
            if has {
                present.push((a, b));
            }
        }
    }

    if level.node_change > 0.0 && rng.random_bool(level.node_change) {
        // Insert a node at a uniform position in the template bounding
        // box with one edge to a random existing node.
        let (min, max) = bounding_box(&template.nodes);
        let p = [
            rng.random_range(min[0]..=max[0].max(min[0] + f64::EPSILON)),
            rng.random_range(min[1]..=max[1].max(min[1] + f64::EPSILON)),
        ];
        let anchor = rng.random_range(0..positions.len());
        positions.push(p);
        present.push((anchor, positions.len() - 1));
    }
    if level.node_change > 0.0 && positions.len() > 2 && rng.random_bool(level.node_change) {
        let victim = rng.random_range(0..positions.len());
        positions.remove(victim);
        present = present
            .iter()
            .filter(|&&(a, b)| a != victim && b != victim)
            .map(|&(a, b)| {
                let shift = |x: usize| if x > victim { x - 1 } else { x };
                let (a, b) = (shift(a), shift(b));
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
    }

    (positions, present)
}

fn bounding_box(nodes: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in nodes {
        for d in 0..2 {
            min[d] = min[d].min(p[d]);
            max[d] = max[d].max(p[d]);
        }
    }
    (min, max)
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}
