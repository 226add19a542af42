//! Graph edit distance: exact A* search for small graphs, bipartite
//! assignment approximation as the scalable fallback, both under a
//! configurable edit-cost model.

use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_comparable, AttributedGraph};

mod approx;
mod assignment;
mod exact;

pub use assignment::min_cost_assignment;

/// Node attribute substitution metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSubstMetric {
    Euclidean,
    ScaledEuclidean(f64),
    Discrete,
}

/// Edge attribute substitution metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSubstMetric {
    Euclidean,
    /// Absolute difference of 1-D angles, wrapped into [0, pi].
    AbsoluteAngleDifference,
    Discrete,
    Zero,
}

/// Edit-operation costs. Defaults follow common IAM-benchmark practice:
/// unit node/edge insertion and deletion, Euclidean node substitution,
/// zero edge substitution for attribute-free edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GedCostModel {
    pub node_insert_cost: f64,
    pub node_delete_cost: f64,
    pub edge_insert_cost: f64,
    pub edge_delete_cost: f64,
    pub node_subst_metric: NodeSubstMetric,
    pub edge_subst_metric: EdgeSubstMetric,
}

impl Default for GedCostModel {
    fn default() -> Self {
        Self {
            node_insert_cost: 1.0,
            node_delete_cost: 1.0,
            edge_insert_cost: 1.0,
            edge_delete_cost: 1.0,
            node_subst_metric: NodeSubstMetric::Euclidean,
            edge_subst_metric: EdgeSubstMetric::Zero,
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl GedCostModel {
    pub fn validate(&self) -> Result<()> {
        let costs = [
            self.node_insert_cost,
            self.node_delete_cost,
            self.edge_insert_cost,
            self.edge_delete_cost,
        ];
        if costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Config(
                "edit costs must be finite and non-negative".into(),
            ));
        }
        if let NodeSubstMetric::ScaledEuclidean(w) = self.node_subst_metric {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Config(
                    "scaled_euclidean weight must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn node_subst(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.node_subst_metric {
            NodeSubstMetric::Euclidean => euclidean(a, b),
            NodeSubstMetric::ScaledEuclidean(w) => w * euclidean(a, b),
            NodeSubstMetric::Discrete => f64::from(u8::from(a != b)),
        }
    }

    pub fn edge_subst(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.edge_subst_metric {
            EdgeSubstMetric::Euclidean => euclidean(a, b),
            EdgeSubstMetric::AbsoluteAngleDifference => {
                let x = a.first().copied().unwrap_or(0.0);
                let y = b.first().copied().unwrap_or(0.0);
                let two_pi = 2.0 * std::f64::consts::PI;
                let d = (x - y).abs() % two_pi;
                if d > std::f64::consts::PI {
                    two_pi - d
                } else {
                    d
                }
            }
            EdgeSubstMetric::Discrete => f64::from(u8::from(a != b)),
            EdgeSubstMetric::Zero => 0.0,
        }
    }

    /// Cost model with insertion and deletion costs swapped; prices an
    /// edit path read in the reverse direction.
    pub fn mirrored(&self) -> Self {
        Self {
            node_insert_cost: self.node_delete_cost,
            node_delete_cost: self.node_insert_cost,
            edge_insert_cost: self.edge_delete_cost,
            edge_delete_cost: self.edge_insert_cost,
            node_subst_metric: self.node_subst_metric,
            edge_subst_metric: self.edge_subst_metric,
        }
    }

    /// Stable hash of all cost-model fields, used in cache keys.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        for c in [
            self.node_insert_cost,
            self.node_delete_cost,
            self.edge_insert_cost,
            self.edge_delete_cost,
        ] {
            c.to_bits().hash(&mut hasher);
        }
        match self.node_subst_metric {
            NodeSubstMetric::Euclidean => 0u8.hash(&mut hasher),
            NodeSubstMetric::ScaledEuclidean(w) => {
                1u8.hash(&mut hasher);
                w.to_bits().hash(&mut hasher);
            }
            NodeSubstMetric::Discrete => 2u8.hash(&mut hasher),
        }
        match self.edge_subst_metric {
            EdgeSubstMetric::Euclidean => 0u8.hash(&mut hasher),
            EdgeSubstMetric::AbsoluteAngleDifference => 1u8.hash(&mut hasher),
            EdgeSubstMetric::Discrete => 2u8.hash(&mut hasher),
            EdgeSubstMetric::Zero => 3u8.hash(&mut hasher),
        }
        hasher.finish()
    }
}

/// One edit operation; node indices refer to stored node-list positions.
#[derive(Debug, Clone, PartialEq)]
pub enum EditOp {
    SubstituteNode {
        from: usize,
        to: usize,
        cost: f64,
    },
    DeleteNode {
        from: usize,
        cost: f64,
    },
    InsertNode {
        to: usize,
        cost: f64,
    },
    SubstituteEdge {
        from: (usize, usize),
        to: (usize, usize),
        cost: f64,
    },
    DeleteEdge {
        from: (usize, usize),
        cost: f64,
    },
    InsertEdge {
        to: (usize, usize),
        cost: f64,
    },
}

impl EditOp {
    pub fn cost(&self) -> f64 {
        match self {
            EditOp::SubstituteNode { cost, .. }
            | EditOp::DeleteNode { cost, .. }
            | EditOp::InsertNode { cost, .. }
            | EditOp::SubstituteEdge { cost, .. }
            | EditOp::DeleteEdge { cost, .. }
            | EditOp::InsertEdge { cost, .. } => *cost,
        }
    }

    fn mirrored(&self) -> Self {
        match self.clone() {
            EditOp::SubstituteNode { from, to, cost } => EditOp::SubstituteNode {
                from: to,
                to: from,
                cost,
            },
            EditOp::DeleteNode { from, cost } => EditOp::InsertNode { to: from, cost },
            EditOp::InsertNode { to, cost } => EditOp::DeleteNode { from: to, cost },
            EditOp::SubstituteEdge { from, to, cost } => EditOp::SubstituteEdge {
                from: to,
                to: from,
                cost,
            },
            EditOp::DeleteEdge { from, cost } => EditOp::InsertEdge { to: from, cost },
            EditOp::InsertEdge { to, cost } => EditOp::DeleteEdge { from: to, cost },
        }
    }
}

/// Outcome of a graph distance computation.
#[derive(Debug, Clone)]
pub struct GedResult {
    pub distance: f64,
    pub exact: bool,
    pub expanded_states: u64,
    pub edit_path: Option<Vec<EditOp>>,
}

/// Dispatch policy: exact search below a node-count threshold and within
/// a state-expansion budget, bipartite approximation otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GedPolicy {
    pub exact_below_n_nodes: usize,
    pub budget: u64,
}

impl Default for GedPolicy {
    fn default() -> Self {
        Self {
            exact_below_n_nodes: 10,
            budget: 1_000_000,
        }
    }
}

impl GedPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("search budget must be positive".into()));
        }
        Ok(())
    }
}

/// One node of the source graph is either substituted by a target node
/// or deleted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum MapTarget {
    Sub(usize),
    Del,
}

/// Per-call view of a graph: positional edge lookups and degrees.
pub(crate) struct GraphView<'a> {
    pub graph: &'a AttributedGraph,
    pub edge_attr: HashMap<(usize, usize), &'a [f64]>,
    pub edges: Vec<(usize, usize)>,
    pub degrees: Vec<usize>,
}

impl<'a> GraphView<'a> {
    pub fn new(graph: &'a AttributedGraph) -> Self {
        let index = graph.node_index();
        let n = graph.num_nodes();
        let mut edge_attr = HashMap::with_capacity(graph.num_edges());
        let mut edges = Vec::with_capacity(graph.num_edges());
        let mut degrees = vec![0usize; n];
        for e in &graph.edges {
            let a = index[e.from_id.as_str()];
            let b = index[e.to_id.as_str()];
            let key = if graph.directed || a < b {
                (a, b)
            } else {
                (b, a)
            };
            edge_attr.insert(key, e.attributes.as_slice());
            edges.push(key);
            degrees[a] += 1;
            degrees[b] += 1;
        }
        Self {
            graph,
            edge_attr,
            edges,
            degrees,
        }
    }

    pub fn n(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn node_attrs(&self, i: usize) -> &[f64] {
        &self.graph.nodes[i].attributes
    }

    /// Attribute slice of the edge between positions a and b, if present.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<&'a [f64]> {
        let key = if self.graph.directed || a < b {
            (a, b)
        } else {
            (b, a)
        };
        self.edge_attr.get(&key).copied()
    }
}

/// Full edit cost of the path induced by a node mapping, together with
/// the operation list. `mapping[i]` describes source node `i`.
pub(crate) fn mapping_cost(
    g1: &GraphView<'_>,
    g2: &GraphView<'_>,
    cm: &GedCostModel,
    mapping: &[MapTarget],
) -> (f64, Vec<EditOp>) {
    let mut ops = Vec::new();
    let mut total = 0.0;
    let mut image = vec![None; g2.n()];
    for (i, target) in mapping.iter().enumerate() {
        match *target {
            MapTarget::Sub(j) => {
                let cost = cm.node_subst(g1.node_attrs(i), g2.node_attrs(j));
                total += cost;
                image[j] = Some(i);
                ops.push(EditOp::SubstituteNode {
                    from: i,
                    to: j,
                    cost,
                });
            }
            MapTarget::Del => {
                total += cm.node_delete_cost;
                ops.push(EditOp::DeleteNode {
                    from: i,
                    cost: cm.node_delete_cost,
                });
            }
        }
    }
    for (j, preimage) in image.iter().enumerate() {
        if preimage.is_none() {
            total += cm.node_insert_cost;
            ops.push(EditOp::InsertNode {
                to: j,
                cost: cm.node_insert_cost,
            });
        }
    }

    for &(a, b) in &g1.edges {
        let target = match (mapping[a], mapping[b]) {
            (MapTarget::Sub(ja), MapTarget::Sub(jb)) => g2.edge_between(ja, jb).map(|attrs| {
                let key = if g2.graph.directed || ja < jb {
                    (ja, jb)
                } else {
                    (jb, ja)
                };
                (key, attrs)
            }),
            _ => None,
        };
        match target {
            Some((key, attrs2)) => {
                let attrs1 = g1.edge_attr[&(a, b)];
                let cost = cm.edge_subst(attrs1, attrs2);
                total += cost;
                ops.push(EditOp::SubstituteEdge {
                    from: (a, b),
                    to: key,
                    cost,
                });
            }
            None => {
                total += cm.edge_delete_cost;
                ops.push(EditOp::DeleteEdge {
                    from: (a, b),
                    cost: cm.edge_delete_cost,
                });
            }
        }
    }
    for &(ja, jb) in &g2.edges {
        let matched = match (image[ja], image[jb]) {
            (Some(a), Some(b)) => g1.edge_between(a, b).is_some(),
            _ => false,
        };
        if !matched {
            total += cm.edge_insert_cost;
            ops.push(EditOp::InsertEdge {
                to: (ja, jb),
                cost: cm.edge_insert_cost,
            });
        }
    }
    (total, ops)
}

fn check_pair(g1: &AttributedGraph, g2: &AttributedGraph, cm: &GedCostModel) -> Result<()> {
    cm.validate()?;
    check_comparable(g1, g2)?;
    if g1.directed != g2.directed {
        return Err(Error::Config(format!(
            "cannot compare directed graph '{}' with undirected graph '{}'",
            if g1.directed { &g1.id } else { &g2.id },
            if g1.directed { &g2.id } else { &g1.id },
        )));
    }
    Ok(())
}

/// Exact GED by A* over partial node assignments. Fails with a
/// budget-exhausted signal when the expansion limit is hit (callers fall
/// back to [`approx_ged`]); graphs beyond 64 nodes always exhaust.
pub fn exact_ged(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    cm: &GedCostModel,
    budget: u64,
) -> Result<GedResult> {
    check_pair(g1, g2, cm)?;
    if budget == 0 {
        return Err(Error::Config("search budget must be positive".into()));
    }
    exact::astar_ged(&GraphView::new(g1), &GraphView::new(g2), cm, budget)
}

/// Upper-bound GED from the edit path induced by an optimal bipartite
/// node assignment.
pub fn approx_ged(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    cm: &GedCostModel,
) -> Result<GedResult> {
    check_pair(g1, g2, cm)?;
    approx::bipartite_ged(g1, g2, cm)
}

/// Policy dispatch: exact when both graphs are at or below the size
/// threshold and the search fits the budget, approximate otherwise.
pub fn distance(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    cm: &GedCostModel,
    policy: &GedPolicy,
) -> Result<GedResult> {
    policy.validate()?;
    if g1.num_nodes().max(g2.num_nodes()) <= policy.exact_below_n_nodes {
        match exact_ged(g1, g2, cm, policy.budget) {
            Err(Error::BudgetExhausted { .. }) => approx_ged(g1, g2, cm),
            other => other,
        }
    } else {
        approx_ged(g1, g2, cm)
    }
}

type CacheKey = (String, String, u64);

/// Bounded LRU memo of pairwise distances, keyed by the unordered graph
/// id pair and the cost-model fingerprint. Safe for concurrent lookups
/// and inserts.
pub struct DistanceCache {
    capacity: usize,
    inner: Mutex<CacheInner>,
    hits: AtomicU64,
    misses: AtomicU64,
}

struct CacheInner {
    map: HashMap<CacheKey, (f64, u64)>,
    order: BTreeMap<u64, CacheKey>,
    tick: u64,
}

impl Default for DistanceCache {
    fn default() -> Self {
        Self::new(100_000)
    }
}

impl DistanceCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            inner: Mutex::new(CacheInner {
                map: HashMap::new(),
                order: BTreeMap::new(),
                tick: 0,
            }),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    fn key(id_a: &str, id_b: &str, fingerprint: u64) -> CacheKey {
        if id_a <= id_b {
            (id_a.to_string(), id_b.to_string(), fingerprint)
        } else {
            (id_b.to_string(), id_a.to_string(), fingerprint)
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &CacheKey) -> Option<f64> {
        let mut inner = self.inner.lock().expect("cache lock");
        inner.tick += 1;
        let tick = inner.tick;
        if let Some((value, old_tick)) = inner.map.get_mut(key) {
            let value = *value;
            let old = *old_tick;
            *old_tick = tick;
            inner.order.remove(&old);
            inner.order.insert(tick, key.clone());
            self.hits.fetch_add(1, Ordering::Relaxed);
            Some(value)
        } else {
            self.misses.fetch_add(1, Ordering::Relaxed);
            None
        }
    }

    fn insert(&self, key: CacheKey, value: f64) {
        let mut inner = self.inner.lock().expect("cache lock");
        inner.tick += 1;
        let tick = inner.tick;
        if let Some((_, old_tick)) = inner.map.get(&key) {
            let old = *old_tick;
            inner.order.remove(&old);
        }
        inner.map.insert(key.clone(), (value, tick));
        inner.order.insert(tick, key);
        while inner.map.len() > self.capacity {
            let (&oldest, _) = inner.order.iter().next().expect("order non-empty");
            let evicted = inner.order.remove(&oldest).expect("key present");
            inner.map.remove(&evicted);
        }
    }
}

/// Memoized distance: looks up the id-pair key before computing.
pub fn cached_distance(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    cm: &GedCostModel,
    policy: &GedPolicy,
    cache: &DistanceCache,
) -> Result<f64> {
    let key = DistanceCache::key(&g1.id, &g2.id, cm.fingerprint());
    if let Some(value) = cache.get(&key) {
        return Ok(value);
    }
    let result = distance(g1, g2, cm, policy)?;
    cache.insert(key, result.distance);
    Ok(result.distance)
}

/// Symmetric matrix of pairwise distances in list order, zero diagonal.
/// Graph ids must be unique within the list for the memo to be sound.
pub fn pairwise_distances(
    graphs: &[&AttributedGraph],
    cm: &GedCostModel,
    policy: &GedPolicy,
    cache: &DistanceCache,
) -> Result<Array2<f64>> {
    let n = graphs.len();
    let mut matrix = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d = if graphs[i].id == graphs[j].id {
                0.0
            } else {
                cached_distance(graphs[i], graphs[j], cm, policy, cache)?
            };
            matrix[(i, j)] = d;
            matrix[(j, i)] = d;
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests;
