//! Exact graph edit distance by A* over partial node assignments.
//!
//! Source nodes are processed in list order. Each search state maps a
//! prefix of source nodes to distinct target nodes or to deletion; the
//! accumulated cost covers node operations plus every edge operation
//! decidable from the prefix. Ties on f are broken FIFO for determinism.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::ged::{mapping_cost, GedCostModel, GedResult, GraphView, MapTarget};

struct State {
    mapping: Vec<MapTarget>,
    used: u64,
    g_cost: f64,
    f_cost: f64,
    order: u64,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.f_cost == other.f_cost && self.order == other.order
    }
}

impl Eq for State {}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    // BinaryHeap is a max-heap: reverse so the smallest f pops first,
    // and among equal f the earliest-pushed state (FIFO).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f_cost
            .total_cmp(&self.f_cost)
            .then_with(|| other.order.cmp(&self.order))
    }
}

pub(super) fn astar_ged(
    g1: &GraphView<'_>,
    g2: &GraphView<'_>,
    cm: &GedCostModel,
    budget: u64,
) -> Result<GedResult> {
    let n1 = g1.n();
    let n2 = g2.n();
    if n2 > 64 {
        // Target bitmask is a u64; dispatch falls back to the
        // approximation for graphs this large.
        return Err(Error::BudgetExhausted { budget });
    }

    let mut heap = BinaryHeap::new();
    let mut counter = 0u64;
    let mut expanded = 0u64;

    // An empty source graph is already a complete mapping: the whole
    // target graph is inserted.
    let (root_g, root_h) = if n1 == 0 {
        (completion_cost(g2, cm, 0), 0.0)
    } else {
        (0.0, heuristic(g1, g2, cm, &[], 0))
    };
    let root = State {
        mapping: Vec::new(),
        used: 0,
        g_cost: root_g,
        f_cost: root_g + root_h,
        order: counter,
    };
    heap.push(root);

    while let Some(state) = heap.pop() {
        let depth = state.mapping.len();
        if depth == n1 {
            let (_, ops) = mapping_cost(g1, g2, cm, &state.mapping);
            return Ok(GedResult {
                distance: state.g_cost,
                exact: true,
                expanded_states: expanded,
                edit_path: Some(ops),
            });
        }
        expanded += 1;
        if expanded > budget {
            return Err(Error::BudgetExhausted { budget });
        }

        // Substitute the next source node by each unused target node.
        for j in 0..n2 {
            if state.used & (1 << j) != 0 {
                continue;
            }
            let step = substitution_cost(g1, g2, cm, &state.mapping, depth, j);
            push_child(
                &mut heap,
                &mut counter,
                &state,
                MapTarget::Sub(j),
                state.used | (1 << j),
                step,
                g1,
                g2,
                cm,
                n1,
            );
        }
        // Or delete it.
        let step = deletion_cost(g1, cm, &state.mapping, depth);
        push_child(
            &mut heap,
            &mut counter,
            &state,
            MapTarget::Del,
            state.used,
            step,
            g1,
            g2,
            cm,
            n1,
        );
    }

    unreachable!("A* always reaches a complete mapping");
}

#[allow(clippy::too_many_arguments)]
fn push_child(
    heap: &mut BinaryHeap<State>,
    counter: &mut u64,
    parent: &State,
    target: MapTarget,
    used: u64,
    step_cost: f64,
    g1: &GraphView<'_>,
    g2: &GraphView<'_>,
    cm: &GedCostModel,
    n1: usize,
) {
    let mut mapping = parent.mapping.clone();
    mapping.push(target);
    let mut g_cost = parent.g_cost + step_cost;
    let depth = mapping.len();
    let h = if depth == n1 {
        // Complete the path: insert every unused target node and every
        // target edge with an unused endpoint.
        g_cost += completion_cost(g2, cm, used);
        0.0
    } else {
        heuristic(g1, g2, cm, &mapping, used)
    };
    *counter += 1;
    heap.push(State {
        mapping,
        used,
        g_cost,
        f_cost: g_cost + h,
        order: *counter,
    });
}

/// Cost of mapping source node `k` onto target node `j`, including every
/// edge operation between `k` and the already-processed prefix.
fn substitution_cost(
    g1: &GraphView<'_>,
    g2: &GraphView<'_>,
    cm: &GedCostModel,
    mapping: &[MapTarget],
    k: usize,
    j: usize,
) -> f64 {
    let mut cost = cm.node_subst(g1.node_attrs(k), g2.node_attrs(j));
    for (i, target) in mapping.iter().enumerate() {
        if g1.graph.directed {
            for (a, b) in [(i, k), (k, i)] {
                let e1 = g1.edge_between(a, b);
                let e2 = match *target {
                    MapTarget::Sub(w) => {
                        let (ta, tb) = if a == i { (w, j) } else { (j, w) };
                        g2.edge_between(ta, tb)
                    }
                    MapTarget::Del => None,
                };
                cost += edge_pair_cost(cm, e1, e2, matches!(target, MapTarget::Del));
            }
        } else {
            let e1 = g1.edge_between(i, k);
            let e2 = match *target {
                MapTarget::Sub(w) => g2.edge_between(w, j),
                MapTarget::Del => None,
            };
            cost += edge_pair_cost(cm, e1, e2, matches!(target, MapTarget::Del));
        }
    }
    cost
}

/// When the prefix node was deleted, a source edge must be deleted and no
/// target edge is touched yet (it will be priced as an insertion later).
fn edge_pair_cost(
    cm: &GedCostModel,
    e1: Option<&[f64]>,
    e2: Option<&[f64]>,
    prefix_deleted: bool,
) -> f64 {
    match (e1, e2) {
        (Some(_), _) if prefix_deleted => cm.edge_delete_cost,
        (Some(a1), Some(a2)) => cm.edge_subst(a1, a2),
        (Some(_), None) => cm.edge_delete_cost,
        (None, Some(_)) => cm.edge_insert_cost,
        (None, None) => 0.0,
    }
}

/// Cost of deleting source node `k`: the node itself plus its edges into
/// the processed prefix.
fn deletion_cost(g1: &GraphView<'_>, cm: &GedCostModel, mapping: &[MapTarget], k: usize) -> f64 {
    let mut cost = cm.node_delete_cost;
    for i in 0..mapping.len() {
        if g1.graph.directed {
            for (a, b) in [(i, k), (k, i)] {
                if g1.edge_between(a, b).is_some() && a != b {
                    cost += cm.edge_delete_cost;
                }
            }
        } else if g1.edge_between(i, k).is_some() {
            cost += cm.edge_delete_cost;
        }
    }
    cost
}

fn completion_cost(g2: &GraphView<'_>, cm: &GedCostModel, used: u64) -> f64 {
    let mut cost = 0.0;
    for j in 0..g2.n() {
        if used & (1 << j) == 0 {
            cost += cm.node_insert_cost;
        }
    }
    for &(a, b) in &g2.edges {
        if used & (1 << a) == 0 || used & (1 << b) == 0 {
            cost += cm.edge_insert_cost;
        }
    }
    cost
}

/// Admissible lower bound on the remaining cost: per unmatched source
/// node the cheaper of deletion and best-case substitution, plus forced
/// target-node insertions, plus an edge-count bound priced at the cheaper
/// of edge insertion and deletion.
fn heuristic(
    g1: &GraphView<'_>,
    g2: &GraphView<'_>,
    cm: &GedCostModel,
    mapping: &[MapTarget],
    used: u64,
) -> f64 {
    let n1 = g1.n();
    let n2 = g2.n();
    let depth = mapping.len();
    let remaining1: Vec<usize> = (depth..n1).collect();
    let remaining2: Vec<usize> = (0..n2).filter(|j| used & (1 << j) == 0).collect();

    let mut h = 0.0;
    for &u in &remaining1 {
        let mut best = cm.node_delete_cost;
        for &v in &remaining2 {
            let s = cm.node_subst(g1.node_attrs(u), g2.node_attrs(v));
            if s < best {
                best = s;
            }
        }
        h += best;
    }
    if remaining2.len() > remaining1.len() {
        h += (remaining2.len() - remaining1.len()) as f64 * cm.node_insert_cost;
    }

    let m1 = g1
        .edges
        .iter()
        .filter(|&&(a, b)| a >= depth || b >= depth)
        .count();
    let m2 = g2
        .edges
        .iter()
        .filter(|&&(a, b)| used & (1 << a) == 0 || used & (1 << b) == 0)
        .count();
    h += (m1 as f64 - m2 as f64).abs() * cm.edge_insert_cost.min(cm.edge_delete_cost);
    h
}

/// Exposed for the admissibility check: lower bound at the empty prefix.
#[cfg(test)]
pub(super) fn root_heuristic(g1: &GraphView<'_>, g2: &GraphView<'_>, cm: &GedCostModel) -> f64 {
    heuristic(g1, g2, cm, &[], 0)
}
