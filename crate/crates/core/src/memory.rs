//! Per-class graph memories, prototype selection, and prototype-distance
//! embeddings.
//!
//! Each class keeps a FIFO queue of the `L` most recent graphs plus an
//! index-aligned queue of their embedding vectors. Prototypes are chosen
//! by repeating the set-median rule: each round picks the remaining graph
//! whose distance sum to the other remaining graphs is minimal, then
//! excludes it from both the candidates and the sums. Ties go to the
//! oldest arrival.

use std::collections::VecDeque;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::ged::{cached_distance, pairwise_distances, DistanceCache, GedCostModel, GedPolicy};
use crate::graph::AttributedGraph;

/// A stored graph with its arrival order.
#[derive(Debug, Clone)]
pub struct MemoryEntry {
    pub graph: Arc<AttributedGraph>,
    pub arrival: u64,
}

/// Per-class FIFO queues of graphs and their embeddings, index-aligned.
#[derive(Debug, Clone)]
pub struct ClassMemory {
    capacity: usize,
    graphs: Vec<VecDeque<MemoryEntry>>,
    embeddings: Vec<VecDeque<Vec<f64>>>,
}

impl ClassMemory {
    pub fn new(num_classes: usize, capacity: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::Config("memory needs at least 2 classes".into()));
        }
        if capacity == 0 {
            return Err(Error::Config("memory capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            graphs: vec![VecDeque::new(); num_classes],
            embeddings: vec![VecDeque::new(); num_classes],
        })
    }

    pub fn num_classes(&self) -> usize {
        self.graphs.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn class_len(&self, class: usize) -> usize {
        self.graphs[class - 1].len()
    }

    pub fn total_len(&self) -> usize {
        self.graphs.iter().map(VecDeque::len).sum()
    }

    /// Entries of one class, oldest first. Labels are 1-based.
    pub fn class_entries(&self, class: usize) -> impl Iterator<Item = &MemoryEntry> {
        self.graphs[class - 1].iter()
    }

    pub fn class_embeddings(&self, class: usize) -> impl Iterator<Item = &Vec<f64>> {
        self.embeddings[class - 1].iter()
    }

    /// All (embedding, label) pairs, class-major, oldest first.
    pub fn training_set(&self) -> Vec<(Vec<f64>, usize)> {
        let mut out = Vec::with_capacity(self.total_len());
        for class in 1..=self.num_classes() {
            for e in &self.embeddings[class - 1] {
                out.push((e.clone(), class));
            }
        }
        out
    }

    /// Appends a graph and its embedding to the class queues; on
    /// overflow the oldest entry is evicted from both and returned.
    pub fn append(
        &mut self,
        graph: Arc<AttributedGraph>,
        label: usize,
        embedding: Vec<f64>,
        arrival: u64,
    ) -> Result<Option<MemoryEntry>> {
        let k = self.num_classes();
        if label < 1 || label > k {
            return Err(Error::UnknownClass {
                label,
                num_classes: k,
            });
        }
        let q = &mut self.graphs[label - 1];
        let e = &mut self.embeddings[label - 1];
        q.push_back(MemoryEntry { graph, arrival });
        e.push_back(embedding);
        if q.len() > self.capacity {
            e.pop_front();
            Ok(q.pop_front())
        } else {
            Ok(None)
        }
    }

    /// Overwrites one class's embedding queue; lengths must match the
    /// graph queue exactly.
    pub(crate) fn replace_class_embeddings(&mut self, class: usize, embeddings: Vec<Vec<f64>>) {
        assert_eq!(
            embeddings.len(),
            self.graphs[class - 1].len(),
            "embedding queue must stay aligned with the graph queue"
        );
        self.embeddings[class - 1] = embeddings.into();
    }

    /// Replaces every stored embedding with `embed` under the given
    /// prototype set, restoring the alignment invariant.
    pub fn reembed_all(
        &mut self,
        prototypes: &PrototypeSet,
        cm: &GedCostModel,
        policy: &GedPolicy,
        cache: &DistanceCache,
    ) -> Result<()> {
        for class in 0..self.num_classes() {
            let mut fresh = VecDeque::with_capacity(self.graphs[class].len());
            for entry in &self.graphs[class] {
                fresh.push_back(embed(&entry.graph, prototypes, cm, policy, cache)?);
            }
            self.embeddings[class] = fresh;
        }
        Ok(())
    }
}

/// Selected representative graphs, `R` per class, in class-major order.
#[derive(Debug, Clone)]
pub struct PrototypeSet {
    per_class: Vec<Vec<Arc<AttributedGraph>>>,
    generation: u64,
}

impl PrototypeSet {
    pub fn num_classes(&self) -> usize {
        self.per_class.len()
    }

    pub fn class_prototypes(&self, class: usize) -> &[Arc<AttributedGraph>] {
        &self.per_class[class - 1]
    }

    /// All prototypes in the fixed global ordering: class 1 first.
    pub fn global_order(&self) -> impl Iterator<Item = &Arc<AttributedGraph>> {
        self.per_class.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.per_class.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Monotone counter distinguishing recalculated sets.
    pub fn generation(&self) -> u64 {
        self.generation
    }
}

/// Greedy repeated-median selection over one class queue. `distances`
/// must be the symmetric pairwise matrix over the queue in queue order
/// (oldest first). Returns queue indices of the selected prototypes in
/// selection order.
pub fn select_prototypes(
    queue_len: usize,
    num_prototypes: usize,
    distances: &Array2<f64>,
) -> Result<Vec<usize>> {
    if num_prototypes == 0 {
        return Err(Error::Config("prototype count must be positive".into()));
    }
    if num_prototypes > queue_len {
        return Err(Error::TooFewGraphs {
            requested: num_prototypes,
            available: queue_len,
        });
    }
    assert_eq!(distances.nrows(), queue_len);
    assert_eq!(distances.ncols(), queue_len);

    let mut remaining: Vec<usize> = (0..queue_len).collect();
    let mut selected = Vec::with_capacity(num_prototypes);
    for _ in 0..num_prototypes {
        let mut best_idx = 0;
        let mut best_sum = f64::INFINITY;
        for (pos, &i) in remaining.iter().enumerate() {
            let sum: f64 = remaining
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| distances[(i, j)])
                .sum();
            // Strict less-than keeps the earliest (oldest) index on ties.
            if sum < best_sum {
                best_sum = sum;
                best_idx = pos;
            }
        }
        selected.push(remaining.remove(best_idx));
    }
    Ok(selected)
}

/// Runs pairwise distances plus median selection for every class and
/// returns a fresh prototype set with the class-major global ordering.
pub fn recalculate_prototypes(
    memory: &ClassMemory,
    num_prototypes: usize,
    cm: &GedCostModel,
    policy: &GedPolicy,
    cache: &DistanceCache,
    previous_generation: u64,
) -> Result<PrototypeSet> {
    let mut per_class = Vec::with_capacity(memory.num_classes());
    for class in 1..=memory.num_classes() {
        let entries: Vec<&MemoryEntry> = memory.class_entries(class).collect();
        if entries.is_empty() {
            return Err(Error::EmptyClassMemory { class });
        }
        let graphs: Vec<&AttributedGraph> = entries.iter().map(|e| e.graph.as_ref()).collect();
        let distances = pairwise_distances(&graphs, cm, policy, cache)?;
        let take = num_prototypes.min(entries.len());
        let indices = select_prototypes(entries.len(), take, &distances)?;
        per_class.push(
            indices
                .into_iter()
                .map(|i| Arc::clone(&entries[i].graph))
                .collect(),
        );
    }
    Ok(PrototypeSet {
        per_class,
        generation: previous_generation + 1,
    })
}

/// Embedding of a graph: its distance to every prototype, in the global
/// prototype order. Length is R x K.
pub fn embed(
    graph: &AttributedGraph,
    prototypes: &PrototypeSet,
    cm: &GedCostModel,
    policy: &GedPolicy,
    cache: &DistanceCache,
) -> Result<Vec<f64>> {
    if prototypes.is_empty() {
        return Err(Error::Config("prototype set is empty".into()));
    }
    prototypes
        .global_order()
        .map(|p| cached_distance(graph, p, cm, policy, cache))
        .collect()
}
