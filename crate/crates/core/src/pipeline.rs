//! End-to-end stream loop: observe graph, embed, predict, receive the
//! label, drift check (recalculating prototypes and re-embedding the
//! memory on an alarm), append to the memories, and incrementally train.
//!
//! Prediction always happens before the new example enters the memory or
//! touches the model (test-then-train). Repetitions of a run differ only
//! in the classifier seed.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierConfig, ClassifierState};
use crate::drift::DriftDetector;
use crate::error::{Error, Result};
use crate::eval::{edge_density, spectral_gap, PrequentialTracker};
use crate::ged::{DistanceCache, GedCostModel, GedPolicy};
use crate::graph::AttributedGraph;
use crate::io::stream::StreamRecord;
use crate::memory::{embed, recalculate_prototypes, ClassMemory, PrototypeSet};

/// Graph representation used by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Vectors of distances to per-class prototype graphs.
    PrototypeEmbedding,
    /// Two structural features: edge density and Laplacian spectral gap.
    FeatureBaseline,
}

/// Classifier hyperparameters as configured per dataset; input dimension
/// and class count are derived from the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSettings {
    pub hidden_layers: Vec<usize>,
    pub learning_rate: f64,
    pub l2_coefficient: f64,
    pub minibatch_size: usize,
    pub epochs_per_step: usize,
    #[serde(default = "default_leaky_slope")]
    pub leaky_relu_slope: f64,
}

fn default_leaky_slope() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub num_classes: usize,
    pub memory_size: usize,
    pub prototypes_per_class: usize,
    pub window_size: usize,
    pub beta: f64,
    pub fading_factor: f64,
    pub cost_model: GedCostModel,
    pub ged_policy: GedPolicy,
    pub classifier: ClassifierSettings,
    pub method: Method,
    pub drift_detection_enabled: bool,
    pub memory_enabled: bool,
    #[serde(default = "default_cache_capacity")]
    pub cache_capacity: usize,
    pub seed: u64,
}

fn default_cache_capacity() -> usize {
    100_000
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::Config("need at least 2 classes".into()));
        }
        if !(self.prototypes_per_class >= 1 && self.prototypes_per_class < self.memory_size) {
            return Err(Error::Config(format!(
                "prototype count must satisfy 1 <= R < L, got R={}, L={}",
                self.prototypes_per_class, self.memory_size
            )));
        }
        if !(self.fading_factor > 0.0 && self.fading_factor <= 1.0) {
            return Err(Error::Config(format!(
                "fading factor must be in (0, 1], got {}",
                self.fading_factor
            )));
        }
        if self.window_size == 0 {
            return Err(Error::Config("drift window size must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config("drift beta must be positive".into()));
        }
        self.cost_model.validate()?;
        self.ged_policy.validate()?;
        self.classifier_config().validate()
    }

    /// Input dimension of the classifier under this configuration.
    pub fn input_dim(&self) -> usize {
        match self.method {
            Method::PrototypeEmbedding => self.prototypes_per_class * self.num_classes,
            Method::FeatureBaseline => 2,
        }
    }

    fn classifier_config(&self) -> ClassifierConfig {
        ClassifierConfig {
            input_dim: self.input_dim(),
            hidden_layers: self.classifier.hidden_layers.clone(),
            num_classes: self.num_classes,
            learning_rate: self.classifier.learning_rate,
            l2_coefficient: self.classifier.l2_coefficient,
            minibatch_size: self.classifier.minibatch_size,
            epochs_per_step: self.classifier.epochs_per_step,
            leaky_relu_slope: self.classifier.leaky_relu_slope,
            seed: self.seed,
        }
    }
}

/// Everything observable about one stream step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub t: u64,
    pub y: usize,
    pub y_hat: usize,
    pub correct: u8,
    pub drift_flagged: bool,
    pub gmean: f64,
    pub recalls: Vec<Option<f64>>,
    pub loss: f64,
    pub step_ms: f64,
}

pub struct Pipeline {
    config: PipelineConfig,
    memory: ClassMemory,
    prototypes: Option<PrototypeSet>,
    classifier: ClassifierState,
    detector: DriftDetector,
    tracker: PrequentialTracker,
    cache: DistanceCache,
    arrival: u64,
    t: u64,
    started: bool,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let classifier = ClassifierState::init(config.classifier_config())?;
        let detector = DriftDetector::new(config.window_size, config.beta)?;
        let tracker = PrequentialTracker::new(config.num_classes, config.fading_factor)?;
        let memory = ClassMemory::new(config.num_classes, config.memory_size)?;
        let cache = DistanceCache::new(config.cache_capacity);
        Ok(Self {
            config,
            memory,
            prototypes: None,
            classifier,
            detector,
            tracker,
            cache,
            arrival: 0,
            t: 0,
            started: false,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn classifier(&self) -> &ClassifierState {
        &self.classifier
    }

    pub fn detector(&self) -> &DriftDetector {
        &self.detector
    }

    pub fn memory(&self) -> &ClassMemory {
        &self.memory
    }

    pub fn prototypes(&self) -> Option<&PrototypeSet> {
        self.prototypes.as_ref()
    }

    pub fn distance_cache(&self) -> &DistanceCache {
        &self.cache
    }

    /// Fills the per-class memories with exactly `L` labeled graphs per
    /// class, selects the initial prototypes, embeds the whole memory,
    /// and initializes (but does not train) the classifier.
    pub fn warm_start(&mut self, labeled: &[(AttributedGraph, usize)]) -> Result<()> {
        if self.started {
            return Err(Error::AlreadyWarmStarted);
        }
        let k = self.config.num_classes;
        let l = self.config.memory_size;
        let mut counts = vec![0usize; k];
        for (g, y) in labeled {
            if *y < 1 || *y > k {
                return Err(Error::UnknownClass {
                    label: *y,
                    num_classes: k,
                });
            }
            g.ensure_valid()?;
            counts[*y - 1] += 1;
        }
        for (c, &count) in counts.iter().enumerate() {
            if count != l {
                return Err(Error::WarmStartCount {
                    class: c + 1,
                    expected: l,
                    got: count,
                });
            }
        }

        for (g, y) in labeled {
            // Ingestion re-tags ids so memory and cache keys stay unique.
            let tagged = Arc::new(g.with_id(format!("w{:06}", self.arrival)));
            self.memory.append(tagged, *y, Vec::new(), self.arrival)?;
            self.arrival += 1;
        }

        match self.config.method {
            Method::PrototypeEmbedding => {
                let prototypes = recalculate_prototypes(
                    &self.memory,
                    self.config.prototypes_per_class,
                    &self.config.cost_model,
                    &self.config.ged_policy,
                    &self.cache,
                    0,
                )?;
                self.memory.reembed_all(
                    &prototypes,
                    &self.config.cost_model,
                    &self.config.ged_policy,
                    &self.cache,
                )?;
                self.prototypes = Some(prototypes);
            }
            Method::FeatureBaseline => {
                let features: Vec<(usize, Vec<Vec<f64>>)> = (1..=k)
                    .map(|class| {
                        let per_class: Result<Vec<Vec<f64>>> = self
                            .memory
                            .class_entries(class)
                            .map(|e| feature_vector(&e.graph))
                            .collect();
                        Ok((class, per_class?))
                    })
                    .collect::<Result<_>>()?;
                for (class, vectors) in features {
                    self.memory.replace_class_embeddings(class, vectors);
                }
            }
        }
        self.t = 0;
        self.started = true;
        Ok(())
    }

    fn representation(&self, graph: &AttributedGraph) -> Result<Vec<f64>> {
        match self.config.method {
            Method::PrototypeEmbedding => {
                let prototypes = self.prototypes.as_ref().expect("warm start set prototypes");
                embed(
                    graph,
                    prototypes,
                    &self.config.cost_model,
                    &self.config.ged_policy,
                    &self.cache,
                )
            }
            Method::FeatureBaseline => feature_vector(graph),
        }
    }

    /// One prequential step. The prediction is made from the embedding
    /// computed before the graph enters any memory.
    pub fn run_step(&mut self, graph: &AttributedGraph, label: usize) -> Result<StepRecord> {
        let t = self.t + 1;
        self.step_inner(graph, label)
            .map_err(|e| Error::StepFailed {
                t,
                source: Box::new(e),
            })
    }

    fn step_inner(&mut self, graph: &AttributedGraph, label: usize) -> Result<StepRecord> {
        if !self.started {
            return Err(Error::NotWarmStarted);
        }
        if label < 1 || label > self.config.num_classes {
            return Err(Error::UnknownClass {
                label,
                num_classes: self.config.num_classes,
            });
        }
        let start = Instant::now();
        self.t += 1;
        graph.ensure_valid()?;
        let tagged = Arc::new(graph.with_id(format!("t{:06}", self.t)));

        let embedding = self.representation(&tagged)?;
        let (y_hat, _probs) = self.classifier.predict(&embedding)?;
        let correct = u8::from(y_hat == label);

        self.detector.push_score(f64::from(correct))?;
        let mut drift = false;
        if self.config.drift_detection_enabled {
            drift = self.detector.check();
            if drift {
                if self.config.memory_enabled && self.config.method == Method::PrototypeEmbedding {
                    let generation = self.prototypes.as_ref().map_or(0, PrototypeSet::generation);
                    let prototypes = recalculate_prototypes(
                        &self.memory,
                        self.config.prototypes_per_class,
                        &self.config.cost_model,
                        &self.config.ged_policy,
                        &self.cache,
                        generation,
                    )?;
                    self.memory.reembed_all(
                        &prototypes,
                        &self.config.cost_model,
                        &self.config.ged_policy,
                        &self.cache,
                    )?;
                    self.prototypes = Some(prototypes);
                }
                self.detector.reset();
            }
        }

        // Re-embed the current graph when the prototypes just changed, so
        // the stored vector is consistent with the memory.
        let recalculated =
            drift && self.config.memory_enabled && self.config.method == Method::PrototypeEmbedding;
        let train_embedding = if recalculated {
            self.representation(&tagged)?
        } else {
            embedding
        };

        let training_set = if self.config.memory_enabled {
            self.memory
                .append(tagged, label, train_embedding, self.arrival)?;
            self.arrival += 1;
            self.memory.training_set()
        } else {
            vec![(train_embedding, label)]
        };
        let loss = self.classifier.train_step(&training_set, self.t)?;

        let gmean = self.tracker.update(label, y_hat)?;
        Ok(StepRecord {
            t: self.t,
            y: label,
            y_hat,
            correct,
            drift_flagged: drift,
            gmean,
            recalls: self.tracker.recalls(),
            loss,
            step_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }
}

/// Baseline representation: edge density and Laplacian spectral gap.
pub fn feature_vector(graph: &AttributedGraph) -> Result<Vec<f64>> {
    Ok(vec![edge_density(graph)?, spectral_gap(graph)?])
}

/// Per-step aggregate over repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAggregate {
    pub t: u64,
    pub mean_gmean: f64,
    pub stderr_gmean: f64,
}

/// All repetitions of one run plus the per-step aggregate curve.
pub struct StreamRunOutput {
    pub per_rep: Vec<Vec<StepRecord>>,
    pub aggregate: Vec<StepAggregate>,
}

/// Runs `repetitions` independent pipelines over the same warm-start set
/// and stream; repetition `r` uses seed `config.seed + r`. Repetitions
/// execute in parallel and aggregate in repetition order.
pub fn run_stream(
    config: &PipelineConfig,
    warm: &[StreamRecord],
    stream: &[StreamRecord],
    repetitions: usize,
) -> Result<StreamRunOutput> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    if repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    check_homogeneous(warm.iter().chain(stream))?;

    let warm_pairs: Vec<(AttributedGraph, usize)> =
        warm.iter().map(|r| (r.graph.clone(), r.label)).collect();

    let per_rep: Result<Vec<Vec<StepRecord>>> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut rep_config = config.clone();
            rep_config.seed = config.seed + rep as u64;
            let mut pipeline = Pipeline::new(rep_config)?;
            pipeline.warm_start(&warm_pairs)?;
            stream
                .iter()
                .map(|record| pipeline.run_step(&record.graph, record.label))
                .collect()
        })
        .collect();
    let per_rep = per_rep?;

    let steps = stream.len();
    let mut aggregate = Vec::with_capacity(steps);
    for i in 0..steps {
        let values: Vec<f64> = per_rep.iter().map(|rep| rep[i].gmean).collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stderr = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        aggregate.push(StepAggregate {
            t: per_rep[0][i].t,
            mean_gmean: mean,
            stderr_gmean: stderr,
        });
    }
    Ok(StreamRunOutput { per_rep, aggregate })
}

fn check_homogeneous<'a>(mut records: impl Iterator<Item = &'a StreamRecord>) -> Result<()> {
    let Some(first) = records.next() else {
        return Ok(());
    };
    let d = first.graph.node_attr_dim;
    let c = first.graph.edge_attr_dim;
    let directed = first.graph.directed;
    for r in records {
        if r.graph.node_attr_dim != d || r.graph.edge_attr_dim != c || r.graph.directed != directed
        {
            return Err(Error::Config(format!(
                "stream is not homogeneous: record t={} has (d={}, c={}, directed={}), expected (d={d}, c={c}, directed={directed})",
                r.t, r.graph.node_attr_dim, r.graph.edge_attr_dim, r.graph.directed
            )));
        }
    }
    Ok(())
}
