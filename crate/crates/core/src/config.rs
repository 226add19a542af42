//! Declarative run configuration: one TOML file describes the dataset
//! source, pipeline parameters, cost model, search policy, and
//! classifier hyperparameters for a reproducible experiment.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ged::{GedCostModel, GedPolicy};
use crate::io::gxl::AttributeSchema;
use crate::io::synthetic::SyntheticStreamSpec;
use crate::pipeline::{ClassifierSettings, Method, PipelineConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilesSource {
    pub warm: PathBuf,
    pub stream: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GxlSource {
    pub dir: PathBuf,
    pub index: PathBuf,
    pub classes: Vec<String>,
    pub warm_per_class: usize,
    pub stream_length: usize,
    #[serde(default)]
    pub order_seed: u64,
}

/// Exactly one source must be present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DatasetSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub files: Option<FilesSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticStreamSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gxl: Option<GxlSource>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineSection {
    pub classes: usize,
    pub memory_size: usize,
    pub prototypes_per_class: usize,
    pub window_size: usize,
    pub beta: f64,
    pub fading_factor: f64,
    pub drift_detection: bool,
    pub memory: bool,
    #[serde(default = "default_cache_capacity")]
    pub cache_capacity: usize,
}

fn default_cache_capacity() -> usize {
    100_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfigFile {
    pub seed: u64,
    pub repetitions: usize,
    pub output_dir: PathBuf,
    pub method: Method,
    pub dataset: DatasetSection,
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub cost_model: GedCostModel,
    #[serde(default)]
    pub ged: GedPolicy,
    pub classifier: ClassifierSettings,
    #[serde(default)]
    pub gxl_schema: AttributeSchema,
}

impl RunConfigFile {
    /// Parses a TOML config, resolves relative paths against the config
    /// file's directory, and checks every invariant eagerly.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", path.display())))?;
        let mut cfg: RunConfigFile =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        resolve(&mut self.output_dir);
        if let Some(files) = &mut self.dataset.files {
            resolve(&mut files.warm);
            resolve(&mut files.stream);
        }
        if let Some(gxl) = &mut self.dataset.gxl {
            resolve(&mut gxl.dir);
            resolve(&mut gxl.index);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        let sources = [
            self.dataset.files.is_some(),
            self.dataset.synthetic.is_some(),
            self.dataset.gxl.is_some(),
        ];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::Config(
                "dataset must name exactly one source: files, synthetic, or gxl".into(),
            ));
        }
        if let Some(files) = &self.dataset.files {
            for p in [&files.warm, &files.stream] {
                if !p.is_file() {
                    return Err(Error::Config(format!(
                        "stream file '{}' does not exist",
                        p.display()
                    )));
                }
            }
        }
        if let Some(synthetic) = &self.dataset.synthetic {
            synthetic.validate()?;
            if synthetic.templates.len() != self.pipeline.classes {
                return Err(Error::Config(format!(
                    "synthetic spec has {} templates but the pipeline expects {} classes",
                    synthetic.templates.len(),
                    self.pipeline.classes
                )));
            }
            if synthetic.warm_start_per_class != self.pipeline.memory_size {
                return Err(Error::Config(format!(
                    "warm_start_per_class ({}) must equal memory_size ({})",
                    synthetic.warm_start_per_class, self.pipeline.memory_size
                )));
            }
        }
        if let Some(gxl) = &self.dataset.gxl {
            if !gxl.dir.is_dir() {
                return Err(Error::Config(format!(
                    "GXL directory '{}' does not exist",
                    gxl.dir.display()
                )));
            }
            if !gxl.index.is_file() {
                return Err(Error::Config(format!(
                    "CXL index '{}' does not exist",
                    gxl.index.display()
                )));
            }
            if gxl.classes.len() != self.pipeline.classes {
                return Err(Error::Config(format!(
                    "GXL source names {} classes but the pipeline expects {}",
                    gxl.classes.len(),
                    self.pipeline.classes
                )));
            }
            if gxl.warm_per_class != self.pipeline.memory_size {
                return Err(Error::Config(format!(
                    "warm_per_class ({}) must equal memory_size ({})",
                    gxl.warm_per_class, self.pipeline.memory_size
                )));
            }
            if gxl.stream_length == 0 {
                return Err(Error::Config("stream_length must be positive".into()));
            }
        }
        self.pipeline_config().validate()
    }

    /// Pipeline configuration with the base seed; repetitions offset it.
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            num_classes: self.pipeline.classes,
            memory_size: self.pipeline.memory_size,
            prototypes_per_class: self.pipeline.prototypes_per_class,
            window_size: self.pipeline.window_size,
            beta: self.pipeline.beta,
            fading_factor: self.pipeline.fading_factor,
            cost_model: self.cost_model.clone(),
            ged_policy: self.ged,
            classifier: self.classifier.clone(),
            method: self.method,
            drift_detection_enabled: self.pipeline.drift_detection,
            memory_enabled: self.pipeline.memory,
            cache_capacity: self.pipeline.cache_capacity,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::tempdir;

    fn base_toml() -> String {
        r#"
seed = 42
repetitions = 2
output_dir = "out"
method = "prototype_embedding"

[dataset.synthetic]
warm_start_per_class = 10
seed = 7

[[dataset.synthetic.templates]]
name = "A"
nodes = [[0.0, 0.0], [1.0, 0.0]]
edges = [[0, 1]]

[[dataset.synthetic.templates]]
name = "B"
nodes = [[0.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
edges = [[0, 1], [1, 2]]

[[dataset.synthetic.segments]]
count = 20
level = "none"

[pipeline]
classes = 2
memory_size = 10
prototypes_per_class = 3
window_size = 50
beta = 4.5
fading_factor = 0.99
drift_detection = true
memory = true

[classifier]
hidden_layers = [16]
learning_rate = 0.001
l2_coefficient = 0.0001
minibatch_size = 128
epochs_per_step = 1
"#
        .to_string()
    }

    fn write_config(dir: &Path, text: &str) -> PathBuf {
        let path = dir.join("run.toml");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_and_resolves_output_dir() {
        let dir = tempdir().unwrap();
        let path = write_config(dir.path(), &base_toml());
        let cfg = RunConfigFile::load(&path).unwrap();
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        assert_eq!(cfg.pipeline_config().input_dim(), 6);
        assert_eq!(cfg.cost_model, GedCostModel::default());
        assert_eq!(cfg.ged, GedPolicy::default());
    }

    #[test]
    fn rejects_two_dataset_sources() {
        let dir = tempdir().unwrap();
        let mut text = base_toml();
        text.push_str("\n[dataset.files]\nwarm = \"w.jsonl\"\nstream = \"s.jsonl\"\n");
        let path = write_config(dir.path(), &text);
        assert!(matches!(RunConfigFile::load(&path), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_missing_stream_file() {
        let dir = tempdir().unwrap();
        let text = base_toml().replace(
            "[dataset.synthetic]\nwarm_start_per_class = 10\nseed = 7",
            "[dataset.files]\nwarm = \"nope.jsonl\"\nstream = \"nope.jsonl\"",
        );
        // Strip the now-orphaned synthetic sub-tables.
        let text: String = text
            .lines()
            .take_while(|l| !l.starts_with("[[dataset.synthetic"))
            .chain(text.lines().skip_while(|l| !l.starts_with("[pipeline]")))
            .collect::<Vec<_>>()
            .join("\n");
        let path = write_config(dir.path(), &text);
        assert!(matches!(RunConfigFile::load(&path), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_r_not_below_l() {
        let dir = tempdir().unwrap();
        let text = base_toml().replace("prototypes_per_class = 3", "prototypes_per_class = 10");
        let path = write_config(dir.path(), &text);
        match RunConfigFile::load(&path) {
            Err(Error::Config(msg)) => assert!(msg.contains("1 <= R < L")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_warm_count_mismatch() {
        let dir = tempdir().unwrap();
        let text = base_toml().replace("warm_start_per_class = 10", "warm_start_per_class = 5");
        let path = write_config(dir.path(), &text);
        assert!(RunConfigFile::load(&path).is_err());
    }

    #[test]
    fn cost_model_enum_forms_parse() {
        let dir = tempdir().unwrap();
        let mut text = base_toml();
        text.push_str(
            "\n[cost_model]\nnode_insert_cost = 2.0\nnode_subst_metric = { scaled_euclidean = 0.5 }\nedge_subst_metric = \"absolute_angle_difference\"\n",
        );
        let path = write_config(dir.path(), &text);
        let cfg = RunConfigFile::load(&path).unwrap();
        assert_eq!(cfg.cost_model.node_insert_cost, 2.0);
        assert!(matches!(
            cfg.cost_model.node_subst_metric,
            crate::ged::NodeSubstMetric::ScaledEuclidean(w) if w == 0.5
        ));
    }
}
