//! Turns a loaded run configuration into datasets, executed runs, and
//! output files (per-step CSV, aggregate CSV, run metadata).

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::config::RunConfigFile;
use crate::error::{Error, Result};
use crate::io::atomic_write;
use crate::io::gxl::{parse_cxl, parse_gxl};
use crate::io::results::write_results_csv;
use crate::io::stream::{read_stream, stream_graph_id, write_stream, StreamRecord};
use crate::io::synthetic::generate_synthetic;
use crate::pipeline::run_stream;

/// Paths written by a completed run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub steps_csv: PathBuf,
    pub aggregate_csv: PathBuf,
    pub metadata: PathBuf,
}

/// Loads (or generates) the warm-start set and stream named by the
/// config's dataset source.
pub fn load_dataset(cfg: &RunConfigFile) -> Result<(Vec<StreamRecord>, Vec<StreamRecord>)> {
    if let Some(files) = &cfg.dataset.files {
        let warm = read_stream(&files.warm)?;
        let stream = read_stream(&files.stream)?;
        return Ok((warm, stream));
    }
    if let Some(spec) = &cfg.dataset.synthetic {
        return generate_synthetic(spec);
    }
    if let Some(gxl) = &cfg.dataset.gxl {
        return convert_corpus(cfg, gxl);
    }
    Err(Error::Config("dataset names no source".into()))
}

fn convert_corpus(
    cfg: &RunConfigFile,
    source: &crate::config::GxlSource,
) -> Result<(Vec<StreamRecord>, Vec<StreamRecord>)> {
    let index_text = fs::read_to_string(&source.index).map_err(|e| Error::Io {
        path: source.index.display().to_string(),
        source: e,
    })?;
    let entries = parse_cxl(&index_text, &source.classes)?;

    let mut graphs = HashMap::new();
    for (file, _) in &entries {
        if graphs.contains_key(file) {
            continue;
        }
        let path = source.dir.join(file);
        let text = fs::read_to_string(&path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        graphs.insert(file.clone(), parse_gxl(&text, &cfg.gxl_schema)?);
    }

    let k = source.classes.len();
    let mut pools: Vec<Vec<&String>> = vec![Vec::new(); k];
    for (file, label) in &entries {
        pools[label - 1].push(file);
    }

    let mut warm = Vec::new();
    let mut warm_t = 0u64;
    for (c, pool) in pools.iter().enumerate() {
        if pool.len() <= source.warm_per_class {
            return Err(Error::Config(format!(
                "class '{}' has {} graphs, need more than warm_per_class = {}",
                source.classes[c],
                pool.len(),
                source.warm_per_class
            )));
        }
        for file in &pool[..source.warm_per_class] {
            warm_t += 1;
            let graph = graphs[*file].with_id(stream_graph_id(warm_t));
            warm.push(StreamRecord {
                t: warm_t,
                graph,
                label: c + 1,
                segment_tag: "corpus".into(),
            });
        }
    }

    // Uniform class interleave with replacement over the non-warm pool.
    let mut rng = ChaCha20Rng::seed_from_u64(source.order_seed);
    let mut stream = Vec::with_capacity(source.stream_length);
    for t in 1..=source.stream_length as u64 {
        let class = rng.random_range(0..k);
        let pool = &pools[class][source.warm_per_class..];
        let file = pool[rng.random_range(0..pool.len())];
        let graph = graphs[file].with_id(stream_graph_id(t));
        stream.push(StreamRecord {
            t,
            graph,
            label: class + 1,
            segment_tag: "corpus".into(),
        });
    }
    Ok((warm, stream))
}

/// Materializes the configured synthetic or GXL dataset as stream files
/// (`warm.jsonl`, `stream.jsonl`) in the output directory.
pub fn write_dataset_files(cfg: &RunConfigFile) -> Result<(PathBuf, PathBuf)> {
    if cfg.dataset.files.is_some() {
        return Err(Error::Config(
            "dataset already points at stream files; nothing to generate".into(),
        ));
    }
    let (warm, stream) = load_dataset(cfg)?;
    let warm_path = cfg.output_dir.join("warm.jsonl");
    let stream_path = cfg.output_dir.join("stream.jsonl");
    write_stream(&warm, &warm_path)?;
    write_stream(&stream, &stream_path)?;
    Ok((warm_path, stream_path))
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    config: &'a RunConfigFile,
    per_rep_seeds: Vec<u64>,
    crate_version: &'static str,
}

/// Runs the configured experiment and writes `steps.csv`,
/// `aggregate.csv` and `run_meta.json` into the output directory.
pub fn execute_run(cfg: &RunConfigFile) -> Result<RunArtifacts> {
    cfg.validate()?;
    let (warm, stream) = load_dataset(cfg)?;
    let pipeline_config = cfg.pipeline_config();
    let output = run_stream(&pipeline_config, &warm, &stream, cfg.repetitions)?;

    let artifacts = RunArtifacts {
        steps_csv: cfg.output_dir.join("steps.csv"),
        aggregate_csv: cfg.output_dir.join("aggregate.csv"),
        metadata: cfg.output_dir.join("run_meta.json"),
    };
    write_results_csv(
        &output.per_rep,
        &output.aggregate,
        &artifacts.steps_csv,
        &artifacts.aggregate_csv,
    )?;
    let metadata = RunMetadata {
        config: cfg,
        per_rep_seeds: (0..cfg.repetitions as u64).map(|r| cfg.seed + r).collect(),
        crate_version: env!("CARGO_PKG_VERSION"),
    };
    let json = serde_json::to_string_pretty(&metadata).expect("metadata serializes");
    atomic_write(&artifacts.metadata, json.as_bytes())?;
    Ok(artifacts)
}

/// Maps errors to the documented process exit codes: 2 for configuration
/// problems, 3 for data problems, 4 for runtime failures.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) => 2,
        Error::Gxl { .. }
        | Error::Cxl { .. }
        | Error::StreamFormat { .. }
        | Error::Io { .. }
        | Error::InvalidGraph { .. }
        | Error::EmptyStream
        | Error::WarmStartCount { .. } => 3,
        Error::StepFailed { source, .. } => exit_code(source),
        _ => 4,
    }
}
