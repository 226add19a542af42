//! Result CSVs: one per-step row per repetition, plus a per-step
//! aggregate file (mean and standard error of the G-mean curve).
//! Comma-separated, header row, '.' decimal separator.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::atomic_write;
use crate::pipeline::{StepAggregate, StepRecord};

/// Writes `steps_path` with columns `rep,t,y,yhat,correct,drift_flag,gmean`
/// and `aggregate_path` with columns `t,mean_gmean,stderr_gmean`.
pub fn write_results_csv(
    per_rep: &[Vec<StepRecord>],
    aggregates: &[StepAggregate],
    steps_path: &Path,
    aggregate_path: &Path,
) -> Result<()> {
    if per_rep.is_empty() || per_rep.iter().all(Vec::is_empty) {
        return Err(Error::EmptyStream);
    }
    let mut steps = String::from("rep,t,y,yhat,correct,drift_flag,gmean\n");
    for (rep, records) in per_rep.iter().enumerate() {
        for r in records {
            steps.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                rep + 1,
                r.t,
                r.y,
                r.y_hat,
                r.correct,
                u8::from(r.drift_flagged),
                r.gmean
            ));
        }
    }
    atomic_write(steps_path, steps.as_bytes())?;

    let mut agg = String::from("t,mean_gmean,stderr_gmean\n");
    for a in aggregates {
        agg.push_str(&format!("{},{},{}\n", a.t, a.mean_gmean, a.stderr_gmean));
    }
    atomic_write(aggregate_path, agg.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn record(t: u64, gmean: f64) -> StepRecord {
        StepRecord {
            t,
            y: 1,
            y_hat: 1,
            correct: 1,
            drift_flagged: false,
            gmean,
            recalls: vec![],
            loss: 0.0,
            step_ms: 0.0,
        }
    }

    #[test]
    fn row_counts_match_reps_and_steps() {
        let dir = tempdir().unwrap();
        let steps = dir.path().join("steps.csv");
        let agg = dir.path().join("agg.csv");
        let per_rep = vec![
            vec![record(1, 0.5), record(2, 0.6), record(3, 0.7)],
            vec![record(1, 0.4), record(2, 0.6), record(3, 0.8)],
        ];
        let aggregates = vec![
            StepAggregate {
                t: 1,
                mean_gmean: 0.45,
                stderr_gmean: 0.05,
            },
            StepAggregate {
                t: 2,
                mean_gmean: 0.6,
                stderr_gmean: 0.0,
            },
            StepAggregate {
                t: 3,
                mean_gmean: 0.75,
                stderr_gmean: 0.05,
            },
        ];
        write_results_csv(&per_rep, &aggregates, &steps, &agg).unwrap();

        let steps_text = std::fs::read_to_string(&steps).unwrap();
        let lines: Vec<&str> = steps_text.lines().collect();
        assert_eq!(lines.len(), 1 + 6);
        assert_eq!(lines[0], "rep,t,y,yhat,correct,drift_flag,gmean");
        assert_eq!(lines[1], "1,1,1,1,1,0,0.5");

        let agg_text = std::fs::read_to_string(&agg).unwrap();
        assert_eq!(agg_text.lines().count(), 1 + 3);
    }

    #[test]
    fn single_rep_stderr_is_zero_and_gmean_in_range() {
        let dir = tempdir().unwrap();
        let steps = dir.path().join("steps.csv");
        let agg = dir.path().join("agg.csv");
        let per_rep = vec![vec![record(1, 0.9)]];
        let aggregates = vec![StepAggregate {
            t: 1,
            mean_gmean: 0.9,
            stderr_gmean: 0.0,
        }];
        write_results_csv(&per_rep, &aggregates, &steps, &agg).unwrap();
        let text = std::fs::read_to_string(&agg).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",0"));
        for line in std::fs::read_to_string(&steps).unwrap().lines().skip(1) {
            let g: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!((0.0..=1.0).contains(&g));
        }
    }

    #[test]
    fn empty_records_rejected() {
        let dir = tempdir().unwrap();
        let steps = dir.path().join("steps.csv");
        let agg = dir.path().join("agg.csv");
        assert!(write_results_csv(&[], &[], &steps, &agg).is_err());
        assert!(!steps.exists());
    }
}
