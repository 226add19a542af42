//! Loss-based concept drift detection over a stream of 0/1 prediction
//! scores, using Binomial window statistics.
//!
//! Two FIFO windows of capacity `W` are maintained: scores enter the
//! moving queue, and scores evicted from it cascade into the reference
//! queue, so the reference window always holds the `W` scores immediately
//! preceding the moving window. An alarm fires when the moving mean falls
//! strictly below `mean_ref - beta * std_ref`.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DriftDetector {
    window_size: usize,
    beta: f64,
    reference: VecDeque<u8>,
    moving: VecDeque<u8>,
    alarms_raised: u64,
}

/// Mean and standard deviation of a 0/1 score window, modeling the
/// window total as Binomial: `sigma = sqrt(p (1 - p) / W)`.
pub fn window_stats(scores: &VecDeque<u8>) -> Result<(f64, f64)> {
    if scores.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let w = scores.len() as f64;
    let p = scores.iter().map(|&s| f64::from(s)).sum::<f64>() / w;
    Ok((p, (p * (1.0 - p) / w).sqrt()))
}

impl DriftDetector {
    pub fn new(window_size: usize, beta: f64) -> Result<Self> {
        if window_size == 0 {
            return Err(Error::Config("drift window size must be positive".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!(
                "drift beta must be positive, got {beta}"
            )));
        }
        Ok(Self {
            window_size,
            beta,
            reference: VecDeque::with_capacity(window_size),
            moving: VecDeque::with_capacity(window_size),
            alarms_raised: 0,
        })
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alarms_raised(&self) -> u64 {
        self.alarms_raised
    }

    pub fn reference_len(&self) -> usize {
        self.reference.len()
    }

    pub fn moving_len(&self) -> usize {
        self.moving.len()
    }

    /// Appends a 0/1 score to the moving queue; its eviction, if any,
    /// cascades into the reference queue.
    pub fn push_score(&mut self, score: f64) -> Result<()> {
        let s = if score == 0.0 {
            0u8
        } else if score == 1.0 {
            1u8
        } else {
            return Err(Error::NonBinaryScore(score));
        };
        self.moving.push_back(s);
        if self.moving.len() > self.window_size {
            let old = self.moving.pop_front().expect("moving queue non-empty");
            self.reference.push_back(old);
            if self.reference.len() > self.window_size {
                self.reference.pop_front();
            }
        }
        Ok(())
    }

    /// Returns true when drift is flagged. Never flags before both
    /// queues are full. Uses a strict comparison so two perfect windows
    /// (`sigma_ref = 0`, `mean_mov = mean_ref`) do not alarm.
    pub fn check(&mut self) -> bool {
        if self.reference.len() < self.window_size || self.moving.len() < self.window_size {
            return false;
        }
        let (mean_ref, std_ref) = window_stats(&self.reference).expect("full queue");
        let (mean_mov, _) = window_stats(&self.moving).expect("full queue");
        let threshold = mean_ref - self.beta * std_ref;
        let drift = mean_mov < threshold;
        if drift {
            self.alarms_raised += 1;
        }
        drift
    }

    /// Empties both queues; sensitivity and alarm counter are retained.
    pub fn reset(&mut self) {
        self.reference.clear();
        self.moving.clear();
    }
}
