use std::path::PathBuf;

use crate::agent::{read_trace_log, TraceRecord};
use crate::Result;

/// How often the agent picked a never-executed event on pages that offered
/// both executed and unexecuted ones, next to what uniform choice would give.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectedActionStats {
    pub mixed_pages: usize,
    pub chose_unexecuted: usize,
    /// Mean over mixed pages of `n_unexecuted / n_events`.
    pub random_expectation: f64,
    /// Standard deviation of the uniform-choice rate (sum of independent
    /// Bernoulli trials, one per mixed page).
    pub random_sigma: f64,
}

impl ExpectedActionStats {
    pub fn rate(&self) -> f64 {
        if self.mixed_pages == 0 {
            0.0
        } else {
            self.chose_unexecuted as f64 / self.mixed_pages as f64
        }
    }
}

pub fn expected_action_stats<'a>(
    records: impl IntoIterator<Item = &'a TraceRecord>,
) -> ExpectedActionStats {
    let (mut mixed, mut chose, mut p_sum, mut var_sum) = (0usize, 0usize, 0.0, 0.0);
    for r in records {
        if r.n_unexecuted == 0 || r.n_unexecuted >= r.n_events {
            continue;
        }
        mixed += 1;
        if r.chosen_fcr == 0 {
            chose += 1;
        }
        let p = r.n_unexecuted as f64 / r.n_events as f64;
        p_sum += p;
        var_sum += p * (1.0 - p);
    }
    let n = mixed.max(1) as f64;
    ExpectedActionStats {
        mixed_pages: mixed,
        chose_unexecuted: chose,
        random_expectation: p_sum / n,
        random_sigma: var_sum.sqrt() / n,
    }
}

/// Reads every trace log and aggregates them.
pub fn cmd_stats(paths: &[PathBuf]) -> Result<ExpectedActionStats> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_trace_log(p)?);
    }
    Ok(expected_action_stats(&all))
}
