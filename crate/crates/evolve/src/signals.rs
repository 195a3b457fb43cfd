//! Adaptive signals computed from the recent iteration history.

use serde::{Deserialize, Serialize};
use techmap::Operator;

use crate::record::IterationRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveHint {
    Delay,
    Area,
    Balanced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiversityPressure {
    High,
    Low,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveSignals {
    pub h_obj: ObjectiveHint,
    pub p_div: DiversityPressure,
    pub f_stag: bool,
    /// Times each operator was chosen in the window, in `Operator::ALL` order.
    pub usage: [usize; 3],
    pub n_area: usize,
    pub n_delay: usize,
    pub mean_delta_area: f64,
    pub mean_delta_delay: f64,
    /// Length of the run of identical operators ending at the newest record.
    pub n_consecutive: usize,
}

impl AdaptiveSignals {
    pub fn usage_of(&self, op: Operator) -> usize {
        self.usage[op_index(op)]
    }
}

pub(crate) fn op_index(op: Operator) -> usize {
    Operator::ALL.iter().position(|&o| o == op).unwrap()
}

/// Signals for `window` (oldest first, at most `w` records). `preceding` is
/// the record just before the window, used to form the first difference;
/// without it the first record has no predecessor and contributes no pair.
pub fn compute_signals(window: &[IterationRecord], preceding: Option<&IterationRecord>, w: usize) -> AdaptiveSignals {
    debug_assert!(window.len() <= w);
    let mut pairs = Vec::new();
    let mut prev = preceding;
    for cur in window {
        if let Some(p) = prev {
            pairs.push((cur.s_area - p.s_area, cur.s_delay - p.s_delay));
        }
        prev = Some(cur);
    }
    let n_area = pairs.iter().filter(|d| d.0 > 0.0).count();
    let n_delay = pairs.iter().filter(|d| d.1 > 0.0).count();
    let mean = |f: fn(&(f64, f64)) -> f64| {
        if pairs.is_empty() {
            0.0
        } else {
            pairs.iter().map(f).sum::<f64>() / pairs.len() as f64
        }
    };
    let mean_delta_area = mean(|d| d.0);
    let mean_delta_delay = mean(|d| d.1);

    let h_obj = if n_area > 0 && mean_delta_delay >= 0.0 {
        ObjectiveHint::Area
    } else if n_delay > 0 && mean_delta_area >= 0.0 {
        ObjectiveHint::Delay
    } else {
        ObjectiveHint::Balanced
    };

    let n_consecutive = match window.last() {
        Some(last) => window.iter().rev().take_while(|r| r.operator == last.operator).count(),
        None => 0,
    };
    let p_div = if n_consecutive > 0 && n_consecutive >= w.div_ceil(2) {
        DiversityPressure::High
    } else {
        DiversityPressure::Low
    };

    let f_stag = n_area > 0 && !window.is_empty() && window.iter().all(|r| r.s_delay < 0.0);

    let mut usage = [0; 3];
    for r in window {
        usage[op_index(r.operator)] += 1;
    }

    AdaptiveSignals {
        h_obj,
        p_div,
        f_stag,
        usage,
        n_area,
        n_delay,
        mean_delta_area,
        mean_delta_delay,
        n_consecutive,
    }
}
