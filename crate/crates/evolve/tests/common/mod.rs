#![allow(dead_code)]

use std::path::PathBuf;

use techmap::Operator;
use techmap_evolve::{AdaptiveSignals, DiversityPressure, IterationRecord, ObjectiveHint, Strategy};

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn rec(s_area: f64, s_delay: f64, operator: Operator) -> IterationRecord {
    IterationRecord {
        iteration: 0,
        s_area,
        s_delay,
        s_overall: 0.5 * s_area + 0.5 * s_delay,
        e: 0.0,
        operator,
        strategy: Strategy::Balanced,
        accepted: true,
        reward: 0.0,
    }
}

/// Straight-line restatement of the signal definitions.
pub fn oracle_signals(window: &[IterationRecord], preceding: Option<&IterationRecord>, w: usize) -> AdaptiveSignals {
    let mut n_area = 0;
    let mut n_delay = 0;
    let mut sum_area = 0.0;
    let mut sum_delay = 0.0;
    let mut pairs = 0;
    for j in 0..window.len() {
        let prev = if j == 0 { preceding } else { Some(&window[j - 1]) };
        let Some(prev) = prev else { continue };
        if window[j].s_area > prev.s_area {
            n_area += 1;
        }
        if window[j].s_delay > prev.s_delay {
            n_delay += 1;
        }
        sum_area += window[j].s_area - prev.s_area;
        sum_delay += window[j].s_delay - prev.s_delay;
        pairs += 1;
    }
    let d_area = if pairs > 0 { sum_area / pairs as f64 } else { 0.0 };
    let d_delay = if pairs > 0 { sum_delay / pairs as f64 } else { 0.0 };
    let h_obj = if n_area > 0 && d_delay >= 0.0 {
        ObjectiveHint::Area
    } else if n_delay > 0 && d_area >= 0.0 {
        ObjectiveHint::Delay
    } else {
        ObjectiveHint::Balanced
    };
    let mut n_cs = 0;
    if let Some(last) = window.last() {
        for r in window.iter().rev() {
            if r.operator != last.operator {
                break;
            }
            n_cs += 1;
        }
    }
    let threshold = (w + 1) / 2;
    let p_div = if n_cs >= threshold && n_cs > 0 { DiversityPressure::High } else { DiversityPressure::Low };
    let mut all_neg = !window.is_empty();
    for r in window {
        if !(r.s_delay < 0.0) {
            all_neg = false;
        }
    }
    let f_stag = n_area > 0 && all_neg;
    let mut usage = [0usize; 3];
    for r in window {
        let i = match r.operator {
            Operator::MatchPhase => 0,
            Operator::MatchPhaseExact => 1,
            Operator::MatchDropPhase => 2,
        };
        usage[i] += 1;
    }
    AdaptiveSignals {
        h_obj,
        p_div,
        f_stag,
        usage,
        n_area,
        n_delay,
        mean_delta_area: d_area,
        mean_delta_delay: d_delay,
        n_consecutive: n_cs,
    }
}
