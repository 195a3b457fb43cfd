//! Evolution plans and the rule-based planner.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use techmap::{HeuristicGenome, Knob, KnobKind, Operator};

use crate::record::{IterationRecord, Strategy};
use crate::signals::{AdaptiveSignals, DiversityPressure, ObjectiveHint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnobBound {
    pub knob: Knob,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modification {
    /// Knobs the mutation may touch; all belong to the plan's operator.
    pub target_knobs: Vec<Knob>,
    pub guidance: String,
    /// Expected change of (area score, delay score).
    pub expected_impact: (f64, f64),
    /// Bounds for the numeric targets, within each knob's declared range.
    pub constraints: Vec<KnobBound>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPlan {
    pub operator: Operator,
    pub strategy: Strategy,
    pub modification: Modification,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("plan targets no knobs")]
    NoTargets,
    #[error("knob {knob} does not belong to operator {operator}")]
    OutsideGroup { knob: String, operator: Operator },
    #[error("constraint on {knob} is not within [{lo}, {hi}]")]
    BadConstraint { knob: String, lo: f64, hi: f64 },
}

impl EvolutionPlan {
    pub fn validate(&self) -> Result<(), PlanError> {
        let m = &self.modification;
        if m.target_knobs.is_empty() {
            return Err(PlanError::NoTargets);
        }
        for k in m.target_knobs.iter().chain(m.constraints.iter().map(|c| &c.knob)) {
            if k.operator() != self.operator {
                return Err(PlanError::OutsideGroup { knob: k.path(), operator: self.operator });
            }
        }
        for c in &m.constraints {
            let ok = match c.knob.kind() {
                KnobKind::Real { lo, hi } => lo <= c.lo && c.lo <= c.hi && c.hi <= hi,
                _ => false,
            };
            if !ok {
                return Err(PlanError::BadConstraint { knob: c.knob.path(), lo: c.lo, hi: c.hi });
            }
        }
        Ok(())
    }

    /// Bounds a numeric target is clipped to.
    pub fn bounds(&self, knob: Knob) -> Option<(f64, f64)> {
        let KnobKind::Real { lo, hi } = knob.kind() else { return None };
        let narrowed = self.modification.constraints.iter().find(|c| c.knob == knob);
        Some(narrowed.map_or((lo, hi), |c| (c.lo.max(lo), c.hi.min(hi))))
    }
}

/// Knobs of `op` worth adjusting under `strategy`.
pub fn target_knobs(op: Operator, strategy: Strategy) -> Vec<Knob> {
    use Knob::*;
    let list: &[Knob] = match (op, strategy) {
        (Operator::MatchPhase, Strategy::AreaOpt) => &[AlphaFlowStart, AlphaFlowEnd, KSlack, KTol],
        (Operator::MatchPhase, Strategy::DelayOpt) => &[AlphaDelay, KTol, KDgain, TieBreak],
        (Operator::MatchDropPhase, Strategy::AreaOpt) => &[DropTolDelayRound, DropTolOther],
        (Operator::MatchDropPhase, Strategy::DelayOpt) => &[DropTolDelayRound, EnabledInDelayRound],
        (op, _) => op.knobs(),
    };
    list.to_vec()
}

fn guidance(op: Operator, strategy: Strategy) -> String {
    let goal = match strategy {
        Strategy::AreaOpt => "reduce cover area without giving up arrival times",
        Strategy::DelayOpt => "reduce the critical arrival time while keeping area growth small",
        Strategy::Balanced => "improve the weighted area and delay score",
    };
    format!("adjust the {} knobs to {goal}", op.group_name())
}

fn default_bounds(knobs: &[Knob]) -> Vec<KnobBound> {
    knobs
        .iter()
        .filter_map(|&knob| match knob.kind() {
            KnobKind::Real { lo, hi } => Some(KnobBound { knob, lo, hi }),
            _ => None,
        })
        .collect()
}

/// Builds the plan for `op` and `strategy` with the signals' mean deltas as
/// expected impact.
pub fn make_plan(op: Operator, strategy: Strategy, signals: &AdaptiveSignals) -> EvolutionPlan {
    let target_knobs = target_knobs(op, strategy);
    EvolutionPlan {
        operator: op,
        strategy,
        modification: Modification {
            constraints: default_bounds(&target_knobs),
            target_knobs,
            guidance: guidance(op, strategy),
            expected_impact: (signals.mean_delta_area, signals.mean_delta_delay),
        },
    }
}

/// Deterministic rule-based planner.
///
/// Operator: with high diversity pressure, a least-used operator (ties drawn
/// from `rng`); otherwise the operator of the highest-reward record in the
/// window, newest first on ties; with an empty window, drawn from `rng`.
/// Strategy: delay-opt under delay stagnation, otherwise the objective hint.
pub fn plan<R: Rng>(history: &[IterationRecord], signals: &AdaptiveSignals, _genome: &HeuristicGenome, rng: &mut R) -> EvolutionPlan {
    let op = if history.is_empty() {
        *Operator::ALL.choose(rng).unwrap()
    } else if signals.p_div == DiversityPressure::High {
        let least = signals.usage.iter().copied().min().unwrap();
        let candidates: Vec<Operator> = Operator::ALL.into_iter().filter(|&o| signals.usage_of(o) == least).collect();
        *candidates.choose(rng).unwrap()
    } else {
        let mut best = &history[history.len() - 1];
        for r in history.iter().rev() {
            if r.reward > best.reward {
                best = r;
            }
        }
        best.operator
    };
    let strategy = if signals.f_stag {
        Strategy::DelayOpt
    } else {
        match signals.h_obj {
            ObjectiveHint::Area => Strategy::AreaOpt,
            ObjectiveHint::Delay => Strategy::DelayOpt,
            ObjectiveHint::Balanced => Strategy::Balanced,
        }
    };
    make_plan(op, strategy, signals)
}
