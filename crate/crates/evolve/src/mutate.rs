//! Plan-conditioned mutation of a genome.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use techmap::{HeuristicGenome, Knob, KnobKind, KnobValue, TieBreak};

use crate::plan::EvolutionPlan;

/// Gaussian step as a fraction of a knob's range.
pub const STEP_FRACTION: f64 = 0.1;
/// Probability that one numeric target jumps to an endpoint of its range.
pub const JUMP_PROBABILITY: f64 = 0.1;

/// Random stream for one purpose within an outer iteration. Streams are
/// independent of evaluation order, so parallel runs replay exactly.
pub fn stream(seed: u64, purpose: u64, iteration: usize, step: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose << 56 | (iteration as u64) << 32 | (step as u64) << 16 | index as u64);
    rng
}

pub(crate) const PURPOSE_PLAN: u64 = 1;
pub(crate) const PURPOSE_MUTATE: u64 = 2;

/// One child of `parent`: only the plan's target knobs change.
pub fn mutate_one<R: Rng>(plan: &EvolutionPlan, parent: &HeuristicGenome, rng: &mut R) -> HeuristicGenome {
    let mut child = parent.clone();
    for &knob in &plan.modification.target_knobs {
        let value = match (knob.kind(), parent.get(knob)) {
            (KnobKind::Real { .. }, KnobValue::Real(v)) => {
                let (lo, hi) = plan.bounds(knob).unwrap();
                let step = Normal::new(0.0, STEP_FRACTION * (hi - lo)).unwrap();
                KnobValue::Real(clip(v + step.sample(rng), lo, hi))
            }
            (KnobKind::Flag, _) => KnobValue::Flag(rng.random()),
            (KnobKind::Tie, _) => {
                KnobValue::Tie(*[TieBreak::CostDelayLeaves, TieBreak::CostLeavesDelay].choose(rng).unwrap())
            }
            (_, other) => other,
        };
        child.set(knob, value);
    }
    let numeric: Vec<Knob> = plan
        .modification
        .target_knobs
        .iter()
        .copied()
        .filter(|k| matches!(k.kind(), KnobKind::Real { .. }))
        .collect();
    if !numeric.is_empty() && rng.random_bool(JUMP_PROBABILITY) {
        let knob = *numeric.choose(rng).unwrap();
        let (lo, hi) = plan.bounds(knob).unwrap();
        child.set(knob, KnobValue::Real(if rng.random() { hi } else { lo }));
    }
    child
}

pub fn clip(v: f64, lo: f64, hi: f64) -> f64 {
    if v.is_nan() {
        lo
    } else {
        v.clamp(lo, hi)
    }
}

/// The population of one inner step.
pub fn mutate(
    plan: &EvolutionPlan,
    parent: &HeuristicGenome,
    seed: u64,
    iteration: usize,
    step: usize,
    population: usize,
) -> Vec<HeuristicGenome> {
    (0..population)
        .map(|i| mutate_one(plan, parent, &mut stream(seed, PURPOSE_MUTATE, iteration, step, i)))
        .collect()
}
