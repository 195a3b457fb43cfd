//! Multi-round cut-based technology mapping.
//!
//! A run consists of delay rounds, area-flow rounds and exact-area rounds.
//! Each round visits the AND nodes in topological order, selects a match for
//! both output phases of every node, and then decides whether one phase
//! should be served from the other through an inverter. After each round the
//! cover is rebuilt from the outputs, its area and delay are recorded, and
//! required times are propagated backwards for the next round.

mod cover;
mod finalize;
mod operators;
mod state;

use serde::Serialize;
use thiserror::Error;

use crate::aig::{Aig, NodeId};
use crate::genlib::CellLibrary;
use crate::genome::{GenomeError, HeuristicGenome};
use crate::matching::{build_match_index, MatchIndex};
use crate::netlist::{MappedNetlist, NetlistError};
use crate::truth::MAX_VARS;

pub use state::{MatchRecord, Mapper};

/// Comparison slack for arrival times and areas.
pub(crate) const EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("invalid mapping parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Genome(#[from] GenomeError),
    #[error("no library gate realizes node {node} in phase {phase}")]
    NoMatch { node: NodeId, phase: usize },
    #[error("reference count underflow at node {node} phase {phase}")]
    RefUnderflow { node: NodeId, phase: usize },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MappingParams {
    pub cut_size: usize,
    pub cut_limit: usize,
    pub delay_rounds: usize,
    pub flow_rounds: usize,
    pub exact_rounds: usize,
    /// Per-round cost weight for delay and flow rounds; derived from the
    /// genome when absent.
    pub alpha_schedule: Option<Vec<f64>>,
    pub genome: HeuristicGenome,
    /// Lower bound on the required-time target; `f64::INFINITY` disables
    /// timing constraints after the first round.
    pub target_delay: Option<f64>,
}

impl Default for MappingParams {
    fn default() -> Self {
        MappingParams {
            cut_size: 4,
            cut_limit: 16,
            delay_rounds: 1,
            flow_rounds: 2,
            exact_rounds: 2,
            alpha_schedule: None,
            genome: HeuristicGenome::default(),
            target_delay: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundKind {
    Delay,
    Flow,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundStats {
    pub round: usize,
    pub kind: RoundKind,
    pub alpha: Option<f64>,
    pub area: f64,
    pub delay: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MappingResult {
    pub netlist: MappedNetlist,
    pub trace: Vec<RoundStats>,
}

impl MappingParams {
    pub fn total_rounds(&self) -> usize {
        self.delay_rounds + self.flow_rounds + self.exact_rounds
    }

    pub fn round_kind(&self, round: usize) -> RoundKind {
        if round < self.delay_rounds {
            RoundKind::Delay
        } else if round < self.delay_rounds + self.flow_rounds {
            RoundKind::Flow
        } else {
            RoundKind::Exact
        }
    }

    /// Cost weight on arrival time for a delay or flow round.
    pub fn alpha(&self, round: usize) -> Option<f64> {
        if let Some(schedule) = &self.alpha_schedule {
            return schedule.get(round).copied();
        }
        let mp = &self.genome.match_phase;
        match self.round_kind(round) {
            RoundKind::Delay => Some(mp.alpha_delay),
            RoundKind::Flow => {
                let i = round - self.delay_rounds;
                if self.flow_rounds <= 1 {
                    Some(mp.alpha_flow_start)
                } else {
                    let t = i as f64 / (self.flow_rounds - 1) as f64;
                    Some(mp.alpha_flow_start + (mp.alpha_flow_end - mp.alpha_flow_start) * t)
                }
            }
            RoundKind::Exact => None,
        }
    }

    pub fn validate(&self) -> Result<(), MapError> {
        if !(2..=MAX_VARS).contains(&self.cut_size) {
            return Err(MapError::InvalidParams(format!("cut size {} outside 2..={MAX_VARS}", self.cut_size)));
        }
        if self.cut_limit == 0 {
            return Err(MapError::InvalidParams("cut limit must be at least 1".into()));
        }
        if self.total_rounds() == 0 {
            return Err(MapError::InvalidParams("at least one round is required".into()));
        }
        if let Some(s) = &self.alpha_schedule {
            let expected = self.delay_rounds + self.flow_rounds;
            if s.len() != expected {
                return Err(MapError::InvalidParams(format!(
                    "alpha schedule has {} entries, expected {expected}",
                    s.len()
                )));
            }
            if let Some(a) = s.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                return Err(MapError::InvalidParams(format!("alpha {a} outside [0, 1]")));
            }
        }
        if let Some(t) = self.target_delay {
            if t.is_nan() || t < 0.0 {
                return Err(MapError::InvalidParams(format!("target delay {t} must be non-negative")));
            }
        }
        self.genome.validate()?;
        Ok(())
    }
}

/// Maps `aig` onto `lib`, building a match index for the configured cut size.
pub fn run_mapping(aig: &Aig, lib: &CellLibrary, params: &MappingParams) -> Result<MappingResult, MapError> {
    params.validate()?;
    let index = build_match_index(lib, params.cut_size);
    run_mapping_with_index(aig, lib, &index, params)
}

/// Maps `aig` with a prebuilt match index (which must cover `params.cut_size`).
pub fn run_mapping_with_index(
    aig: &Aig,
    lib: &CellLibrary,
    index: &MatchIndex,
    params: &MappingParams,
) -> Result<MappingResult, MapError> {
    let mut mapper = Mapper::new(aig, lib, index, params.clone())?;
    while mapper.rounds_done() < params.total_rounds() {
        mapper.run_round()?;
    }
    let netlist = mapper.finalize()?;
    Ok(MappingResult { netlist, trace: mapper.trace().to_vec() })
}
