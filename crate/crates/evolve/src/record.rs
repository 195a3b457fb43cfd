use serde::{Deserialize, Serialize};
use techmap::Operator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    AreaOpt,
    DelayOpt,
    Balanced,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::AreaOpt, Strategy::DelayOpt, Strategy::Balanced];
}

/// Outcome of the three validation stages for one candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationStatus {
    Ok,
    /// The genome failed schema or range validation.
    CompileFail,
    /// At least one benchmark failed mapping or equivalence checking.
    EquivFail,
}

/// Scores of one outer iteration's chosen candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub s_area: f64,
    pub s_delay: f64,
    pub s_overall: f64,
    pub e: f64,
    pub operator: Operator,
    pub strategy: Strategy,
    pub accepted: bool,
    pub reward: f64,
}

/// Weighted overall score.
pub fn overall(alpha: f64, s_area: f64, s_delay: f64) -> f64 {
    alpha * s_area + (1.0 - alpha) * s_delay
}
