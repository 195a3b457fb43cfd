use serde::{Deserialize, Serialize};

use crate::config::EvolutionConfig;
use crate::record::ValidationStatus;

/// Reward of a candidate given its overall score and equivalence failure rate.
pub fn reward(s_overall: f64, e: f64, status: ValidationStatus, cfg: &EvolutionConfig) -> f64 {
    match status {
        ValidationStatus::CompileFail => cfg.r_compile,
        _ if e > 0.0 || status == ValidationStatus::EquivFail => cfg.r_equiv - cfg.beta * e,
        _ if s_overall < 0.0 => cfg.r_equiv.max(s_overall),
        _ => s_overall / (1.0 + s_overall),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptReason {
    Reward,
    DelayGain,
}

/// Why a candidate is accepted, or `None` if it is rejected. The delay rule
/// only applies once a positive best delay score exists.
pub fn accept_reason(r: f64, s_delay: f64, s_delay_best: f64, cfg: &EvolutionConfig) -> Option<AcceptReason> {
    if r >= cfg.tau {
        Some(AcceptReason::Reward)
    } else if s_delay_best > 0.0 && s_delay >= cfg.gamma * s_delay_best {
        Some(AcceptReason::DelayGain)
    } else {
        None
    }
}

pub fn accept(r: f64, s_delay: f64, s_delay_best: f64, cfg: &EvolutionConfig) -> bool {
    accept_reason(r, s_delay, s_delay_best, cfg).is_some()
}
