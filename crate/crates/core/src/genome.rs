//! The evolvable heuristic parameters of the three mapping operators.
//!
//! Every numeric knob lives in `[0, 1]`. Thresholds that are expressed in
//! library units are scaled by the inverter's area or delay at use sites.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GenomeError {
    #[error("{path} = {value} violates bound {bound}")]
    OutOfRange { path: String, value: f64, bound: String },
    #[error("unknown knob {0}")]
    UnknownField(String),
    #[error("malformed genome document: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    CostDelayLeaves,
    CostLeavesDelay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchPhaseKnobs {
    /// Cost blend weight on arrival time in delay rounds.
    pub alpha_delay: f64,
    pub alpha_flow_start: f64,
    pub alpha_flow_end: f64,
    /// Area tolerance for delay-improving candidates in delay rounds, in inverter areas.
    pub k_tol: f64,
    /// Delay gain, in inverter delays, that lets a candidate through regardless of area.
    pub k_dgain: f64,
    /// Area slack granted to delay-improving candidates in flow rounds, in inverter areas.
    pub k_slack: f64,
    pub tie_break: TieBreak,
}

impl Default for MatchPhaseKnobs {
    fn default() -> Self {
        MatchPhaseKnobs {
            alpha_delay: 1.0,
            alpha_flow_start: 0.4,
            alpha_flow_end: 0.0,
            k_tol: 0.25,
            k_dgain: 0.5,
            k_slack: 0.5,
            tie_break: TieBreak::CostDelayLeaves,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExactKnobs {
    /// Minimum area gain, in inverter areas, for a replacement that worsens delay.
    pub k_exact: f64,
    /// Share of the available slack a replacement may consume.
    pub slack_fraction: f64,
}

impl Default for ExactKnobs {
    fn default() -> Self {
        ExactKnobs { k_exact: 0.5, slack_fraction: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DropKnobs {
    /// Area tolerance for unification in delay rounds, in inverter areas.
    pub drop_tol_delay_round: f64,
    /// Area tolerance for unification in flow rounds, in inverter areas.
    pub drop_tol_other: f64,
    pub enabled_in_delay_round: bool,
}

impl Default for DropKnobs {
    fn default() -> Self {
        DropKnobs { drop_tol_delay_round: 0.0, drop_tol_other: 0.0, enabled_in_delay_round: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeuristicGenome {
    pub match_phase: MatchPhaseKnobs,
    pub match_phase_exact: ExactKnobs,
    pub match_drop_phase: DropKnobs,
}

/// The operator a knob group belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operator {
    MatchPhase,
    MatchPhaseExact,
    MatchDropPhase,
}

impl Operator {
    pub const ALL: [Operator; 3] = [Operator::MatchPhase, Operator::MatchPhaseExact, Operator::MatchDropPhase];

    pub fn group_name(self) -> &'static str {
        match self {
            Operator::MatchPhase => "match_phase",
            Operator::MatchPhaseExact => "match_phase_exact",
            Operator::MatchDropPhase => "match_drop_phase",
        }
    }

    pub fn knobs(self) -> &'static [Knob] {
        match self {
            Operator::MatchPhase => &Knob::ALL[0..7],
            Operator::MatchPhaseExact => &Knob::ALL[7..9],
            Operator::MatchDropPhase => &Knob::ALL[9..12],
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Operator::MatchPhase => "MatchPhase",
            Operator::MatchPhaseExact => "MatchPhaseExact",
            Operator::MatchDropPhase => "MatchDropPhase",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    AlphaDelay,
    AlphaFlowStart,
    AlphaFlowEnd,
    KTol,
    KDgain,
    KSlack,
    TieBreak,
    KExact,
    SlackFraction,
    DropTolDelayRound,
    DropTolOther,
    EnabledInDelayRound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KnobValue {
    Real(f64),
    Flag(bool),
    Tie(TieBreak),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KnobKind {
    Real { lo: f64, hi: f64 },
    Flag,
    Tie,
}

impl Knob {
    pub const ALL: [Knob; 12] = [
        Knob::AlphaDelay,
        Knob::AlphaFlowStart,
        Knob::AlphaFlowEnd,
        Knob::KTol,
        Knob::KDgain,
        Knob::KSlack,
        Knob::TieBreak,
        Knob::KExact,
        Knob::SlackFraction,
        Knob::DropTolDelayRound,
        Knob::DropTolOther,
        Knob::EnabledInDelayRound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Knob::AlphaDelay => "alpha_delay",
            Knob::AlphaFlowStart => "alpha_flow_start",
            Knob::AlphaFlowEnd => "alpha_flow_end",
            Knob::KTol => "k_tol",
            Knob::KDgain => "k_dgain",
            Knob::KSlack => "k_slack",
            Knob::TieBreak => "tie_break",
            Knob::KExact => "k_exact",
            Knob::SlackFraction => "slack_fraction",
            Knob::DropTolDelayRound => "drop_tol_delay_round",
            Knob::DropTolOther => "drop_tol_other",
            Knob::EnabledInDelayRound => "enabled_in_delay_round",
        }
    }

    pub fn operator(self) -> Operator {
        match self {
            Knob::AlphaDelay
            | Knob::AlphaFlowStart
            | Knob::AlphaFlowEnd
            | Knob::KTol
            | Knob::KDgain
            | Knob::KSlack
            | Knob::TieBreak => Operator::MatchPhase,
            Knob::KExact | Knob::SlackFraction => Operator::MatchPhaseExact,
            Knob::DropTolDelayRound | Knob::DropTolOther | Knob::EnabledInDelayRound => Operator::MatchDropPhase,
        }
    }

    /// Dotted path, e.g. `match_phase.k_tol`.
    pub fn path(self) -> String {
        format!("{}.{}", self.operator().group_name(), self.name())
    }

    pub fn kind(self) -> KnobKind {
        match self {
            Knob::TieBreak => KnobKind::Tie,
            Knob::EnabledInDelayRound => KnobKind::Flag,
            _ => KnobKind::Real { lo: 0.0, hi: 1.0 },
        }
    }

    pub fn from_name(name: &str) -> Option<Knob> {
        Knob::ALL.iter().copied().find(|k| k.name() == name || k.path() == name)
    }
}

impl HeuristicGenome {
    pub fn get(&self, knob: Knob) -> KnobValue {
        let mp = &self.match_phase;
        let ex = &self.match_phase_exact;
        let dp = &self.match_drop_phase;
        match knob {
            Knob::AlphaDelay => KnobValue::Real(mp.alpha_delay),
            Knob::AlphaFlowStart => KnobValue::Real(mp.alpha_flow_start),
            Knob::AlphaFlowEnd => KnobValue::Real(mp.alpha_flow_end),
            Knob::KTol => KnobValue::Real(mp.k_tol),
            Knob::KDgain => KnobValue::Real(mp.k_dgain),
            Knob::KSlack => KnobValue::Real(mp.k_slack),
            Knob::TieBreak => KnobValue::Tie(mp.tie_break),
            Knob::KExact => KnobValue::Real(ex.k_exact),
            Knob::SlackFraction => KnobValue::Real(ex.slack_fraction),
            Knob::DropTolDelayRound => KnobValue::Real(dp.drop_tol_delay_round),
            Knob::DropTolOther => KnobValue::Real(dp.drop_tol_other),
            Knob::EnabledInDelayRound => KnobValue::Flag(dp.enabled_in_delay_round),
        }
    }

    /// Sets a knob; a value of the wrong kind is ignored and reported as `false`.
    pub fn set(&mut self, knob: Knob, value: KnobValue) -> bool {
        let mp = &mut self.match_phase;
        let ex = &mut self.match_phase_exact;
        let dp = &mut self.match_drop_phase;
        let slot = match (knob, value) {
            (Knob::TieBreak, KnobValue::Tie(t)) => {
                mp.tie_break = t;
                return true;
            }
            (Knob::EnabledInDelayRound, KnobValue::Flag(b)) => {
                dp.enabled_in_delay_round = b;
                return true;
            }
            (_, KnobValue::Real(v)) => (
                match knob {
                    Knob::AlphaDelay => &mut mp.alpha_delay,
                    Knob::AlphaFlowStart => &mut mp.alpha_flow_start,
                    Knob::AlphaFlowEnd => &mut mp.alpha_flow_end,
                    Knob::KTol => &mut mp.k_tol,
                    Knob::KDgain => &mut mp.k_dgain,
                    Knob::KSlack => &mut mp.k_slack,
                    Knob::KExact => &mut ex.k_exact,
                    Knob::SlackFraction => &mut ex.slack_fraction,
                    Knob::DropTolDelayRound => &mut dp.drop_tol_delay_round,
                    Knob::DropTolOther => &mut dp.drop_tol_other,
                    Knob::TieBreak | Knob::EnabledInDelayRound => return false,
                },
                v,
            ),
            _ => return false,
        };
        *slot.0 = slot.1;
        true
    }

    /// Copies one operator's knob group from `other`.
    pub fn with_group_from(&self, other: &HeuristicGenome, op: Operator) -> HeuristicGenome {
        let mut out = self.clone();
        match op {
            Operator::MatchPhase => out.match_phase = other.match_phase.clone(),
            Operator::MatchPhaseExact => out.match_phase_exact = other.match_phase_exact.clone(),
            Operator::MatchDropPhase => out.match_drop_phase = other.match_drop_phase.clone(),
        }
        out
    }

    /// Knobs whose values differ between the two genomes.
    pub fn diff(&self, other: &HeuristicGenome) -> Vec<Knob> {
        Knob::ALL.iter().copied().filter(|&k| self.get(k) != other.get(k)).collect()
    }

    pub fn validate(&self) -> Result<(), GenomeError> {
        for knob in Knob::ALL {
            if let (KnobKind::Real { lo, hi }, KnobValue::Real(v)) = (knob.kind(), self.get(knob)) {
                if !(v >= lo && v <= hi) {
                    return Err(GenomeError::OutOfRange {
                        path: knob.path(),
                        value: v,
                        bound: format!("[{lo}, {hi}]"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Parses and validates a JSON genome document. Missing knobs take defaults.
    pub fn from_json_str(text: &str) -> Result<HeuristicGenome, GenomeError> {
        let value: Value = serde_json::from_str(text).map_err(|e| GenomeError::Malformed(e.to_string()))?;
        HeuristicGenome::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<HeuristicGenome, GenomeError> {
        check_fields(value)?;
        let genome: HeuristicGenome =
            serde_json::from_value(value.clone()).map_err(|e| GenomeError::Malformed(e.to_string()))?;
        genome.validate()?;
        Ok(genome)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("genome serializes")
    }
}

fn check_fields(value: &Value) -> Result<(), GenomeError> {
    let top = value.as_object().ok_or_else(|| GenomeError::Malformed("expected an object".into()))?;
    for (group, body) in top {
        let op = Operator::ALL
            .iter()
            .copied()
            .find(|o| o.group_name() == group)
            .ok_or_else(|| GenomeError::UnknownField(group.clone()))?;
        let fields = body
            .as_object()
            .ok_or_else(|| GenomeError::Malformed(format!("{group} must be an object")))?;
        for name in fields.keys() {
            if !op.knobs().iter().any(|k| k.name() == name) {
                return Err(GenomeError::UnknownField(format!("{group}.{name}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        assert_eq!(HeuristicGenome::default().validate(), Ok(()));
    }

    #[test]
    fn negative_exact_gain_rejected() {
        let mut g = HeuristicGenome::default();
        g.match_phase_exact.k_exact = -0.1;
        match g.validate() {
            Err(GenomeError::OutOfRange { path, .. }) => assert_eq!(path, "match_phase_exact.k_exact"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nan_rejected() {
        let mut g = HeuristicGenome::default();
        g.match_phase.k_tol = f64::NAN;
        assert!(g.validate().is_err());
    }

    #[test]
    fn unknown_field_named() {
        let err = HeuristicGenome::from_json_str(r#"{"match_phase": {"k_tol": 0.3, "speed": 2}}"#).unwrap_err();
        assert_eq!(err, GenomeError::UnknownField("match_phase.speed".into()));
        let err = HeuristicGenome::from_json_str(r#"{"turbo": {}}"#).unwrap_err();
        assert_eq!(err, GenomeError::UnknownField("turbo".into()));
    }

    #[test]
    fn json_round_trip() {
        let mut g = HeuristicGenome::default();
        g.match_phase.tie_break = TieBreak::CostLeavesDelay;
        g.match_drop_phase.enabled_in_delay_round = false;
        let back = HeuristicGenome::from_json_str(&g.to_json_pretty()).unwrap();
        assert_eq!(back, g);
        let partial = HeuristicGenome::from_json_str(r#"{"match_phase_exact": {"k_exact": 0.1}}"#).unwrap();
        assert_eq!(partial.match_phase_exact.k_exact, 0.1);
        assert_eq!(partial.match_phase, MatchPhaseKnobs::default());
    }

    #[test]
    fn knob_groups_partition() {
        let mut seen = Vec::new();
        for op in Operator::ALL {
            for k in op.knobs() {
                assert_eq!(k.operator(), op);
                seen.push(*k);
            }
        }
        assert_eq!(seen, Knob::ALL.to_vec());
    }

    #[test]
    fn set_and_diff() {
        let base = HeuristicGenome::default();
        let mut g = base.clone();
        assert!(g.set(Knob::KSlack, KnobValue::Real(0.9)));
        assert!(!g.set(Knob::KSlack, KnobValue::Flag(true)));
        assert_eq!(g.diff(&base), vec![Knob::KSlack]);
        let merged = base.with_group_from(&g, Operator::MatchPhaseExact);
        assert_eq!(merged, base);
    }
}
