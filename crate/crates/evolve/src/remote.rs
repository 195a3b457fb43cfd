//! Planner backend that asks a chat-completion service for the plan.
//!
//! The reply must be one JSON document:
//!
//! ```json
//! {
//!   "operator": "MatchPhase",
//!   "strategy": "area-opt",
//!   "target_knobs": ["k_tol", "k_slack"],
//!   "guidance": "free text",
//!   "expected_impact": [0.01, 0.0],
//!   "constraints": [{"knob": "k_tol", "lo": 0.0, "hi": 0.5}],
//!   "genome": { "match_phase": { "k_tol": 0.3 } }
//! }
//! ```
//!
//! `constraints` and `genome` are optional. A malformed plan falls back to
//! the rule-based planner; a malformed genome becomes a candidate that fails
//! validation.

use log::warn;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use techmap::{HeuristicGenome, Knob, Operator};

use crate::config::PlannerSection;
use crate::engine::{PlanContext, PlanEngine, PlanSource, Proposal, RuleEngine};
use crate::plan::{EvolutionPlan, KnobBound, Modification};
use crate::record::Strategy;
use crate::EvolveError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Reply {
    operator: Operator,
    strategy: Strategy,
    target_knobs: Vec<Knob>,
    #[serde(default)]
    guidance: String,
    expected_impact: (f64, f64),
    #[serde(default)]
    constraints: Option<Vec<KnobBound>>,
    #[serde(default)]
    genome: Option<Value>,
}

/// Parses a reply into a validated plan and an optional genome. Code fences
/// around the document are tolerated.
pub fn parse_reply(text: &str) -> Result<(EvolutionPlan, Option<Result<HeuristicGenome, String>>), String> {
    let trimmed = text.trim();
    let body = trimmed
        .strip_prefix("```json")
        .or_else(|| trimmed.strip_prefix("```"))
        .and_then(|s| s.strip_suffix("```"))
        .unwrap_or(trimmed);
    let reply: Reply = serde_json::from_str(body).map_err(|e| format!("malformed plan: {e}"))?;
    let constraints = reply.constraints.unwrap_or_else(|| {
        reply
            .target_knobs
            .iter()
            .filter_map(|&knob| match knob.kind() {
                techmap::KnobKind::Real { lo, hi } => Some(KnobBound { knob, lo, hi }),
                _ => None,
            })
            .collect()
    });
    let plan = EvolutionPlan {
        operator: reply.operator,
        strategy: reply.strategy,
        modification: Modification {
            target_knobs: reply.target_knobs,
            guidance: reply.guidance,
            expected_impact: reply.expected_impact,
            constraints,
        },
    };
    plan.validate().map_err(|e| e.to_string())?;
    let genome = reply.genome.map(|v| HeuristicGenome::from_json_value(&v).map_err(|e| e.to_string()));
    Ok((plan, genome))
}

/// The request prompt: history, signals, current genome and the reply format.
pub fn build_prompt(ctx: &PlanContext) -> String {
    let knobs: Vec<Value> = techmap::Knob::ALL
        .iter()
        .map(|k| json!({ "knob": k.name(), "group": k.operator().group_name(), "value": ctx.genome.get(*k) }))
        .collect();
    let doc = json!({
        "iteration": ctx.iteration,
        "history": ctx.window,
        "signals": ctx.signals,
        "genome": knobs,
        "operators": Operator::ALL,
        "strategies": Strategy::ALL,
    });
    format!(
        "You tune the heuristics of a technology mapper. Choose one operator, a strategy and the knobs of that \
         operator's group to adjust. Numeric knobs lie in [0, 1].\n\nState:\n{}\n\nReply with a single JSON object \
         with fields operator, strategy, target_knobs, guidance, expected_impact ([area, delay]) and optionally \
         constraints ([{{knob, lo, hi}}]) and genome (a partial genome document).",
        serde_json::to_string_pretty(&doc).expect("prompt serializes")
    )
}

#[cfg(feature = "remote")]
mod http {
    use std::time::Duration;

    use super::*;

    pub struct RemoteEngine {
        endpoint: String,
        model: String,
        key: Option<String>,
        agent: ureq::Agent,
    }

    impl RemoteEngine {
        pub fn new(cfg: &PlannerSection) -> Result<RemoteEngine, EvolveError> {
            let endpoint = cfg.endpoint.clone().ok_or_else(|| EvolveError::Config {
                field: "planner.endpoint".into(),
                msg: "required by the remote backend".into(),
            })?;
            let agent = ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
                .build()
                .into();
            Ok(RemoteEngine {
                endpoint,
                model: cfg.model.clone().unwrap_or_default(),
                key: std::env::var(&cfg.api_key_env).ok(),
                agent,
            })
        }

        fn ask(&self, prompt: &str) -> Result<String, String> {
            let body = json!({
                "model": self.model,
                "messages": [{ "role": "user", "content": prompt }],
                "temperature": 0,
            });
            let mut req = self.agent.post(&self.endpoint);
            if let Some(k) = &self.key {
                req = req.header("Authorization", &format!("Bearer {k}"));
            }
            let mut resp = req.send_json(&body).map_err(|e| e.to_string())?;
            let v: Value = resp.body_mut().read_json().map_err(|e| e.to_string())?;
            v["choices"][0]["message"]["content"]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| "response has no message content".to_string())
        }
    }

    impl PlanEngine for RemoteEngine {
        fn propose(&mut self, ctx: &PlanContext, rng: &mut ChaCha8Rng) -> Proposal {
            match self.ask(&build_prompt(ctx)).and_then(|t| parse_reply(&t)) {
                Ok((plan, genome)) => Proposal { plan, source: PlanSource::Remote, genome, note: None },
                Err(msg) => {
                    warn!("remote planner failed, using rules: {msg}");
                    let mut p = RuleEngine.propose(ctx, rng);
                    p.source = PlanSource::Fallback;
                    p.note = Some(msg);
                    p
                }
            }
        }
    }
}

#[cfg(feature = "remote")]
pub fn engine(cfg: &PlannerSection) -> Result<Box<dyn PlanEngine>, EvolveError> {
    Ok(Box::new(http::RemoteEngine::new(cfg)?))
}

#[cfg(not(feature = "remote"))]
pub fn engine(_cfg: &PlannerSection) -> Result<Box<dyn PlanEngine>, EvolveError> {
    Err(EvolveError::Config {
        field: "planner.backend".into(),
        msg: "built without the `remote` feature".into(),
    })
}

/// Wraps any reply source with the fallback behavior of the remote backend.
pub struct ScriptedEngine<F: FnMut(&PlanContext) -> Result<String, String> + Send> {
    pub reply: F,
}

impl<F: FnMut(&PlanContext) -> Result<String, String> + Send> PlanEngine for ScriptedEngine<F> {
    fn propose(&mut self, ctx: &PlanContext, rng: &mut ChaCha8Rng) -> Proposal {
        match (self.reply)(ctx).and_then(|t| parse_reply(&t)) {
            Ok((plan, genome)) => Proposal { plan, source: PlanSource::Remote, genome, note: None },
            Err(msg) => {
                warn!("planner reply rejected, using rules: {msg}");
                let mut p = RuleEngine.propose(ctx, rng);
                p.source = PlanSource::Fallback;
                p.note = Some(msg);
                p
            }
        }
    }
}
