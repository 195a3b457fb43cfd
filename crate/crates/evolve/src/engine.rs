//! The plan, mutate, evaluate, accept loop.

use std::fs::File;
use std::io::{BufWriter, Write};

use log::info;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use techmap::{mini_library, read_genlib_file, CellLibrary, HeuristicGenome, Knob, KnobValue};

use crate::config::{EvolutionConfig, PlannerBackend};
use crate::evaluate::{load_suite, score_results, Benchmark, CircuitResult, Evaluator, SuiteScore};
use crate::mutate::{mutate, stream, PURPOSE_PLAN};
use crate::plan::{plan, EvolutionPlan};
use crate::record::{IterationRecord, ValidationStatus};
use crate::reward::{accept_reason, reward, AcceptReason};
use crate::signals::{compute_signals, AdaptiveSignals};
use crate::EvolveError;

/// What the planner sees at the start of an iteration.
pub struct PlanContext<'a> {
    pub iteration: usize,
    /// The most recent records, oldest first.
    pub window: &'a [IterationRecord],
    pub signals: &'a AdaptiveSignals,
    pub genome: &'a HeuristicGenome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSource {
    Rules,
    Remote,
    /// The remote backend failed and the rule-based plan was used.
    Fallback,
}

pub struct Proposal {
    pub plan: EvolutionPlan,
    pub source: PlanSource,
    /// A complete genome suggested alongside the plan; `Err` carries the
    /// validation diagnostics of a rejected document.
    pub genome: Option<Result<HeuristicGenome, String>>,
    pub note: Option<String>,
}

pub trait PlanEngine: Send {
    fn propose(&mut self, ctx: &PlanContext, rng: &mut ChaCha8Rng) -> Proposal;
}

pub struct RuleEngine;

impl PlanEngine for RuleEngine {
    fn propose(&mut self, ctx: &PlanContext, rng: &mut ChaCha8Rng) -> Proposal {
        Proposal { plan: plan(ctx.window, ctx.signals, ctx.genome, rng), source: PlanSource::Rules, genome: None, note: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateOrigin {
    Mutation,
    Proposal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateArtifact {
    pub step: usize,
    pub index: usize,
    pub origin: CandidateOrigin,
    /// Knobs that differ from the iteration's starting genome.
    pub changes: Vec<(Knob, KnobValue)>,
    pub status: ValidationStatus,
    pub s_area: f64,
    pub s_delay: f64,
    pub s_overall: f64,
    pub e: f64,
    pub reward: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
    pub circuits: Vec<CircuitResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationArtifact {
    pub iteration: usize,
    pub signals: AdaptiveSignals,
    pub plan: EvolutionPlan,
    pub plan_source: PlanSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_note: Option<String>,
    pub candidates: Vec<CandidateArtifact>,
    /// (step, index) of the candidate carried to the acceptance test.
    pub chosen: (usize, usize),
    pub record: IterationRecord,
    pub accept_reason: Option<AcceptReason>,
    /// Best accepted delay score before this iteration; `None` while unset.
    pub s_delay_best_before: Option<f64>,
    pub genome_before: HeuristicGenome,
    pub genome_after: HeuristicGenome,
    pub best_s_overall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub seed: u64,
    pub baseline_genome: HeuristicGenome,
    pub baseline: Vec<CircuitResult>,
    pub iterations: Vec<IterationArtifact>,
    pub stopped_early: bool,
    pub best_genome: HeuristicGenome,
    pub best_score: SuiteScore,
    /// Iteration whose accepted genome is the best; `None` for the baseline.
    pub best_iteration: Option<usize>,
}

impl EvolutionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Accepted iterations, as (iteration, reason).
    pub fn acceptance_trace(&self) -> Vec<(usize, Option<AcceptReason>)> {
        self.iterations.iter().map(|it| (it.iteration, it.accept_reason)).collect()
    }
}

/// Checks every iteration of a report against the acceptance rule and the
/// knob-group confinement. Returns one message per violation.
pub fn audit(report: &EvolutionReport, cfg: &EvolutionConfig) -> Vec<String> {
    let mut problems = Vec::new();
    let mut prev = &report.baseline_genome;
    for it in &report.iterations {
        let r = &it.record;
        let best = it.s_delay_best_before.unwrap_or(f64::NEG_INFINITY);
        let rule = r.reward >= cfg.tau || (best > 0.0 && r.s_delay >= cfg.gamma * best);
        if r.accepted && !rule {
            problems.push(format!("iteration {}: accepted with R = {} and S_delay = {}", it.iteration, r.reward, r.s_delay));
        }
        if r.accepted != it.accept_reason.is_some() {
            problems.push(format!("iteration {}: accept flag disagrees with reason", it.iteration));
        }
        if &it.genome_before != prev {
            problems.push(format!("iteration {}: starting genome differs from previous result", it.iteration));
        }
        let changed = it.genome_after.diff(&it.genome_before);
        if !r.accepted && !changed.is_empty() {
            problems.push(format!("iteration {}: genome changed without acceptance", it.iteration));
        }
        if let Some(k) = changed.iter().find(|k| k.operator() != it.plan.operator) {
            problems.push(format!("iteration {}: {} changed outside {}", it.iteration, k.path(), it.plan.operator));
        }
        if it.iteration > 1 {
            let before = report.iterations[it.iteration - 2].s_delay_best_before;
            if before.unwrap_or(f64::NEG_INFINITY) > best {
                problems.push(format!("iteration {}: best delay score decreased", it.iteration));
            }
        }
        prev = &it.genome_after;
    }
    problems
}

struct Evaluated {
    genome: HeuristicGenome,
    artifact: CandidateArtifact,
}

fn alignment(a: &CandidateArtifact, plan: &EvolutionPlan) -> f64 {
    let (da, dd) = plan.modification.expected_impact;
    a.s_area * da + a.s_delay * dd
}

/// True if `a` ranks above `b`: higher reward, then closer agreement with
/// the expected impact; earlier candidates win full ties.
fn ranks_above(a: &CandidateArtifact, b: &CandidateArtifact, plan: &EvolutionPlan) -> bool {
    if a.reward != b.reward {
        return a.reward > b.reward;
    }
    alignment(a, plan) > alignment(b, plan)
}

/// Runs the loop on a loaded suite.
pub fn run_evolution(
    cfg: &EvolutionConfig,
    suite: &[Benchmark],
    lib: &CellLibrary,
    baseline_genome: HeuristicGenome,
    engine: &mut dyn PlanEngine,
) -> Result<EvolutionReport, EvolveError> {
    cfg.validate()?;
    baseline_genome.validate().map_err(|e| EvolveError::Config { field: "baseline_genome".into(), msg: e.to_string() })?;
    if suite.is_empty() {
        return Err(EvolveError::Config { field: "suite".into(), msg: "no benchmarks found".into() });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| EvolveError::Io(e.to_string()))?;
    pool.install(|| Loop::new(cfg, suite, lib, baseline_genome).and_then(|l| l.run(engine)))
}

/// Loads everything named in the config and runs the loop.
pub fn evolve(cfg: &EvolutionConfig) -> Result<EvolutionReport, EvolveError> {
    cfg.validate()?;
    let suite = load_suite(&cfg.suite)?;
    let lib = match &cfg.library {
        Some(p) => read_genlib_file(p).map_err(|e| EvolveError::Suite(format!("{}: {e}", p.display())))?,
        None => mini_library(),
    };
    let genome = match &cfg.baseline_genome {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| EvolveError::Io(format!("{}: {e}", p.display())))?;
            HeuristicGenome::from_json_str(&text)
                .map_err(|e| EvolveError::Config { field: "baseline_genome".into(), msg: e.to_string() })?
        }
        None => HeuristicGenome::default(),
    };
    let mut engine: Box<dyn PlanEngine> = match cfg.planner.backend {
        PlannerBackend::Rules => Box::new(RuleEngine),
        PlannerBackend::Remote => crate::remote::engine(&cfg.planner)?,
    };
    run_evolution(cfg, &suite, &lib, genome, engine.as_mut())
}

struct Loop<'a> {
    cfg: &'a EvolutionConfig,
    evaluator: Evaluator<'a>,
    baseline: Vec<CircuitResult>,
    baseline_genome: HeuristicGenome,
    log: Option<BufWriter<File>>,
}

impl<'a> Loop<'a> {
    fn new(
        cfg: &'a EvolutionConfig,
        suite: &'a [Benchmark],
        lib: &'a CellLibrary,
        baseline_genome: HeuristicGenome,
    ) -> Result<Loop<'a>, EvolveError> {
        let evaluator = Evaluator::new(
            suite,
            lib,
            cfg.mapping.params(),
            cfg.equivalence.limits(),
            cfg.equivalence.external.clone(),
        );
        let baseline = evaluator.run(&baseline_genome);
        let failed: Vec<String> = baseline
            .iter()
            .filter(|r| !r.is_valid())
            .map(|r| format!("{} ({})", r.name, r.error.clone().unwrap_or_else(|| format!("{:?}", r.verdict))))
            .collect();
        if !failed.is_empty() {
            return Err(EvolveError::Baseline(failed.join(", ")));
        }
        let log = match &cfg.artifact_log {
            Some(p) => Some(BufWriter::new(
                File::create(p).map_err(|e| EvolveError::Io(format!("{}: {e}", p.display())))?,
            )),
            None => None,
        };
        Ok(Loop { cfg, evaluator, baseline, baseline_genome, log })
    }

    fn evaluate(&self, start: &HeuristicGenome, candidate: Result<HeuristicGenome, String>, step: usize, index: usize, origin: CandidateOrigin) -> Evaluated {
        let cfg = self.cfg;
        let candidate = candidate.and_then(|g| g.validate().map(|_| g).map_err(|e| e.to_string()));
        let genome = match candidate {
            Ok(g) => g,
            Err(msg) => {
                return Evaluated {
                    genome: start.clone(),
                    artifact: CandidateArtifact {
                        step,
                        index,
                        origin,
                        changes: Vec::new(),
                        status: ValidationStatus::CompileFail,
                        s_area: 0.0,
                        s_delay: 0.0,
                        s_overall: 0.0,
                        e: 0.0,
                        reward: reward(0.0, 0.0, ValidationStatus::CompileFail, cfg),
                        diagnostics: Some(msg),
                        circuits: Vec::new(),
                    },
                };
            }
        };
        let circuits = self.evaluator.run(&genome);
        let score = score_results(&self.baseline, &circuits, cfg.alpha);
        let status = if score.e > 0.0 { ValidationStatus::EquivFail } else { ValidationStatus::Ok };
        let changes = genome.diff(start).into_iter().map(|k| (k, genome.get(k))).collect();
        let artifact = CandidateArtifact {
            step,
            index,
            origin,
            changes,
            status,
            s_area: score.s_area,
            s_delay: score.s_delay,
            s_overall: score.s_overall,
            e: score.e,
            reward: reward(score.s_overall, score.e, status, cfg),
            diagnostics: None,
            circuits,
        };
        Evaluated { genome, artifact }
    }

    fn run(mut self, engine: &mut dyn PlanEngine) -> Result<EvolutionReport, EvolveError> {
        let cfg = self.cfg;
        let w = cfg.window;
        let mut current = self.baseline_genome.clone();
        let mut best_genome = current.clone();
        let mut best_score = score_results(&self.baseline, &self.baseline, cfg.alpha);
        let mut best_iteration = None;
        let mut s_delay_best = f64::NEG_INFINITY;
        let mut history: Vec<IterationRecord> = Vec::new();
        let mut iterations = Vec::new();
        let mut streak = 0;
        let mut stopped_early = false;

        for it in 1..=cfg.iterations {
            let start = history.len().saturating_sub(w);
            let window = &history[start..];
            let signals = compute_signals(window, start.checked_sub(1).map(|i| &history[i]), w);
            let ctx = PlanContext { iteration: it, window, signals: &signals, genome: &current };
            let proposal = engine.propose(&ctx, &mut stream(cfg.seed, PURPOSE_PLAN, it, 0, 0));
            let plan = proposal.plan;

            let mut candidates = Vec::new();
            let mut carried: Option<Evaluated> = None;
            let mut parent = current.clone();
            let mut proposed = proposal.genome;
            for step in 0..cfg.inner_steps {
                let mut pending: Vec<(Result<HeuristicGenome, String>, CandidateOrigin)> =
                    mutate(&plan, &parent, cfg.seed, it, step, cfg.population)
                        .into_iter()
                        .map(|g| (Ok(g), CandidateOrigin::Mutation))
                        .collect();
                if let Some(g) = proposed.take() {
                    let g = g.and_then(|g| match g.diff(&current).iter().find(|k| k.operator() != plan.operator) {
                        Some(k) => Err(format!("{} lies outside the {} knob group", k.path(), plan.operator)),
                        None => Ok(g),
                    });
                    pending.push((g, CandidateOrigin::Proposal));
                }
                let evaluated: Vec<Evaluated> = pending
                    .into_par_iter()
                    .enumerate()
                    .map(|(i, (g, origin))| self.evaluate(&current, g, step, i, origin))
                    .collect();
                let mut step_best: Option<usize> = None;
                for (i, ev) in evaluated.iter().enumerate() {
                    if step_best.is_none_or(|b| ranks_above(&ev.artifact, &evaluated[b].artifact, &plan)) {
                        step_best = Some(i);
                    }
                }
                let step_best = step_best.expect("population is not empty");
                candidates.extend(evaluated.iter().map(|e| e.artifact.clone()));
                let winner = evaluated.into_iter().nth(step_best).unwrap();
                if carried.as_ref().is_none_or(|c| ranks_above(&winner.artifact, &c.artifact, &plan)) {
                    parent = winner.genome.clone();
                    carried = Some(winner);
                }
            }
            let chosen = carried.expect("at least one inner step");
            let a = &chosen.artifact;
            let s_delay_best_before = s_delay_best;
            let reason = if a.status == ValidationStatus::CompileFail {
                None
            } else {
                accept_reason(a.reward, a.s_delay, s_delay_best, cfg)
            };
            let genome_before = current.clone();
            let mut improved = false;
            if reason.is_some() {
                current = current.with_group_from(&chosen.genome, plan.operator);
                s_delay_best = s_delay_best.max(a.s_delay);
                if a.status == ValidationStatus::Ok && a.s_overall > best_score.s_overall {
                    best_genome = current.clone();
                    best_score = score_results(&self.baseline, &a.circuits, cfg.alpha);
                    best_iteration = Some(it);
                    improved = true;
                }
            }
            let record = IterationRecord {
                iteration: it,
                s_area: a.s_area,
                s_delay: a.s_delay,
                s_overall: a.s_overall,
                e: a.e,
                operator: plan.operator,
                strategy: plan.strategy,
                accepted: reason.is_some(),
                reward: a.reward,
            };
            info!(
                "iteration {it}: {} {:?} R={:.4} S={:.4} e={:.3} {}",
                plan.operator,
                plan.strategy,
                a.reward,
                a.s_overall,
                a.e,
                if record.accepted { "accepted" } else { "rejected" }
            );
            history.push(record.clone());
            let artifact = IterationArtifact {
                iteration: it,
                signals,
                plan,
                plan_source: proposal.source,
                plan_note: proposal.note,
                chosen: (a.step, a.index),
                candidates,
                record,
                accept_reason: reason,
                s_delay_best_before: s_delay_best_before.is_finite().then_some(s_delay_best_before),
                genome_before,
                genome_after: current.clone(),
                best_s_overall: best_score.s_overall,
            };
            if let Some(log) = &mut self.log {
                let line = serde_json::to_string(&artifact).expect("artifact serializes");
                writeln!(log, "{line}").map_err(|e| EvolveError::Io(e.to_string()))?;
            }
            iterations.push(artifact);

            streak = if improved { 0 } else { streak + 1 };
            if cfg.early_stop > 0 && streak >= cfg.early_stop && it < cfg.iterations {
                info!("stopping after {streak} iterations without improvement");
                stopped_early = true;
                break;
            }
        }
        if let Some(log) = &mut self.log {
            log.flush().map_err(|e| EvolveError::Io(e.to_string()))?;
        }
        Ok(EvolutionReport {
            seed: cfg.seed,
            baseline_genome: self.baseline_genome,
            baseline: self.baseline,
            iterations,
            stopped_early,
            best_genome,
            best_score,
            best_iteration,
        })
    }
}
