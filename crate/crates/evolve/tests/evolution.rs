mod common;

use common::repo_path;
use techmap::{mini_library, HeuristicGenome, Operator, Verdict};
use techmap_evolve::engine::{CandidateOrigin, PlanSource};
use techmap_evolve::remote::{parse_reply, ScriptedEngine};
use techmap_evolve::{
    audit, evolve, load_suite, run_evolution, score_results, CircuitResult, EvolutionConfig, EvolveError, RuleEngine,
    ValidationStatus,
};

fn circuit(name: &str, area: f64, delay: f64) -> CircuitResult {
    CircuitResult { name: name.into(), area: Some(area), delay: Some(delay), verdict: Some(Verdict::Equivalent), error: None }
}

fn toy_config(iterations: usize) -> EvolutionConfig {
    EvolutionConfig { iterations, seed: 11, suite: vec![repo_path("benchmarks/toy")], ..Default::default() }
}

#[test]
fn self_comparison_scores_zero() {
    let base = vec![circuit("a", 10.0, 4.0), circuit("b", 6.0, 3.0)];
    let s = score_results(&base, &base, 0.5);
    assert_eq!((s.s_area, s.s_delay, s.s_overall, s.e), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn halved_area_scores_a_quarter() {
    let base = vec![circuit("a", 10.0, 4.0), circuit("b", 6.0, 3.0)];
    let cand = vec![circuit("a", 5.0, 4.0), circuit("b", 3.0, 3.0)];
    let s = score_results(&base, &cand, 0.5);
    assert!((s.s_area - 0.5).abs() < 1e-12);
    assert!((s.s_overall - 0.25).abs() < 1e-12);
}

#[test]
fn doubled_delay_scores_minus_one() {
    let base = vec![circuit("a", 10.0, 4.0)];
    let cand = vec![circuit("a", 10.0, 8.0)];
    let s = score_results(&base, &cand, 0.5);
    assert!((s.s_delay + 1.0).abs() < 1e-12);
    assert!((s.s_overall + 0.5).abs() < 1e-12);
}

#[test]
fn missing_or_failing_circuits_count_toward_e() {
    let base = vec![circuit("a", 10.0, 4.0), circuit("b", 6.0, 3.0), circuit("c", 2.0, 1.0), circuit("d", 2.0, 1.0)];
    let mut bad = circuit("b", 1.0, 1.0);
    bad.verdict = Some(Verdict::NotEquivalent);
    let cand = vec![circuit("a", 5.0, 4.0), bad, circuit("d", 2.0, 1.0)];
    let s = score_results(&base, &cand, 0.5);
    assert!((s.e - 0.5).abs() < 1e-12);
    assert!((s.s_area - 0.25).abs() < 1e-12, "only valid circuits enter the mean");
}

#[test]
fn zero_iterations_report_the_baseline() {
    let cfg = toy_config(0);
    let report = evolve(&cfg).unwrap();
    assert!(report.iterations.is_empty());
    assert_eq!(report.best_genome, HeuristicGenome::default());
    assert_eq!(report.best_iteration, None);
    assert_eq!(report.baseline.len(), 5);
    assert_eq!(report.best_score.s_overall, 0.0);
}

#[test]
fn seeded_runs_replay_identically_and_pass_the_audit() {
    let cfg = EvolutionConfig { early_stop: 0, ..toy_config(10) };
    let a = evolve(&cfg).unwrap();
    let b = evolve(&EvolutionConfig { jobs: 1, ..cfg.clone() }).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.iterations.len(), 10);
    assert!(audit(&a, &cfg).is_empty(), "{:?}", audit(&a, &cfg));
    let mut best = f64::NEG_INFINITY;
    for it in &a.iterations {
        assert!(it.signals.usage.iter().sum::<usize>() <= cfg.window);
        let before = it.s_delay_best_before.unwrap_or(f64::NEG_INFINITY);
        assert!(before >= best);
        best = before;
        assert_eq!(it.candidates.len(), cfg.inner_steps * cfg.population);
        let r = &it.record;
        assert!((r.s_overall - (cfg.alpha * r.s_area + (1.0 - cfg.alpha) * r.s_delay)).abs() < 1e-12);
    }
    let other = evolve(&EvolutionConfig { seed: 12, ..cfg.clone() }).unwrap();
    assert_ne!(a.to_json(), other.to_json());
}

#[test]
fn artifact_log_has_one_line_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    let cfg = EvolutionConfig { artifact_log: Some(log.clone()), early_stop: 0, ..toy_config(4) };
    let report = evolve(&cfg).unwrap();
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for (line, it) in lines.iter().zip(&report.iterations) {
        let parsed: techmap_evolve::IterationArtifact = serde_json::from_str(line).unwrap();
        assert!(&parsed == it, "iteration {} does not reload exactly", it.iteration);
    }
}

#[test]
fn invalid_config_is_rejected() {
    let err = EvolutionConfig::from_toml_str("tau = 0.6").unwrap_err();
    assert!(matches!(err, EvolveError::Config { ref field, .. } if field == "tau"));
    assert!(EvolutionConfig::from_toml_str("r_compile = -0.45").is_err());
    assert!(EvolutionConfig::from_toml_str("population = 0").is_err());
    assert!(EvolutionConfig::from_toml_str("unknown_key = 1").is_err());
    let ok = EvolutionConfig::from_toml_str("iterations = 3\n[mapping]\ncut_size = 3").unwrap();
    assert_eq!(ok.mapping.cut_size, 3);
    assert_eq!(ok.tau, -0.1);
}

#[test]
fn failing_baseline_aborts_before_iterating() {
    let mut cfg = toy_config(3);
    cfg.equivalence.exhaustive_limit = 0;
    cfg.equivalence.external = Some("exit 1".into());
    assert!(matches!(evolve(&cfg), Err(EvolveError::Baseline(_))));
}

#[test]
fn rejected_planner_reply_falls_back_to_rules() {
    let cfg = EvolutionConfig { early_stop: 0, ..toy_config(2) };
    let suite = load_suite(&cfg.suite).unwrap();
    let lib = mini_library();
    let mut engine = ScriptedEngine { reply: |_: &techmap_evolve::engine::PlanContext| Ok("not json".to_string()) };
    let report = run_evolution(&cfg, &suite, &lib, HeuristicGenome::default(), &mut engine).unwrap();
    assert!(report.iterations.iter().all(|it| it.plan_source == PlanSource::Fallback && it.plan_note.is_some()));
    let rules = run_evolution(&cfg, &suite, &lib, HeuristicGenome::default(), &mut RuleEngine).unwrap();
    let strip = |r: &techmap_evolve::EvolutionReport| r.iterations.iter().map(|i| i.record.clone()).collect::<Vec<_>>();
    assert_eq!(strip(&report), strip(&rules));
}

#[test]
fn proposed_genome_with_unknown_field_fails_validation() {
    let reply = r#"{"operator": "MatchPhase", "strategy": "area-opt", "target_knobs": ["k_tol"],
        "guidance": "", "expected_impact": [0.01, 0.0],
        "genome": {"match_phase": {"k_tol": 0.3, "k_bogus": 1.0}}}"#;
    let (plan, genome) = parse_reply(reply).unwrap();
    assert_eq!(plan.operator, Operator::MatchPhase);
    let err = genome.unwrap().unwrap_err();
    assert!(err.contains("k_bogus"), "{err}");

    let cfg = EvolutionConfig { early_stop: 0, ..toy_config(1) };
    let suite = load_suite(&cfg.suite).unwrap();
    let lib = mini_library();
    let mut engine = ScriptedEngine { reply: move |_: &techmap_evolve::engine::PlanContext| Ok(reply.to_string()) };
    let report = run_evolution(&cfg, &suite, &lib, HeuristicGenome::default(), &mut engine).unwrap();
    let it = &report.iterations[0];
    assert_eq!(it.plan_source, PlanSource::Remote);
    let proposal = it.candidates.iter().find(|c| c.origin == CandidateOrigin::Proposal).unwrap();
    assert_eq!(proposal.status, ValidationStatus::CompileFail);
    assert_eq!(proposal.reward, cfg.r_compile);
    assert!(proposal.diagnostics.as_deref().unwrap().contains("k_bogus"));
}

#[test]
fn reply_with_knob_outside_group_is_rejected() {
    let reply = r#"{"operator": "MatchPhaseExact", "strategy": "balanced", "target_knobs": ["k_tol"], "expected_impact": [0, 0]}"#;
    assert!(parse_reply(reply).is_err());
    let reply = r#"{"operator": "MatchPhaseExact", "strategy": "balanced", "target_knobs": ["k_nope"], "expected_impact": [0, 0]}"#;
    assert!(parse_reply(reply).unwrap_err().contains("k_nope"));
    let fenced = "```json\n{\"operator\": \"MatchDropPhase\", \"strategy\": \"delay-opt\", \"target_knobs\": [\"drop_tol_other\"], \"expected_impact\": [0, 0]}\n```";
    assert!(parse_reply(fenced).is_ok());
}
