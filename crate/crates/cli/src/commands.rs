use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use log::{error, info, warn};
use rayon::prelude::*;
use serde::Serialize;
use techmap::equivalence::{check_external, EquivalenceError};
use techmap::{
    check_equivalence, mini_library, parse_aiger, parse_blif, parse_genlib, run_mapping, write_aag, write_blif, Aig,
    CellLibrary, EquivalenceLimits, EquivalenceResult, HeuristicGenome, MappedNetlist, MappingParams, RoundStats, Verdict,
};
use techmap_evolve::evaluate::discover;
use techmap_evolve::{audit, evolve as run_evolve, load_suite, score_results, EvolutionConfig, Evaluator};

use crate::exit::{self, Failure};
use crate::report::{render_run, render_score, ReportRow, RunReport};
use crate::{CecCmd, CheckArgs, EvolveCmd, MapCmd, MappingArgs, ScoreCmd, StatsCmd, SuiteCmd};

type Outcome = Result<i32, Failure>;

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::io(path.display(), e))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path.display(), e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::io(path.display(), e))
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn load_aig(path: &Path) -> Result<Aig, Failure> {
    parse_aiger(&read_bytes(path)?).map_err(|e| Failure::parse(path.display(), e))
}

fn load_library(path: Option<&Path>) -> Result<CellLibrary, Failure> {
    match path {
        Some(p) => parse_genlib(&read_text(p)?).map_err(|e| Failure::parse(p.display(), e)),
        None => Ok(mini_library()),
    }
}

fn load_genome(path: Option<&Path>) -> Result<HeuristicGenome, Failure> {
    match path {
        Some(p) => HeuristicGenome::from_json_str(&read_text(p)?).map_err(|e| Failure::parse(p.display(), e)),
        None => Ok(HeuristicGenome::default()),
    }
}

fn load_report(path: &Path) -> Result<RunReport, Failure> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Failure::parse(path.display(), e))
}

fn mapping_params(args: &MappingArgs) -> Result<MappingParams, Failure> {
    let params = MappingParams {
        cut_size: args.cut_size,
        cut_limit: args.cut_limit,
        delay_rounds: args.rounds.delay,
        flow_rounds: args.rounds.flow,
        exact_rounds: args.rounds.exact,
        alpha_schedule: args.alpha_schedule.clone(),
        genome: load_genome(args.genome.as_deref())?,
        target_delay: args.target_delay,
    };
    params.validate().map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
    Ok(params)
}

fn limits(args: &CheckArgs) -> EquivalenceLimits {
    EquivalenceLimits { exhaustive_limit: args.exhaustive_limit, random_vectors: args.vectors, seed: args.seed }
}

fn check_failure(e: EquivalenceError) -> Failure {
    match e {
        EquivalenceError::PortMismatch(_) => Failure::new(exit::PORT_MISMATCH, e.to_string()),
        EquivalenceError::Netlist(_) => Failure::new(exit::PARSE, e.to_string()),
        EquivalenceError::External(_) => Failure::new(exit::IO, e.to_string()),
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Equivalent => exit::OK,
        Verdict::NotEquivalent => exit::NOT_EQUIVALENT,
        Verdict::Inconclusive => exit::INCONCLUSIVE,
    }
}

/// The counterexample as `name=value` pairs, if there is one.
fn describe_counterexample(aig: &Aig, result: &EquivalenceResult) -> Option<String> {
    let cex = result.counterexample.as_ref()?;
    let mut s = format!("output {} differs under", aig.output_name(cex.output));
    for (i, &v) in cex.inputs.iter().enumerate() {
        write!(s, " {}={}", aig.input_name(i), v as u8).unwrap();
    }
    Some(s)
}

fn row_for(name: &str, aig: &Aig) -> ReportRow {
    ReportRow {
        name: name.to_string(),
        aig_size: aig.num_ands(),
        aig_depth: aig.depth(),
        area: None,
        delay: None,
        runtime_seconds: None,
        verdict: None,
        error: None,
    }
}

#[derive(Serialize)]
struct MapReport<'a> {
    circuit: ReportRow,
    instances: usize,
    inverters: usize,
    trace: &'a [RoundStats],
    #[serde(skip_serializing_if = "Option::is_none")]
    equivalence: Option<EquivalenceResult>,
}

fn check_mapped(aig: &Aig, netlist: &MappedNetlist, lib: &CellLibrary, args: &CheckArgs) -> Result<EquivalenceResult, Failure> {
    if let Some(cmd) = &args.external {
        if aig.num_inputs() > args.exhaustive_limit {
            let dir = tempfile::tempdir().map_err(|e| Failure::io("temporary directory", e))?;
            let aig_path = dir.path().join("source.aag");
            let blif_path = dir.path().join("mapped.blif");
            write_file(&aig_path, write_aag(aig))?;
            write_file(&blif_path, write_blif(netlist, lib))?;
            return check_external(cmd, &aig_path, &blif_path).map_err(check_failure);
        }
    }
    check_equivalence(aig, netlist, lib, &limits(args)).map_err(check_failure)
}

pub fn map(c: MapCmd) -> Outcome {
    let aig = load_aig(&c.aiger)?;
    let lib = load_library(c.mapping.genlib.as_deref())?;
    let params = mapping_params(&c.mapping)?;
    let mapped =
        run_mapping(&aig, &lib, &params).map_err(|e| Failure::new(exit::MAPPING, format!("{}: {e}", c.aiger.display())))?;
    let netlist = &mapped.netlist;
    let blif = write_blif(netlist, &lib);

    let equivalence = if c.no_check { None } else { Some(check_mapped(&aig, netlist, &lib, &c.check)?) };
    let name = c.aiger.file_stem().and_then(|s| s.to_str()).unwrap_or("circuit");
    let mut row = row_for(name, &aig);
    row.area = Some(netlist.area);
    row.delay = Some(netlist.delay);
    row.verdict = equivalence.as_ref().map(|r| r.verdict);
    let report = MapReport {
        circuit: row,
        instances: netlist.instances.len(),
        inverters: netlist.num_inverters(&lib),
        trace: &mapped.trace,
        equivalence,
    };

    if let Some(out) = &c.output {
        write_file(out, &blif)?;
    }
    if let Some(path) = &c.report {
        write_file(path, to_json(&report) + "\n")?;
    }
    if c.json {
        println!("{}", to_json(&report));
    } else if c.output.is_none() {
        print!("{blif}");
    } else {
        println!(
            "{}: area {:.2} delay {:.2} instances {} inverters {}",
            name, netlist.area, netlist.delay, report.instances, report.inverters
        );
    }
    match &report.equivalence {
        Some(r) if r.verdict == Verdict::NotEquivalent => {
            error!("mapped netlist is not equivalent: {}", describe_counterexample(&aig, r).unwrap_or_default());
            Ok(exit::NOT_EQUIVALENT)
        }
        Some(r) if r.verdict == Verdict::Inconclusive => {
            warn!("equivalence inconclusive after {} random vectors", r.vectors_tested);
            Ok(exit::OK)
        }
        _ => Ok(exit::OK),
    }
}

#[derive(Serialize)]
struct CecReport<'a> {
    #[serde(flatten)]
    result: &'a EquivalenceResult,
    /// Counterexample in readable form.
    #[serde(skip_serializing_if = "Option::is_none")]
    explanation: Option<String>,
}

pub fn cec(c: CecCmd) -> Outcome {
    let aig = load_aig(&c.aiger)?;
    let lib = load_library(c.genlib.as_deref())?;
    let netlist = parse_blif(&read_text(&c.blif)?, &lib).map_err(|e| Failure::parse(c.blif.display(), e))?;
    let result = match &c.check.external {
        Some(cmd) if aig.num_inputs() > c.check.exhaustive_limit => {
            check_external(cmd, &c.aiger, &c.blif).map_err(check_failure)?
        }
        _ => check_equivalence(&aig, &netlist, &lib, &limits(&c.check)).map_err(check_failure)?,
    };
    let explanation = describe_counterexample(&aig, &result);
    if c.json {
        println!("{}", to_json(&CecReport { result: &result, explanation: explanation.clone() }));
    } else {
        let verdict = match result.verdict {
            Verdict::Equivalent => "equivalent",
            Verdict::NotEquivalent => "not equivalent",
            Verdict::Inconclusive => "inconclusive",
        };
        let method = serde_json::to_value(result.method).unwrap();
        println!("{verdict} ({}, {} vectors)", method.as_str().unwrap_or(""), result.vectors_tested);
        if let Some(x) = explanation {
            println!("counterexample: {x}");
        }
        if let Some(log) = &result.log {
            print!("{log}");
        }
    }
    Ok(verdict_code(result.verdict))
}

pub fn suite(c: SuiteCmd) -> Outcome {
    if !(0.0..=1.0).contains(&c.alpha) {
        return Err(Failure::new(exit::USAGE, format!("alpha {} outside [0, 1]", c.alpha)));
    }
    let lib = load_library(c.mapping.genlib.as_deref())?;
    let params = mapping_params(&c.mapping)?;
    let baseline = c.baseline.as_deref().map(load_report).transpose()?;
    let benchmarks = load_suite(std::slice::from_ref(&c.suite_dir))?;
    if benchmarks.is_empty() {
        return Err(Failure::new(exit::USAGE, format!("no AIGER files under {}", c.suite_dir.display())));
    }
    let genome = params.genome.clone();
    let evaluator = Evaluator::new(&benchmarks, &lib, params, limits(&c.check), c.check.external.clone());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
    let rows: Vec<ReportRow> = pool.install(|| {
        benchmarks
            .par_iter()
            .map(|b| {
                let (result, elapsed) = evaluator.run_one_timed(b, &genome);
                info!("{}: mapped in {:.3}s", b.name, elapsed.as_secs_f64());
                ReportRow {
                    area: result.area,
                    delay: result.delay,
                    runtime_seconds: Some(elapsed.as_secs_f64()),
                    verdict: result.verdict,
                    error: result.error,
                    ..row_for(&b.name, &b.aig)
                }
            })
            .collect()
    });

    let mut report = RunReport { rows, aggregate: None };
    if let Some(base) = &baseline {
        report.aggregate = Some(report.compare(base, c.alpha));
    }
    let saved = if c.timing {
        report.clone()
    } else {
        let mut r = report.clone();
        r.rows.iter_mut().for_each(|row| row.runtime_seconds = None);
        r
    };
    if let Some(path) = &c.report {
        write_file(path, to_json(&saved) + "\n")?;
    }
    if c.json {
        println!("{}", to_json(&saved));
    } else {
        print!("{}", render_run(&report));
    }

    if report.rows.iter().any(|r| r.error.is_some()) {
        return Ok(exit::MAPPING);
    }
    if report.rows.iter().any(|r| r.verdict == Some(Verdict::NotEquivalent)) {
        return Ok(exit::NOT_EQUIVALENT);
    }
    Ok(exit::OK)
}

pub fn score(c: ScoreCmd) -> Outcome {
    if !(0.0..=1.0).contains(&c.alpha) {
        return Err(Failure::new(exit::USAGE, format!("alpha {} outside [0, 1]", c.alpha)));
    }
    let names: BTreeSet<String> = discover(&c.suite_dir)?
        .iter()
        .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_string))
        .collect();
    let mut baseline = load_report(&c.baseline_report)?;
    let candidate = load_report(&c.candidate_report)?;
    if !names.is_empty() {
        for n in &names {
            if !baseline.rows.iter().any(|r| &r.name == n) {
                warn!("circuit {n} is missing from the baseline report and is not scored");
            }
        }
        baseline.rows.retain(|r| names.contains(&r.name));
    }
    let score = score_results(&baseline.results(), &candidate.results(), c.alpha);
    if c.json {
        println!("{}", to_json(&score));
    } else {
        print!("{}", render_score(&score, c.alpha));
    }
    Ok(exit::OK)
}

pub fn evolve(c: EvolveCmd) -> Outcome {
    let mut cfg = EvolutionConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = c.jobs {
        cfg.jobs = jobs;
    }
    if let Some(n) = c.iterations {
        cfg.iterations = n;
    }
    let report = run_evolve(&cfg)?;
    for problem in audit(&report, &cfg) {
        error!("audit: {problem}");
    }
    if let Some(path) = &c.report {
        write_file(path, report.to_json() + "\n")?;
    }
    if let Some(path) = &c.genome_out {
        write_file(path, report.best_genome.to_json_pretty() + "\n")?;
    }
    if c.json {
        println!("{}", report.to_json());
        return Ok(exit::OK);
    }
    println!("{:>4}  {:<18} {:<9} {:>9} {:>9} {:>9} {:>8}  decision", "iter", "operator", "strategy", "S_area", "S_delay", "S_overall", "reward");
    for it in &report.iterations {
        let r = &it.record;
        let decision = match it.accept_reason {
            Some(reason) => format!("accepted ({})", serde_json::to_value(reason).unwrap().as_str().unwrap_or("")),
            None => "rejected".to_string(),
        };
        let strategy = serde_json::to_value(r.strategy).unwrap();
        println!(
            "{:>4}  {:<18} {:<9} {:>9.4} {:>9.4} {:>9.4} {:>8.4}  {decision}",
            r.iteration,
            r.operator.group_name(),
            strategy.as_str().unwrap_or(""),
            r.s_area,
            r.s_delay,
            r.s_overall,
            r.reward
        );
    }
    if report.stopped_early {
        println!("stopped early after {} iterations", report.iterations.len());
    }
    let s = &report.best_score;
    match report.best_iteration {
        Some(i) => println!("best: iteration {i}, S_area {:.4} S_delay {:.4} S_overall {:.4} e {:.4}", s.s_area, s.s_delay, s.s_overall, s.e),
        None => println!("best: baseline genome, S_overall {:.4}", s.s_overall),
    }
    Ok(exit::OK)
}

#[derive(Serialize)]
struct Stats {
    inputs: usize,
    outputs: usize,
    ands: usize,
    depth: u32,
}

pub fn stats(c: StatsCmd) -> Outcome {
    let aig = load_aig(&c.aiger)?;
    let s = Stats { inputs: aig.num_inputs(), outputs: aig.num_outputs(), ands: aig.num_ands(), depth: aig.depth() };
    if c.json {
        println!("{}", to_json(&s));
    } else {
        println!("inputs {} outputs {} ands {} depth {}", s.inputs, s.outputs, s.ands, s.depth);
    }
    Ok(exit::OK)
}
