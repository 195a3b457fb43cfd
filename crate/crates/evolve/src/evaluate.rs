//! Mapping a benchmark suite with a genome and scoring it against a baseline.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use techmap::equivalence::check_external;
use techmap::{
    build_match_index, check_equivalence, read_aiger_file, run_mapping_with_index, write_aag, write_blif, Aig,
    CellLibrary, EquivalenceLimits, HeuristicGenome, MappingParams, MatchIndex, Verdict,
};

use crate::record::overall;
use crate::EvolveError;

pub struct Benchmark {
    pub name: String,
    pub aig: Aig,
}

/// Every `*.aig` / `*.aag` file below `dir`, sorted by path.
pub fn discover(dir: &Path) -> Result<Vec<PathBuf>, EvolveError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d).map_err(|e| EvolveError::Io(format!("{}: {e}", d.display())))?;
        for entry in entries {
            let path = entry.map_err(|e| EvolveError::Io(e.to_string()))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if matches!(path.extension().and_then(|e| e.to_str()), Some("aig" | "aag")) {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Loads benchmarks from files and directories, sorted by name.
pub fn load_suite(paths: &[PathBuf]) -> Result<Vec<Benchmark>, EvolveError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            files.extend(discover(p)?);
        } else {
            files.push(p.clone());
        }
    }
    let mut suite = Vec::new();
    for f in files {
        let aig = read_aiger_file(&f).map_err(|e| EvolveError::Suite(format!("{}: {e}", f.display())))?;
        let name = f.file_stem().and_then(|s| s.to_str()).unwrap_or("unnamed").to_string();
        suite.push(Benchmark { name, aig });
    }
    suite.sort_by(|a, b| a.name.cmp(&b.name));
    if let Some(w) = suite.windows(2).find(|w| w[0].name == w[1].name) {
        return Err(EvolveError::Suite(format!("duplicate benchmark name {}", w[0].name)));
    }
    Ok(suite)
}

/// Mapping and checking outcome for one circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitResult {
    pub name: String,
    pub area: Option<f64>,
    pub delay: Option<f64>,
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CircuitResult {
    /// Mapped without error and not shown to be wrong.
    pub fn is_valid(&self) -> bool {
        self.error.is_none() && self.area.is_some() && self.delay.is_some() && self.verdict != Some(Verdict::NotEquivalent)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitScore {
    pub name: String,
    pub s_area: Option<f64>,
    pub s_delay: Option<f64>,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteScore {
    pub s_area: f64,
    pub s_delay: f64,
    pub s_overall: f64,
    /// Fraction of baseline circuits that failed mapping or equivalence.
    pub e: f64,
    pub circuits: Vec<CircuitScore>,
}

fn relative_gain(base: Option<f64>, new: Option<f64>) -> Option<f64> {
    match (base, new) {
        (Some(b), Some(n)) if b > 0.0 => Some((b - n) / b),
        _ => None,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Scores `candidate` against `baseline`, pairing circuits by name. A
/// circuit missing from the candidate counts as a failure. Means run over
/// valid circuits whose baseline value is positive.
pub fn score_results(baseline: &[CircuitResult], candidate: &[CircuitResult], alpha: f64) -> SuiteScore {
    let mut circuits = Vec::with_capacity(baseline.len());
    let mut failures = 0usize;
    for b in baseline {
        let c = candidate.iter().find(|c| c.name == b.name);
        let valid = c.is_some_and(CircuitResult::is_valid);
        if c.is_none() {
            warn!("circuit {} missing from candidate results", b.name);
        }
        if !valid {
            failures += 1;
        }
        let (s_area, s_delay) = match c.filter(|_| valid) {
            Some(c) => (relative_gain(b.area, c.area), relative_gain(b.delay, c.delay)),
            None => (None, None),
        };
        circuits.push(CircuitScore { name: b.name.clone(), s_area, s_delay, valid });
    }
    let s_area = mean(circuits.iter().filter_map(|c| c.s_area));
    let s_delay = mean(circuits.iter().filter_map(|c| c.s_delay));
    let e = if baseline.is_empty() { 0.0 } else { failures as f64 / baseline.len() as f64 };
    SuiteScore { s_area, s_delay, s_overall: overall(alpha, s_area, s_delay), e, circuits }
}

/// Maps and checks a suite under varying genomes with fixed mapping settings.
pub struct Evaluator<'a> {
    pub suite: &'a [Benchmark],
    pub lib: &'a CellLibrary,
    pub params: MappingParams,
    pub limits: EquivalenceLimits,
    pub external: Option<String>,
    index: MatchIndex,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        suite: &'a [Benchmark],
        lib: &'a CellLibrary,
        params: MappingParams,
        limits: EquivalenceLimits,
        external: Option<String>,
    ) -> Evaluator<'a> {
        let index = build_match_index(lib, params.cut_size);
        Evaluator { suite, lib, params, limits, external, index }
    }

    /// Maps one circuit and checks the result.
    pub fn run_one(&self, bench: &Benchmark, genome: &HeuristicGenome) -> CircuitResult {
        self.run_one_timed(bench, genome).0
    }

    /// Like [`Evaluator::run_one`], also returning the wall-clock time spent mapping.
    pub fn run_one_timed(&self, bench: &Benchmark, genome: &HeuristicGenome) -> (CircuitResult, Duration) {
        let params = MappingParams { genome: genome.clone(), ..self.params.clone() };
        let mut result = CircuitResult { name: bench.name.clone(), area: None, delay: None, verdict: None, error: None };
        let start = Instant::now();
        let mapped = run_mapping_with_index(&bench.aig, self.lib, &self.index, &params);
        let elapsed = start.elapsed();
        let mapped = match mapped {
            Ok(m) => m,
            Err(e) => {
                warn!("{}: mapping failed: {e}", bench.name);
                result.error = Some(e.to_string());
                return (result, elapsed);
            }
        };
        result.area = Some(mapped.netlist.area);
        result.delay = Some(mapped.netlist.delay);
        let checked = match &self.external {
            Some(cmd) if bench.aig.num_inputs() > self.limits.exhaustive_limit => {
                self.external_check(cmd, bench, &mapped.netlist)
            }
            _ => check_equivalence(&bench.aig, &mapped.netlist, self.lib, &self.limits).map_err(|e| e.to_string()),
        };
        match checked {
            Ok(r) => {
                debug!("{}: {:?} after {} vectors", bench.name, r.verdict, r.vectors_tested);
                result.verdict = Some(r.verdict);
            }
            Err(e) => {
                warn!("{}: equivalence check failed: {e}", bench.name);
                result.error = Some(e);
            }
        }
        (result, elapsed)
    }

    fn external_check(&self, cmd: &str, bench: &Benchmark, netlist: &techmap::MappedNetlist) -> Result<techmap::EquivalenceResult, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let aig_path = dir.path().join(format!("{}.aag", bench.name));
        let blif_path = dir.path().join(format!("{}.blif", bench.name));
        std::fs::write(&aig_path, write_aag(&bench.aig)).map_err(|e| e.to_string())?;
        std::fs::write(&blif_path, write_blif(netlist, self.lib)).map_err(|e| e.to_string())?;
        check_external(cmd, &aig_path, &blif_path).map_err(|e| e.to_string())
    }

    /// Results for every circuit, in suite order.
    pub fn run(&self, genome: &HeuristicGenome) -> Vec<CircuitResult> {
        self.suite.par_iter().map(|b| self.run_one(b, genome)).collect()
    }
}
