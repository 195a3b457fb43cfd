//! Evolution run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use techmap::{EquivalenceLimits, MappingParams};

use crate::EvolveError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    /// Weight of the area score in the overall score.
    pub alpha: f64,
    /// Reward threshold for acceptance.
    pub tau: f64,
    /// Fraction of the best delay score that still earns acceptance.
    pub gamma: f64,
    /// History window length.
    pub window: usize,
    /// Reward penalty per unit of equivalence failure rate.
    pub beta: f64,
    pub r_equiv: f64,
    pub r_compile: f64,
    /// Outer iterations.
    pub iterations: usize,
    pub inner_steps: usize,
    /// Candidates per inner step.
    pub population: usize,
    pub seed: u64,
    /// Stop after this many consecutive iterations without a new best; 0 disables.
    pub early_stop: usize,
    /// Benchmark files or directories of `*.aig` / `*.aag` files.
    pub suite: Vec<PathBuf>,
    /// Genlib library; the built-in library when absent.
    pub library: Option<PathBuf>,
    /// Starting genome (JSON); the default genome when absent.
    pub baseline_genome: Option<PathBuf>,
    /// Per-iteration JSON lines log.
    pub artifact_log: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub mapping: MappingSection,
    pub equivalence: EquivalenceSection,
    pub planner: PlannerSection,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            alpha: 0.5,
            tau: -0.1,
            gamma: 0.8,
            window: 5,
            beta: 0.1,
            r_equiv: -0.4,
            r_compile: -0.5,
            iterations: 30,
            inner_steps: 3,
            population: 4,
            seed: 0,
            early_stop: 10,
            suite: Vec::new(),
            library: None,
            baseline_genome: None,
            artifact_log: None,
            jobs: 0,
            mapping: MappingSection::default(),
            equivalence: EquivalenceSection::default(),
            planner: PlannerSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MappingSection {
    pub cut_size: usize,
    pub cut_limit: usize,
    pub delay_rounds: usize,
    pub flow_rounds: usize,
    pub exact_rounds: usize,
    pub target_delay: Option<f64>,
}

impl Default for MappingSection {
    fn default() -> Self {
        let p = MappingParams::default();
        MappingSection {
            cut_size: p.cut_size,
            cut_limit: p.cut_limit,
            delay_rounds: p.delay_rounds,
            flow_rounds: p.flow_rounds,
            exact_rounds: p.exact_rounds,
            target_delay: p.target_delay,
        }
    }
}

impl MappingSection {
    pub fn params(&self) -> MappingParams {
        MappingParams {
            cut_size: self.cut_size,
            cut_limit: self.cut_limit,
            delay_rounds: self.delay_rounds,
            flow_rounds: self.flow_rounds,
            exact_rounds: self.exact_rounds,
            target_delay: self.target_delay,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivalenceSection {
    pub exhaustive_limit: usize,
    pub random_vectors: u64,
    pub seed: u64,
    /// Checker command for circuits above the exhaustive limit; `{aig}` and
    /// `{blif}` are replaced by file paths.
    pub external: Option<String>,
}

impl Default for EquivalenceSection {
    fn default() -> Self {
        let l = EquivalenceLimits::default();
        EquivalenceSection {
            exhaustive_limit: l.exhaustive_limit,
            random_vectors: l.random_vectors,
            seed: l.seed,
            external: None,
        }
    }
}

impl EquivalenceSection {
    pub fn limits(&self) -> EquivalenceLimits {
        EquivalenceLimits {
            exhaustive_limit: self.exhaustive_limit,
            random_vectors: self.random_vectors,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerBackend {
    #[default]
    Rules,
    Remote,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSection {
    pub backend: PlannerBackend,
    /// Chat-completion endpoint URL.
    pub endpoint: Option<String>,
    pub model: Option<String>,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: u64,
}

impl Default for PlannerSection {
    fn default() -> Self {
        PlannerSection {
            backend: PlannerBackend::Rules,
            endpoint: None,
            model: None,
            api_key_env: "TECHMAP_PLANNER_API_KEY".into(),
            timeout_secs: 60,
        }
    }
}

fn invalid(field: &str, msg: impl Into<String>) -> EvolveError {
    EvolveError::Config { field: field.to_string(), msg: msg.into() }
}

impl EvolutionConfig {
    pub fn from_toml_str(text: &str) -> Result<EvolutionConfig, EvolveError> {
        let cfg: EvolutionConfig = toml::from_str(text).map_err(|e| invalid("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<EvolutionConfig, EvolveError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| EvolveError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = EvolutionConfig::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.suite.iter_mut().for_each(resolve);
        cfg.library.iter_mut().for_each(resolve);
        cfg.baseline_genome.iter_mut().for_each(resolve);
        cfg.artifact_log.iter_mut().for_each(resolve);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(name, format!("{v} outside [0, 1]")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        if !(-0.5..=0.5).contains(&self.tau) {
            return Err(invalid("tau", format!("{} outside [-0.5, 0.5]", self.tau)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(invalid("gamma", format!("{} outside (0, 1]", self.gamma)));
        }
        if !(-0.5..=0.0).contains(&self.r_equiv) {
            return Err(invalid("r_equiv", format!("{} outside [-0.5, 0]", self.r_equiv)));
        }
        if (self.r_compile - (self.r_equiv - self.beta)).abs() > 1e-12 {
            return Err(invalid(
                "r_compile",
                format!("{} must equal r_equiv - beta = {}", self.r_compile, self.r_equiv - self.beta),
            ));
        }
        if self.r_compile < -0.5 {
            return Err(invalid("r_compile", format!("{} below -0.5", self.r_compile)));
        }
        for (name, v) in [("window", self.window), ("inner_steps", self.inner_steps), ("population", self.population)] {
            if v == 0 {
                return Err(invalid(name, "must be at least 1"));
            }
        }
        self.mapping.params().validate().map_err(|e| invalid("mapping", e.to_string()))?;
        if self.planner.backend == PlannerBackend::Remote && self.planner.endpoint.is_none() {
            return Err(invalid("planner.endpoint", "required by the remote backend"));
        }
        Ok(())
    }
}
