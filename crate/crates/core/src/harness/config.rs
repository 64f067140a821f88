use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmarks::{problem, Problem};
use crate::error::{Error, Result};
use crate::gp::GpConfig;
use crate::pareto::MoeaParams;
use crate::strategies::{PiSearch, Strategy};

pub const DEFAULT_BUDGET: usize = 250;
pub const DEFAULT_REPEATS: usize = 51;
pub const DEFAULT_DESIGN_CANDIDATES: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.05;

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_repeats() -> usize {
    DEFAULT_REPEATS
}

fn default_candidates() -> usize {
    DEFAULT_DESIGN_CANDIDATES
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

/// One problem/strategy pairing and everything needed to run its repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: String,
    pub strategy: Strategy,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Initial design size; `2d` when absent.
    #[serde(default)]
    pub init: Option<usize>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// NSGA-II settings; scaled to the problem dimension when absent.
    #[serde(default)]
    pub moea: Option<MoeaParams>,
    #[serde(default)]
    pub gp: GpConfig,
    #[serde(default)]
    pub pi: PiSearch,
    #[serde(default = "default_candidates")]
    pub design_candidates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(problem: &str, strategy: Strategy) -> Self {
        Self {
            problem: problem.to_string(),
            strategy,
            budget: DEFAULT_BUDGET,
            init: None,
            repeats: DEFAULT_REPEATS,
            master_seed: 0,
            moea: None,
            gp: GpConfig::default(),
            pi: PiSearch::default(),
            design_candidates: DEFAULT_DESIGN_CANDIDATES,
            out_dir: None,
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        problem(&self.problem)
    }

    pub fn init_size(&self, d: usize) -> usize {
        self.init.unwrap_or(2 * d)
    }

    pub fn moea_params(&self, d: usize) -> MoeaParams {
        self.moea.clone().unwrap_or_else(|| MoeaParams::for_dim(d))
    }

    pub fn validate(&self) -> Result<Problem> {
        let p = self.problem()?;
        let m = self.init_size(p.d);
        if m == 0 || m > self.budget {
            return Err(Error::InvalidArgument(format!(
                "initial design size {m} must lie in [1, budget = {}]",
                self.budget
            )));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidArgument("repeats must be at least 1".into()));
        }
        if self.strategy.needs_model() && self.gp.restarts == 0 {
            return Err(Error::InvalidArgument("gp.restarts must be at least 1".into()));
        }
        Ok(p)
    }

    /// The configuration as recorded in a run: no output location.
    pub fn snapshot(&self) -> Self {
        Self {
            out_dir: None,
            ..self.clone()
        }
    }

    /// SHA-256 (hex) over everything that determines the trace of repeat
    /// `repeat`: the repeat count and output directory are excluded.
    pub fn run_hash(&self, repeat: usize) -> String {
        let key = Self {
            repeats: 0,
            out_dir: None,
            ..self.clone()
        };
        let json = serde_json::to_string(&key).expect("config serialises");
        hex::encode(Sha256::digest(format!("{json}/{repeat}").as_bytes()))
    }
}

/// A problem × strategy matrix sharing budget, seeds and settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub problems: Vec<String>,
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub init: Option<usize>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub moea: Option<MoeaParams>,
    #[serde(default)]
    pub gp: GpConfig,
    #[serde(default)]
    pub pi: PiSearch,
    #[serde(default = "default_candidates")]
    pub design_candidates: usize,
    pub out_dir: PathBuf,
    /// Reuse persisted runs whose configuration hash matches.
    #[serde(default)]
    pub resume: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl BatchConfig {
    pub fn new(problems: &[&str], strategies: &[Strategy], out_dir: impl Into<PathBuf>) -> Self {
        Self {
            problems: problems.iter().map(|s| s.to_string()).collect(),
            strategies: strategies.to_vec(),
            budget: DEFAULT_BUDGET,
            init: None,
            repeats: DEFAULT_REPEATS,
            master_seed: 0,
            moea: None,
            gp: GpConfig::default(),
            pi: PiSearch::default(),
            design_candidates: DEFAULT_DESIGN_CANDIDATES,
            out_dir: out_dir.into(),
            resume: false,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Problem-major expansion into per-pairing configurations.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for p in &self.problems {
            for &s in &self.strategies {
                out.push(ExperimentConfig {
                    problem: p.clone(),
                    strategy: s,
                    budget: self.budget,
                    init: self.init,
                    repeats: self.repeats,
                    master_seed: self.master_seed,
                    moea: self.moea.clone(),
                    gp: self.gp.clone(),
                    pi: self.pi,
                    design_candidates: self.design_candidates,
                    out_dir: Some(self.out_dir.clone()),
                });
            }
        }
        out
    }
}
