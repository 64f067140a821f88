use std::collections::BTreeMap;
use std::time::Instant;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::benchmarks::Problem;
use crate::error::Result;
use crate::gp::{Dataset, GpModel, Hyperparams, Sense};
use crate::sampling::{lhs_continuation, maximin_lhs, stream_rng, stream_seed, streams, uniform_design};
use crate::strategies::{duplicate_guard, select, Branch, Strategy};

/// One expensive evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    /// 1-based evaluation index.
    pub t: usize,
    /// Native-domain coordinates.
    pub x: Vec<f64>,
    pub f: f64,
    pub best_so_far: f64,
    /// Part of the initial design.
    pub design: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(default)]
    pub archive_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acq_value: Option<f64>,
    /// The proposal was nudged off an existing input.
    #[serde(default)]
    pub guarded: bool,
}

/// Full trace of one run; the unit of persistence and statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub problem: String,
    pub strategy: Strategy,
    pub repeat: usize,
    /// Seeds of every random stream of the run.
    pub seeds: BTreeMap<String, u64>,
    /// NSGA-II initial populations contain the incumbent.
    pub moea_seeded_with_incumbent: bool,
    pub f_opt_ref: Option<f64>,
    pub rows: Vec<RunRow>,
    /// `best_so_far(T) − reference`, where the reference is lowered to the
    /// best value seen if the run beat it.
    pub final_regret: f64,
}

impl RunRecord {
    pub fn best(&self) -> f64 {
        self.rows.last().map_or(f64::INFINITY, |r| r.best_so_far)
    }

    pub fn guard_events(&self) -> usize {
        self.rows.iter().filter(|r| r.guarded).count()
    }

    /// Best-so-far trace minus `reference`.
    pub fn regret_trace(&self, reference: f64) -> Vec<f64> {
        self.rows.iter().map(|r| r.best_so_far - reference).collect()
    }
}

/// Per-evaluation wall-clock seconds, kept apart from the record so that
/// records stay reproducible byte for byte.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WallTimes {
    pub fit: Vec<f64>,
    pub select: Vec<f64>,
    pub evaluate: Vec<f64>,
    pub total: f64,
}

struct Trace<'a> {
    problem: &'a Problem,
    rows: Vec<RunRow>,
    best: f64,
}

impl<'a> Trace<'a> {
    fn evaluate(&mut self, x_unit: &[f64], design: bool) -> Result<(f64, RunRow)> {
        let x = self.problem.from_unit_cube(x_unit);
        let f = self.problem.evaluate(&x)?;
        self.best = self.best.min(f);
        let row = RunRow {
            t: self.rows.len() + 1,
            x,
            f,
            best_so_far: self.best,
            design,
            branch: None,
            archive_size: 0,
            acq_value: None,
            guarded: false,
        };
        Ok((f, row))
    }
}

/// Hyperparameters used while a single observation makes fitting impossible.
fn prior_theta(d: usize, jitter: f64) -> Hyperparams<f64> {
    Hyperparams::new(vec![0.2; d], 1.0, jitter)
}

/// One Bayesian-optimisation run.
pub fn run_bo(config: &ExperimentConfig, repeat: usize) -> Result<RunRecord> {
    run_bo_timed(config, repeat).map(|(r, _)| r)
}

pub fn run_bo_timed(config: &ExperimentConfig, repeat: usize) -> Result<(RunRecord, WallTimes)> {
    let start = Instant::now();
    let problem = config.validate()?;
    let d = problem.d;
    let m = config.init_size(d);
    let budget = config.budget;
    let pid = problem.id.as_str();
    let seed = config.master_seed;

    let seeds: BTreeMap<String, u64> = [streams::DESIGN, streams::GP, streams::STRATEGY, streams::MOEA, streams::GUARD]
        .iter()
        .map(|s| (s.to_string(), stream_seed(seed, pid, repeat, s)))
        .collect();
    let mut design_rng = stream_rng(seed, pid, repeat, streams::DESIGN);
    let mut gp_rng = stream_rng(seed, pid, repeat, streams::GP);
    let mut strategy_rng = stream_rng(seed, pid, repeat, streams::STRATEGY);
    let mut moea_rng = stream_rng(seed, pid, repeat, streams::MOEA);
    let mut guard_rng = stream_rng(seed, pid, repeat, streams::GUARD);

    let mut times = WallTimes::default();
    let design = maximin_lhs::<f64, _>(m, d, &mut design_rng, config.design_candidates)?;
    let mut trace = Trace {
        problem: &problem,
        rows: Vec::with_capacity(budget),
        best: f64::INFINITY,
    };
    let mut xs = Vec::with_capacity(budget);
    let mut ys = Vec::with_capacity(budget);
    for x in &design.points {
        let t0 = Instant::now();
        let (f, row) = trace.evaluate(x, true)?;
        times.evaluate.push(t0.elapsed().as_secs_f64());
        trace.rows.push(row);
        xs.push(x.clone());
        ys.push(f);
    }

    match config.strategy {
        Strategy::Uniform | Strategy::Lhs => {
            let rest = budget - m;
            let points = if rest == 0 {
                Vec::new()
            } else if config.strategy == Strategy::Uniform {
                uniform_design::<f64, _>(rest, d, &mut design_rng)?.points
            } else {
                lhs_continuation(&design.points, budget, d, &mut design_rng, config.design_candidates)
            };
            for x in points {
                let t0 = Instant::now();
                let (_, row) = trace.evaluate(&x, false)?;
                times.evaluate.push(t0.elapsed().as_secs_f64());
                trace.rows.push(row);
            }
        }
        strategy => {
            let lower = problem.lower.clone();
            let upper = problem.upper.clone();
            let mut dataset = Dataset::from_unit(xs, ys, lower, upper, Sense::Minimize)?;
            let moea = config.moea_params(d);
            let mut theta: Option<Hyperparams<f64>> = None;
            for t in m + 1..=budget {
                let t0 = Instant::now();
                let model = if dataset.len() < 2 {
                    GpModel::condition(dataset.clone(), prior_theta(d, config.gp.jitter))?
                } else {
                    GpModel::fit(dataset.clone(), &config.gp, &mut gp_rng, theta.as_ref())?
                };
                theta = Some(model.hyperparams().clone());
                let t1 = Instant::now();
                let sel = select(strategy, &model, t, &mut strategy_rng, &mut moea_rng, &moea, &config.pi)?;
                let mut x = sel.x;
                let guarded = duplicate_guard(&mut x, &dataset, &mut guard_rng);
                if guarded {
                    debug!("{pid}/{strategy}/{repeat}: re-proposal at t = {t} perturbed");
                }
                let t2 = Instant::now();
                let (f, mut row) = trace.evaluate(&x, false)?;
                row.branch = sel.branch;
                row.archive_size = sel.archive_size;
                row.acq_value = sel.acq_value;
                row.guarded = guarded;
                trace.rows.push(row);
                dataset.push(x, f)?;
                times.fit.push((t1 - t0).as_secs_f64());
                times.select.push((t2 - t1).as_secs_f64());
                times.evaluate.push(t2.elapsed().as_secs_f64());
            }
        }
    }

    let best = trace.best;
    let reference = match problem.f_opt_ref {
        Some(r) if best < r => {
            warn!("{pid}: run {repeat} found {best} below the reference optimum {r}; using it as the reference");
            best
        }
        Some(r) => r,
        None => best,
    };
    times.total = start.elapsed().as_secs_f64();
    let record = RunRecord {
        config: config.snapshot(),
        config_hash: config.run_hash(repeat),
        problem: problem.id.clone(),
        strategy: config.strategy,
        repeat,
        seeds,
        moea_seeded_with_incumbent: config.strategy.needs_model(),
        f_opt_ref: problem.f_opt_ref,
        rows: trace.rows,
        final_regret: best - reference,
    };
    Ok((record, times))
}
