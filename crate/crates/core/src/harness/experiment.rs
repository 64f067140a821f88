use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BatchConfig, ExperimentConfig};
use super::report::{emit_convergence, group_by_problem, tables};
use super::run::{run_bo_timed, RunRecord, WallTimes};
use crate::error::{Error, Result};
use crate::stats::ComparisonTable;
use crate::strategies::Strategy;

pub const RUNS_DIR: &str = "runs";
pub const TABLES_DIR: &str = "tables";
pub const CONVERGENCE_DIR: &str = "convergence";
pub const MANIFEST: &str = "manifest.json";

fn slug(s: &Strategy) -> String {
    s.to_string().replace([':', '(', ')'], "_")
}

/// Where repeat `repeat` of a pairing is persisted under `out`.
pub fn run_path(out: &Path, problem: &str, strategy: &Strategy, repeat: usize) -> PathBuf {
    out.join(RUNS_DIR)
        .join(problem)
        .join(slug(strategy))
        .join(format!("r{repeat:03}.json"))
}

fn times_path(record_path: &Path) -> PathBuf {
    record_path.with_extension("times.json")
}

pub fn record_to_json(record: &RunRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("records serialise");
    s.push('\n');
    s
}

pub fn write_record(path: &Path, record: &RunRecord) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, record_to_json(record))?;
    Ok(())
}

pub fn read_record(path: &Path) -> Result<RunRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "json")
            && !p.to_string_lossy().ends_with(".times.json")
        {
            out.push(p);
        }
    }
    Ok(())
}

/// Every persisted record below `dir` (an output directory or its `runs/`).
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let root = if dir.join(RUNS_DIR).is_dir() {
        dir.join(RUNS_DIR)
    } else {
        dir.to_path_buf()
    };
    let mut files = Vec::new();
    collect_files(&root, &mut files)?;
    files.iter().map(|p| read_record(p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ran,
    Reused,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub problem: String,
    pub strategy: Strategy,
    pub repeat: usize,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub batch: BatchConfig,
    pub runs: Vec<ManifestEntry>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub entry: ManifestEntry,
    pub record: Option<RunRecord>,
    pub times: Option<WallTimes>,
}

/// Runs every repeat of every configuration, in parallel. With an output
/// directory, each record (and its wall-time sidecar) is written as soon as
/// it finishes; `resume` reuses persisted records whose hash matches.
/// Failures are reported per run and never abort the others.
pub fn run_configs(configs: &[ExperimentConfig], out: Option<&Path>, resume: bool) -> Vec<RunOutcome> {
    let jobs: Vec<(&ExperimentConfig, usize)> = configs
        .iter()
        .flat_map(|c| (0..c.repeats).map(move |r| (c, r)))
        .collect();
    jobs.par_iter()
        .map(|&(config, repeat)| {
            let hash = config.run_hash(repeat);
            let path = out.map(|o| run_path(o, &config.problem, &config.strategy, repeat));
            let mut entry = ManifestEntry {
                problem: config.problem.clone(),
                strategy: config.strategy,
                repeat,
                config_hash: hash.clone(),
                path: path.clone(),
                status: RunStatus::Ran,
                error: None,
            };
            if let (true, Some(p)) = (resume, path.as_deref()) {
                if let Ok(rec) = read_record(p) {
                    if rec.config_hash == hash {
                        entry.status = RunStatus::Reused;
                        return RunOutcome {
                            entry,
                            record: Some(rec),
                            times: None,
                        };
                    }
                }
            }
            let result = run_bo_timed(config, repeat).and_then(|(rec, times)| {
                if let Some(p) = path.as_deref() {
                    write_record(p, &rec)?;
                    fs::write(times_path(p), serde_json::to_string_pretty(&times)?)?;
                }
                Ok((rec, times))
            });
            match result {
                Ok((rec, times)) => {
                    info!(
                        "{}/{}/{repeat}: regret {:e} in {:.1}s",
                        config.problem, config.strategy, rec.final_regret, times.total
                    );
                    RunOutcome {
                        entry,
                        record: Some(rec),
                        times: Some(times),
                    }
                }
                Err(e) => {
                    warn!("{}/{}/{repeat} failed: {e}", config.problem, config.strategy);
                    entry.status = RunStatus::Failed;
                    entry.error = Some(e.to_string());
                    RunOutcome {
                        entry,
                        record: None,
                        times: None,
                    }
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub completed: usize,
    pub reused: usize,
    pub failures: Vec<ManifestEntry>,
    pub tables: BTreeMap<String, ComparisonTable>,
    /// Problems for which no table could be built, with the reason.
    pub table_errors: BTreeMap<String, String>,
}

/// Runs a batch, persists records, manifest, tables and convergence data
/// under `batch.out_dir`, and returns the per-problem comparison tables.
pub fn run_experiment(batch: &BatchConfig) -> Result<ExperimentSummary> {
    let configs = batch.expand();
    for c in &configs {
        c.validate()?;
    }
    let out = batch.out_dir.as_path();
    fs::create_dir_all(out)?;
    let outcomes = run_configs(&configs, Some(out), batch.resume);

    let manifest = Manifest {
        batch: batch.clone(),
        runs: outcomes.iter().map(|o| o.entry.clone()).collect(),
    };
    fs::write(out.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;

    let failures: Vec<ManifestEntry> = outcomes
        .iter()
        .filter(|o| o.entry.status == RunStatus::Failed)
        .map(|o| o.entry.clone())
        .collect();
    let reused = outcomes.iter().filter(|o| o.entry.status == RunStatus::Reused).count();
    let records: Vec<RunRecord> = outcomes.into_iter().filter_map(|o| o.record).collect();
    let (tables, table_errors) = write_reports(&records, out, batch.alpha)?;
    Ok(ExperimentSummary {
        completed: records.len(),
        reused,
        failures,
        tables,
        table_errors,
    })
}

type Tables = (BTreeMap<String, ComparisonTable>, BTreeMap<String, String>);

/// Writes `tables/<problem>.{json,txt}` and `convergence/<problem>.tsv`.
pub fn write_reports(records: &[RunRecord], out: &Path, alpha: f64) -> Result<Tables> {
    let mut built = BTreeMap::new();
    let mut errors = BTreeMap::new();
    fs::create_dir_all(out.join(TABLES_DIR))?;
    fs::create_dir_all(out.join(CONVERGENCE_DIR))?;
    for (problem, recs) in group_by_problem(records) {
        let owned: Vec<RunRecord> = recs.into_iter().cloned().collect();
        fs::write(
            out.join(CONVERGENCE_DIR).join(format!("{problem}.tsv")),
            emit_convergence(&owned)?,
        )?;
        match tables(&owned, alpha) {
            Ok(mut t) => {
                let table = t.remove(&problem).expect("table for the grouped problem");
                fs::write(
                    out.join(TABLES_DIR).join(format!("{problem}.json")),
                    serde_json::to_string_pretty(&table)?,
                )?;
                fs::write(out.join(TABLES_DIR).join(format!("{problem}.txt")), table.render(&problem))?;
                built.insert(problem, table);
            }
            Err(e @ (Error::InvalidArgument(_) | Error::PairingMismatch { .. })) => {
                warn!("{problem}: no table: {e}");
                errors.insert(problem, e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    Ok((built, errors))
}
