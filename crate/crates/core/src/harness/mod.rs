//! The optimisation loop, batch runner, persistence and reports.
//!
//! Every run of a `(problem, repeat)` pair starts from the same max-min LHS
//! design whatever the strategy, so results can be compared pairwise.
//! Records are written one JSON file per run under `runs/`, next to a
//! `.times.json` sidecar holding wall-clock timings.

mod config;
mod experiment;
mod report;
mod run;

pub use config::{BatchConfig, ExperimentConfig, DEFAULT_ALPHA, DEFAULT_BUDGET, DEFAULT_DESIGN_CANDIDATES, DEFAULT_REPEATS};
pub use experiment::{
    load_records, read_record, record_to_json, run_configs, run_experiment, run_path, write_record, write_reports,
    ExperimentSummary, Manifest, ManifestEntry, RunOutcome, RunStatus, CONVERGENCE_DIR, MANIFEST, RUNS_DIR, TABLES_DIR,
};
pub use report::{
    emit_convergence, eps_sweep, eps_sweep_strategies, group_by_problem, method_results, references, render_eps_sweep,
    tables, EpsSweepRow, EPS_GRID,
};
pub use run::{run_bo, run_bo_timed, RunRecord, RunRow, WallTimes};
