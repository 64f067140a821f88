use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};

use super::run::RunRecord;
use crate::error::{Error, Result};
use crate::stats::{build_table, median_mad, quantile, ComparisonTable, MethodResults};
use crate::strategies::Strategy;

/// ε values of the sensitivity sweep.
pub const EPS_GRID: [f64; 6] = [0.01, 0.05, 0.1, 0.2, 0.3, 0.5];

/// Regret reference per problem: the registered optimum, lowered to the
/// best value any of `records` reached (with a warning when that happens).
pub fn references(records: &[RunRecord]) -> BTreeMap<String, f64> {
    let mut best: BTreeMap<String, (f64, Option<f64>)> = BTreeMap::new();
    for r in records {
        let e = best.entry(r.problem.clone()).or_insert((f64::INFINITY, r.f_opt_ref));
        e.0 = e.0.min(r.best());
    }
    best.into_iter()
        .map(|(p, (found, reg))| {
            let reference = match reg {
                Some(v) if found < v => {
                    warn!("{p}: best value found {found} is below the reference optimum {v}; adopting it");
                    found
                }
                Some(v) => v,
                None => found,
            };
            (p, reference)
        })
        .collect()
}

fn strategy_order(s: &Strategy) -> (usize, u64) {
    let idx = Strategy::all()
        .iter()
        .position(|a| a.name() == s.name())
        .unwrap_or(usize::MAX);
    (idx, s.epsilon().map_or(0, f64::to_bits))
}

/// Strategies present in `records`, in first-appearance order.
fn strategies_in(records: &[&RunRecord]) -> Vec<Strategy> {
    let mut out: Vec<Strategy> = Vec::new();
    for r in records {
        if !out.contains(&r.strategy) {
            out.push(r.strategy);
        }
    }
    out
}

/// Records grouped by problem, strategies ordered canonically.
pub fn group_by_problem(records: &[RunRecord]) -> BTreeMap<String, Vec<&RunRecord>> {
    let mut g: BTreeMap<String, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        g.entry(r.problem.clone()).or_default().push(r);
    }
    for v in g.values_mut() {
        v.sort_by(|a, b| {
            strategy_order(&a.strategy)
                .cmp(&strategy_order(&b.strategy))
                .then(a.repeat.cmp(&b.repeat))
        });
    }
    g
}

/// Final regrets per strategy, paired on the repeats every strategy has.
pub fn method_results(records: &[&RunRecord], reference: f64) -> Vec<MethodResults> {
    let strategies = strategies_in(records);
    let mut common: Option<BTreeSet<usize>> = None;
    for s in &strategies {
        let reps: BTreeSet<usize> = records.iter().filter(|r| r.strategy == *s).map(|r| r.repeat).collect();
        common = Some(match common {
            None => reps,
            Some(c) => c.intersection(&reps).copied().collect(),
        });
    }
    let common = common.unwrap_or_default();
    strategies
        .iter()
        .map(|s| {
            let mut rs: Vec<&&RunRecord> = records
                .iter()
                .filter(|r| r.strategy == *s && common.contains(&r.repeat))
                .collect();
            rs.sort_by_key(|r| r.repeat);
            rs.dedup_by_key(|r| r.repeat);
            let all = records.iter().filter(|r| r.strategy == *s).count();
            if rs.len() < all {
                warn!("{s}: {} runs without a counterpart in every method dropped", all - rs.len());
            }
            MethodResults {
                method: s.to_string(),
                regrets: rs.iter().map(|r| r.best() - reference).collect(),
            }
        })
        .collect()
}

/// One comparison table per problem.
pub fn tables(records: &[RunRecord], alpha: f64) -> Result<BTreeMap<String, ComparisonTable>> {
    let refs = references(records);
    let mut out = BTreeMap::new();
    for (p, recs) in group_by_problem(records) {
        let results = method_results(&recs, refs[&p]);
        out.insert(p, build_table(&results, alpha)?);
    }
    Ok(out)
}

/// Tab-separated `strategy, t, q25, median, q75` of regret against the
/// evaluation index; `T` rows per strategy. All records must share a problem.
pub fn emit_convergence(records: &[RunRecord]) -> Result<String> {
    let problems: BTreeSet<&str> = records.iter().map(|r| r.problem.as_str()).collect();
    if problems.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "convergence data needs records of exactly one problem, got {problems:?}"
        )));
    }
    let reference = references(records).into_values().next().unwrap_or(0.0);
    let refs: Vec<&RunRecord> = records.iter().collect();
    let mut out = String::from("strategy\tt\tq25\tmedian\tq75\n");
    let mut strategies = strategies_in(&refs);
    strategies.sort_by_key(strategy_order);
    for s in strategies {
        let traces: Vec<Vec<f64>> = records
            .iter()
            .filter(|r| r.strategy == s)
            .map(|r| r.regret_trace(reference))
            .collect();
        let len = traces.iter().map(Vec::len).min().unwrap_or(0);
        for t in 0..len {
            let col: Vec<f64> = traces.iter().map(|tr| tr[t]).collect();
            let _ = writeln!(
                out,
                "{s}\t{}\t{:e}\t{:e}\t{:e}",
                t + 1,
                quantile(&col, 0.25),
                quantile(&col, 0.5),
                quantile(&col, 0.75)
            );
        }
    }
    Ok(out)
}

/// Summary of one ε-greedy strategy at one ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSweepRow {
    pub problem: String,
    pub method: String,
    pub epsilon: f64,
    pub runs: usize,
    pub median: f64,
    pub mad: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Final-regret summaries of every ε-greedy run in `records`, by problem,
/// method and ε.
pub fn eps_sweep(records: &[RunRecord]) -> Vec<EpsSweepRow> {
    let refs = references(records);
    let mut groups: BTreeMap<(String, &'static str, u64), Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(e) = r.strategy.epsilon() {
            groups
                .entry((r.problem.clone(), r.strategy.name(), e.to_bits()))
                .or_default()
                .push(r.best() - refs[&r.problem]);
        }
    }
    let mut rows: Vec<EpsSweepRow> = groups
        .into_iter()
        .map(|((problem, method, e), v)| {
            let (median, mad) = median_mad(&v);
            EpsSweepRow {
                problem,
                method: method.to_string(),
                epsilon: f64::from_bits(e),
                runs: v.len(),
                median,
                mad,
                q25: quantile(&v, 0.25),
                q75: quantile(&v, 0.75),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.problem.as_str(), a.method.as_str())
            .cmp(&(b.problem.as_str(), b.method.as_str()))
            .then(a.epsilon.total_cmp(&b.epsilon))
    });
    rows
}

pub fn render_eps_sweep(rows: &[EpsSweepRow]) -> String {
    let mut out = String::from("problem\tmethod\tepsilon\truns\tmedian\tmad\tq25\tq75\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:e}\t{:e}\t{:e}\t{:e}",
            r.problem, r.method, r.epsilon, r.runs, r.median, r.mad, r.q25, r.q75
        );
    }
    out
}

/// Both ε-greedy strategies at every ε of the sweep grid.
pub fn eps_sweep_strategies() -> Vec<Strategy> {
    EPS_GRID
        .iter()
        .flat_map(|&eps| [Strategy::EpsPf { eps }, Strategy::EpsRs { eps }])
        .collect()
}
