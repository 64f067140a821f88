use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use eebo::benchmarks::catalogue_json;
use eebo::harness::{
    emit_convergence, eps_sweep, group_by_problem, load_records, method_results, references, render_eps_sweep,
    run_experiment, tables, BatchConfig, ExperimentSummary, RunRecord, DEFAULT_ALPHA, DEFAULT_BUDGET, DEFAULT_REPEATS,
};
use eebo::stats::median_mad;
use eebo::Strategy;

/// Bayesian optimisation experiments with ε-greedy Pareto-front strategies.
#[derive(Parser)]
#[command(name = "eebo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem with one method.
    Run(RunArgs),
    /// Run a problem x method matrix from a JSON or TOML file.
    Batch {
        #[arg(long)]
        config: PathBuf,
        /// Reuse persisted runs whose configuration hash matches.
        #[arg(long)]
        resume: bool,
    },
    /// Summarise persisted runs.
    Report(ReportArgs),
    /// Print the registered problems as JSON.
    Catalogue,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: String,
    /// Uniform, LHS, Explore, Exploit, EI, PI, UCB, PFRandom, EpsPF, EpsRS
    #[arg(long)]
    method: Strategy,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Initial design size (default 2d).
    #[arg(long)]
    init: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Output directory of a run or batch.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, group = "kind")]
    table: bool,
    #[arg(long, group = "kind")]
    convergence: bool,
    #[arg(long = "eps-sweep", group = "kind")]
    eps_sweep: bool,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

fn read_batch(path: &Path) -> Result<BatchConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let batch = match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text)?,
        _ => BatchConfig::from_json(&text)?,
    };
    Ok(batch)
}

/// Median and MAD of final regret per method, for problems without a table.
fn regret_summary(records: &[RunRecord], problem: &str) -> String {
    let refs = references(records);
    let recs: Vec<&RunRecord> = records.iter().filter(|r| r.problem == problem).collect();
    let mut out = format!("{problem}\nmethod\truns\tmedian\tmad\n");
    for m in method_results(&recs, refs[problem]) {
        let (med, mad) = median_mad(&m.regrets);
        out.push_str(&format!("{}\t{}\t{med:.3e}\t{mad:.3e}\n", m.method, m.regrets.len()));
    }
    out
}

fn print_summary(summary: &ExperimentSummary, out: &Path) -> Result<()> {
    for (problem, table) in &summary.tables {
        println!("{}", table.render(problem));
    }
    if !summary.table_errors.is_empty() {
        let records = load_records(out)?;
        for problem in summary.table_errors.keys() {
            println!("{}", regret_summary(&records, problem));
        }
    }
    for f in &summary.failures {
        eprintln!(
            "failed: {}/{}/{}: {}",
            f.problem,
            f.strategy,
            f.repeat,
            f.error.as_deref().unwrap_or("unknown error")
        );
    }
    eprintln!(
        "{} runs ({} reused, {} failed); output in {}",
        summary.completed,
        summary.reused,
        summary.failures.len(),
        out.display()
    );
    Ok(())
}

fn run(args: RunArgs) -> Result<ExperimentSummary> {
    let mut method = args.method;
    if let Some(eps) = args.epsilon {
        if method.epsilon().is_none() {
            bail!("--epsilon only applies to EpsPF and EpsRS");
        }
        if !(0.0..=1.0).contains(&eps) {
            bail!("--epsilon must lie in [0, 1], got {eps}");
        }
        method = method.with_epsilon(eps);
    }
    let batch = BatchConfig {
        budget: args.budget,
        init: args.init,
        repeats: args.repeats,
        master_seed: args.seed,
        resume: args.resume,
        ..BatchConfig::new(&[args.problem.as_str()], &[method], args.out)
    };
    Ok(run_experiment(&batch)?)
}

fn report(args: ReportArgs) -> Result<()> {
    let records = load_records(&args.input)?;
    if records.is_empty() {
        bail!("no run records under {}", args.input.display());
    }
    if args.convergence {
        for recs in group_by_problem(&records).into_values() {
            let owned: Vec<_> = recs.into_iter().cloned().collect();
            println!("# {}", owned[0].problem);
            print!("{}", emit_convergence(&owned)?);
        }
    } else if args.eps_sweep {
        print!("{}", render_eps_sweep(&eps_sweep(&records)));
    } else {
        for (problem, recs) in group_by_problem(&records) {
            let owned: Vec<RunRecord> = recs.into_iter().cloned().collect();
            match tables(&owned, args.alpha) {
                Ok(t) => println!("{}", t[&problem].render(&problem)),
                Err(eebo::Error::InvalidArgument(_)) => println!("{}", regret_summary(&owned, &problem)),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => {
            let out = args.out.clone();
            let summary = run(args)?;
            print_summary(&summary, &out)?;
            if !summary.failures.is_empty() {
                std::process::exit(2);
            }
        }
        Command::Batch { config, resume } => {
            let mut batch = read_batch(&config)?;
            batch.resume |= resume;
            let summary = run_experiment(&batch)?;
            print_summary(&summary, &batch.out_dir)?;
            if !summary.failures.is_empty() {
                std::process::exit(2);
            }
        }
        Command::Report(args) => report(args)?,
        Command::Catalogue => println!("{}", catalogue_json()),
    }
    Ok(())
}
