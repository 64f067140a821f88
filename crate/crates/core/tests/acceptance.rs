//! Acceptance criteria 1-10. Each test prints one `criterion N: PASS|FAIL`
//! line straight to stdout (bypassing the test harness capture) and then
//! asserts.
//!
//! Criteria 7 and 8 run full optimisation loops and take several minutes
//! on a single core.

mod common;

use std::io::Write;
use std::time::Instant;

use eebo::acquisition::{acq_partials, ei, gamma_constant, pi, ucb, wei, AcqInput, AcqKind};
use eebo::gp::{Dataset, GpConfig, GpModel, Hyperparams, Sense};
use eebo::harness::{record_to_json, run_bo, run_configs, ExperimentConfig, RunRecord};
use eebo::pareto::{fast_nondominated_sort, nsga2, MoeaParams, Objectives};
use eebo::sampling::StreamRng;
use eebo::stats::{holm_bonferroni, median, wilcoxon_one_sided};
use eebo::strategies::{select_eps_pf, select_eps_rs, Branch};
use eebo::Strategy;
use rand::{Rng, SeedableRng};

use common::*;

fn report(n: usize, pass: bool, detail: &str) {
    let line = format!(
        "criterion {n}: {} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn check(n: usize, failures: &[String], detail: String) {
    report(n, failures.is_empty(), &detail);
    assert!(failures.is_empty(), "criterion {n}: {failures:?}");
}

#[test]
fn criterion_01_gamma_constant() {
    let t0 = Instant::now();
    let g = gamma_constant();
    let secs = t0.elapsed().as_secs_f64();
    let mut f = Vec::new();
    if (g.gamma - 0.295).abs() > 1e-3 {
        f.push(format!("gamma {}", g.gamma));
    }
    if (g.threshold - 0.185).abs() > 1e-3 {
        f.push(format!("threshold {}", g.threshold));
    }
    if secs >= 1.0 {
        f.push(format!("took {secs:.2}s"));
    }
    check(1, &f, format!("gamma {:.6}, threshold {:.6}, {secs:.3}s", g.gamma, g.threshold));
}

/// Central differences of `kind` with respect to μ and σ.
fn fd_partials(kind: AcqKind<f64>, inp: &AcqInput<f64>) -> (f64, f64) {
    let h = 1e-6;
    let at = |mu: f64, sigma: f64| kind.value(&AcqInput::new(mu, sigma, inp.f_star));
    (
        (at(inp.mu + h, inp.sigma) - at(inp.mu - h, inp.sigma)) / (2.0 * h),
        (at(inp.mu, inp.sigma + h) - at(inp.mu, inp.sigma - h)) / (2.0 * h),
    )
}

#[test]
fn criterion_02_acquisition_gradients() {
    let t0 = Instant::now();
    let mut rng = StreamRng::seed_from_u64(2);
    let mut kinds = vec![("EI".to_string(), AcqKind::Ei), ("PI".to_string(), AcqKind::Pi)];
    for omega in [0.0, 0.1, 0.185, 0.5, 1.0] {
        kinds.push((format!("WEI({omega})"), AcqKind::Wei { omega }));
    }
    let mut f = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, kind) in &kinds {
        for _ in 0..100 {
            let sigma = rng.gen_range(0.2..2.0);
            let f_star = rng.gen_range(-2.0..2.0);
            let s = rng.gen_range(-3.0..3.0);
            let inp = AcqInput::new(f_star + s * sigma, sigma, f_star);
            let a = acq_partials(*kind, &inp);
            let n = fd_partials(*kind, &inp);
            for (x, y) in [(a.0, n.0), (a.1, n.1)] {
                // relative error; partials that vanish are compared at the 1e-4 scale
                let rel = (x - y).abs() / y.abs().max(1e-4);
                worst = worst.max(rel);
                if rel > 1e-5 {
                    f.push(format!("{name} at {inp:?}: {x} vs {y}"));
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    if secs >= 1.0 {
        f.push(format!("took {secs:.2}s"));
    }
    check(2, &f, format!("{} kinds x 100 points, worst relative error {worst:.2e}, {secs:.3}s", kinds.len()));
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn argmax_is_dominated(cands: &[Objectives<f64>], score: impl Fn(&Objectives<f64>) -> f64) -> bool {
    let i = argmax(&cands.iter().map(&score).collect::<Vec<_>>());
    !brute_nondominated(cands).contains(&i)
}

#[test]
fn criterion_03_dominance_properties() {
    let mut rng = StreamRng::seed_from_u64(3);
    let mut f = Vec::new();
    for trial in 0..1000 {
        let n = rng.gen_range(2..60);
        let cands: Vec<Objectives<f64>> = (0..n)
            .map(|_| Objectives {
                mu: rng.gen_range(-3.0..3.0),
                sigma: rng.gen_range(1e-3..2.0),
            })
            .collect();
        let f_star = rng.gen_range(-3.0..3.0);
        let beta = rng.gen_range(0.0..50.0);
        if argmax_is_dominated(&cands, |o| ei(&AcqInput::new(o.mu, o.sigma, f_star))) {
            f.push(format!("EI argmax dominated in trial {trial}"));
        }
        if argmax_is_dominated(&cands, |o| ucb(&AcqInput::new(o.mu, o.sigma, f_star), beta)) {
            f.push(format!("UCB argmax dominated in trial {trial}"));
        }
    }

    let f_star = 0.0;
    // PI with μ > f*: equal means, the smaller σ has the larger PI
    let pi_set = [Objectives { mu: 0.5, sigma: 1.0 }, Objectives { mu: 0.5, sigma: 0.25 }];
    let pi_w = argmax_is_dominated(&pi_set, |o| pi(&AcqInput::new(o.mu, o.sigma, f_star)));
    // ω = 1 for s > 0: WEI = (μ − f*)Φ(s) also prefers the smaller σ
    let w1_set = [Objectives { mu: 1.0, sigma: 1.0 }, Objectives { mu: 1.0, sigma: 0.5 }];
    let w1 = argmax_is_dominated(&w1_set, |o| wei(&AcqInput::new(o.mu, o.sigma, f_star), 1.0));
    // ω = 0.1 where ∂WEI/∂μ < 0: the smaller mean wins
    let w01_set = [Objectives { mu: 1.2, sigma: 1.0 }, Objectives { mu: 1.0, sigma: 1.0 }];
    let w01 = argmax_is_dominated(&w01_set, |o| wei(&AcqInput::new(o.mu, o.sigma, f_star), 0.1));
    for (name, ok) in [("PI", pi_w), ("WEI(1)", w1), ("WEI(0.1)", w01)] {
        if !ok {
            f.push(format!("{name} witness does not pick a dominated point"));
        }
    }
    check(
        3,
        &f,
        format!("1000 random sets: EI/UCB argmax always non-dominated; witnesses PI={pi_w}, WEI(1)={w1}, WEI(0.1)={w01}"),
    )
}

#[test]
fn criterion_04_gp_correctness() {
    let t0 = Instant::now();
    let mut rng = StreamRng::seed_from_u64(4);
    let mut f = Vec::new();
    let (mut worst_mu, mut worst_sd, mut worst_dense, mut worst_identity): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut failed_trials = std::collections::BTreeSet::new();
    let config = GpConfig::default();
    for trial in 0..40 {
        let d = rng.gen_range(1..=6);
        let m = rng.gen_range(2..=30);
        let x = spread_points(&mut rng, m, d, 0.05);
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|p| p.iter().zip(&w).map(|(a, b)| (3.0 * a * b).sin()).sum::<f64>() + p[0] * p[0])
            .collect();
        let ds = Dataset::unit_cube(x.clone(), y, Sense::Minimize).unwrap();
        // at a training input mu - y = -jitter * alpha exactly; the tolerance
        // therefore needs |alpha| <= 10, which smooth, densely sampled data breaks
        let ls: Vec<f64> = (0..d).map(|_| 10f64.powf(rng.gen_range(-1.3..-0.3))).collect();
        let th = Hyperparams::new(ls, 10f64.powf(rng.gen_range(-1.0..1.0)), 1e-6);
        let fitted = GpModel::fit(ds.clone(), &config, &mut rng, None).unwrap();
        for model in [GpModel::condition(ds, th).unwrap(), fitted.clone()] {
            for ((xi, yi), ai) in x.iter().zip(model.dataset().y()).zip(model.alpha()) {
                let p = model.predict(xi).unwrap();
                let err = (p.mu - yi).abs();
                worst_mu = worst_mu.max(err);
                worst_sd = worst_sd.max(p.sigma);
                worst_identity = worst_identity.max((p.mu - yi + 1e-6 * ai).abs());
                if (err > 1e-5 || p.sigma > 1e-2) && failed_trials.insert(trial) {
                    f.push(format!("trial {trial} (d={d}, M={m}): mu err {err:.2e}, sigma {:.2e}", p.sigma));
                }
            }
        }

        if m <= 10 {
            // fixed moderate hyperparameters so the dense inverse is itself accurate
            let ls: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
            let sf = rng.gen_range(0.5..2.0);
            let th = Hyperparams::new(ls.clone(), sf, 1e-6);
            let m2 = GpModel::condition(fitted.dataset().clone(), th).unwrap();
            for _ in 0..10 {
                let q: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
                let p = m2.predict(&q).unwrap();
                let (mu, var) = dense_posterior(&x, m2.dataset().y(), &ls, sf, 1e-6, &q);
                let err = (p.mu - mu).abs().max((p.sigma * p.sigma - var.max(0.0)).abs());
                worst_dense = worst_dense.max(err);
                if err > 1e-8 {
                    f.push(format!("trial {trial}: dense oracle mismatch {err:.2e}"));
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    if secs >= 30.0 {
        f.push(format!("took {secs:.1}s"));
    }
    check(
        4,
        &f,
        format!(
            "40 datasets x (random, fitted) hyperparameters: max |mu-y| {worst_mu:.1e} in {} trials over 1e-5, \
             max |mu-y+jitter*alpha| {worst_identity:.1e}, max sigma {worst_sd:.1e}, dense gap {worst_dense:.1e}; {secs:.1}s",
            failed_trials.len()
        ),
    );
}

#[test]
fn criterion_05_wilcoxon_holm_exactness() {
    let t0 = Instant::now();
    let mut rng = StreamRng::seed_from_u64(5);
    let mut f = Vec::new();
    let mut compared = 0;
    for n in 5..=12 {
        for _ in 0..200 {
            // coarse values so that zero differences and tied magnitudes occur
            let pairs: Vec<(f64, f64)> = (0..n)
                .map(|_| ((rng.gen_range(0..8) as f64) * 0.5, (rng.gen_range(0..8) as f64) * 0.5))
                .collect();
            let nonzero = pairs.iter().filter(|(a, b)| a != b).count();
            match wilcoxon_one_sided(&pairs) {
                Ok(r) => {
                    compared += 1;
                    let brute = wilcoxon_brute(&pairs);
                    if (r.p_value - brute).abs() > 1e-12 {
                        f.push(format!("n={n}: {} vs brute {brute} for {pairs:?}", r.p_value));
                    }
                }
                Err(_) if nonzero < 5 => {}
                Err(e) => f.push(format!("unexpected error {e}")),
            }
        }
    }
    for _ in 0..1000 {
        let m = rng.gen_range(1..12);
        let p: Vec<f64> = (0..m)
            .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.0..0.02) } else { rng.gen::<f64>() })
            .collect();
        if holm_bonferroni(&p, 0.05) != holm_textbook(&p, 0.05) {
            f.push(format!("holm mismatch on {p:?}"));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    if secs >= 30.0 {
        f.push(format!("took {secs:.1}s"));
    }
    check(
        5,
        &f,
        format!("{compared} paired datasets with n in 5..=12 match enumeration; 1000 Holm vectors match, {secs:.2}s"),
    );
}

#[test]
fn criterion_06_nsga2_front() {
    let t0 = Instant::now();
    let mut f = Vec::new();
    let params = MoeaParams::for_dim(1);
    let mut rng = StreamRng::seed_from_u64(6);
    let archive = nsga2(
        |x: &[f64]| Objectives { mu: x[0], sigma: 1.0 - x[0] },
        1,
        &params,
        &mut rng,
        &[],
    );
    let dev = archive
        .members
        .iter()
        .map(|m| (m.obj.mu + m.obj.sigma - 1.0).abs())
        .fold(0.0, f64::max);
    let lo = archive.members.iter().map(|m| m.obj.mu).fold(f64::MAX, f64::min);
    let hi = archive.members.iter().map(|m| m.obj.mu).fold(f64::MIN, f64::max);
    if dev > 0.01 {
        f.push(format!("deviation {dev}"));
    }
    if lo > 0.05 || hi < 0.95 {
        f.push(format!("coverage [{lo}, {hi}]"));
    }
    let mut rng = StreamRng::seed_from_u64(60);
    for _ in 0..200 {
        let n = rng.gen_range(1..=200);
        let pts = random_objectives(&mut rng, n);
        if fast_nondominated_sort(&pts) != peel_ranks(&pts) {
            f.push(format!("sort mismatch at n={n}"));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    if secs >= 30.0 {
        f.push(format!("took {secs:.1}s"));
    }
    check(
        6,
        &f,
        format!(
            "archive of {} on mu+sigma=1: deviation {dev:.1e}, mu range [{lo:.4}, {hi:.4}]; 200 sorts match peeling, {secs:.2}s",
            archive.len()
        ),
    );
}

fn final_regrets(records: &[RunRecord], strategy: Strategy) -> Vec<f64> {
    let mut rs: Vec<&RunRecord> = records.iter().filter(|r| r.strategy == strategy).collect();
    rs.sort_by_key(|r| r.repeat);
    rs.iter().map(|r| r.final_regret).collect()
}

fn run_matrix(problem: &str, strategies: &[Strategy], budget: usize, init: usize, repeats: usize) -> Vec<RunRecord> {
    let configs: Vec<ExperimentConfig> = strategies
        .iter()
        .map(|&s| ExperimentConfig {
            budget,
            init: Some(init),
            repeats,
            ..ExperimentConfig::new(problem, s)
        })
        .collect();
    run_configs(&configs, None, false)
        .into_iter()
        .map(|o| o.record.unwrap_or_else(|| panic!("run failed: {:?}", o.entry.error)))
        .collect()
}

#[test]
fn criterion_07_branin_convergence() {
    let t0 = Instant::now();
    let strategies = [
        Strategy::Ei,
        Strategy::EpsPf { eps: 0.1 },
        Strategy::EpsRs { eps: 0.1 },
        Strategy::Exploit,
    ];
    let records = run_matrix("Branin", &strategies, 100, 4, 11);
    let mut f = Vec::new();
    let mut parts = Vec::new();
    for s in strategies {
        let med = median(&final_regrets(&records, s));
        parts.push(format!("{s} {med:.2e}"));
        if !(med <= 1e-2) {
            f.push(format!("{s} median regret {med:e}"));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    check(7, &f, format!("median regret: {}; {:.0}s", parts.join(", "), secs));
}

#[test]
fn criterion_08_wangfreitas_contrast() {
    let t0 = Instant::now();
    let eps_rs = Strategy::EpsRs { eps: 0.1 };
    let records = run_matrix("WangFreitas", &[Strategy::Exploit, eps_rs], 150, 2, 11);
    let exploit = final_regrets(&records, Strategy::Exploit);
    let rs = final_regrets(&records, eps_rs);
    let (m_ex, m_rs) = (median(&exploit), median(&rs));
    let pairs: Vec<(f64, f64)> = rs.iter().copied().zip(exploit.iter().copied()).collect();
    let p = wilcoxon_one_sided(&pairs).map(|w| w.p_value);
    let found = rs.iter().filter(|r| **r < 1.0).count();
    let mut f = Vec::new();
    if !(m_ex >= 1.5) {
        f.push(format!("Exploit median {m_ex:e} < 1.5"));
    }
    if !(m_rs < m_ex) {
        f.push(format!("EpsRS median {m_rs:e} not below Exploit median {m_ex:e}"));
    }
    match &p {
        Ok(p) if *p < 0.2 => {}
        Ok(p) => f.push(format!("one-sided Wilcoxon p = {p:.3}")),
        Err(e) => f.push(format!("Wilcoxon: {e}")),
    }
    let secs = t0.elapsed().as_secs_f64();
    check(
        8,
        &f,
        format!(
            "median regret Exploit {m_ex:.10e}, EpsRS {m_rs:.10e}; EpsRS reached the global basin in {found}/11 runs; p = {}; {secs:.0}s",
            p.map_or_else(|e| e.to_string(), |p| format!("{p:.4}"))
        ),
    );
}

#[test]
fn criterion_09_epsilon_branch_frequency() {
    let t0 = Instant::now();
    let x = vec![vec![0.1, 0.2], vec![0.5, 0.9], vec![0.8, 0.4], vec![0.3, 0.6]];
    let ds = Dataset::unit_cube(x, vec![1.0, 0.2, -0.5, 0.7], Sense::Minimize).unwrap();
    let model = GpModel::condition(ds, Hyperparams::new(vec![0.3, 0.3], 1.0, 1e-6)).unwrap();
    // a small front keeps 10⁴ archive builds cheap; the coin does not depend on it
    let moea = MoeaParams {
        pop_size: 10,
        generations: 2,
        eval_budget_cap: 30,
        ..MoeaParams::for_dim(2)
    };
    let mut srng = StreamRng::seed_from_u64(9);
    let mut mrng = StreamRng::seed_from_u64(90);
    let n = 10_000;
    let mut f = Vec::new();
    let mut parts = Vec::new();
    for name in ["EpsPF", "EpsRS"] {
        let explored = (0..n)
            .filter(|_| {
                let tr = if name == "EpsPF" {
                    select_eps_pf(&model, 0.1, &mut srng, &mut mrng, &moea)
                } else {
                    select_eps_rs(&model, 0.1, &mut srng, &mut mrng, &moea)
                };
                tr.branch == Some(Branch::Explore)
            })
            .count();
        let frac = explored as f64 / n as f64;
        parts.push(format!("{name} {frac:.4}"));
        if !(0.08..=0.12).contains(&frac) {
            f.push(format!("{name} exploratory fraction {frac}"));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    if secs >= 60.0 {
        f.push(format!("took {secs:.1}s"));
    }
    check(9, &f, format!("exploratory fraction over 10^4 calls: {}; {secs:.1}s", parts.join(", ")));
}

#[test]
fn criterion_10_reproducibility() {
    let t0 = Instant::now();
    let mut f = Vec::new();
    let mut runs = 0;
    for (problem, budget) in [("Branin", 7), ("logHartmann6", 14)] {
        let mut designs: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
        for s in Strategy::all() {
            let config = ExperimentConfig {
                budget,
                master_seed: 2024,
                ..ExperimentConfig::new(problem, s)
            };
            let m = config.init_size(config.problem().unwrap().d);
            for repeat in 0..2 {
                let a = record_to_json(&run_bo(&config, repeat).unwrap());
                let b = run_bo(&config, repeat).unwrap();
                runs += 2;
                if a != record_to_json(&b) {
                    f.push(format!("{problem}/{s}/{repeat}: records differ between identical runs"));
                }
                let xs: Vec<Vec<f64>> = b.rows[..m].iter().map(|r| r.x.clone()).collect();
                match designs.iter().find(|(r, _)| *r == repeat) {
                    Some((_, d)) if *d != xs => f.push(format!("{problem}/{s}/{repeat}: initial design differs")),
                    Some(_) => {}
                    None => designs.push((repeat, xs)),
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    check(
        10,
        &f,
        format!("{runs} runs over 10 strategies x 2 problems x 2 repeats byte-identical, shared designs; {secs:.1}s"),
    );
}
