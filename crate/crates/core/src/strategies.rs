//! Selection policies: each maps a fitted model to the next point to
//! evaluate.
//!
//! Randomness is split over two streams. The strategy stream drives the ε
//! coin, uniform draws and picks among archive members; the moea stream
//! drives NSGA-II. The coin is drawn before any archive is built, so ε-RS
//! skips NSGA-II entirely on its exploratory steps and ε = 0 reproduces
//! Exploit exactly.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{beta_schedule, ei, pi, ucb, AcqInput, UcbSchedule};
use crate::error::{Error, Result};
use crate::gp::{Dataset, GpModel};
use crate::optim::{minimize_box, numeric_gradient, LbfgsOptions};
use crate::pareto::{nsga2, MoeaParams, Objectives, ParetoArchive};
use crate::scalar::{sq_dist, Scalar};

pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// I.i.d. uniform points after the initial design.
    Uniform,
    /// Continues the initial design as a max-min Latin hypercube of size `T`.
    Lhs,
    Explore,
    Exploit,
    Ei,
    Pi,
    Ucb,
    PfRandom,
    EpsPf { eps: f64 },
    EpsRs { eps: f64 },
}

impl Strategy {
    /// Every registered strategy with default ε.
    pub fn all() -> Vec<Strategy> {
        vec![
            Strategy::Uniform,
            Strategy::Lhs,
            Strategy::Explore,
            Strategy::Exploit,
            Strategy::Ei,
            Strategy::Pi,
            Strategy::Ucb,
            Strategy::PfRandom,
            Strategy::EpsPf { eps: DEFAULT_EPSILON },
            Strategy::EpsRs { eps: DEFAULT_EPSILON },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Uniform => "Uniform",
            Strategy::Lhs => "LHS",
            Strategy::Explore => "Explore",
            Strategy::Exploit => "Exploit",
            Strategy::Ei => "EI",
            Strategy::Pi => "PI",
            Strategy::Ucb => "UCB",
            Strategy::PfRandom => "PFRandom",
            Strategy::EpsPf { .. } => "EpsPF",
            Strategy::EpsRs { .. } => "EpsRS",
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            Strategy::EpsPf { eps } | Strategy::EpsRs { eps } => Some(eps),
            _ => None,
        }
    }

    /// Same strategy with ε replaced; no-op for the others.
    pub fn with_epsilon(self, eps: f64) -> Self {
        match self {
            Strategy::EpsPf { .. } => Strategy::EpsPf { eps },
            Strategy::EpsRs { .. } => Strategy::EpsRs { eps },
            s => s,
        }
    }

    /// Whether a GP has to be fitted before each selection.
    pub fn needs_model(&self) -> bool {
        !matches!(self, Strategy::Uniform | Strategy::Lhs)
    }

    fn validate(self) -> Result<Self> {
        if let Some(e) = self.epsilon() {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidParameter(format!("epsilon {e} outside [0, 1]")));
            }
        }
        Ok(self)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.epsilon() {
            Some(e) => write!(f, "{}:{}", self.name(), e),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Case-insensitive; ε-variants accept `EpsPF`, `EpsPF:0.05` or `EpsPF(0.05)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, eps) = match s.find([':', '(']) {
            Some(i) => {
                let v = s[i + 1..].trim_end_matches(')').trim();
                let e: f64 = v
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad epsilon in {s:?}")))?;
                (&s[..i], Some(e))
            }
            None => (s, None),
        };
        let key: String = head
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let strat = match key.as_str() {
            "uniform" | "random" => Strategy::Uniform,
            "lhs" => Strategy::Lhs,
            "explore" => Strategy::Explore,
            "exploit" => Strategy::Exploit,
            "ei" => Strategy::Ei,
            "pi" => Strategy::Pi,
            "ucb" => Strategy::Ucb,
            "pfrandom" => Strategy::PfRandom,
            "epspf" => Strategy::EpsPf { eps: DEFAULT_EPSILON },
            "epsrs" => Strategy::EpsRs { eps: DEFAULT_EPSILON },
            _ => return Err(Error::UnknownStrategy(s.to_string())),
        };
        match eps {
            Some(_) if strat.epsilon().is_none() => Err(Error::InvalidParameter(format!(
                "{} takes no epsilon",
                strat.name()
            ))),
            Some(e) => strat.with_epsilon(e).validate(),
            None => Ok(strat),
        }
    }
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Greedy,
    Explore,
}

/// What a selection did, for the run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrace<T> {
    pub x: Vec<T>,
    /// Set for ε-greedy strategies only.
    pub branch: Option<Branch>,
    /// Size of the NSGA-II archive, 0 when none was built.
    pub archive_size: usize,
    /// Criterion value at `x` where one applies (μ for Exploit, σ for
    /// Explore, EI, PI, UCB).
    pub acq_value: Option<T>,
}

/// Criteria maximised over the NSGA-II archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchiveCriterion {
    Ei,
    Ucb,
    Exploit,
    Explore,
}

fn evaluator<T: Scalar>(model: &GpModel<T>) -> impl FnMut(&[T]) -> Objectives<T> + '_ {
    move |x: &[T]| {
        let p = model
            .predict(x)
            .expect("NSGA-II keeps candidates inside the unit cube");
        Objectives {
            mu: p.mu,
            sigma: p.sigma,
        }
    }
}

/// NSGA-II over `(μ, σ)`, seeded with the incumbent best observation.
pub fn build_archive<T: Scalar, R: Rng + ?Sized>(
    model: &GpModel<T>,
    moea: &MoeaParams,
    rng: &mut R,
) -> ParetoArchive<T> {
    let ds = model.dataset();
    let seed = ds.x()[ds.best_index()].clone();
    nsga2(evaluator(model), ds.dim(), moea, rng, &[seed])
}

fn exploit_from<T: Scalar>(archive: &ParetoArchive<T>) -> SelectionTrace<T> {
    let m = archive.best_mu().expect("NSGA-II archive is never empty");
    SelectionTrace {
        x: m.x.clone(),
        branch: None,
        archive_size: archive.len(),
        acq_value: Some(m.obj.mu),
    }
}

fn random_member<T: Scalar, R: Rng + ?Sized>(archive: &ParetoArchive<T>, rng: &mut R) -> SelectionTrace<T> {
    let m = &archive.members[rng.gen_range(0..archive.len())];
    SelectionTrace {
        x: m.x.clone(),
        branch: None,
        archive_size: archive.len(),
        acq_value: None,
    }
}

/// UCB trade-off `β_t` for the evaluation counter `t`.
pub fn ucb_beta(d: usize, t: usize) -> Result<f64> {
    beta_schedule(&UcbSchedule::standard(d, t.max(1)))
}

/// Builds the archive and returns the member maximising `criterion`.
/// `t` is the index of the evaluation being chosen (used by UCB only).
pub fn select_scalar_acq<T: Scalar, R: Rng + ?Sized>(
    model: &GpModel<T>,
    criterion: ArchiveCriterion,
    t: usize,
    moea_rng: &mut R,
    moea: &MoeaParams,
) -> Result<SelectionTrace<T>> {
    let archive = build_archive(model, moea, moea_rng);
    let f_star = model.dataset().f_star();
    let beta = match criterion {
        ArchiveCriterion::Ucb => T::lit(ucb_beta(model.dim(), t)?),
        _ => T::zero(),
    };
    let score = |o: &Objectives<T>| match criterion {
        ArchiveCriterion::Ei => ei(&AcqInput::new(o.mu, o.sigma, f_star)),
        ArchiveCriterion::Ucb => ucb(&AcqInput::new(o.mu, o.sigma, f_star), beta),
        ArchiveCriterion::Exploit => o.mu,
        ArchiveCriterion::Explore => o.sigma,
    };
    let m = archive
        .argmax_by(|m| score(&m.obj))
        .expect("NSGA-II archive is never empty");
    Ok(SelectionTrace {
        x: m.x.clone(),
        branch: None,
        archive_size: archive.len(),
        acq_value: Some(score(&m.obj)),
    })
}

/// ε-PF: with probability ε a uniformly chosen archive member, otherwise the
/// archive's best-μ member.
pub fn select_eps_pf<T: Scalar, R1: Rng + ?Sized, R2: Rng + ?Sized>(
    model: &GpModel<T>,
    epsilon: f64,
    strategy_rng: &mut R1,
    moea_rng: &mut R2,
    moea: &MoeaParams,
) -> SelectionTrace<T> {
    let explore = strategy_rng.gen::<f64>() < epsilon;
    let archive = build_archive(model, moea, moea_rng);
    let mut tr = if explore {
        random_member(&archive, strategy_rng)
    } else {
        exploit_from(&archive)
    };
    tr.branch = Some(if explore { Branch::Explore } else { Branch::Greedy });
    tr
}

/// ε-RS: with probability ε a uniform point of the cube, otherwise the
/// archive's best-μ member.
pub fn select_eps_rs<T: Scalar, R1: Rng + ?Sized, R2: Rng + ?Sized>(
    model: &GpModel<T>,
    epsilon: f64,
    strategy_rng: &mut R1,
    moea_rng: &mut R2,
    moea: &MoeaParams,
) -> SelectionTrace<T> {
    if strategy_rng.gen::<f64>() < epsilon {
        let x = (0..model.dim()).map(|_| T::lit(strategy_rng.gen::<f64>())).collect();
        return SelectionTrace {
            x,
            branch: Some(Branch::Explore),
            archive_size: 0,
            acq_value: None,
        };
    }
    let mut tr = exploit_from(&build_archive(model, moea, moea_rng));
    tr.branch = Some(Branch::Greedy);
    tr
}

/// A uniformly chosen member of the NSGA-II archive.
pub fn select_pf_random<T: Scalar, R1: Rng + ?Sized, R2: Rng + ?Sized>(
    model: &GpModel<T>,
    strategy_rng: &mut R1,
    moea_rng: &mut R2,
    moea: &MoeaParams,
) -> SelectionTrace<T> {
    random_member(&build_archive(model, moea, moea_rng), strategy_rng)
}

/// Sampling effort for PI maximisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiSearch {
    pub samples_per_dim: usize,
    pub refine: usize,
    pub budget_per_dim: usize,
}

impl Default for PiSearch {
    fn default() -> Self {
        Self {
            samples_per_dim: 1000,
            refine: 10,
            budget_per_dim: 5000,
        }
    }
}

/// PI maximisation: uniform samples, then bounded quasi-Newton climbs with
/// central-difference gradients from the best few. Model evaluations never
/// exceed `budget_per_dim · d`; ties keep the first sample.
pub fn select_pi<T: Scalar, R: Rng + ?Sized>(
    model: &GpModel<T>,
    rng: &mut R,
    search: &PiSearch,
) -> SelectionTrace<T> {
    let d = model.dim();
    let f_star = model.dataset().f_star();
    let budget = search.budget_per_dim * d;
    let used = Cell::new(0usize);
    let value = |x: &[T]| {
        used.set(used.get() + 1);
        let p = model.predict(x).expect("PI search stays in the unit cube");
        pi(&AcqInput::new(p.mu, p.sigma, f_star))
    };

    let n = (search.samples_per_dim * d).min(budget).max(1);
    let mut samples: Vec<(Vec<T>, T)> = (0..n)
        .map(|_| {
            let x: Vec<T> = (0..d).map(|_| T::lit(rng.gen::<f64>())).collect();
            let v = value(&x);
            (x, v)
        })
        .collect();
    // stable sort keeps sampling order among equal values
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| samples[b].1.partial_cmp(&samples[a].1).unwrap_or(std::cmp::Ordering::Equal));
    let mut best = order[0];

    let lower = vec![T::zero(); d];
    let upper = vec![T::one(); d];
    let h = T::lit(1e-6);
    let starts: Vec<usize> = order.iter().copied().take(search.refine).collect();
    let per_start = budget.saturating_sub(n) / starts.len().max(1);
    let evals_per_call = 1 + 2 * d;
    let mut refined: Vec<(Vec<T>, T)> = Vec::new();
    for &i in &starts {
        let max_evals = per_start / evals_per_call;
        if max_evals < 2 {
            break;
        }
        let opts = LbfgsOptions {
            max_iters: 50,
            max_evals,
            gtol: 1e-8,
            ..Default::default()
        };
        let objective = |x: &[T]| {
            let mut neg = |z: &[T]| -value(z);
            let v = neg(x);
            let g = numeric_gradient(&mut neg, x, &lower, &upper, h);
            Some((v, g))
        };
        if let Some(m) = minimize_box(objective, &samples[i].0, &lower, &upper, &opts) {
            refined.push((m.x, -m.value));
        }
    }
    debug_assert!(used.get() <= budget);
    for r in refined {
        if r.1 > samples[best].1 {
            samples.push(r);
            best = samples.len() - 1;
        }
    }
    let (x, v) = samples.swap_remove(best);
    SelectionTrace {
        x,
        branch: None,
        archive_size: 0,
        acq_value: Some(v),
    }
}

/// Minimum distance below which a proposal counts as a re-proposal.
pub const DUPLICATE_TOL: f64 = 1e-8;
pub const DUPLICATE_RADIUS: f64 = 1e-6;

/// Nudges `x` by uniform noise of radius `1e-6` when it is within `1e-8` of
/// an existing input. Components that would leave the cube are reflected.
/// Returns whether the point was moved.
pub fn duplicate_guard<T: Scalar, R: Rng + ?Sized>(x: &mut [T], dataset: &Dataset<T>, rng: &mut R) -> bool {
    let tol = T::lit(DUPLICATE_TOL * DUPLICATE_TOL);
    if !dataset.x().iter().any(|row| sq_dist(row, x) < tol) {
        return false;
    }
    for v in x.iter_mut() {
        let noise = T::lit(rng.gen_range(-DUPLICATE_RADIUS..=DUPLICATE_RADIUS));
        let mut moved = *v + noise;
        if moved < T::zero() || moved > T::one() {
            moved = *v - noise;
        }
        *v = moved.max(T::zero()).min(T::one());
    }
    true
}

/// Runs one model-based strategy. `Uniform` and `Lhs` need no model and are
/// handled by the caller.
pub fn select<T: Scalar, R1: Rng + ?Sized, R2: Rng + ?Sized>(
    strategy: Strategy,
    model: &GpModel<T>,
    t: usize,
    strategy_rng: &mut R1,
    moea_rng: &mut R2,
    moea: &MoeaParams,
    pi_search: &PiSearch,
) -> Result<SelectionTrace<T>> {
    Ok(match strategy {
        Strategy::Uniform | Strategy::Lhs => {
            return Err(Error::InvalidArgument(format!("{strategy} does not select from a model")))
        }
        Strategy::Explore => select_scalar_acq(model, ArchiveCriterion::Explore, t, moea_rng, moea)?,
        Strategy::Exploit => select_scalar_acq(model, ArchiveCriterion::Exploit, t, moea_rng, moea)?,
        Strategy::Ei => select_scalar_acq(model, ArchiveCriterion::Ei, t, moea_rng, moea)?,
        Strategy::Ucb => select_scalar_acq(model, ArchiveCriterion::Ucb, t, moea_rng, moea)?,
        Strategy::Pi => select_pi(model, strategy_rng, pi_search),
        Strategy::PfRandom => select_pf_random(model, strategy_rng, moea_rng, moea),
        Strategy::EpsPf { eps } => select_eps_pf(model, eps, strategy_rng, moea_rng, moea),
        Strategy::EpsRs { eps } => select_eps_rs(model, eps, strategy_rng, moea_rng, moea),
    })
}
