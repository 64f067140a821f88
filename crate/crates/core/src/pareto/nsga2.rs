use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dominance::{crowding_distance, dominates, fast_nondominated_sort, Objectives};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoeaParams {
    pub pop_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
    pub eval_budget_cap: usize,
}

impl MoeaParams {
    /// Population `100d`, 50 generations, crossover 0.8, mutation `1/d`,
    /// distribution indices 20, at most `5000d` evaluations.
    pub fn for_dim(d: usize) -> Self {
        let d = d.max(1);
        Self {
            pop_size: 100 * d,
            generations: 50,
            crossover_prob: 0.8,
            mutation_prob: 1.0 / d as f64,
            eta_crossover: 20.0,
            eta_mutation: 20.0,
            eval_budget_cap: 5000 * d,
        }
    }

    /// Generations that fit in the evaluation cap after the initial population.
    pub fn effective_generations(&self) -> usize {
        let after_init = self.eval_budget_cap.saturating_sub(self.pop_size);
        self.generations.min(after_init / self.pop_size.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<T> {
    pub x: Vec<T>,
    pub obj: Objectives<T>,
    pub rank: usize,
    pub crowding: T,
}

/// Mutually non-dominated members of a final NSGA-II population.
#[derive(Debug, Clone)]
pub struct ParetoArchive<T> {
    pub members: Vec<Individual<T>>,
    pub evaluations: usize,
    pub generations: usize,
}

impl<T: Scalar> ParetoArchive<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member maximising `score`; the first on ties.
    pub fn argmax_by<F: Fn(&Individual<T>) -> T>(&self, score: F) -> Option<&Individual<T>> {
        let mut best: Option<(&Individual<T>, T)> = None;
        for m in &self.members {
            let v = score(m);
            if best.as_ref().map_or(true, |(_, b)| v > *b) {
                best = Some((m, v));
            }
        }
        best.map(|(m, _)| m)
    }

    /// The exploitative extreme: largest `μ`.
    pub fn best_mu(&self) -> Option<&Individual<T>> {
        self.argmax_by(|m| m.obj.mu)
    }

    /// The exploratory extreme: largest `σ`.
    pub fn best_sigma(&self) -> Option<&Individual<T>> {
        self.argmax_by(|m| m.obj.sigma)
    }
}

/// Simulated binary crossover on the unit cube. Each coordinate is recombined
/// with probability ½ once the pair is selected for crossover (`prob`).
pub fn sbx_crossover<T: Scalar, R: Rng + ?Sized>(
    p1: &[T],
    p2: &[T],
    eta: f64,
    prob: f64,
    rng: &mut R,
) -> (Vec<T>, Vec<T>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.gen::<f64>() > prob {
        return (c1, c2);
    }
    let (xl, xu) = (0.0_f64, 1.0_f64);
    for i in 0..p1.len() {
        if rng.gen::<f64>() > 0.5 {
            continue;
        }
        let (a, b) = (p1[i].as_f64(), p2[i].as_f64());
        if (a - b).abs() <= 1e-14 {
            continue;
        }
        let (x1, x2) = (a.min(b), a.max(b));
        let u = rng.gen::<f64>();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = spread(1.0 + 2.0 * (x1 - xl) / (x2 - x1));
        let bq2 = spread(1.0 + 2.0 * (xu - x2) / (x2 - x1));
        let mut v1 = (0.5 * (x1 + x2 - bq1 * (x2 - x1))).clamp(xl, xu);
        let mut v2 = (0.5 * (x1 + x2 + bq2 * (x2 - x1))).clamp(xl, xu);
        if rng.gen::<f64>() < 0.5 {
            std::mem::swap(&mut v1, &mut v2);
        }
        c1[i] = T::lit(v1);
        c2[i] = T::lit(v2);
    }
    (c1, c2)
}

/// Bounded polynomial mutation on the unit cube, per coordinate with probability `prob`.
pub fn polynomial_mutation<T: Scalar, R: Rng + ?Sized>(
    x: &[T],
    eta: f64,
    prob: f64,
    rng: &mut R,
) -> Vec<T> {
    let mut out = x.to_vec();
    if prob <= 0.0 {
        return out;
    }
    let pow = 1.0 / (eta + 1.0);
    for v in out.iter_mut() {
        if rng.gen::<f64>() >= prob {
            continue;
        }
        let xv = v.as_f64();
        let (d1, d2) = (xv, 1.0 - xv);
        let u = rng.gen::<f64>();
        let dq = if u < 0.5 {
            let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            val.powf(pow) - 1.0
        } else {
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - val.powf(pow)
        };
        *v = T::lit((xv + dq).clamp(0.0, 1.0));
    }
    out
}

fn assign_rank_crowding<T: Scalar>(pop: &mut [Individual<T>]) {
    let objs: Vec<Objectives<T>> = pop.iter().map(|p| p.obj).collect();
    let ranks = fast_nondominated_sort(&objs);
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let mut fronts: Vec<Vec<usize>> = vec![Vec::new(); max_rank + 1];
    for (i, &r) in ranks.iter().enumerate() {
        fronts[r].push(i);
        pop[i].rank = r;
    }
    for front in &fronts {
        let cd = crowding_distance(&objs, front);
        for (&i, c) in front.iter().zip(cd) {
            pop[i].crowding = c;
        }
    }
}

/// `a` is preferred to `b` in crowded comparison: lower rank, then larger crowding.
fn crowded_better<T: Scalar>(a: &Individual<T>, b: &Individual<T>) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding)
}

fn tournament<'a, T: Scalar, R: Rng + ?Sized>(pop: &'a [Individual<T>], rng: &mut R) -> &'a Individual<T> {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    if crowded_better(b, a) {
        b
    } else {
        a
    }
}

/// Truncates the combined population to `n` by rank, then crowding.
fn environmental_selection<T: Scalar>(mut pop: Vec<Individual<T>>, n: usize) -> Vec<Individual<T>> {
    assign_rank_crowding(&mut pop);
    // stable sort keeps insertion order among exact ties
    pop.sort_by(|a, b| {
        a.rank.cmp(&b.rank).then(
            b.crowding
                .partial_cmp(&a.crowding)
                .unwrap_or(std::cmp::Ordering::Equal),
        )
    });
    pop.truncate(n);
    assign_rank_crowding(&mut pop);
    pop
}

/// Approximates the set maximising `(μ, σ)` jointly over `[0,1]^d`.
///
/// `seeds` replace the first members of the otherwise uniform initial
/// population. The returned archive is the rank-0 set of the final
/// population; evaluator calls never exceed `params.eval_budget_cap`.
pub fn nsga2<T, F, R>(
    mut evaluator: F,
    d: usize,
    params: &MoeaParams,
    rng: &mut R,
    seeds: &[Vec<T>],
) -> ParetoArchive<T>
where
    T: Scalar,
    F: FnMut(&[T]) -> Objectives<T>,
    R: Rng + ?Sized,
{
    let n = params.pop_size.max(2) & !1;
    let generations = params.effective_generations();
    let mut evaluations = 0;
    let mut make = |x: Vec<T>, evaluations: &mut usize| {
        *evaluations += 1;
        let obj = evaluator(&x);
        Individual {
            x,
            obj,
            rank: 0,
            crowding: T::zero(),
        }
    };

    let mut pop: Vec<Individual<T>> = Vec::with_capacity(2 * n);
    for s in seeds.iter().take(n) {
        debug_assert_eq!(s.len(), d);
        let x = s.iter().map(|&v| v.max(T::zero()).min(T::one())).collect();
        pop.push(make(x, &mut evaluations));
    }
    while pop.len() < n {
        let x = (0..d).map(|_| T::lit(rng.gen::<f64>())).collect();
        pop.push(make(x, &mut evaluations));
    }
    assign_rank_crowding(&mut pop);

    for _ in 0..generations {
        let mut offspring = Vec::with_capacity(n);
        while offspring.len() < n {
            let p1 = tournament(&pop, rng).x.clone();
            let p2 = tournament(&pop, rng).x.clone();
            let (c1, c2) = sbx_crossover(&p1, &p2, params.eta_crossover, params.crossover_prob, rng);
            for c in [c1, c2] {
                if offspring.len() < n {
                    let c = polynomial_mutation(&c, params.eta_mutation, params.mutation_prob, rng);
                    offspring.push(c);
                }
            }
        }
        pop.extend(offspring.into_iter().map(|x| make(x, &mut evaluations)));
        pop = environmental_selection(pop, n);
    }

    let members: Vec<Individual<T>> = pop.into_iter().filter(|p| p.rank == 0).collect();
    debug_assert!(members
        .iter()
        .all(|a| members.iter().all(|b| !dominates(&a.obj, &b.obj))));
    ParetoArchive {
        members,
        evaluations,
        generations,
    }
}
