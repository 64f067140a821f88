use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Posterior mean and standard deviation, both to be maximised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives<T> {
    pub mu: T,
    pub sigma: T,
}

impl<T: Scalar> Objectives<T> {
    pub fn new(mu: T, sigma: T) -> Self {
        Self { mu, sigma }
    }
}

/// `a` dominates `b`: no worse in both objectives and not equal in both.
#[inline]
pub fn dominates<T: Scalar>(a: &Objectives<T>, b: &Objectives<T>) -> bool {
    a.mu >= b.mu && a.sigma >= b.sigma && (a.mu > b.mu || a.sigma > b.sigma)
}

/// Indices of the points not dominated by any other point of the list.
///
/// Sorts by `μ` descending (ties broken by `σ` descending) and sweeps the
/// running maximum of `σ`, which is `O(n log n)` for two objectives.
/// Duplicates of a non-dominated point are all kept. Output is ascending.
pub fn non_dominated_filter<T: Scalar>(points: &[Objectives<T>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&points[i], &points[j]);
        b.mu.partial_cmp(&a.mu)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.sigma.partial_cmp(&a.sigma).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut keep = Vec::new();
    let mut best_sigma = T::neg_infinity();
    // members of the current group of identical μ
    let mut k = 0;
    while k < order.len() {
        let mu = points[order[k]].mu;
        let group_end = order[k..]
            .iter()
            .position(|&i| points[i].mu != mu)
            .map_or(order.len(), |p| k + p);
        // within the group the first σ is the largest; only points with that σ survive
        let top = points[order[k]].sigma;
        if top > best_sigma {
            for &i in &order[k..group_end] {
                if points[i].sigma == top {
                    keep.push(i);
                }
            }
        }
        best_sigma = best_sigma.max(top);
        k = group_end;
    }
    keep.sort_unstable();
    keep
}

/// Fast non-dominated sort: `ranks[i] = 0` for the non-dominated set, `k`
/// for points that become non-dominated once ranks `< k` are removed.
pub fn fast_nondominated_sort<T: Scalar>(points: &[Objectives<T>]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut ranks = vec![usize::MAX; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut rank = 0;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            ranks[i] = rank;
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        rank += 1;
        front = next;
    }
    ranks
}

/// Crowding distance of each member of one front (indices into `points`).
/// Boundary members of either objective get `+∞`; interior members sum the
/// normalised side lengths of their neighbouring cuboid.
pub fn crowding_distance<T: Scalar>(points: &[Objectives<T>], front: &[usize]) -> Vec<T> {
    let m = front.len();
    let mut dist = vec![T::zero(); m];
    if m <= 2 {
        return vec![T::infinity(); m];
    }
    let getters: [fn(&Objectives<T>) -> T; 2] = [|o| o.mu, |o| o.sigma];
    for get in getters {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            get(&points[front[a]])
                .partial_cmp(&get(&points[front[b]]))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let lo = get(&points[front[order[0]]]);
        let hi = get(&points[front[order[m - 1]]]);
        dist[order[0]] = T::infinity();
        dist[order[m - 1]] = T::infinity();
        let span = hi - lo;
        if span <= T::zero() {
            continue;
        }
        for w in 1..(m - 1) {
            let prev = get(&points[front[order[w - 1]]]);
            let next = get(&points[front[order[w + 1]]]);
            dist[order[w]] = dist[order[w]] + (next - prev) / span;
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(mu: f64, sigma: f64) -> Objectives<f64> {
        Objectives::new(mu, sigma)
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&o(1.5, 1.5), &o(1.0, 1.0)));
        assert!(!dominates(&o(2.0, 0.5), &o(0.5, 2.0)));
        assert!(!dominates(&o(0.5, 2.0), &o(2.0, 0.5)));
        assert!(!dominates(&o(1.0, 1.0), &o(1.0, 1.0)));
        assert!(dominates(&o(1.0, 1.5), &o(1.0, 1.0)));
    }

    #[test]
    fn filter_examples() {
        let pts = [o(1.0, 1.0), o(2.0, 0.5), o(0.5, 2.0), o(1.5, 1.5)];
        assert_eq!(non_dominated_filter(&pts), vec![1, 2, 3]);
        assert_eq!(non_dominated_filter(&[o(3.0, -1.0)]), vec![0]);
        let dup = [o(1.0, 1.0), o(1.0, 1.0), o(0.5, 0.5)];
        assert_eq!(non_dominated_filter(&dup), vec![0, 1]);
    }

    #[test]
    fn sort_example() {
        let pts = [o(1.0, 1.0), o(2.0, 0.5), o(0.5, 2.0), o(1.5, 1.5)];
        assert_eq!(fast_nondominated_sort(&pts), vec![1, 0, 0, 0]);
    }

    #[test]
    fn crowding_boundaries_are_infinite() {
        let pts = [o(0.0, 1.0), o(0.5, 0.5), o(1.0, 0.0)];
        let d = crowding_distance(&pts, &[0, 1, 2]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-15);
    }
}
