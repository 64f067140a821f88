//! Box-constrained limited-memory quasi-Newton minimisation.
//!
//! A projected L-BFGS: variables sitting on a bound whose gradient points
//! outward are frozen for the step, the two-loop recursion runs on the free
//! subspace and an Armijo backtracking search follows the projected path.
//! This is enough for the low-dimensional, smooth objectives in this crate
//! (GP log-likelihood in log-hyperparameter space, PI over the unit cube).

use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub max_iters: usize,
    pub memory: usize,
    /// Stop when the projected gradient's infinity norm falls below this.
    pub gtol: f64,
    /// Stop when the relative decrease of the objective falls below this.
    pub ftol: f64,
    /// Upper bound on objective evaluations, including line-search trials.
    pub max_evals: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            memory: 8,
            gtol: 1e-6,
            ftol: 1e-10,
            max_evals: usize::MAX,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
}

fn project<T: Scalar>(x: &mut [T], lower: &[T], upper: &[T]) {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.max(lo).min(hi);
    }
}

/// Minimises `f` over the box `[lower, upper]` starting from `x0`.
///
/// `f` returns `None` where the objective is undefined; such points are
/// treated as `+∞` by the line search. Returns `None` when `x0` itself is
/// undefined.
pub fn minimize_box<T, F>(
    mut f: F,
    x0: &[T],
    lower: &[T],
    upper: &[T],
    opts: &LbfgsOptions,
) -> Option<Minimum<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<(T, Vec<T>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let mut evals = 1;
    let (mut fx, mut g) = f(&x)?;
    if !fx.is_finite() {
        return None;
    }

    let mut s_hist: Vec<Vec<T>> = Vec::new();
    let mut y_hist: Vec<Vec<T>> = Vec::new();
    let mut iters = 0;
    let gtol = T::lit(opts.gtol);
    let ftol = T::lit(opts.ftol);
    let c1 = T::lit(1e-4);
    let half = T::lit(0.5);

    while iters < opts.max_iters && evals < opts.max_evals {
        // variables pinned at a bound with the gradient pushing outward
        let free: Vec<bool> = (0..n)
            .map(|i| {
                let at_lo = x[i] <= lower[i] && g[i] > T::zero();
                let at_hi = x[i] >= upper[i] && g[i] < T::zero();
                !(at_lo || at_hi)
            })
            .collect();
        let pg_norm = (0..n)
            .filter(|&i| free[i])
            .fold(T::zero(), |m, i| m.max(g[i].abs()));
        if pg_norm < gtol {
            break;
        }

        let masked = |v: &[T]| -> Vec<T> {
            v.iter()
                .zip(&free)
                .map(|(&vi, &fr)| if fr { vi } else { T::zero() })
                .collect()
        };

        // two-loop recursion on the free subspace
        let mut q = masked(&g);
        let m = s_hist.len();
        let mut alphas = vec![T::zero(); m];
        let mut rhos = vec![T::zero(); m];
        for k in (0..m).rev() {
            let sk = masked(&s_hist[k]);
            let yk = masked(&y_hist[k]);
            let sy = dot(&sk, &yk);
            if sy <= T::zero() {
                continue;
            }
            rhos[k] = T::one() / sy;
            alphas[k] = rhos[k] * dot(&sk, &q);
            for i in 0..n {
                q[i] = q[i] - alphas[k] * yk[i];
            }
        }
        let gamma = if m > 0 {
            let sk = masked(&s_hist[m - 1]);
            let yk = masked(&y_hist[m - 1]);
            let yy = dot(&yk, &yk);
            let sy = dot(&sk, &yk);
            if yy > T::zero() && sy > T::zero() {
                sy / yy
            } else {
                T::one()
            }
        } else {
            // first step: unit-length move along the steepest descent direction
            T::one() / pg_norm.max(T::lit(1e-12))
        };
        for qi in q.iter_mut() {
            *qi = *qi * gamma;
        }
        for k in 0..m {
            if rhos[k] == T::zero() {
                continue;
            }
            let sk = masked(&s_hist[k]);
            let yk = masked(&y_hist[k]);
            let beta = rhos[k] * dot(&yk, &q);
            for i in 0..n {
                q[i] = q[i] + (alphas[k] - beta) * sk[i];
            }
        }
        let mut dir: Vec<T> = q.iter().map(|&v| -v).collect();
        let mut slope = dot(&dir, &g);
        if !(slope < T::zero()) {
            dir = masked(&g).iter().map(|&v| -v).collect();
            slope = dot(&dir, &g);
            s_hist.clear();
            y_hist.clear();
            if !(slope < T::zero()) {
                break;
            }
        }

        // backtracking along the projected path
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..30 {
            if evals >= opts.max_evals {
                break;
            }
            let mut xn: Vec<T> = x.iter().zip(&dir).map(|(&xi, &di)| xi + step * di).collect();
            project(&mut xn, lower, upper);
            let moved: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
            let decrease = dot(&moved, &g);
            evals += 1;
            if let Some((fn_, gn)) = f(&xn) {
                if fn_.is_finite() && fn_ <= fx + c1 * decrease.min(T::zero()) {
                    accepted = Some((xn, fn_, gn));
                    break;
                }
            }
            step = step * half;
        }
        let Some((xn, fn_, gn)) = accepted else {
            break;
        };
        iters += 1;

        let s: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = gn.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        if dot(&s, &y) > T::lit(1e-12) * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        let rel = (fx - fn_).abs() / (T::one() + fx.abs());
        x = xn;
        fx = fn_;
        g = gn;
        if rel < ftol {
            break;
        }
    }

    Some(Minimum {
        x,
        value: fx,
        iterations: iters,
        evaluations: evals,
    })
}

/// Central-difference gradient, with one-sided steps at the box faces.
pub fn numeric_gradient<T, F>(f: &mut F, x: &[T], lower: &[T], upper: &[T], h: T) -> Vec<T>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let mut g = vec![T::zero(); x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let hi = (x[i] + h).min(upper[i]);
        let lo = (x[i] - h).max(lower[i]);
        if hi <= lo {
            continue;
        }
        xp[i] = hi;
        let fp = f(&xp);
        xp[i] = lo;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (hi - lo);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_unconstrained_minimum() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            Some((v, g))
        };
        let r = minimize_box(
            f,
            &[-1.2, 1.0],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &LbfgsOptions {
                max_iters: 500,
                gtol: 1e-9,
                ftol: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
    }

    #[test]
    fn active_bound_is_respected() {
        // minimum of (x-3)² + (y+1)² on [0,1]² is (1, 0)
        let f = |x: &[f64]| {
            Some((
                (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2),
                vec![2.0 * (x[0] - 3.0), 2.0 * (x[1] + 1.0)],
            ))
        };
        let r = minimize_box(f, &[0.5, 0.5], &[0.0, 0.0], &[1.0, 1.0], &Default::default()).unwrap();
        assert_eq!(r.x, vec![1.0, 0.0]);
        assert!((r.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_region_is_avoided() {
        // objective undefined for x > 2; minimum of (x-3)² restricted to defined part is at 2
        let f = |x: &[f64]| {
            if x[0] > 2.0 {
                None
            } else {
                Some(((x[0] - 3.0).powi(2), vec![2.0 * (x[0] - 3.0)]))
            }
        };
        let r = minimize_box(f, &[0.0], &[-10.0], &[10.0], &Default::default()).unwrap();
        assert!(r.x[0] <= 2.0 && r.x[0] > 1.9, "{:?}", r.x);
        assert!(minimize_box(f, &[5.0], &[-10.0], &[10.0], &Default::default()).is_none());
    }

    #[test]
    fn numeric_gradient_of_quadratic() {
        let mut f = |x: &[f64]| x[0] * x[0] + 3.0 * x[1];
        let g = numeric_gradient(&mut f, &[0.5, 0.0], &[0.0, 0.0], &[1.0, 1.0], 1e-6);
        assert!((g[0] - 1.0).abs() < 1e-6 && (g[1] - 3.0).abs() < 1e-6);
    }
}
