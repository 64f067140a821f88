use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::kernel::{matern52, matern52_lengthscale_factor, scaled_distance};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_in_place, cholesky_inverse, cholesky_solve, solve_lower_in_place};
use crate::optim::{minimize_box, LbfgsOptions};
use crate::scalar::{dot, Scalar};

/// Kernel hyperparameters: ARD lengthscales, signal variance and the fixed
/// diagonal jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams<T> {
    pub lengthscales: Vec<T>,
    pub signal_variance: T,
    pub jitter: T,
}

impl<T: Scalar> Hyperparams<T> {
    pub fn new(lengthscales: Vec<T>, signal_variance: T, jitter: T) -> Self {
        Self {
            lengthscales,
            signal_variance,
            jitter,
        }
    }

    /// `[log ℓ_1, …, log ℓ_d, log σ²]`.
    pub fn to_log(&self) -> Vec<T> {
        self.lengthscales
            .iter()
            .map(|l| l.ln())
            .chain(std::iter::once(self.signal_variance.ln()))
            .collect()
    }

    pub fn from_log(log: &[T], jitter: T) -> Self {
        let d = log.len() - 1;
        Self {
            lengthscales: log[..d].iter().map(|v| v.exp()).collect(),
            signal_variance: log[d].exp(),
            jitter,
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        if self.lengthscales.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.lengthscales.len(),
            });
        }
        let ok = self.lengthscales.iter().all(|&l| l > T::zero() && l.is_finite())
            && self.signal_variance > T::zero()
            && self.signal_variance.is_finite()
            && self.jitter >= T::zero();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?}")))
        }
    }
}

/// Settings for hyperparameter fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub lengthscale_bounds: (f64, f64),
    pub signal_variance_bounds: (f64, f64),
    pub jitter: f64,
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            lengthscale_bounds: (1e-2, 10.0),
            signal_variance_bounds: (1e-4, 1e4),
            jitter: 1e-6,
            restarts: 10,
            max_iters: 100,
        }
    }
}

impl GpConfig {
    fn log_bounds<T: Scalar>(&self, d: usize) -> (Vec<T>, Vec<T>) {
        let mut lo = vec![T::lit(self.lengthscale_bounds.0.ln()); d];
        let mut hi = vec![T::lit(self.lengthscale_bounds.1.ln()); d];
        lo.push(T::lit(self.signal_variance_bounds.0.ln()));
        hi.push(T::lit(self.signal_variance_bounds.1.ln()));
        (lo, hi)
    }
}

/// Posterior mean and standard deviation on the standardized scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T> {
    pub mu: T,
    pub sigma: T,
}

/// A GP conditioned on a dataset with fixed hyperparameters.
#[derive(Debug, Clone)]
pub struct GpModel<T> {
    dataset: Dataset<T>,
    theta: Hyperparams<T>,
    chol: Vec<T>,
    alpha: Vec<T>,
    log_likelihood: T,
}

/// Tolerance for query points that stray just outside the unit cube.
const CLAMP_TOL: f64 = 1e-9;

fn covariance<T: Scalar>(x: &[Vec<T>], theta: &Hyperparams<T>) -> Vec<T> {
    let n = x.len();
    let mut k = vec![T::zero(); n * n];
    for i in 0..n {
        k[i * n + i] = theta.signal_variance + theta.jitter;
        for j in 0..i {
            let v = matern52(
                scaled_distance(&x[i], &x[j], &theta.lengthscales),
                theta.signal_variance,
            );
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

fn log_2pi<T: Scalar>() -> T {
    T::lit((2.0 * std::f64::consts::PI).ln())
}

/// Log marginal likelihood `−½ log|K| − ½ yᵀK⁻¹y − (M/2) log 2π` of the
/// standardized targets.
pub fn log_marginal_likelihood<T: Scalar>(dataset: &Dataset<T>, theta: &Hyperparams<T>) -> Result<T> {
    theta.check(dataset.dim())?;
    let n = dataset.len();
    let mut l = covariance(dataset.x(), theta);
    cholesky_in_place(&mut l, n)?;
    let alpha = cholesky_solve(&l, n, dataset.y());
    Ok(lml_from_factor(&l, n, dataset.y(), &alpha))
}

fn lml_from_factor<T: Scalar>(l: &[T], n: usize, y: &[T], alpha: &[T]) -> T {
    let log_det_half = (0..n).map(|i| l[i * n + i].ln()).sum::<T>();
    -T::lit(0.5) * dot(y, alpha) - log_det_half - T::lit(n as f64 / 2.0) * log_2pi::<T>()
}

/// Pairwise squared coordinate differences, cached across likelihood
/// evaluations of one fit.
struct LikelihoodWorkspace<'a, T> {
    dataset: &'a Dataset<T>,
    // sq[(i*n + j)*d + k] for j < i
    sq: Vec<T>,
    jitter: T,
}

impl<'a, T: Scalar> LikelihoodWorkspace<'a, T> {
    fn new(dataset: &'a Dataset<T>, jitter: T) -> Self {
        let n = dataset.len();
        let d = dataset.dim();
        let x = dataset.x();
        let mut sq = vec![T::zero(); n * n * d];
        for i in 0..n {
            for j in 0..i {
                for k in 0..d {
                    let diff = x[i][k] - x[j][k];
                    sq[(i * n + j) * d + k] = diff * diff;
                }
            }
        }
        Self { dataset, sq, jitter }
    }

    /// Log likelihood and its gradient with respect to the log hyperparameters.
    fn value_and_gradient(&self, log_theta: &[T]) -> Result<(T, Vec<T>)> {
        let n = self.dataset.len();
        let d = self.dataset.dim();
        let inv_l2: Vec<T> = log_theta[..d]
            .iter()
            .map(|&v| (-(v + v)).exp())
            .collect();
        let sf = log_theta[d].exp();

        let mut k = vec![T::zero(); n * n];
        // per pair: scaled distance kept for the gradient pass
        let mut r = vec![T::zero(); n * n];
        for i in 0..n {
            k[i * n + i] = sf + self.jitter;
            for j in 0..i {
                let base = (i * n + j) * d;
                let mut r2 = T::zero();
                for kk in 0..d {
                    r2 = r2 + self.sq[base + kk] * inv_l2[kk];
                }
                let rij = r2.sqrt();
                r[i * n + j] = rij;
                let v = matern52(rij, sf);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let mut l = k.clone();
        cholesky_in_place(&mut l, n)?;
        let y = self.dataset.y();
        let alpha = cholesky_solve(&l, n, y);
        let value = lml_from_factor(&l, n, y, &alpha);
        let kinv = cholesky_inverse(&l, n);

        // ∂L/∂θ = ½ tr(W ∂K/∂θ), W = ααᵀ − K⁻¹; only the strict lower triangle
        // contributes to the lengthscale terms, each counted twice.
        let mut grad = vec![T::zero(); d + 1];
        let half = T::lit(0.5);
        let mut g_sf = T::zero();
        for i in 0..n {
            let wii = alpha[i] * alpha[i] - kinv[i * n + i];
            g_sf = g_sf + wii * sf;
            for j in 0..i {
                let w = alpha[i] * alpha[j] - kinv[i * n + j];
                g_sf = g_sf + (w + w) * k[i * n + j];
                let fac = w * sf * matern52_lengthscale_factor(r[i * n + j]);
                let base = (i * n + j) * d;
                for kk in 0..d {
                    grad[kk] = grad[kk] + fac * self.sq[base + kk] * inv_l2[kk];
                }
            }
        }
        // lower-triangle terms appear twice in the full trace, times ½
        grad[d] = half * g_sf;
        Ok((value, grad))
    }
}

/// Gradient of the log marginal likelihood with respect to
/// `[log ℓ_1, …, log ℓ_d, log σ²]`.
pub fn log_marginal_likelihood_gradient<T: Scalar>(
    dataset: &Dataset<T>,
    theta: &Hyperparams<T>,
) -> Result<(T, Vec<T>)> {
    theta.check(dataset.dim())?;
    LikelihoodWorkspace::new(dataset, theta.jitter).value_and_gradient(&theta.to_log())
}

impl<T: Scalar> GpModel<T> {
    /// Conditions on `dataset` with the given hyperparameters.
    pub fn condition(dataset: Dataset<T>, theta: Hyperparams<T>) -> Result<Self> {
        theta.check(dataset.dim())?;
        let n = dataset.len();
        let mut l = covariance(dataset.x(), &theta);
        cholesky_in_place(&mut l, n)?;
        let alpha = cholesky_solve(&l, n, dataset.y());
        let log_likelihood = lml_from_factor(&l, n, dataset.y(), &alpha);
        Ok(Self {
            dataset,
            theta,
            chol: l,
            alpha,
            log_likelihood,
        })
    }

    /// Maximum-likelihood fit with `config.restarts` quasi-Newton climbs in
    /// log-hyperparameter space. The first climb starts from `warm` when
    /// given, the others from uniform draws in the log-bound box.
    pub fn fit<R: Rng + ?Sized>(
        dataset: Dataset<T>,
        config: &GpConfig,
        rng: &mut R,
        warm: Option<&Hyperparams<T>>,
    ) -> Result<Self> {
        if dataset.len() < 2 {
            return Err(Error::InvalidArgument("fit needs at least two points".into()));
        }
        if config.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        let d = dataset.dim();
        let jitter = T::lit(config.jitter);
        let (lo, hi) = config.log_bounds::<T>(d);
        let ws = LikelihoodWorkspace::new(&dataset, jitter);
        let opts = LbfgsOptions {
            max_iters: config.max_iters,
            gtol: 1e-5,
            ftol: 1e-9,
            ..Default::default()
        };

        let mut best: Option<(T, Vec<T>)> = None;
        for restart in 0..config.restarts {
            let start: Vec<T> = match (restart, warm) {
                (0, Some(w)) if w.lengthscales.len() == d => w
                    .to_log()
                    .iter()
                    .zip(lo.iter().zip(&hi))
                    .map(|(&v, (&a, &b))| v.max(a).min(b))
                    .collect(),
                _ => lo
                    .iter()
                    .zip(&hi)
                    .map(|(&a, &b)| a + (b - a) * T::lit(rng.gen::<f64>()))
                    .collect(),
            };
            let objective = |z: &[T]| {
                ws.value_and_gradient(z)
                    .ok()
                    .map(|(v, g)| (-v, g.into_iter().map(|gi| -gi).collect()))
            };
            if let Some(m) = minimize_box(objective, &start, &lo, &hi, &opts) {
                let ll = -m.value;
                if best.as_ref().map_or(true, |(b, _)| ll > *b) {
                    best = Some((ll, m.x));
                }
            }
        }
        let Some((_, log_theta)) = best else {
            return Err(Error::AllRestartsFailed {
                restarts: config.restarts,
            });
        };
        drop(ws);
        Self::condition(dataset, Hyperparams::from_log(&log_theta, jitter))
    }

    pub fn dataset(&self) -> &Dataset<T> {
        &self.dataset
    }

    pub fn hyperparams(&self) -> &Hyperparams<T> {
        &self.theta
    }

    pub fn log_likelihood(&self) -> T {
        self.log_likelihood
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dataset.dim()
    }

    /// Posterior at a point of the unit cube.
    pub fn predict(&self, x: &[T]) -> Result<Prediction<T>> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        let tol = T::lit(CLAMP_TOL);
        let mut clamped = None;
        for (i, &v) in x.iter().enumerate() {
            if v < T::zero() || v > T::one() || v.is_nan() {
                if v >= -tol && v <= T::one() + tol {
                    clamped.get_or_insert_with(|| x.to_vec())[i] = v.max(T::zero()).min(T::one());
                } else {
                    return Err(Error::OutOfDomain {
                        index: i,
                        value: v.as_f64(),
                        lower: 0.0,
                        upper: 1.0,
                    });
                }
            }
        }
        if let Some(c) = clamped {
            log::warn!("query point clamped into the unit cube");
            return Ok(self.predict_in_cube(&c));
        }
        Ok(self.predict_in_cube(x))
    }

    fn predict_in_cube(&self, x: &[T]) -> Prediction<T> {
        let n = self.dataset.len();
        let sf = self.theta.signal_variance;
        let mut kx: Vec<T> = self
            .dataset
            .x()
            .iter()
            .map(|xi| matern52(scaled_distance(x, xi, &self.theta.lengthscales), sf))
            .collect();
        let mu = dot(&kx, &self.alpha);
        solve_lower_in_place(&self.chol, n, &mut kx);
        let var = sf - dot(&kx, &kx);
        Prediction {
            mu,
            sigma: var.max(T::zero()).sqrt(),
        }
    }
}
