//! Closed-form acquisition functions over a posterior `(μ, σ)`.
//!
//! Everything uses the maximisation convention: `f_star` is the largest
//! standardized observation and larger acquisition values are preferred.
//! `σ = 0` is handled by the pointwise limits of each formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{cdf, ei_kernel, pdf, s_pdf};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcqInput<T> {
    pub mu: T,
    pub sigma: T,
    pub f_star: T,
}

impl<T: Scalar> AcqInput<T> {
    pub fn new(mu: T, sigma: T, f_star: T) -> Self {
        debug_assert!(sigma >= T::zero());
        Self { mu, sigma, f_star }
    }

    /// Standardized improvement `(μ − f*)/σ`; requires `σ > 0`.
    #[inline]
    pub fn improvement(&self) -> T {
        (self.mu - self.f_star) / self.sigma
    }
}

/// Expected improvement `σ(sΦ(s) + φ(s))`.
pub fn ei<T: Scalar>(inp: &AcqInput<T>) -> T {
    if inp.sigma <= T::zero() {
        return (inp.mu - inp.f_star).max(T::zero());
    }
    inp.sigma * ei_kernel(inp.improvement())
}

/// Probability of improvement `Φ(s)`.
pub fn pi<T: Scalar>(inp: &AcqInput<T>) -> T {
    if inp.sigma <= T::zero() {
        return if inp.mu > inp.f_star { T::one() } else { T::zero() };
    }
    cdf(inp.improvement())
}

/// Upper confidence bound `μ + √β σ`.
pub fn ucb<T: Scalar>(inp: &AcqInput<T>, beta_t: T) -> T {
    inp.mu + beta_t.max(T::zero()).sqrt() * inp.sigma
}

/// Weighted expected improvement `σ[ω sΦ(s) + (1−ω)φ(s)]`.
pub fn wei<T: Scalar>(inp: &AcqInput<T>, omega: T) -> T {
    if inp.sigma <= T::zero() {
        return omega * (inp.mu - inp.f_star).max(T::zero());
    }
    let s = inp.improvement();
    // σ s Φ(s) = (μ − f*) Φ(s)
    omega * (inp.mu - inp.f_star) * cdf(s) + (T::one() - omega) * inp.sigma * pdf(s)
}

/// Parameters of the continuous-domain UCB schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcbSchedule {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub d: usize,
    pub r: f64,
    pub t: usize,
}

impl UcbSchedule {
    /// `a = b = 1`, `δ = 0.01` on the unit cube.
    pub fn standard(d: usize, t: usize) -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            delta: 0.01,
            d,
            r: 1.0,
            t,
        }
    }
}

/// `β_t = 2 log(t² 2π² / 3δ) + 2d log(t² d b r √(log(4da/δ)))`.
pub fn beta_schedule(s: &UcbSchedule) -> Result<f64> {
    if !(s.delta > 0.0 && s.delta < 1.0) || s.t == 0 || s.d == 0 {
        return Err(Error::InvalidParameter(format!("{s:?}")));
    }
    let t = s.t as f64;
    let d = s.d as f64;
    let inner = (4.0 * d * s.a / s.delta).ln();
    let arg = t * t * d * s.b * s.r * inner.max(0.0).sqrt();
    if !(inner > 0.0) || !(arg > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "non-positive logarithm argument in beta schedule: {s:?}"
        )));
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok(2.0 * (t * t * 2.0 * pi2 / (3.0 * s.delta)).ln() + 2.0 * d * arg.ln())
}

/// `s·φ(s)/Φ(s)`: the quantity whose supremum bounds the WEI weight.
pub fn gamma_objective(s: f64) -> f64 {
    s_pdf(s) / cdf(s)
}

/// The supremum `γ` of `s·φ(s)/Φ(s)` and the WEI weight threshold `γ/(2γ+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaConstant {
    pub gamma: f64,
    pub argmax: f64,
    pub threshold: f64,
}

/// Maximises `s·φ(s)/Φ(s)` over `[0, 10]` by a coarse scan followed by
/// golden-section refinement of the best bracket.
pub fn gamma_constant() -> GammaConstant {
    gamma_constant_from(0.0, 10.0, 1000)
}

/// As [`gamma_constant`] with an explicit search interval and scan density.
pub fn gamma_constant_from(lo: f64, hi: f64, grid: usize) -> GammaConstant {
    let grid = grid.max(3);
    let h = (hi - lo) / grid as f64;
    let (mut best_i, mut best_v) = (0, f64::NEG_INFINITY);
    for i in 0..=grid {
        let v = gamma_objective(lo + h * i as f64);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = (lo + h * (best_i as f64 - 1.0)).max(lo);
    let mut b = (lo + h * (best_i as f64 + 1.0)).min(hi);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (gamma_objective(c), gamma_objective(d));
    while b - a > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = gamma_objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = gamma_objective(d);
        }
    }
    let argmax = 0.5 * (a + b);
    let gamma = gamma_objective(argmax).max(best_v);
    GammaConstant {
        gamma,
        argmax,
        threshold: gamma / (2.0 * gamma + 1.0),
    }
}

/// Acquisition family, used where a criterion is chosen at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcqKind<T> {
    Ei,
    Pi,
    Ucb { beta_t: T },
    Wei { omega: T },
}

impl<T: Scalar> AcqKind<T> {
    pub fn value(&self, inp: &AcqInput<T>) -> T {
        match *self {
            AcqKind::Ei => ei(inp),
            AcqKind::Pi => pi(inp),
            AcqKind::Ucb { beta_t } => ucb(inp, beta_t),
            AcqKind::Wei { omega } => wei(inp, omega),
        }
    }
}

/// Analytic `(∂α/∂μ, ∂α/∂σ)`; requires `σ > 0`.
pub fn acq_partials<T: Scalar>(kind: AcqKind<T>, inp: &AcqInput<T>) -> (T, T) {
    let s = inp.improvement();
    let phi = pdf(s);
    let big_phi = cdf(s);
    match kind {
        AcqKind::Ei => (big_phi, phi),
        AcqKind::Pi => (phi / inp.sigma, -s_pdf(s) / inp.sigma),
        AcqKind::Ucb { beta_t } => (T::one(), beta_t.max(T::zero()).sqrt()),
        AcqKind::Wei { omega } => {
            let two = T::lit(2.0);
            (
                omega * big_phi + (two * omega - T::one()) * s_pdf(s),
                (T::one() - omega + (T::one() - two * omega) * s * s) * phi,
            )
        }
    }
}
