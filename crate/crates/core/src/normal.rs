//! Standard normal density and distribution function.
//!
//! Evaluated in `f64` through the complementary error function regardless of the caller's
//! scalar type. Products of the form `s·φ(s)` are formed in log space once
//! `|s| > 8` so that they reach zero smoothly instead of through underflow
//! of an intermediate.

use libm::erfc;

use crate::scalar::Scalar;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const TAIL: f64 = 8.0;

pub fn pdf<T: Scalar>(s: T) -> T {
    let s = s.as_f64();
    T::lit((-0.5 * s * s - LN_SQRT_2PI).exp())
}

pub fn cdf<T: Scalar>(s: T) -> T {
    let s = s.as_f64();
    T::lit(0.5 * erfc(-s / std::f64::consts::SQRT_2))
}

/// `s·φ(s)`.
pub fn s_pdf<T: Scalar>(s: T) -> T {
    let s = s.as_f64();
    if s == 0.0 {
        return T::zero();
    }
    let v = if s.abs() > TAIL {
        s.signum() * (s.abs().ln() - 0.5 * s * s - LN_SQRT_2PI).exp()
    } else {
        s * (-0.5 * s * s - LN_SQRT_2PI).exp()
    };
    T::lit(v)
}

/// `s·Φ(s) + φ(s)`, the EI kernel; always positive.
pub fn ei_kernel<T: Scalar>(s: T) -> T {
    let sf = s.as_f64();
    if sf < -TAIL {
        // s·Φ(s) + φ(s) = φ(x)(1 − x·R(x)) with x = −s and R the Mills ratio,
        // evaluated as a continued fraction so nothing underflows early
        let x = -sf;
        let one_minus_xr = if x > 1e4 {
            let z2 = 1.0 / (x * x);
            z2 * (1.0 - 3.0 * z2)
        } else {
            1.0 - x * mills_ratio(x)
        };
        let lp = -0.5 * sf * sf - LN_SQRT_2PI;
        return T::lit((lp + one_minus_xr.ln()).exp());
    }
    T::lit(sf * cdf(sf) + pdf(sf))
}

/// `Φ(−x)/φ(x)` for `x > 0` via the Laplace continued fraction
/// `1/(x + 1/(x + 2/(x + 3/(x + …))))` evaluated with modified Lentz.
fn mills_ratio(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}
