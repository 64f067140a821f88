//! Synthetic test problems, all posed as minimisation.
//!
//! The `log*` problems return the transformed value that the surrogate
//! models; their untransformed counterparts return the base function `g`.
//! Reference optima were computed offline by dense multi-start local
//! optimisation and are stored with a short provenance note.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Base landscape `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseFunction {
    WangFreitas,
    Branin,
    BraninForrester,
    Cosines,
    GoldsteinPrice,
    SixHumpCamel,
    Hartmann6,
    /// `∏ |4x_i − 1| / 2`.
    GSobolAbs,
    /// `∏ (4x_i − 1) / 2`, signed factors.
    GSobolSigned,
    Rosenbrock,
    StyblinskiTang,
}

/// How the minimised value is obtained from `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    None,
    /// `−g`
    Negate,
    /// `log(g + shift)`
    LogShift { shift: f64 },
    /// `−log(−g)`
    NegLogNeg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub d: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub base: BaseFunction,
    pub transform: Transform,
    pub f_opt_ref: Option<f64>,
    pub provenance: String,
}

const HART_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HART_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HART_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

/// The Hartmann6 constant tables `(α, A, P)`.
pub fn hartmann6_constants() -> ([f64; 4], [[f64; 6]; 4], [[f64; 6]; 4]) {
    (HART_ALPHA, HART_A, HART_P)
}

fn branin_core<T: Scalar>(x: &[T]) -> T {
    let pi = T::PI();
    let b = T::lit(5.1) / (T::lit(4.0) * pi * pi);
    let c = T::lit(5.0) / pi;
    let r = T::lit(6.0);
    let s = T::lit(10.0);
    let t = T::one() / (T::lit(8.0) * pi);
    let q = x[1] - b * x[0] * x[0] + c * x[0] - r;
    q * q + s * (T::one() - t) * x[0].cos() + s
}

impl BaseFunction {
    pub fn eval<T: Scalar>(self, x: &[T]) -> T {
        let l = T::lit;
        match self {
            BaseFunction::WangFreitas => {
                let a = (x[0] - l(0.1)) / l(0.1);
                let b = (x[0] - l(0.9)) / l(0.01);
                l(2.0) * (-l(0.5) * a * a).exp() + l(4.0) * (-l(0.5) * b * b).exp()
            }
            BaseFunction::Branin => branin_core(x),
            BaseFunction::BraninForrester => branin_core(x) + l(5.0) * x[0],
            BaseFunction::Cosines => {
                let s: T = x
                    .iter()
                    .map(|&xi| {
                        let u = l(1.6) * xi - l(0.5);
                        u * u - l(0.3) * (l(3.0) * T::PI() * u).cos()
                    })
                    .sum();
                T::one() - s
            }
            BaseFunction::GoldsteinPrice => {
                let (x1, x2) = (x[0], x[1]);
                let p = x1 + x2 + T::one();
                let a = T::one()
                    + p * p
                        * (l(19.0) - l(14.0) * x1 + l(3.0) * x1 * x1 - l(14.0) * x2
                            + l(6.0) * x1 * x2
                            + l(3.0) * x2 * x2);
                let q = l(2.0) * x1 - l(3.0) * x2;
                let b = l(30.0)
                    + q * q
                        * (l(18.0) - l(32.0) * x1 + l(12.0) * x1 * x1 + l(48.0) * x2
                            - l(36.0) * x1 * x2
                            + l(27.0) * x2 * x2);
                a * b
            }
            BaseFunction::SixHumpCamel => {
                let (x1, x2) = (x[0], x[1]);
                let x1s = x1 * x1;
                (l(4.0) - l(2.1) * x1s + x1s * x1s / l(3.0)) * x1s
                    + x1 * x2
                    + (l(-4.0) + l(4.0) * x2 * x2) * x2 * x2
            }
            BaseFunction::Hartmann6 => {
                let mut s = T::zero();
                for i in 0..4 {
                    let mut inner = T::zero();
                    for j in 0..6 {
                        let dx = x[j] - l(HART_P[i][j]);
                        inner = inner + l(HART_A[i][j]) * dx * dx;
                    }
                    s = s + l(HART_ALPHA[i]) * (-inner).exp();
                }
                -s
            }
            BaseFunction::GSobolAbs => x
                .iter()
                .fold(T::one(), |acc, &xi| acc * (l(4.0) * xi - T::one()).abs() / l(2.0)),
            BaseFunction::GSobolSigned => x
                .iter()
                .fold(T::one(), |acc, &xi| acc * (l(4.0) * xi - T::one()) / l(2.0)),
            BaseFunction::Rosenbrock => x
                .windows(2)
                .map(|w| {
                    let a = w[1] - w[0] * w[0];
                    let b = w[0] - T::one();
                    l(100.0) * a * a + b * b
                })
                .sum(),
            BaseFunction::StyblinskiTang => {
                let s: T = x
                    .iter()
                    .map(|&xi| {
                        let x2 = xi * xi;
                        x2 * x2 - l(16.0) * x2 + l(5.0) * xi
                    })
                    .sum();
                l(0.5) * s
            }
        }
    }
}

impl Transform {
    /// Applies the transform; the log argument must be positive.
    pub fn apply<T: Scalar>(self, g: T) -> Result<T> {
        match self {
            Transform::None => Ok(g),
            Transform::Negate => Ok(-g),
            Transform::LogShift { shift } => {
                let arg = g + T::lit(shift);
                if arg > T::zero() {
                    Ok(arg.ln())
                } else {
                    Err(Error::NonPositiveLogArgument(arg.as_f64()))
                }
            }
            Transform::NegLogNeg => {
                let arg = -g;
                if arg > T::zero() {
                    Ok(-arg.ln())
                } else {
                    Err(Error::NonPositiveLogArgument(arg.as_f64()))
                }
            }
        }
    }

    /// The argument passed to the logarithm, for log transforms.
    pub fn log_argument<T: Scalar>(self, g: T) -> Option<T> {
        match self {
            Transform::LogShift { shift } => Some(g + T::lit(shift)),
            Transform::NegLogNeg => Some(-g),
            _ => None,
        }
    }
}

/// Relative slack accepted at the box faces (unit-cube round trips).
const DOMAIN_SLACK: f64 = 1e-9;

impl Problem {
    fn new(
        id: &str,
        lower: Vec<f64>,
        upper: Vec<f64>,
        base: BaseFunction,
        transform: Transform,
        f_opt_ref: Option<f64>,
        provenance: &str,
    ) -> Self {
        Self {
            id: id.to_string(),
            d: lower.len(),
            lower,
            upper,
            base,
            transform,
            f_opt_ref,
            provenance: provenance.to_string(),
        }
    }

    /// Objective at a point of the native domain.
    pub fn evaluate<T: Scalar>(&self, x: &[T]) -> Result<T> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let mut clamped: Option<Vec<T>> = None;
        for (i, &v) in x.iter().enumerate() {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            let slack = DOMAIN_SLACK * (hi - lo);
            let vf = v.as_f64();
            if !(vf >= lo - slack && vf <= hi + slack) {
                return Err(Error::OutOfDomain {
                    index: i,
                    value: vf,
                    lower: lo,
                    upper: hi,
                });
            }
            if vf < lo || vf > hi {
                clamped.get_or_insert_with(|| x.to_vec())[i] = T::lit(vf.clamp(lo, hi));
            }
        }
        let x = clamped.as_deref().unwrap_or(x);
        self.transform.apply(self.base.eval(x))
    }

    /// Untransformed landscape value.
    pub fn base_value<T: Scalar>(&self, x: &[T]) -> T {
        self.base.eval(x)
    }

    pub fn to_unit_cube<T: Scalar>(&self, x_native: &[T]) -> Vec<T> {
        x_native
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| (v - T::lit(lo)) / T::lit(hi - lo))
            .collect()
    }

    pub fn from_unit_cube<T: Scalar>(&self, x_unit: &[T]) -> Vec<T> {
        x_unit
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&u, (&lo, &hi))| {
                let v = T::lit(lo) + u * T::lit(hi - lo);
                v.max(T::lit(lo)).min(T::lit(hi))
            })
            .collect()
    }

    pub fn reference_optimum(&self) -> Result<f64> {
        self.f_opt_ref
            .ok_or_else(|| Error::NoFiniteOptimum(self.id.clone()))
    }

    pub fn is_log_variant(&self) -> bool {
        matches!(
            self.transform,
            Transform::LogShift { .. } | Transform::NegLogNeg
        )
    }
}

const MS_2D: &str = "multi-start L-BFGS-B: 1e5 uniform starts, best 100 refined";
const MS_6D: &str = "multi-start L-BFGS-B: 2e5 uniform starts, best 100 refined";
const SEPARABLE: &str = "separable: 1-d L-BFGS-B minimum per coordinate, summed";
const ANALYTIC: &str = "analytic minimiser, confirmed by multi-start L-BFGS-B";

const SHC_SHIFT: f64 = 1.0316 + 1e-4;
// per-coordinate minimum of ½(x⁴ − 16x² + 5x), x ≈ −2.903534
const ST_MIN_1D: f64 = -39.166_165_703_771_41;
const SHC_MIN: f64 = -1.031_628_453_489_877_4;
const HART_MIN: f64 = -3.322_368_011_415_513_4;

/// All registered problems, in catalogue order.
pub fn registry() -> Vec<Problem> {
    use BaseFunction as B;
    let cube = |d: usize, lo: f64, hi: f64| (vec![lo; d], vec![hi; d]);
    let (g_lo, g_hi) = cube(10, -5.0, 5.0);
    let (r_lo, r_hi) = cube(10, -5.0, 10.0);
    let (h_lo, h_hi) = cube(6, 0.0, 1.0);
    let st_shift = 40.0 * 10.0;
    vec![
        Problem::new(
            "WangFreitas",
            vec![0.0],
            vec![1.0],
            B::WangFreitas,
            Transform::Negate,
            Some(-4.000_000_000_000_025),
            "dense grid on [0,1] + L-BFGS-B refinement; minimiser ≈ 0.9",
        ),
        Problem::new("Branin", vec![-5.0, 0.0], vec![10.0, 15.0], B::Branin, Transform::None, Some(0.397_887_357_729_738_16), MS_2D),
        Problem::new(
            "BraninForrester",
            vec![-5.0, 0.0],
            vec![10.0, 15.0],
            B::BraninForrester,
            Transform::None,
            Some(-16.644_021_570_843_194),
            MS_2D,
        ),
        Problem::new("Cosines", vec![0.0, 0.0], vec![5.0, 5.0], B::Cosines, Transform::Negate, Some(-1.6), ANALYTIC),
        Problem::new(
            "logGoldsteinPrice",
            vec![-2.0, -2.0],
            vec![2.0, 2.0],
            B::GoldsteinPrice,
            Transform::LogShift { shift: 0.0 },
            Some(3.0_f64.ln()),
            ANALYTIC,
        ),
        Problem::new(
            "logSixHumpCamel",
            vec![-3.0, -2.0],
            vec![3.0, 2.0],
            B::SixHumpCamel,
            Transform::LogShift { shift: SHC_SHIFT },
            Some((SHC_MIN + SHC_SHIFT).ln()),
            MS_2D,
        ),
        Problem::new("logHartmann6", h_lo.clone(), h_hi.clone(), B::Hartmann6, Transform::NegLogNeg, Some(-(-HART_MIN).ln()), MS_6D),
        Problem::new(
            "logGSobol",
            g_lo.clone(),
            g_hi.clone(),
            B::GSobolAbs,
            Transform::LogShift { shift: 1e-4 },
            Some(1e-4_f64.ln()),
            "analytic: product vanishes at x_i = 1/4",
        ),
        Problem::new(
            "logGSobolSigned",
            g_lo.clone(),
            g_hi.clone(),
            B::GSobolSigned,
            Transform::LogShift { shift: 0.0 },
            None,
            "unbounded below as the product approaches 0 from above; undefined where the product is non-positive",
        ),
        Problem::new("logRosenbrock", r_lo.clone(), r_hi.clone(), B::Rosenbrock, Transform::LogShift { shift: 0.5 }, Some(0.5_f64.ln()), ANALYTIC),
        Problem::new(
            "logStyblinskiTang",
            g_lo.clone(),
            g_hi.clone(),
            B::StyblinskiTang,
            Transform::LogShift { shift: st_shift },
            Some((10.0 * ST_MIN_1D + st_shift).ln()),
            SEPARABLE,
        ),
        Problem::new("GoldsteinPrice", vec![-2.0, -2.0], vec![2.0, 2.0], B::GoldsteinPrice, Transform::None, Some(3.0), ANALYTIC),
        Problem::new("SixHumpCamel", vec![-3.0, -2.0], vec![3.0, 2.0], B::SixHumpCamel, Transform::None, Some(SHC_MIN), MS_2D),
        Problem::new("Hartmann6", h_lo, h_hi, B::Hartmann6, Transform::None, Some(HART_MIN), MS_6D),
        Problem::new("GSobol", g_lo.clone(), g_hi.clone(), B::GSobolAbs, Transform::None, Some(0.0), "analytic: product vanishes at x_i = 1/4"),
        Problem::new(
            "GSobolSigned",
            g_lo.clone(),
            g_hi.clone(),
            B::GSobolSigned,
            Transform::None,
            Some(-(10.5_f64.powi(9)) * 9.5),
            "analytic: nine factors at x_i = −5 and one at x_i = 5",
        ),
        Problem::new("Rosenbrock", r_lo, r_hi, B::Rosenbrock, Transform::None, Some(0.0), ANALYTIC),
        Problem::new("StyblinskiTang", g_lo, g_hi, B::StyblinskiTang, Transform::None, Some(10.0 * ST_MIN_1D), SEPARABLE),
    ]
}

/// Looks up a problem by id (case-insensitive).
pub fn problem(id: &str) -> Result<Problem> {
    registry()
        .into_iter()
        .find(|p| p.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| Error::UnknownProblem(id.to_string()))
}

#[derive(Serialize)]
struct CatalogueEntry<'a> {
    id: &'a str,
    d: usize,
    lower: &'a [f64],
    upper: &'a [f64],
    transform: Transform,
    f_opt_ref: Option<f64>,
    provenance: &'a str,
}

/// Machine-readable catalogue of the registry.
pub fn catalogue_json() -> String {
    let reg = registry();
    let entries: Vec<CatalogueEntry> = reg
        .iter()
        .map(|p| CatalogueEntry {
            id: &p.id,
            d: p.d,
            lower: &p.lower,
            upper: &p.upper,
            transform: p.transform,
            f_opt_ref: p.f_opt_ref,
            provenance: &p.provenance,
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("catalogue serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(id: &str) -> Problem {
        problem(id).unwrap()
    }

    #[test]
    fn point_values() {
        let wf = p("WangFreitas").evaluate(&[0.9_f64]).unwrap();
        assert!((wf + 4.0).abs() < 1e-6);
        let r = p("logRosenbrock").evaluate(&[1.0_f64; 10]).unwrap();
        assert!((r - (-0.693_147_180_559_945_3)).abs() < 1e-12);
        let c = p("Cosines").evaluate(&[0.3125_f64, 0.3125]).unwrap();
        assert!((c + 1.6).abs() < 1e-12);
        let g = p("logGoldsteinPrice").evaluate(&[0.0_f64, -1.0]).unwrap();
        assert!((g - 1.098_612_288_668_109_8).abs() < 1e-12);
        let st = p("logStyblinskiTang").evaluate(&[-2.903_534_f64; 10]).unwrap();
        assert!((st - 2.12121).abs() < 1e-3);
    }

    #[test]
    fn reference_optima() {
        assert!((p("Branin").reference_optimum().unwrap() - 0.397_887).abs() < 1e-6);
        let wf = p("WangFreitas").reference_optimum().unwrap();
        assert!(wf <= -4.0 && wf > -4.0 - 1e-13);
        let shc = p("logSixHumpCamel").reference_optimum().unwrap();
        assert!((shc + 9.545_162_828_516_077).abs() < 1e-9);
        assert!(p("logGSobolSigned").reference_optimum().is_err());
        assert!(matches!(problem("nope"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn reference_optima_are_attained_at_known_minimisers() {
        let cases: &[(&str, &[f64])] = &[
            ("Branin", &[-std::f64::consts::PI, 12.275]),
            ("BraninForrester", &[-3.689_285_271_209_469, 13.629_987_754_571_408]),
            ("logSixHumpCamel", &[0.089_842_011_531_162_18, -0.712_656_404_435_593_4]),
            (
                "logHartmann6",
                &[0.201_689_507_8, 0.150_010_690_6, 0.476_873_972_7, 0.275_332_428_7, 0.311_651_611_9, 0.657_300_531_6],
            ),
        ];
        for (id, x) in cases {
            let pr = p(id);
            let v = pr.evaluate(x).unwrap();
            assert!((v - pr.reference_optimum().unwrap()).abs() < 1e-8, "{id}: {v}");
        }
    }

    #[test]
    fn unit_cube_round_trip() {
        let b = p("Branin");
        assert_eq!(b.to_unit_cube(&[-5.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(b.to_unit_cube(&[10.0, 15.0]), vec![1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for pr in registry() {
            let u: Vec<f64> = (0..pr.d).map(|_| rng.gen()).collect();
            let back = pr.to_unit_cube(&pr.from_unit_cube(&u));
            for (a, b) in u.iter().zip(&back) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        assert!(matches!(
            p("Branin").evaluate(&[11.0_f64, 3.0]),
            Err(Error::OutOfDomain { index: 0, .. })
        ));
        assert!(p("Branin").evaluate(&[1.0_f64]).is_err());
    }

    #[test]
    fn signed_gsobol_log_is_undefined_on_negative_products() {
        let mut x = vec![1.0_f64; 10];
        x[0] = -1.0;
        assert!(matches!(
            p("logGSobolSigned").evaluate(&x),
            Err(Error::NonPositiveLogArgument(_))
        ));
    }

    #[test]
    fn hartmann_constants_checksum() {
        let (a, amat, pmat) = hartmann6_constants();
        assert_eq!(a, [1.0, 1.2, 3.0, 3.2]);
        let sa: f64 = amat.iter().flatten().sum();
        let sp: f64 = pmat.iter().flatten().map(|v| (v * 1e4).round()).sum();
        assert!((sa - 184.7).abs() < 1e-9, "{sa}");
        assert_eq!(sp, 101_095.0);
        assert_eq!(amat[3][2], 0.05);
        assert_eq!(pmat[3][5], 0.0381);
    }

    #[test]
    fn catalogue_lists_every_problem() {
        let v: serde_json::Value = serde_json::from_str(&catalogue_json()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), registry().len());
    }

    #[test]
    fn f32_evaluation() {
        let v = p("Branin").evaluate(&[std::f32::consts::PI, 2.275_f32]).unwrap();
        assert!((v - 0.397_887).abs() < 1e-4);
    }
}
