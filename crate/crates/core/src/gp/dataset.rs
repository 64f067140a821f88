use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Whether larger or smaller raw observations are better.
///
/// Standardized targets are always expressed so that larger is better: a
/// minimisation problem is negated after standardization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

const CONSTANT_STD: f64 = 1e-12;

/// Evaluated design points in the unit cube with raw and standardized targets.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    x: Vec<Vec<T>>,
    y_raw: Vec<T>,
    y: Vec<T>,
    lower: Vec<T>,
    upper: Vec<T>,
    sense: Sense,
    mean: T,
    std: T,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from points already rescaled to `[0,1]^d`.
    pub fn from_unit(
        x: Vec<Vec<T>>,
        y_raw: Vec<T>,
        lower: Vec<T>,
        upper: Vec<T>,
        sense: Sense,
    ) -> Result<Self> {
        let d = lower.len();
        if d == 0 || upper.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: upper.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one point".into()));
        }
        if x.len() != y_raw.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y_raw.len(),
            });
        }
        for row in &x {
            check_unit_row(row, d)?;
        }
        if let Some(bad) = y_raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite observation {bad}")));
        }
        let mut ds = Self {
            x,
            y_raw,
            y: Vec::new(),
            lower,
            upper,
            sense,
            mean: T::zero(),
            std: T::one(),
        };
        ds.standardize();
        Ok(ds)
    }

    /// Unit-cube dataset with the trivial domain `[0,1]^d`.
    pub fn unit_cube(x: Vec<Vec<T>>, y_raw: Vec<T>, sense: Sense) -> Result<Self> {
        let d = x.first().map_or(0, Vec::len);
        Self::from_unit(x, y_raw, vec![T::zero(); d], vec![T::one(); d], sense)
    }

    /// Appends an observation and re-standardizes.
    pub fn push(&mut self, x_unit: Vec<T>, y_raw: T) -> Result<()> {
        check_unit_row(&x_unit, self.dim())?;
        if !y_raw.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite observation {y_raw}")));
        }
        self.x.push(x_unit);
        self.y_raw.push(y_raw);
        self.standardize();
        Ok(())
    }

    fn standardize(&mut self) {
        let n = T::lit(self.y_raw.len() as f64);
        let mean = self.y_raw.iter().copied().sum::<T>() / n;
        let var = self
            .y_raw
            .iter()
            .map(|&v| (v - mean) * (v - mean))
            .sum::<T>()
            / n;
        let std = var.sqrt();
        let sign = match self.sense {
            Sense::Maximize => T::one(),
            Sense::Minimize => -T::one(),
        };
        self.mean = mean;
        if std < T::lit(CONSTANT_STD) {
            self.std = T::one();
            self.y = vec![T::zero(); self.y_raw.len()];
        } else {
            self.std = std;
            self.y = self.y_raw.iter().map(|&v| sign * (v - mean) / std).collect();
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn x(&self) -> &[Vec<T>] {
        &self.x
    }

    pub fn y_raw(&self) -> &[T] {
        &self.y_raw
    }

    /// Standardized targets, larger is better.
    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Index of the best observation (first one on ties).
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.y.iter().enumerate() {
            if v > self.y[best] {
                best = i;
            }
        }
        best
    }

    /// Incumbent `f*`: the largest standardized target.
    pub fn f_star(&self) -> T {
        self.y[self.best_index()]
    }

    /// Maps a standardized value back to the raw observation scale.
    pub fn to_raw(&self, y_std: T) -> T {
        let sign = match self.sense {
            Sense::Maximize => T::one(),
            Sense::Minimize => -T::one(),
        };
        self.mean + sign * y_std * self.std
    }
}

fn check_unit_row<T: Scalar>(row: &[T], d: usize) -> Result<()> {
    if row.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: row.len(),
        });
    }
    for (i, &v) in row.iter().enumerate() {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::OutOfDomain {
                index: i,
                value: v.as_f64(),
                lower: 0.0,
                upper: 1.0,
            });
        }
    }
    Ok(())
}
