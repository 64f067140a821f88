use crate::scalar::Scalar;

/// Matérn 5/2 covariance at ARD-scaled distance `r`:
/// `σ²(1 + √5 r + 5r²/3) exp(−√5 r)`.
#[inline]
pub fn matern52<T: Scalar>(r: T, signal_variance: T) -> T {
    let sqrt5r = T::lit(5.0_f64.sqrt()) * r;
    signal_variance * (T::one() + sqrt5r + sqrt5r * sqrt5r / T::lit(3.0)) * (-sqrt5r).exp()
}

/// `(5/3)(1 + √5 r) exp(−√5 r)`: the factor multiplying `σ² (Δ_k/ℓ_k)²` in the
/// derivative of the kernel with respect to `log ℓ_k`.
#[inline]
pub(crate) fn matern52_lengthscale_factor<T: Scalar>(r: T) -> T {
    let sqrt5r = T::lit(5.0_f64.sqrt()) * r;
    T::lit(5.0 / 3.0) * (T::one() + sqrt5r) * (-sqrt5r).exp()
}

/// Euclidean distance after dividing each coordinate difference by its lengthscale.
#[inline]
pub fn scaled_distance<T: Scalar>(a: &[T], b: &[T], lengthscales: &[T]) -> T {
    a.iter()
        .zip(b)
        .zip(lengthscales)
        .fold(T::zero(), |acc, ((&x, &y), &l)| {
            let z = (x - y) / l;
            acc + z * z
        })
        .sqrt()
}
