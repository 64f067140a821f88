//! Small dense routines for symmetric positive definite systems.
//!
//! Matrices are row-major `n * n` slices. Only what the GP needs is here:
//! an in-place lower Cholesky factorization, the two triangular solves and
//! the inverse recovered from the factor.

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Overwrites the lower triangle of `a` with `L` such that `a = L Lᵀ`.
/// The strict upper triangle is zeroed.
pub fn cholesky_in_place<T: Scalar>(a: &mut [T], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let diag = a[j * n + j] - dot(&a[j * n..j * n + j], &a[j * n..j * n + j]);
        if !(diag > T::zero()) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let ljj = diag.sqrt();
        a[j * n + j] = ljj;
        for i in (j + 1)..n {
            let s = a[i * n + j] - dot(&a[i * n..i * n + j], &a[j * n..j * n + j]);
            a[i * n + j] = s / ljj;
        }
        for i in 0..j {
            a[i * n + j] = T::zero();
        }
    }
    Ok(())
}

/// Solves `L x = b` in place.
pub fn solve_lower_in_place<T: Scalar>(l: &[T], n: usize, b: &mut [T]) {
    for i in 0..n {
        let s = b[i] - dot(&l[i * n..i * n + i], &b[..i]);
        b[i] = s / l[i * n + i];
    }
}

/// Solves `Lᵀ x = b` in place.
pub fn solve_upper_t_in_place<T: Scalar>(l: &[T], n: usize, b: &mut [T]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s = s - l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `L Lᵀ x = b`.
pub fn cholesky_solve<T: Scalar>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = b.to_vec();
    solve_lower_in_place(l, n, &mut x);
    solve_upper_t_in_place(l, n, &mut x);
    x
}

/// `(L Lᵀ)⁻¹` as a full symmetric row-major matrix.
pub fn cholesky_inverse<T: Scalar>(l: &[T], n: usize) -> Vec<T> {
    // rows of u are the columns of L⁻¹, so both passes are contiguous dots
    let mut u = vec![T::zero(); n * n];
    for j in 0..n {
        let row = &mut u[j * n..(j + 1) * n];
        row[j] = T::one() / l[j * n + j];
        for i in (j + 1)..n {
            let s = dot(&l[i * n + j..i * n + i], &row[j..i]);
            row[i] = -s / l[i * n + i];
        }
    }
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = dot(&u[i * n + i..(i + 1) * n], &u[j * n + i..(j + 1) * n]);
            inv[i * n + j] = s;
            inv[j * n + i] = s;
        }
    }
    inv
}
