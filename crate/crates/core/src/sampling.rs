//! Initial designs and the seeded random streams used by a run.
//!
//! Every random draw in a run comes from a named stream whose seed is
//! derived from `(master_seed, problem_id, repeat_index, stream_name)`:
//! the first eight bytes (little endian) of
//! `SHA-256("{master_seed}/{problem_id}/{repeat_index}/{stream_name}")`.
//! The design stream does not depend on the strategy, so every strategy sees
//! the same initial design for a given problem and repeat.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::{sq_dist, Scalar};

pub type StreamRng = ChaCha8Rng;

/// Stream names used by the harness.
pub mod streams {
    pub const DESIGN: &str = "design";
    pub const GP: &str = "gp";
    pub const STRATEGY: &str = "strategy";
    pub const MOEA: &str = "moea";
    pub const GUARD: &str = "guard";
}

pub fn stream_seed(master_seed: u64, problem_id: &str, repeat_index: usize, stream: &str) -> u64 {
    let digest = Sha256::digest(format!("{master_seed}/{problem_id}/{repeat_index}/{stream}").as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn stream_rng(master_seed: u64, problem_id: &str, repeat_index: usize, stream: &str) -> StreamRng {
    StreamRng::seed_from_u64(stream_seed(master_seed, problem_id, repeat_index, stream))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Lhs,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design<T> {
    pub points: Vec<Vec<T>>,
    pub kind: DesignKind,
    /// Seed of the stream the design was drawn from, when known.
    pub seed: Option<u64>,
}

fn min_pairwise_distance<T: Scalar>(points: &[Vec<T>]) -> T {
    let mut best = T::infinity();
    for i in 0..points.len() {
        for j in 0..i {
            best = best.min(sq_dist(&points[i], &points[j]));
        }
    }
    best.sqrt()
}

/// One random Latin hypercube: a random permutation of strata per
/// dimension, jittered uniformly inside each stratum.
pub fn latin_hypercube<T: Scalar, R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<T>> {
    let mut points = vec![vec![T::zero(); d]; n];
    let nf = n as f64;
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..d {
        perm.shuffle(rng);
        for (i, p) in points.iter_mut().enumerate() {
            p[j] = T::lit(stratum_point(perm[i], rng.gen::<f64>(), nf));
        }
    }
    points
}

fn stratum_point(stratum: usize, u: f64, n: f64) -> f64 {
    // keep the result strictly inside [stratum/n, (stratum+1)/n)
    let v = (stratum as f64 + u) / n;
    let upper = (stratum as f64 + 1.0) / n;
    if v >= upper {
        upper - f64::EPSILON
    } else {
        v
    }
}

/// Best of `candidates` random Latin hypercubes by minimum pairwise distance.
pub fn maximin_lhs<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    candidates: usize,
) -> Result<Design<T>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!("design size {n}x{d}")));
    }
    let mut best = latin_hypercube(n, d, rng);
    let mut best_dist = min_pairwise_distance(&best);
    for _ in 1..candidates.max(1) {
        let cand = latin_hypercube(n, d, rng);
        let dist = min_pairwise_distance(&cand);
        if dist > best_dist {
            best = cand;
            best_dist = dist;
        }
    }
    Ok(Design {
        points: best,
        kind: DesignKind::Lhs,
        seed: None,
    })
}

pub fn uniform_design<T: Scalar, R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Design<T>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!("design size {n}x{d}")));
    }
    let points = (0..n)
        .map(|_| (0..d).map(|_| T::lit(rng.gen::<f64>())).collect())
        .collect();
    Ok(Design {
        points,
        kind: DesignKind::Uniform,
        seed: None,
    })
}

/// Extends `existing` points to a size-`total` Latin-hypercube-like design.
///
/// In each dimension the `total` strata already occupied by `existing` are
/// skipped and the `total − existing.len()` new points take distinct free
/// strata (a random subset when collisions leave more free strata than
/// needed). The best of `candidates` completions by minimum pairwise distance
/// over the combined design is returned (new points only).
pub fn lhs_continuation<T: Scalar, R: Rng + ?Sized>(
    existing: &[Vec<T>],
    total: usize,
    d: usize,
    rng: &mut R,
    candidates: usize,
) -> Vec<Vec<T>> {
    let k = total.saturating_sub(existing.len());
    if k == 0 {
        return Vec::new();
    }
    let tf = total as f64;
    let free: Vec<Vec<usize>> = (0..d)
        .map(|j| {
            let mut occupied = vec![false; total];
            for p in existing {
                let s = ((p[j].as_f64() * tf).floor() as usize).min(total - 1);
                occupied[s] = true;
            }
            (0..total).filter(|&s| !occupied[s]).collect()
        })
        .collect();

    let mut best: Option<(T, Vec<Vec<T>>)> = None;
    for _ in 0..candidates.max(1) {
        let mut pts = vec![vec![T::zero(); d]; k];
        for j in 0..d {
            let mut strata = free[j].clone();
            strata.shuffle(rng);
            strata.truncate(k);
            for (p, &s) in pts.iter_mut().zip(&strata) {
                p[j] = T::lit(stratum_point(s, rng.gen::<f64>(), tf));
            }
        }
        let mut all = existing.to_vec();
        all.extend(pts.iter().cloned());
        let dist = min_pairwise_distance(&all);
        if best.as_ref().map_or(true, |(b, _)| dist > *b) {
            best = Some((dist, pts));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}
