//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use eebo::pareto::{dominates, Objectives};
use rand::Rng;

/// Gauss-Jordan inverse with partial pivoting.
pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Log-determinant by Gaussian elimination with partial pivoting.
pub fn dense_log_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut ld = 0.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        ld += m[c][c].abs().ln();
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    ld
}

pub fn matern(r: f64, sf: f64) -> f64 {
    let a = 5f64.sqrt() * r;
    sf * (1.0 + a + a * a / 3.0) * (-a).exp()
}

pub fn kern(a: &[f64], b: &[f64], ls: &[f64], sf: f64) -> f64 {
    let r2: f64 = a.iter().zip(b).zip(ls).map(|((x, y), l)| ((x - y) / l).powi(2)).sum();
    matern(r2.sqrt(), sf)
}

pub fn gram(x: &[Vec<f64>], ls: &[f64], sf: f64, jitter: f64) -> Vec<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(i, a)| {
            x.iter()
                .enumerate()
                .map(|(j, b)| kern(a, b, ls, sf) + if i == j { jitter } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Posterior mean and variance straight from the dense inverse.
pub fn dense_posterior(x: &[Vec<f64>], y: &[f64], ls: &[f64], sf: f64, jitter: f64, q: &[f64]) -> (f64, f64) {
    let kinv = dense_inverse(&gram(x, ls, sf, jitter));
    let k: Vec<f64> = x.iter().map(|a| kern(a, q, ls, sf)).collect();
    let n = x.len();
    let mut mu = 0.0;
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            mu += k[i] * kinv[i][j] * y[j];
            quad += k[i] * kinv[i][j] * k[j];
        }
    }
    (mu, sf - quad)
}

pub fn dense_lml(x: &[Vec<f64>], y: &[f64], ls: &[f64], sf: f64, jitter: f64) -> f64 {
    let k = gram(x, ls, sf, jitter);
    let kinv = dense_inverse(&k);
    let n = x.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += y[i] * kinv[i][j] * y[j];
        }
    }
    -0.5 * dense_log_det(&k) - 0.5 * quad - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// Points at least `min_gap` apart so the Gram matrix stays well conditioned.
pub fn spread_points<R: Rng>(rng: &mut R, n: usize, d: usize, min_gap: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut gap = min_gap;
    let mut misses = 0;
    while out.len() < n {
        let p: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        if out
            .iter()
            .all(|q| q.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() >= gap)
        {
            out.push(p);
        } else {
            misses += 1;
            // crowded cube: relax the gap rather than loop forever
            if misses % 1000 == 0 {
                gap *= 0.8;
            }
        }
    }
    out
}

/// Lower-tail signed-rank p-value by listing all `2ⁿ` sign assignments of
/// the observed mid-ranks.
pub fn wilcoxon_brute(pairs: &[(f64, f64)]) -> f64 {
    let d: Vec<f64> = pairs.iter().map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    let n = d.len();
    let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks: Vec<f64> = mags
        .iter()
        .map(|m| {
            let less = mags.iter().filter(|o| *o < m).count() as f64;
            let eq = mags.iter().filter(|o| *o == m).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect();
    let w: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let mut le = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if s <= w + 1e-9 {
            le += 1;
        }
    }
    le as f64 / (1u64 << n) as f64
}

/// Holm step-down exactly as stated in textbooks.
pub fn holm_textbook(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut reject = vec![false; m];
    let mut k = 1;
    for &i in &idx {
        if p[i] > alpha / (m - k + 1) as f64 {
            break;
        }
        reject[i] = true;
        k += 1;
    }
    reject
}

pub fn brute_nondominated(points: &[Objectives<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(q, &points[i])))
        .collect()
}

/// Ranks by repeatedly removing the non-dominated layer.
pub fn peel_ranks(points: &[Objectives<f64>]) -> Vec<usize> {
    let mut rank = vec![usize::MAX; points.len()];
    let mut level = 0;
    while rank.iter().any(|&r| r == usize::MAX) {
        let remaining: Vec<usize> = (0..points.len()).filter(|&i| rank[i] == usize::MAX).collect();
        let layer: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        for i in layer {
            rank[i] = level;
        }
        level += 1;
    }
    rank
}

pub fn random_objectives<R: Rng>(rng: &mut R, n: usize) -> Vec<Objectives<f64>> {
    (0..n)
        .map(|_| Objectives {
            // coarse grid so ties and duplicates occur
            mu: (rng.gen::<f64>() * 20.0).round() / 10.0 - 1.0,
            sigma: (rng.gen::<f64>() * 20.0).round() / 10.0,
        })
        .collect()
}
