//! Summary statistics and the paired significance tests behind the
//! comparison tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::cdf;

/// Median (midpoint of the middle two for even length) and median absolute
/// deviation from the median.
pub fn median_mad(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty(), "median of an empty sample");
    let med = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    (med, median(&dev))
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Largest sample size evaluated with the exact null distribution.
pub const EXACT_MAX_N: usize = 25;
pub const MIN_NONZERO_PAIRS: usize = 5;

/// Mid-ranks of `values` (1-based; ties share the average rank).
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Result of a one-sided Wilcoxon signed-rank test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of positive differences `a_i − b_i`.
    pub w_plus: f64,
    pub n: usize,
    pub p_value: f64,
    pub exact: bool,
}

/// One-sided paired Wilcoxon signed-rank test of `H₁: a` tends to be smaller
/// than `b`.
///
/// Zero differences are dropped and tied magnitudes receive mid-ranks. For
/// `n ≤ 25` the p-value `P(W⁺ ≤ w⁺)` comes from the exact permutation
/// distribution of the observed ranks; above that, a normal approximation
/// with tie and continuity corrections is used.
pub fn wilcoxon_one_sided(pairs: &[(f64, f64)]) -> Result<WilcoxonResult> {
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n < MIN_NONZERO_PAIRS {
        return Err(Error::TooFewPairs {
            got: n,
            need: MIN_NONZERO_PAIRS,
        });
    }
    let mags: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&mags);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    if n <= EXACT_MAX_N {
        // mid-ranks are multiples of ½, so doubled ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let total: usize = doubled.iter().sum();
        let mut counts = vec![0.0_f64; total + 1];
        counts[0] = 1.0;
        let mut reach = 0;
        for &r in &doubled {
            for s in (0..=reach).rev() {
                let c = counts[s];
                if c != 0.0 {
                    counts[s + r] += c;
                }
            }
            reach += r;
        }
        let target = (2.0 * w_plus).round() as usize;
        let le: f64 = counts[..=target].iter().sum();
        let p = le / 2f64.powi(n as i32);
        return Ok(WilcoxonResult {
            w_plus,
            n,
            p_value: p.min(1.0),
            exact: true,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = mags.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let z = if var > 0.0 {
        (w_plus - mean + 0.5) / var.sqrt()
    } else {
        0.0
    };
    Ok(WilcoxonResult {
        w_plus,
        n,
        p_value: cdf(z).clamp(0.0, 1.0),
        exact: false,
    })
}

/// Holm–Bonferroni step-down: reject the `k`-th smallest p-value (1-based)
/// while `p_(k) ≤ α/(m−k+1)`, stopping at the first failure. Flags are in
/// input order.
pub fn holm_bonferroni(p_values: &[f64], alpha: f64) -> Vec<bool> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut reject = vec![false; m];
    for (k, &i) in order.iter().enumerate() {
        if p_values[i] <= alpha / (m - k) as f64 {
            reject[i] = true;
        } else {
            break;
        }
    }
    reject
}

/// Holm-adjusted p-values, `max_{j≤k} min(1, (m−j+1) p_(j))`, in input order.
pub fn holm_adjusted(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adj = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (k, &i) in order.iter().enumerate() {
        running = running.max(((m - k) as f64 * p_values[i]).min(1.0));
        adj[i] = running;
    }
    adj
}

/// Paired final regrets of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResults {
    pub method: String,
    pub regrets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub median: f64,
    pub mad: f64,
    pub best: bool,
    pub equivalent_to_best: bool,
    /// Raw one-sided p-value of "best < method"; `None` for the best row.
    pub p_value: Option<f64>,
    pub adjusted_p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<TableRow>,
    pub alpha: f64,
    /// Set when several methods share the lowest median; the first listed wins.
    pub median_tie_break: Option<Vec<String>>,
}

impl ComparisonTable {
    pub fn best(&self) -> &TableRow {
        self.rows.iter().find(|r| r.best).expect("table has a best row")
    }

    /// Aligned text rendering: `**` marks the best method, `*` methods
    /// statistically equivalent to it.
    pub fn render(&self, title: &str) -> String {
        let w = self.rows.iter().map(|r| r.method.len()).max().unwrap_or(6).max(6);
        let mut out = format!("{title}\n{:<w$}  {:>10}  {:>10}  {:>10}\n", "method", "median", "MAD", "p(holm)");
        for r in &self.rows {
            let mark = if r.best {
                "**"
            } else if r.equivalent_to_best {
                "*"
            } else {
                ""
            };
            let p = r
                .adjusted_p_value
                .map_or_else(|| "-".to_string(), |p| format!("{p:.3e}"));
            out.push_str(&format!(
                "{:<w$}  {:>10.2e}  {:>10.2e}  {:>10}  {mark}\n",
                r.method, r.median, r.mad, p
            ));
        }
        if let Some(t) = &self.median_tie_break {
            out.push_str(&format!("median tie broken by listing order among: {}\n", t.join(", ")));
        }
        out
    }
}

/// Builds the comparison table: best = lowest median regret (first listed on
/// ties); every other method is tested one-sided against the best and is
/// marked equivalent when the Holm-corrected test does not reject at `alpha`.
/// Comparisons with fewer than five non-zero paired differences cannot
/// reject and get `p = 1`.
pub fn build_table(results: &[MethodResults], alpha: f64) -> Result<ComparisonTable> {
    if results.len() < 2 {
        return Err(Error::InvalidArgument("a comparison needs at least two methods".into()));
    }
    let r = results[0].regrets.len();
    for m in results {
        if m.regrets.len() != r || r == 0 {
            return Err(Error::PairingMismatch {
                method: m.method.clone(),
                got: m.regrets.len(),
                expected: r,
            });
        }
    }
    let summaries: Vec<(f64, f64)> = results.iter().map(|m| median_mad(&m.regrets)).collect();
    let mut best = 0;
    for (i, s) in summaries.iter().enumerate() {
        if s.0 < summaries[best].0 {
            best = i;
        }
    }
    let tied: Vec<String> = results
        .iter()
        .zip(&summaries)
        .filter(|(_, s)| s.0 == summaries[best].0)
        .map(|(m, _)| m.method.clone())
        .collect();

    let others: Vec<usize> = (0..results.len()).filter(|&i| i != best).collect();
    let p_values: Vec<f64> = others
        .iter()
        .map(|&i| {
            let pairs: Vec<(f64, f64)> = results[best]
                .regrets
                .iter()
                .copied()
                .zip(results[i].regrets.iter().copied())
                .collect();
            match wilcoxon_one_sided(&pairs) {
                Ok(w) => w.p_value,
                Err(Error::TooFewPairs { .. }) => 1.0,
                Err(e) => panic!("unexpected wilcoxon error: {e}"),
            }
        })
        .collect();
    let reject = holm_bonferroni(&p_values, alpha);
    let adjusted = holm_adjusted(&p_values);

    let rows = results
        .iter()
        .zip(&summaries)
        .enumerate()
        .map(|(i, (m, s))| {
            let k = others.iter().position(|&o| o == i);
            TableRow {
                method: m.method.clone(),
                median: s.0,
                mad: s.1,
                best: i == best,
                equivalent_to_best: k.map_or(true, |k| !reject[k]),
                p_value: k.map(|k| p_values[k]),
                adjusted_p_value: k.map(|k| adjusted[k]),
            }
        })
        .collect();
    Ok(ComparisonTable {
        rows,
        alpha,
        median_tie_break: (tied.len() > 1).then_some(tied),
    })
}
