//! Goodness-of-fit statistics.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|u, v| u.total_cmp(v));
    xb.sort_by(|u, v| u.total_cmp(v));
    let (n, m) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xa[i].min(xb[j]);
        while i < n && xa[i] <= x {
            i += 1;
        }
        while j < m && xb[j] <= x {
            j += 1;
        }
        let fa = i as f64 / n as f64;
        let fb = j as f64 / m as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at significance `alpha`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Pearson chi-square statistic for observed counts against expected counts.
///
/// Bins with expected count below 5 should be merged by the caller first.
pub fn chi2_statistic(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            if e > 0.0 {
                (o - e) * (o - e) / e
            } else {
                0.0
            }
        })
        .sum()
}

/// Chi-square critical value with `dof` degrees of freedom at upper-tail
/// probability `alpha`.
pub fn chisq_critical(dof: usize, alpha: f64) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("dof > 0")
        .inverse_cdf(1.0 - alpha)
}

/// Bins a univariate sample against a density and returns the chi-square
/// statistic with its degrees of freedom.
///
/// Bins are equal width between the 0.2% and 99.8% sample quantiles with open
/// tail bins at the ends; expected probabilities come from adaptive quadrature
/// of the density over each bin, and bins with expected count below 5 are
/// merged into their neighbor.
pub fn chi2_against_density<F: Fn(f64) -> f64>(samples: &[f64], pdf: &F, bins: usize) -> (f64, usize) {
    let n = samples.len();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let lo = sorted[(0.002 * n as f64) as usize];
    let hi = sorted[((0.998 * n as f64) as usize).min(n - 1)];
    let width = (hi - lo) / bins as f64;

    // Observed counts: interior bins plus two tail bins.
    let mut observed = vec![0.0; bins + 2];
    for &x in samples {
        let idx = if x < lo {
            0
        } else if x >= hi {
            bins + 1
        } else {
            1 + ((x - lo) / width) as usize
        };
        observed[idx.min(bins + 1)] += 1.0;
    }

    // Expected probabilities by quadrature; tails by complement.
    let mut expected = vec![0.0; bins + 2];
    let mut interior = 0.0;
    for k in 0..bins {
        let a = lo + k as f64 * width;
        let b = a + width;
        let mass = crate::quadrature::adaptive_simpson(pdf, a, b, 1e-10);
        expected[k + 1] = mass * n as f64;
        interior += mass;
    }
    let tail_lo = crate::quadrature::adaptive_simpson(pdf, lo - 60.0 * width, lo, 1e-10).max(0.0);
    expected[0] = tail_lo * n as f64;
    expected[bins + 1] = ((1.0 - interior - tail_lo).max(0.0)) * n as f64;

    // Merge small-expectation bins left to right.
    let mut merged_obs = Vec::new();
    let mut merged_exp = Vec::new();
    let (mut acc_o, mut acc_e) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= 5.0 {
            merged_obs.push(acc_o);
            merged_exp.push(acc_e);
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 && !merged_exp.is_empty() {
        let last = merged_exp.len() - 1;
        merged_obs[last] += acc_o;
        merged_exp[last] += acc_e;
    }
    let stat = chi2_statistic(&merged_obs, &merged_exp);
    (stat, merged_obs.len().saturating_sub(1))
}
