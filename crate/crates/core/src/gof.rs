//! Goodness-of-fit statistics with fully-specified-parameter p-values, and
//! the model comparison table.
//!
//! P-value approximations:
//! * KS: the exact Marsaglia–Tsang–Wang distribution for `n < 100` without
//!   ties, otherwise the Kolmogorov limit law at `√n·D`.
//! * AD: Marsaglia & Marsaglia (2004), limit distribution plus the finite-`n`
//!   error correction.
//! * CvM: Csörgő & Faraway (1996), limit distribution plus the `1/n` term.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::estimators::FitReport;
use crate::model::ModelParams;
use crate::quadrature::{integrate, QuadOptions};
use crate::sample::Sample;

/// Lower and upper clamps applied to model CDF values before taking logs.
pub const F_FLOOR: f64 = 1e-300;
pub const F_CEIL: f64 = 1.0 - 1e-16;

pub fn clamp_cdf(f: f64) -> f64 {
    f.clamp(F_FLOOR, F_CEIL)
}

/// `D = max_i max(i/n − F_i, F_i − (i−1)/n)` for CDF values at sorted data.
pub fn ks_statistic(f_sorted: &[f64]) -> f64 {
    let n = f_sorted.len() as f64;
    f_sorted
        .iter()
        .enumerate()
        .map(|(i, &f)| ((i + 1) as f64 / n - f).max(f - i as f64 / n))
        .fold(0.0, f64::max)
}

/// `A² = −n − (1/n) Σ (2i−1)[ln F_i + ln(1 − F_{n+1−i})]`.
pub fn ad_statistic(f_sorted: &[f64]) -> f64 {
    let n = f_sorted.len();
    let s: f64 = (0..n)
        .map(|i| {
            let lo = clamp_cdf(f_sorted[i]).ln();
            let hi = (-clamp_cdf(f_sorted[n - 1 - i])).ln_1p();
            (2 * i + 1) as f64 * (lo + hi)
        })
        .sum();
    -(n as f64) - s / n as f64
}

/// `W² = 1/(12n) + Σ (F_i − (2i−1)/(2n))²`.
pub fn cvm_statistic(f_sorted: &[f64]) -> f64 {
    let n = f_sorted.len() as f64;
    1.0 / (12.0 * n)
        + f_sorted
            .iter()
            .enumerate()
            .map(|(i, &f)| (f - (2 * i + 1) as f64 / (2.0 * n)).powi(2))
            .sum::<f64>()
}

/// Kolmogorov limit law `P(K > t)`.
pub fn kolmogorov_survival(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 1.0 {
        // Theta-function form converges fast for small t.
        let c = -PI * PI / (8.0 * t * t);
        let s: f64 = (1..=20).map(|k| (c * ((2 * k - 1) as f64).powi(2)).exp()).sum();
        return (1.0 - (2.0 * PI).sqrt() / t * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// `P(D_n < d)` for the one-sample statistic with continuous `F`
/// (Marsaglia, Tsang & Wang 2003).
pub fn ks_exact_cdf(n: usize, d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    if d >= 1.0 {
        return 1.0;
    }
    let nd = n as f64 * d;
    let k = nd.floor() as usize + 1;
    let m = 2 * k - 1;
    let h = k as f64 - nd;
    let mut hm = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                hm[(i, j)] = 1.0;
            }
        }
    }
    for i in 0..m {
        hm[(i, 0)] -= h.powi(i as i32 + 1);
        hm[(m - 1, i)] -= h.powi((m - i) as i32);
    }
    if 2.0 * h - 1.0 > 0.0 {
        hm[(m - 1, 0)] += (2.0 * h - 1.0).powi(m as i32);
    }
    for i in 0..m {
        for j in 0..m {
            if i + 1 > j {
                for g in 1..=(i + 1 - j) {
                    hm[(i, j)] /= g as f64;
                }
            }
        }
    }
    let (q, mut e) = scaled_power(&hm, n);
    let mut s = q[(k - 1, k - 1)];
    for i in 1..=n {
        s *= i as f64 / n as f64;
        if s < 1e-140 {
            s *= 1e140;
            e -= 140;
        }
    }
    (s * 10f64.powi(e)).clamp(0.0, 1.0)
}

/// `A^n` as `(M, e)` with `A^n = M·10^e`, rescaling to avoid overflow.
fn scaled_power(a: &DMatrix<f64>, n: usize) -> (DMatrix<f64>, i32) {
    if n == 1 {
        return (a.clone(), 0);
    }
    let (half, e_half) = scaled_power(a, n / 2);
    let mut b = &half * &half;
    let mut e = 2 * e_half;
    if n % 2 == 1 {
        b = a * &b;
    }
    let centre = b.nrows() / 2;
    if b[(centre, centre)] > 1e140 {
        b /= 1e140;
        e += 140;
    }
    (b, e)
}

/// KS p-value: exact for `n < 100` without ties, asymptotic otherwise.
pub fn ks_pvalue(d: f64, n: usize, ties: bool) -> f64 {
    if n < 100 && !ties {
        (1.0 - ks_exact_cdf(n, d)).clamp(0.0, 1.0)
    } else {
        kolmogorov_survival((n as f64).sqrt() * d)
    }
}

/// Limit distribution of A² (Marsaglia & Marsaglia 2004).
fn ad_limit_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z < 2.0 {
        (-1.2337141 / z).exp() / z.sqrt()
            * (2.00012
                + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z)
                    * z)
    } else {
        (-(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z)
            .exp())
        .exp()
    }
}

fn ad_error_fix(n: f64, x: f64) -> f64 {
    let c = 0.01265 + 0.1757 / n;
    if x < c {
        let t = x / c;
        let t = t.sqrt() * (1.0 - t) * (49.0 * t - 102.0);
        return t * (0.0037 / n.powi(3) + 0.00078 / n.powi(2) + 0.00006 / n);
    }
    if x < 0.8 {
        let t = (x - c) / (0.8 - c);
        let t = -0.00022633
            + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t;
        return t * (0.04213 / n + 0.01365 / n.powi(2));
    }
    (-130.2137
        + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x)
        / n
}

pub fn ad_pvalue(a2: f64, n: usize) -> f64 {
    let x = ad_limit_cdf(a2);
    (1.0 - (x + ad_error_fix(n as f64, x))).clamp(0.0, 1.0)
}

/// `e^z K_ν(z)` from `∫₀^∞ exp(−z(cosh t − 1)) cosh(νt) dt`.
fn bessel_k_scaled(nu: f64, z: f64) -> f64 {
    // Beyond `t_max` the integrand is below e^{-745}.
    let t_max = (1.0 + 745.0 / z).acosh();
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        ..QuadOptions::default()
    };
    integrate(|t| (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh(), 0.0, t_max, &opts)
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
}

/// `e^{−z} K_ν(z)`.
fn exp_neg_bessel_k(nu: f64, z: f64) -> f64 {
    (-2.0 * z).exp() * bessel_k_scaled(nu, z)
}

fn cvm_limit_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let u = (ln_gamma(kf + 0.5) - ln_gamma(kf + 1.0)).exp() / (PI.powf(1.5) * x.sqrt());
        let y = 4.0 * kf + 1.0;
        let q = y * y / (16.0 * x);
        let term = u * y.sqrt() * exp_neg_bessel_k(0.25, q);
        total += term;
        if term.abs() < 1e-7 {
            break;
        }
    }
    total
}

fn cvm_first_order(x: f64) -> f64 {
    let ed2 = |y: f64| {
        let z = y * y / 4.0;
        (y / 2.0).powf(1.5) * (exp_neg_bessel_k(0.25, z) + exp_neg_bessel_k(0.75, z)) / PI.sqrt()
    };
    let ed3 = |y: f64| {
        let z = y * y / 4.0;
        (y / 2.0).powf(2.5)
            * (2.0 * exp_neg_bessel_k(0.25, z) + 3.0 * exp_neg_bessel_k(0.75, z)
                - exp_neg_bessel_k(1.25, z))
            / PI.sqrt()
    };
    let sx = 2.0 * x.sqrt();
    let (y1, y2) = (x.powf(0.75), x.powf(1.25));
    let mut total = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let m = 2.0 * kf + 1.0;
        let g_half = ln_gamma(kf + 0.5).exp();
        let g_three_halves = ln_gamma(kf + 1.5).exp();
        let a = m * g_half * ed2((4.0 * kf + 3.0) / sx) / (9.0 * y1)
            + g_half * ed3((4.0 * kf + 1.0) / sx) / (72.0 * y2)
            + 2.0 * (m + 2.0) * g_three_halves * ed3((4.0 * kf + 5.0) / sx) / (12.0 * y2)
            + 7.0 * m * g_half * ed2((4.0 * kf + 1.0) / sx) / (144.0 * y1)
            + 7.0 * m * g_half * ed2((4.0 * kf + 5.0) / sx) / (144.0 * y1);
        let term = -a / (PI * ln_gamma(kf + 1.0).exp());
        total += term;
        if term.abs() < 1e-7 {
            break;
        }
    }
    total
}

pub fn cvm_pvalue(w2: f64, n: usize) -> f64 {
    let nf = n as f64;
    let cdf = if w2 <= 1.0 / (12.0 * nf) {
        0.0
    } else if w2 >= nf / 3.0 {
        1.0
    } else {
        cvm_limit_cdf(w2) * (1.0 + 1.0 / (12.0 * nf)) + cvm_first_order(w2) / nf
    };
    (1.0 - cdf).clamp(0.0, 1.0)
}

/// Two-sample KS statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    (d, kolmogorov_survival(en * d))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofBlock {
    pub ks: f64,
    pub ad: f64,
    pub cvm: f64,
    pub p_ks: f64,
    pub p_ad: f64,
    pub p_cvm: f64,
    pub aic: f64,
}

/// The three statistics of a sample against a fitted model.
pub fn statistics(model: &ModelParams, sample: &Sample) -> (f64, f64, f64) {
    let f: Vec<f64> = sample.values().iter().map(|&x| model.cdf(x)).collect();
    (ks_statistic(&f), ad_statistic(&f), cvm_statistic(&f))
}

pub fn gof_block(model: &ModelParams, sample: &Sample, aic: f64) -> GofBlock {
    let (ks, ad, cvm) = statistics(model, sample);
    let n = sample.len();
    GofBlock {
        ks,
        ad,
        cvm,
        p_ks: ks_pvalue(ks, n, sample.has_ties()),
        p_ad: ad_pvalue(ad, n),
        p_cvm: cvm_pvalue(cvm, n),
        aic,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub distribution: String,
    pub estimator: String,
    pub aic: f64,
    pub ks: f64,
    pub ad: f64,
    pub cvm: f64,
    pub p_ks: f64,
    pub p_ad: f64,
    pub p_cvm: f64,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub source: String,
    pub n: usize,
    /// Sorted by AIC ascending; the first row carries `best = true`.
    pub rows: Vec<ComparisonRow>,
    pub min_aic: String,
    pub min_ks: String,
    pub min_ad: String,
    pub min_cvm: String,
}

fn arg_min(rows: &[ComparisonRow], key: impl Fn(&ComparisonRow) -> f64) -> String {
    rows.iter()
        .min_by(|a, b| key(a).total_cmp(&key(b)))
        .map(|r| r.distribution.clone())
        .unwrap_or_default()
}

/// Side-by-side comparison of fits to the same sample.
pub fn compare(sample: &Sample, fits: &[FitReport]) -> Result<ComparisonTable> {
    if fits.len() < 2 {
        return Err(Error::Comparison(format!(
            "need at least two fits to compare, got {}",
            fits.len()
        )));
    }
    let key = sample.fingerprint();
    if let Some(f) = fits.iter().find(|f| f.sample_fingerprint != key) {
        return Err(Error::Comparison(format!(
            "fit of {} was made on a different sample ({})",
            f.distribution, f.sample_fingerprint
        )));
    }
    let mut rows: Vec<ComparisonRow> = fits
        .iter()
        .map(|f| ComparisonRow {
            distribution: f.distribution.clone(),
            estimator: f.estimator.clone(),
            aic: f.gof.aic,
            ks: f.gof.ks,
            ad: f.gof.ad,
            cvm: f.gof.cvm,
            p_ks: f.gof.p_ks,
            p_ad: f.gof.p_ad,
            p_cvm: f.gof.p_cvm,
            best: false,
        })
        .collect();
    rows.sort_by(|a, b| a.aic.total_cmp(&b.aic));
    rows[0].best = true;
    Ok(ComparisonTable {
        source: sample.source().to_string(),
        n: sample.len(),
        min_aic: arg_min(&rows, |r| r.aic),
        min_ks: arg_min(&rows, |r| r.ks),
        min_ad: arg_min(&rows, |r| r.ad),
        min_cvm: arg_min(&rows, |r| r.cvm),
        rows,
    })
}

impl ComparisonTable {
    /// Aligned plain text with columns Distribution, AIC, KS, AD, CvM and the
    /// three p-values.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>8} {:>8} {:>8} {:>11} {:>11} {:>12}",
            "Distribution", "AIC", "KS", "AD", "CvM", "p-value(KS)", "p-value(AD)", "p-value(CvM)"
        );
        for r in &self.rows {
            let name = if r.best {
                format!("{}*", r.distribution)
            } else {
                r.distribution.clone()
            };
            let _ = writeln!(
                out,
                "{:<12} {:>10.4} {:>8.4} {:>8.4} {:>8.4} {:>11.4} {:>11.4} {:>12.4}",
                name, r.aic, r.ks, r.ad, r.cvm, r.p_ks, r.p_ad, r.p_cvm
            );
        }
        let _ = writeln!(out, "* minimum AIC (n = {}, data: {})", self.n, self.source);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plotting_position_values() {
        let n = 10;
        let f: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        assert!((ks_statistic(&f) - 1.0 / (n + 1) as f64).abs() < 1e-15);
        let g: Vec<f64> = (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect();
        assert!((cvm_statistic(&g) - 1.0 / (12 * n) as f64).abs() < 1e-15);
    }

    #[test]
    fn ad_matches_direct_formula() {
        let f: [f64; 5] = [0.1, 0.35, 0.4, 0.8, 0.93];
        let n = 5.0;
        let mut s = 0.0;
        for i in 0..5 {
            s += (2.0 * i as f64 + 1.0) * (f[i].ln() + (1.0 - f[4 - i]).ln());
        }
        assert!((ad_statistic(&f) - (-n - s / n)).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_series_branches_agree() {
        // Both series are valid near t = 1.
        let t: f64 = 1.0;
        let theta = {
            let c = -PI * PI / (8.0 * t * t);
            1.0 - (2.0 * PI).sqrt() / t * (1..=20).map(|k| (c * ((2 * k - 1) as f64).powi(2)).exp()).sum::<f64>()
        };
        assert!((kolmogorov_survival(t) - theta).abs() < 1e-12);
        assert!((kolmogorov_survival(1.3580986393225507) - 0.05).abs() < 1e-6);
    }

    #[test]
    fn exact_ks_small_cases() {
        // n = 1: D = max(F, 1 − F) ≥ ½ and P(D < d) = 2d − 1.
        assert!((ks_exact_cdf(1, 0.75) - 0.5).abs() < 1e-12);
        // Marsaglia-Tsang-Wang paper example: n = 10, d = 0.274 → 0.6284796154565043.
        assert!((ks_exact_cdf(10, 0.274) - 0.6284796154565043).abs() < 1e-10);
    }

    #[test]
    fn bessel_k_half_order_closed_form() {
        // K_{1/2}(z) = √(π/(2z)) e^{−z}.
        for z in [0.01, 0.5, 3.0, 40.0] {
            let want = (PI / (2.0 * z)).sqrt();
            assert!(((bessel_k_scaled(0.5, z) - want) / want).abs() < 1e-10, "z = {z}");
        }
    }

    #[test]
    fn limit_law_quantiles() {
        // Upper 5% points: A² 2.492, W² 0.46136.
        assert!((1.0 - ad_limit_cdf(2.492) - 0.05).abs() < 1e-3);
        assert!((1.0 - cvm_limit_cdf(0.46136) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn pvalues_decrease_in_statistic() {
        let mut prev = (1.0, 1.0, 1.0);
        for i in 1..60 {
            let s = i as f64 * 0.05;
            let p = (ks_pvalue(s / 3.0, 30, false), ad_pvalue(s, 30), cvm_pvalue(s / 4.0, 30));
            assert!(p.0 <= prev.0 + 1e-12 && p.1 <= prev.1 + 1e-12 && p.2 <= prev.2 + 1e-12, "{s}");
            prev = p;
        }
    }

    #[test]
    fn two_sample_identical() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).0, 0.0);
        let (d, _) = ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(d, 1.0);
    }
}
