//! Objective functions of the nine estimators on sorted CDF values.
//!
//! Each function takes `F(x_{i:n})` (and where needed `1 − F`) at the sorted
//! sample; [`super::objective`] evaluates them for a bound model.

use crate::gof::{clamp_cdf, F_FLOOR};

/// `Σ [F_i − i/(n+1)]²`.
pub fn lse(f: &[f64]) -> f64 {
    let n1 = (f.len() + 1) as f64;
    f.iter()
        .enumerate()
        .map(|(i, &v)| (v - (i + 1) as f64 / n1).powi(2))
        .sum()
}

/// Weight of the i-th (1-based) squared residual in [`wlse`].
pub fn wlse_weight(i: usize, n: usize) -> f64 {
    let (i, n) = (i as f64, n as f64);
    (n + 1.0).powi(2) * (n + 2.0) / (i * (n - i + 1.0))
}

/// `Σ w_i [F_i − i/(n+1)]²` with `w_i = (n+1)²(n+2)/(i(n−i+1))`.
pub fn wlse(f: &[f64]) -> f64 {
    let n = f.len();
    let n1 = (n + 1) as f64;
    f.iter()
        .enumerate()
        .map(|(i, &v)| wlse_weight(i + 1, n) * (v - (i + 1) as f64 / n1).powi(2))
        .sum()
}

/// Anderson–Darling distance with the symmetric index:
/// `−n − (1/n) Σ (2i−1)[ln F_i + ln S_{n+1−i}]`.
pub fn ade(f: &[f64], surv: &[f64]) -> f64 {
    let n = f.len();
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (clamp_cdf(f[i]).ln() + surv[n - 1 - i].max(F_FLOOR).ln()))
        .sum();
    -(n as f64) - s / n as f64
}

/// Right-tail Anderson–Darling distance:
/// `n/2 − 2 Σ F_i − (1/n) Σ (2i−1) ln S_{n+1−i}`.
pub fn rtade(f: &[f64], surv: &[f64]) -> f64 {
    let n = f.len();
    let tail: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * surv[n - 1 - i].max(F_FLOOR).ln())
        .sum();
    n as f64 / 2.0 - 2.0 * f.iter().sum::<f64>() - tail / n as f64
}

/// `1/(12n) + Σ [F_i − (2i−1)/(2n)]²`.
pub fn cvme(f: &[f64]) -> f64 {
    let n = f.len() as f64;
    1.0 / (12.0 * n)
        + f.iter()
            .enumerate()
            .map(|(i, &v)| (v - (2 * i + 1) as f64 / (2.0 * n)).powi(2))
            .sum::<f64>()
}

/// Mean log spacing `(1/(n+1)) Σ ln(F_i − F_{i−1})`, with `F_0 = 0` and
/// `F_{n+1} = 1`. A zero spacing from tied observations contributes
/// `ln f(x_i)` instead; `ln_pdf[i]` supplies it.
pub fn mpse(f: &[f64], surv_last: f64, ln_pdf: &[f64]) -> f64 {
    let n = f.len();
    let mut total = 0.0;
    let mut prev = 0.0;
    for i in 0..n {
        let d = f[i] - prev;
        total += if d > 0.0 {
            d.ln()
        } else {
            ln_pdf[i]
        };
        prev = f[i];
    }
    total += surv_last.max(F_FLOOR).ln();
    total / (n + 1) as f64
}

/// Spacings of the distinct CDF values, tied observations merged:
/// `m` distinct points give `m + 1` spacings summing to one.
pub fn merged_spacings(f: &[f64], distinct: &[bool], surv_last: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len() + 1);
    let mut prev = 0.0;
    for (v, keep) in f.iter().zip(distinct) {
        if *keep {
            out.push(v - prev);
            prev = *v;
        }
    }
    out.push(surv_last);
    out
}

/// `Σ |I_i − 1/(m+1)|` over merged spacings.
pub fn msade(spacings: &[f64]) -> f64 {
    let target = 1.0 / spacings.len() as f64;
    spacings.iter().map(|d| (d - target).abs()).sum()
}

/// `Σ |ln I_i − ln(1/(m+1))|` over merged spacings, zero spacings floored.
pub fn msalde(spacings: &[f64]) -> f64 {
    let ln_target = -(spacings.len() as f64).ln();
    spacings
        .iter()
        .map(|d| (d.max(F_FLOOR).ln() - ln_target).abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
    }

    #[test]
    fn perfect_plotting_positions() {
        let f = uniform(25);
        assert!(lse(&f) < 1e-18);
        assert!(wlse(&f) < 1e-18);
        let sp = merged_spacings(&f, &[true; 25], 1.0 - f[24]);
        assert!(msade(&sp) < 1e-14);
        assert!(msalde(&sp) < 1e-12);
        let mp = mpse(&f, 1.0 - f[24], &[0.0; 25]);
        assert!((mp + (26f64).ln()).abs() < 1e-12);
        let g: Vec<f64> = (1..=25).map(|i| (2 * i - 1) as f64 / 50.0).collect();
        assert!((cvme(&g) - 1.0 / 300.0).abs() < 1e-15);
    }

    #[test]
    fn small_cases() {
        assert!((wlse_weight(1, 9) - 100.0 * 11.0 / 9.0).abs() < 1e-12);
        assert!((cvme(&[0.7]) - (1.0 / 12.0 + 0.04)).abs() < 1e-15);
        let sp = merged_spacings(&[0.7], &[true], 0.3);
        assert!((msade(&sp) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn ties_are_merged() {
        let f = [0.2, 0.2, 0.6];
        let sp = merged_spacings(&f, &[true, false, true], 0.4);
        assert_eq!(sp.len(), 3);
        assert!((sp.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(msalde(&sp).is_finite());
        // MPSE substitutes the log density for the zero spacing.
        let v = mpse(&f, 0.4, &[0.0, -1.5, 0.0]);
        let want = (0.2f64.ln() - 1.5 + 0.4f64.ln() + 0.4f64.ln()) / 4.0;
        assert!((v - want).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Spacings sum to one, so by AM–GM their mean log is at most −ln(n+1).
            #[test]
            fn mpse_am_gm(mut u in proptest::collection::vec(1e-6f64..0.999_999, 2..60)) {
                u.sort_by(f64::total_cmp);
                u.dedup();
                let n = u.len();
                let v = mpse(&u, 1.0 - u[n - 1], &vec![0.0; n]);
                prop_assert!(v <= -((n + 1) as f64).ln() + 1e-12);
            }
        }
    }
}
