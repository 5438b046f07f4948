//! Raw moments and descriptive statistics of CLRBTE.
//!
//! Quadrature is the production route. With `u = 1 − e^{−λx}`,
//! `E[X^r] = λ^{−r} ∫₀¹ (−ln(1−u))^r [p1 − p2 ln u + ((1−p1−p2)/2)(ln u)²] du`.
//! The double series for
//! `r ≤ 2` is kept as an independent check.

use serde::Serialize;

use crate::dist::Params;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentMethod {
    Series,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub mean: f64,
    pub variance: f64,
    pub sd: f64,
    pub cv: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub raw_moments: [f64; 4],
    pub method: MomentMethod,
}

fn moment_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        ..QuadOptions::default()
    }
}

/// `E[X^r]` by adaptive quadrature in the probability scale, split at ½ so
/// each half has its singularity at the left endpoint.
pub fn raw_moment_quadrature(p: &Params, r: u32) -> Result<f64> {
    if !(1..=4).contains(&r) {
        return Err(Error::domain("r", r as f64, "moment order must be 1, 2, 3 or 4"));
    }
    let w = p.weights();
    let opts = moment_options();
    // Left half: u ∈ (0, ½], singular through ln u.
    let left = integrate(
        |u: f64| (-(-u).ln_1p()).powi(r as i32) * w.bracket(u.ln()),
        0.0,
        0.5,
        &opts,
    )?;
    // Right half with v = 1 − u ∈ (0, ½], singular through ln v.
    let right = integrate(
        |v: f64| (-v.ln()).powi(r as i32) * w.bracket((-v).ln_1p()),
        0.0,
        0.5,
        &opts,
    )?;
    Ok((left.value + right.value) / p.lambda().powi(r as i32))
}

const SERIES_CAP: usize = 1_000_000;
const SERIES_TAIL: f64 = 1e-12;

/// `E[X^r]` for `r ∈ {1, 2}` from the record-series representation
/// `λ^{−r} Σ_{k1..kr ≥ 1} (k1⋯kr)^{−1} h(k1+⋯+kr)`, where
/// `h(K) = p1/(K+1) + p2/(K+1)² + p3/(K+1)³`.
///
/// The `p1` part of the tail is added in closed form; the rest is truncated
/// once its majorant drops below 1e-12 (or after 10⁶ terms).
pub fn raw_moment_series(p: &Params, r: u32) -> Result<f64> {
    let (p1, p2, p3) = (p.p1(), p.p2(), p.weights().p3());
    let h = |k: f64| {
        let a = 1.0 / (k + 1.0);
        a * (p1 + a * (p2 + a * p3))
    };
    let rest = p2.abs() + p3.abs();
    let total = match r {
        1 => {
            // Tail: Σ_{k>N} 1/(k(k+1)) = 1/(N+1); remainder ≤ rest/(2N²).
            let mut sum = 0.0;
            let mut n = 0usize;
            while n < SERIES_CAP {
                n += 1;
                sum += h(n as f64) / n as f64;
                let nf = n as f64;
                if rest / (2.0 * nf * nf) < SERIES_TAIL {
                    break;
                }
            }
            sum + p1 / (n as f64 + 1.0)
        }
        2 => {
            // Grouping by K = k1 + k2 gives Σ_{K≥2} h(K)·2H_{K−1}/K. Tail of
            // the p1 part: 2(H_N + 1)/(N+1); remainder ≤ rest·(1.5 + ln N)/N².
            let mut sum = 0.0;
            let mut harmonic = 1.0; // H_{K−1} for K = 2
            let mut k = 2usize;
            loop {
                let kf = k as f64;
                sum += h(kf) * 2.0 * harmonic / kf;
                harmonic += 1.0 / kf;
                if k >= SERIES_CAP || rest * (1.5 + kf.ln()) / (kf * kf) < SERIES_TAIL {
                    break;
                }
                k += 1;
            }
            // `harmonic` is now H_N with N = k.
            sum + p1 * 2.0 * (harmonic + 1.0) / (k as f64 + 1.0)
        }
        _ => {
            return Err(Error::domain(
                "r",
                r as f64,
                "the series route is implemented for r = 1 and r = 2 only",
            ))
        }
    };
    Ok(total / p.lambda().powi(r as i32))
}

/// Mean, variance, SD, CV, skewness and (non-excess) kurtosis from the first
/// four raw moments by quadrature.
pub fn describe(p: &Params) -> Result<MomentReport> {
    let mut m = [0.0; 4];
    for (i, slot) in m.iter_mut().enumerate() {
        *slot = raw_moment_quadrature(p, i as u32 + 1)?;
    }
    Ok(report_from_raw(m, MomentMethod::Quadrature))
}

pub fn report_from_raw(m: [f64; 4], method: MomentMethod) -> MomentReport {
    let [m1, m2, m3, m4] = m;
    let variance = m2 - m1 * m1;
    let sd = variance.sqrt();
    let skewness = (m3 - 3.0 * m2 * m1 + 2.0 * m1.powi(3)) / sd.powi(3);
    let kurtosis =
        (m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4)) / variance.powi(2);
    MomentReport {
        mean: m1,
        variance,
        sd,
        cv: sd / m1,
        skewness,
        kurtosis,
        raw_moments: m,
        method,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_semi_infinite;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn exponential_raw_moments() {
        for lambda in [0.5, 1.0, 3.0] {
            let p = Params::new(lambda, 1.0, 0.0).unwrap();
            let mut fact = 1.0;
            for r in 1..=4 {
                fact *= r as f64;
                let m = raw_moment_quadrature(&p, r).unwrap();
                assert!(rel(m, fact / lambda.powi(r as i32)) < 1e-10);
            }
        }
        let d = describe(&Params::new(1.0, 1.0, 0.0).unwrap()).unwrap();
        for (got, want) in [(d.mean, 1.0), (d.variance, 1.0), (d.cv, 1.0), (d.skewness, 2.0), (d.kurtosis, 9.0)] {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn quadrature_agrees_with_x_space_integral() {
        let p = Params::new(0.8, 0.3, 0.3).unwrap();
        for r in 1..=4 {
            let direct = integrate_semi_infinite(
                |x| x.powi(r) * p.pdf(x),
                0.0,
                &QuadOptions {
                    abs_tol: 1e-11,
                    rel_tol: 1e-11,
                    ..QuadOptions::default()
                },
            )
            .unwrap();
            let m = raw_moment_quadrature(&p, r as u32).unwrap();
            assert!(rel(m, direct.value) < 1e-8, "r = {r}: {m} vs {}", direct.value);
        }
    }

    #[test]
    fn series_telescopes_for_exponential() {
        let p = Params::new(1.0, 1.0, 0.0).unwrap();
        assert!((raw_moment_series(&p, 1).unwrap() - 1.0).abs() < 1e-14);
        assert!((raw_moment_series(&p, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn series_matches_quadrature() {
        for (l, a, b) in [(0.5, 0.5, 0.5), (1.0, 0.2, 0.4), (2.0, 0.0, 0.0), (0.3, 0.1, 0.85)] {
            let p = Params::new(l, a, b).unwrap();
            for r in 1..=2 {
                let s = raw_moment_series(&p, r).unwrap();
                let q = raw_moment_quadrature(&p, r).unwrap();
                assert!(rel(s, q) < 1e-8, "({l},{a},{b}) r={r}: {s} vs {q}");
            }
        }
        assert!(raw_moment_series(&Params::new(1.0, 0.5, 0.5).unwrap(), 3).is_err());
    }

    #[test]
    fn scale_invariance() {
        let base = describe(&Params::new(1.0, 0.3, 0.5).unwrap()).unwrap();
        for l in [0.5, 2.0] {
            let d = describe(&Params::new(l, 0.3, 0.5).unwrap()).unwrap();
            assert!(rel(d.cv, base.cv) < 1e-9);
            assert!(rel(d.skewness, base.skewness) < 1e-9);
            assert!(rel(d.kurtosis, base.kurtosis) < 1e-9);
            assert!(rel(d.mean, base.mean / l) < 1e-9);
            assert!(rel(d.variance, base.variance / (l * l)) < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_order() {
        let p = Params::new(1.0, 0.5, 0.5).unwrap();
        assert!(raw_moment_quadrature(&p, 0).is_err());
        assert!(raw_moment_quadrature(&p, 5).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(20))]
            #[test]
            fn series_and_quadrature_agree(l in 0.1f64..5.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
                let p = Params::new(l, a, b * (1.0 - a)).unwrap();
                for r in 1..=2 {
                    let s = raw_moment_series(&p, r).unwrap();
                    let q = raw_moment_quadrature(&p, r).unwrap();
                    prop_assert!(rel(s, q) < 1e-8);
                }
            }
        }
    }
}
