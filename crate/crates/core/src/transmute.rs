//! Transmutation maps over an arbitrary base distribution.
//!
//! Two maps are provided:
//!
//! * the quadratic (order-2) map `F = (1+θ)G − θG²`, which mixes the two order
//!   statistics of a pair;
//! * the cubic lower record-based map, which mixes the distributions of the
//!   first three lower record values of `G` with weights `(p1, p2, 1−p1−p2)`:
//!
//!   `F = G·[1 − (1−p1)·ln G + ((1−p1−p2)/2)·(ln G)²]`.
//!
//! The k-th lower record value has CDF `G·Σ_{j<k} L^j/j!` with `L = −ln G`, i.e.
//! `P(Poisson(L) < k)`. That identity is what the survival functions below use
//! to avoid cancellation in the upper tail.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous base distribution on `[support_lower, ∞)`.
pub trait BaseDistribution {
    fn name(&self) -> &'static str;

    fn cdf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64;

    /// `ln G(x)`; implementations should override this with a form that stays
    /// accurate when `G(x)` is close to 0 or 1.
    fn ln_cdf(&self, x: f64) -> f64 {
        self.cdf(x).ln()
    }

    /// `1 − G(x)`.
    fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    fn support_lower(&self) -> f64 {
        0.0
    }
}

/// `ln(1 − e^{−t})` for `t > 0` without loss of precision at either end.
pub fn ln_one_minus_exp_neg(t: f64) -> f64 {
    if t <= 0.0 {
        f64::NEG_INFINITY
    } else if t < std::f64::consts::LN_2 {
        (-(-t).exp_m1()).ln()
    } else {
        (-(-t).exp()).ln_1p()
    }
}

/// Exponential base `G(x) = 1 − e^{−λx}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::domain("lambda", rate, "must be positive and finite"));
        }
        Ok(Exponential { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl BaseDistribution for Exponential {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            ln_one_minus_exp_neg(self.rate * x)
        }
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }
}

/// Generalized Rayleigh base `G(x) = (1 − e^{−(βx)²})^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedRayleigh {
    alpha: f64,
    beta: f64,
}

impl GeneralizedRayleigh {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain("lambda", alpha, "must be positive and finite"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::domain("beta", beta, "must be positive and finite"));
        }
        Ok(GeneralizedRayleigh { alpha, beta })
    }
}

impl BaseDistribution for GeneralizedRayleigh {
    fn name(&self) -> &'static str {
        "generalized-rayleigh"
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.ln_cdf(x).exp()
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            // g(x) ~ 2αβ^{2α}·x^{2α−1} near the origin.
            return if self.alpha < 0.5 {
                f64::INFINITY
            } else if self.alpha == 0.5 {
                self.beta
            } else {
                0.0
            };
        }
        let z = (self.beta * x).powi(2);
        let ln_base = ln_one_minus_exp_neg(z);
        let ln_pdf = (2.0 * self.alpha * self.beta * self.beta * x).ln() - z
            + (self.alpha - 1.0) * ln_base;
        ln_pdf.exp()
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.alpha * ln_one_minus_exp_neg((self.beta * x).powi(2))
        }
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            -self.ln_cdf(x).exp_m1()
        }
    }
}

/// Mixing weights `(p1, p2)` of the cubic lower record-based map; the third
/// weight is `1 − p1 − p2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexWeights {
    p1: f64,
    p2: f64,
}

const SIMPLEX_SLACK: f64 = 1e-12;

impl SimplexWeights {
    /// Weights on the closed simplex `p1, p2 ≥ 0`, `p1 + p2 ≤ 1`.
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        let w = Self::relaxed(p1, p2)?;
        if p1 + p2 > 1.0 + SIMPLEX_SLACK {
            return Err(Error::Constraint("p1 + p2 ≤ 1"));
        }
        Ok(w)
    }

    /// Weights that only satisfy the box `0 ≤ p1, p2 ≤ 1`.
    ///
    /// The resulting "distribution" can have a negative third weight and is not
    /// a valid density; it exists so moment tables tabulated outside the
    /// simplex can be reproduced formally.
    pub fn relaxed(p1: f64, p2: f64) -> Result<Self> {
        if !(p1.is_finite() && (0.0..=1.0).contains(&p1)) {
            return Err(Error::domain("p1", p1, "must lie in [0, 1]"));
        }
        if !(p2.is_finite() && (0.0..=1.0).contains(&p2)) {
            return Err(Error::domain("p2", p2, "must lie in [0, 1]"));
        }
        Ok(SimplexWeights { p1, p2 })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// Weight of the third lower record, `1 − p1 − p2`.
    pub fn p3(&self) -> f64 {
        let p3 = 1.0 - self.p1 - self.p2;
        if p3.abs() < SIMPLEX_SLACK {
            0.0
        } else {
            p3
        }
    }

    pub fn is_on_simplex(&self) -> bool {
        self.p1 + self.p2 <= 1.0 + SIMPLEX_SLACK
    }

    /// `p1 − p2·ln G + ((1−p1−p2)/2)(ln G)²` evaluated at `ln G`.
    ///
    /// At `ln G = −∞` the limit is returned (an infinity of the sign of the
    /// leading nonzero coefficient), never NaN.
    pub fn bracket(&self, ln_g: f64) -> f64 {
        let half_p3 = 0.5 * self.p3();
        if ln_g == f64::NEG_INFINITY {
            return if half_p3 != 0.0 {
                half_p3.signum() * f64::INFINITY
            } else if self.p2 != 0.0 {
                f64::INFINITY
            } else {
                self.p1
            };
        }
        let mut b = self.p1;
        if self.p2 != 0.0 {
            b -= self.p2 * ln_g;
        }
        if half_p3 != 0.0 {
            b += half_p3 * ln_g * ln_g;
        }
        b
    }

    /// `1 − (1−p1)·ln G + ((1−p1−p2)/2)(ln G)²`, the CDF multiplier of `G`.
    fn cdf_multiplier(&self, ln_g: f64) -> f64 {
        let neg = -ln_g;
        let mut m = 1.0;
        if self.p1 != 1.0 {
            m += (1.0 - self.p1) * neg;
        }
        let half_p3 = 0.5 * self.p3();
        if half_p3 != 0.0 {
            m += half_p3 * neg * neg;
        }
        m
    }
}

/// CDF of the k-th lower record value of `base`: `G·Σ_{j<k} (−ln G)^j/j!`.
pub fn lower_record_cdf<B: BaseDistribution + ?Sized>(base: &B, k: u32, x: f64) -> f64 {
    let g = base.cdf(x);
    if g <= 0.0 {
        return 0.0;
    }
    let l = -base.ln_cdf(x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= l / f64::from(j);
        sum += term;
    }
    g * sum
}

/// Cubic lower record-based transmuted CDF.
pub fn clrbt_cdf<B: BaseDistribution + ?Sized>(base: &B, w: &SimplexWeights, x: f64) -> f64 {
    if x <= base.support_lower() {
        return 0.0;
    }
    let g = base.cdf(x);
    if g <= 0.0 {
        return 0.0;
    }
    g * w.cdf_multiplier(base.ln_cdf(x))
}

/// Cubic lower record-based transmuted PDF.
///
/// Where `G(x) = 0` and the record weights make the density unbounded, the
/// signed infinity is returned.
pub fn clrbt_pdf<B: BaseDistribution + ?Sized>(base: &B, w: &SimplexWeights, x: f64) -> f64 {
    if x < base.support_lower() {
        return 0.0;
    }
    let g = base.pdf(x);
    let b = w.bracket(base.ln_cdf(x));
    if g == 0.0 && b.is_finite() {
        return 0.0;
    }
    g * b
}

/// `Σ_{j≥k} L^j / j!` for small `L`.
fn poisson_upper_series(l: f64, k: u32) -> f64 {
    let mut term = 1.0;
    for j in 1..=k {
        term *= l / f64::from(j);
    }
    let mut sum = term;
    let mut j = k;
    while term > 1e-18 * sum {
        j += 1;
        term *= l / f64::from(j);
        sum += term;
        if j > 200 {
            break;
        }
    }
    sum
}

/// Survival of the k-th lower record value, `P(Poisson(L) ≥ k)` with `L = −ln G`.
fn lower_record_survival<B: BaseDistribution + ?Sized>(base: &B, k: u32, x: f64) -> f64 {
    let s1 = base.survival(x);
    if k == 1 {
        return s1;
    }
    let l = -base.ln_cdf(x);
    if l < 1.0 {
        let g = base.cdf(x);
        g * poisson_upper_series(l, k)
    } else {
        1.0 - lower_record_cdf(base, k, x)
    }
}

/// `1 − clrbt_cdf`, arranged as a mixture of record-value survival functions
/// so the upper tail keeps full relative precision.
pub fn clrbt_survival<B: BaseDistribution + ?Sized>(base: &B, w: &SimplexWeights, x: f64) -> f64 {
    if x <= base.support_lower() {
        return 1.0;
    }
    let mut s = 0.0;
    for (k, weight) in [(1, w.p1()), (2, w.p2()), (3, w.p3())] {
        if weight != 0.0 {
            s += weight * lower_record_survival(base, k, x);
        }
    }
    s
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta.is_finite() && (-1.0..=1.0).contains(&theta)) {
        return Err(Error::domain("theta", theta, "must lie in [-1, 1]"));
    }
    Ok(())
}

/// Quadratic transmuted CDF `(1+θ)G − θG²`.
pub fn quadratic_transmuted_cdf<B: BaseDistribution + ?Sized>(
    base: &B,
    theta: f64,
    x: f64,
) -> Result<f64> {
    check_theta(theta)?;
    let g = base.cdf(x);
    Ok((1.0 + theta) * g - theta * g * g)
}

/// Quadratic transmuted PDF `g·(1 + θ − 2θG)`.
pub fn quadratic_transmuted_pdf<B: BaseDistribution + ?Sized>(
    base: &B,
    theta: f64,
    x: f64,
) -> Result<f64> {
    check_theta(theta)?;
    let g = base.cdf(x);
    let dens = base.pdf(x);
    let factor = 1.0 + theta - 2.0 * theta * g;
    if dens == 0.0 {
        return Ok(0.0);
    }
    Ok(dens * factor)
}

/// Quadratic transmuted survival `(1−G)(1 − θG)`.
pub fn quadratic_transmuted_survival<B: BaseDistribution + ?Sized>(
    base: &B,
    theta: f64,
    x: f64,
) -> Result<f64> {
    check_theta(theta)?;
    let g = base.cdf(x);
    Ok(base.survival(x) * (1.0 - theta * g))
}
