//! The CLRBTE(λ, p1, p2) distribution: the cubic lower record-based map
//! applied to the exponential base `G(x) = 1 − e^{−λx}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::invert_cdf;
use crate::transmute::{clrbt_cdf, clrbt_survival, BaseDistribution, Exponential, SimplexWeights};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    lambda: f64,
    weights: SimplexWeights,
}

impl Params {
    pub fn new(lambda: f64, p1: f64, p2: f64) -> Result<Self> {
        Self::from_parts(lambda, SimplexWeights::new(p1, p2)?)
    }

    /// Parameters whose weights only satisfy `0 ≤ p1, p2 ≤ 1`. See
    /// [`SimplexWeights::relaxed`].
    pub fn relaxed(lambda: f64, p1: f64, p2: f64) -> Result<Self> {
        Self::from_parts(lambda, SimplexWeights::relaxed(p1, p2)?)
    }

    pub fn from_parts(lambda: f64, weights: SimplexWeights) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::domain("lambda", lambda, "must be positive and finite"));
        }
        Ok(Params { lambda, weights })
    }

    /// Builds parameters from `[λ, p1, p2]`.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v {
            [l, p1, p2] => Self::new(*l, *p1, *p2),
            _ => Err(Error::Config(format!(
                "CLRBTE takes 3 parameters, got {}",
                v.len()
            ))),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p1(&self) -> f64 {
        self.weights.p1()
    }

    pub fn p2(&self) -> f64 {
        self.weights.p2()
    }

    pub fn weights(&self) -> &SimplexWeights {
        &self.weights
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.lambda, self.p1(), self.p2()]
    }

    pub fn base(&self) -> Exponential {
        Exponential::new(self.lambda).expect("lambda validated at construction")
    }

    pub fn cdf(&self, x: f64) -> f64 {
        clrbt_cdf(&self.base(), &self.weights, x)
    }

    pub fn survival(&self, x: f64) -> f64 {
        clrbt_survival(&self.base(), &self.weights, x)
    }

    /// `ln G(x)` of the exponential base.
    pub(crate) fn ln_base_cdf(&self, x: f64) -> f64 {
        self.base().ln_cdf(x)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let b = self.weights.bracket(self.ln_base_cdf(x));
        if b.is_infinite() {
            return b;
        }
        self.lambda * (-self.lambda * x).exp() * b
    }

    /// `ln f(x)`, assembled from `ln λ − λx` and the log of the bracket so that
    /// it stays finite where `f` itself underflows.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let b = self.weights.bracket(self.ln_base_cdf(x));
        self.lambda.ln() - self.lambda * x + b.ln()
    }

    pub fn hazard(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        let s = self.survival(x);
        if !(s > 0.0) {
            return Err(Error::HazardOverflow { x });
        }
        Ok(self.pdf(x) / s)
    }

    /// Numerical inverse of the CDF.
    ///
    /// `u = 0` maps to 0; `u = 1` and values outside `[0, 1]` are domain errors.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if u == 1.0 {
            return Err(Error::domain("u", u, "the support is unbounded above"));
        }
        invert_cdf(|x| self.cdf(x), |x| self.survival(x), u, 1.0 / self.lambda)
    }
}
