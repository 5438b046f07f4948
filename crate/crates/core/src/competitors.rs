//! Comparison models: exponential (E), transmuted exponential (TE) and
//! transmuted generalized Rayleigh (TGR).
//!
//! TE and TGR are the quadratic transmutation map applied to the exponential
//! and generalized Rayleigh bases respectively.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::invert_cdf;
use crate::transmute::{
    quadratic_transmuted_cdf, quadratic_transmuted_pdf, quadratic_transmuted_survival,
    BaseDistribution, Exponential, GeneralizedRayleigh,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum CompetitorParams {
    E { lambda: f64 },
    Te { lambda: f64, theta: f64 },
    Tgr { lambda: f64, beta: f64, theta: f64 },
}

fn open_theta(theta: f64) -> Result<()> {
    if !(theta.is_finite() && theta > -1.0 && theta < 1.0) {
        return Err(Error::domain("theta", theta, "must lie in (-1, 1)"));
    }
    Ok(())
}

impl CompetitorParams {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CompetitorParams::E { lambda } => Exponential::new(lambda).map(|_| ()),
            CompetitorParams::Te { lambda, theta } => {
                Exponential::new(lambda)?;
                open_theta(theta)
            }
            CompetitorParams::Tgr {
                lambda,
                beta,
                theta,
            } => {
                GeneralizedRayleigh::new(lambda, beta)?;
                open_theta(theta)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        match *self {
            CompetitorParams::E { lambda } => e_pdf(lambda, x),
            CompetitorParams::Te { lambda, theta } => te_pdf(lambda, theta, x),
            CompetitorParams::Tgr {
                lambda,
                beta,
                theta,
            } => tgr_pdf(lambda, beta, theta, x),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        match *self {
            CompetitorParams::E { lambda } => e_cdf(lambda, x),
            CompetitorParams::Te { lambda, theta } => te_cdf(lambda, theta, x),
            CompetitorParams::Tgr {
                lambda,
                beta,
                theta,
            } => tgr_cdf(lambda, beta, theta, x),
        }
    }

    pub fn survival(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            CompetitorParams::E { lambda } => Exponential::new(lambda)?.survival(x),
            CompetitorParams::Te { lambda, theta } => {
                quadratic_transmuted_survival(&Exponential::new(lambda)?, theta, x)?
            }
            CompetitorParams::Tgr {
                lambda,
                beta,
                theta,
            } => quadratic_transmuted_survival(&GeneralizedRayleigh::new(lambda, beta)?, theta, x)?,
        })
    }

    /// `ln f(x)`, evaluated in log space for the exponential factors.
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x < 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(match *self {
            CompetitorParams::E { lambda } => lambda.ln() - lambda * x,
            CompetitorParams::Te { lambda, theta } => {
                let g = -(-lambda * x).exp_m1();
                lambda.ln() - lambda * x + (1.0 + theta - 2.0 * theta * g).ln()
            }
            CompetitorParams::Tgr {
                lambda,
                beta,
                theta,
            } => {
                if x == 0.0 {
                    return Ok(self.pdf(0.0)?.ln());
                }
                let base = GeneralizedRayleigh::new(lambda, beta)?;
                let z = (beta * x).powi(2);
                let ln_g = base.ln_cdf(x);
                let ln_base_pdf = (2.0 * lambda * beta * beta * x).ln() - z
                    + (lambda - 1.0) / lambda * ln_g;
                ln_base_pdf + (1.0 + theta - 2.0 * theta * ln_g.exp()).ln()
            }
        })
    }

    /// Inverse CDF. Closed form for E; numerical inversion otherwise.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        self.validate()?;
        if u == 1.0 {
            return Err(Error::domain("u", u, "the support is unbounded above"));
        }
        match *self {
            CompetitorParams::E { lambda } => {
                if !(0.0..1.0).contains(&u) {
                    return Err(Error::domain("u", u, "must lie in [0, 1)"));
                }
                Ok(-(-u).ln_1p() / lambda)
            }
            CompetitorParams::Te { lambda, .. } => invert_cdf(
                |x| self.cdf(x).unwrap_or(f64::NAN),
                |x| self.survival(x).unwrap_or(f64::NAN),
                u,
                1.0 / lambda,
            ),
            CompetitorParams::Tgr { beta, .. } => invert_cdf(
                |x| self.cdf(x).unwrap_or(f64::NAN),
                |x| self.survival(x).unwrap_or(f64::NAN),
                u,
                1.0 / beta,
            ),
        }
    }
}

pub fn e_pdf(lambda: f64, x: f64) -> Result<f64> {
    Ok(Exponential::new(lambda)?.pdf(x))
}

pub fn e_cdf(lambda: f64, x: f64) -> Result<f64> {
    Ok(Exponential::new(lambda)?.cdf(x))
}

pub fn te_pdf(lambda: f64, theta: f64, x: f64) -> Result<f64> {
    open_theta(theta)?;
    quadratic_transmuted_pdf(&Exponential::new(lambda)?, theta, x)
}

pub fn te_cdf(lambda: f64, theta: f64, x: f64) -> Result<f64> {
    open_theta(theta)?;
    quadratic_transmuted_cdf(&Exponential::new(lambda)?, theta, x)
}

pub fn tgr_pdf(lambda: f64, beta: f64, theta: f64, x: f64) -> Result<f64> {
    open_theta(theta)?;
    quadratic_transmuted_pdf(&GeneralizedRayleigh::new(lambda, beta)?, theta, x)
}

pub fn tgr_cdf(lambda: f64, beta: f64, theta: f64, x: f64) -> Result<f64> {
    open_theta(theta)?;
    quadratic_transmuted_cdf(&GeneralizedRayleigh::new(lambda, beta)?, theta, x)
}
