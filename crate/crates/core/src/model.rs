//! Uniform handle over the CLRBTE distribution and its competitors.
//!
//! [`Model`] names a family and describes its parameter space; [`ModelParams`]
//! is a validated parameter vector bound to a family, with infallible
//! density evaluation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::Params;
use crate::competitors::CompetitorParams;
use crate::error::{Error, Result};
use crate::sampling::{sample_composition, RngStream};

/// How a parameter is mapped to an unconstrained coordinate for optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TransformKind {
    /// `(0, ∞)` through `exp`.
    Log,
    /// `(−1, 1)` through a scaled logistic map.
    SignedUnit,
    /// First coordinate of a `(p1, p2)` pair on the probability simplex; the
    /// next parameter is its partner.
    SimplexPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub lower: f64,
    pub upper: f64,
    pub transform: TransformKind,
}

const fn spec(name: &'static str, lower: f64, upper: f64, transform: TransformKind) -> ParamSpec {
    ParamSpec {
        name,
        lower,
        upper,
        transform,
    }
}

const CLRBTE_SPACE: [ParamSpec; 3] = [
    spec("lambda", 0.0, f64::INFINITY, TransformKind::Log),
    spec("p1", 0.0, 1.0, TransformKind::SimplexPair),
    spec("p2", 0.0, 1.0, TransformKind::SimplexPair),
];
const E_SPACE: [ParamSpec; 1] = [spec("lambda", 0.0, f64::INFINITY, TransformKind::Log)];
const TE_SPACE: [ParamSpec; 2] = [
    spec("lambda", 0.0, f64::INFINITY, TransformKind::Log),
    spec("theta", -1.0, 1.0, TransformKind::SignedUnit),
];
const TGR_SPACE: [ParamSpec; 3] = [
    spec("lambda", 0.0, f64::INFINITY, TransformKind::Log),
    spec("beta", 0.0, f64::INFINITY, TransformKind::Log),
    spec("theta", -1.0, 1.0, TransformKind::SignedUnit),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Clrbte,
    E,
    Te,
    Tgr,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Clrbte, Model::Te, Model::E, Model::Tgr];

    pub fn id(&self) -> &'static str {
        match self {
            Model::Clrbte => "clrbte",
            Model::E => "e",
            Model::Te => "te",
            Model::Tgr => "tgr",
        }
    }

    /// Display label used in report tables.
    pub fn label(&self) -> &'static str {
        match self {
            Model::Clrbte => "CLRBTE",
            Model::E => "E",
            Model::Te => "TE",
            Model::Tgr => "TGR",
        }
    }

    pub fn param_space(&self) -> &'static [ParamSpec] {
        match self {
            Model::Clrbte => &CLRBTE_SPACE,
            Model::E => &E_SPACE,
            Model::Te => &TE_SPACE,
            Model::Tgr => &TGR_SPACE,
        }
    }

    pub fn n_params(&self) -> usize {
        self.param_space().len()
    }

    pub fn param_names(&self) -> Vec<&'static str> {
        self.param_space().iter().map(|p| p.name).collect()
    }

    pub fn bind(&self, v: &[f64]) -> Result<ModelParams> {
        if v.len() != self.n_params() {
            return Err(Error::Config(format!(
                "{} takes {} parameters, got {}",
                self.label(),
                self.n_params(),
                v.len()
            )));
        }
        let bound = match self {
            Model::Clrbte => ModelParams::Clrbte(Params::from_slice(v)?),
            Model::E => ModelParams::Competitor(CompetitorParams::E { lambda: v[0] }),
            Model::Te => ModelParams::Competitor(CompetitorParams::Te {
                lambda: v[0],
                theta: v[1],
            }),
            Model::Tgr => ModelParams::Competitor(CompetitorParams::Tgr {
                lambda: v[0],
                beta: v[1],
                theta: v[2],
            }),
        };
        if let ModelParams::Competitor(c) = &bound {
            c.validate()?;
        }
        Ok(bound)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clrbte" => Ok(Model::Clrbte),
            "e" | "exp" | "exponential" => Ok(Model::E),
            "te" => Ok(Model::Te),
            "tgr" => Ok(Model::Tgr),
            other => Err(Error::Config(format!(
                "unknown distribution `{other}` (expected clrbte, e, te or tgr)"
            ))),
        }
    }
}

/// A validated parameter vector bound to its family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelParams {
    Clrbte(Params),
    Competitor(CompetitorParams),
}

impl ModelParams {
    pub fn model(&self) -> Model {
        match self {
            ModelParams::Clrbte(_) => Model::Clrbte,
            ModelParams::Competitor(CompetitorParams::E { .. }) => Model::E,
            ModelParams::Competitor(CompetitorParams::Te { .. }) => Model::Te,
            ModelParams::Competitor(CompetitorParams::Tgr { .. }) => Model::Tgr,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            ModelParams::Clrbte(p) => p.to_array().to_vec(),
            ModelParams::Competitor(CompetitorParams::E { lambda }) => vec![lambda],
            ModelParams::Competitor(CompetitorParams::Te { lambda, theta }) => vec![lambda, theta],
            ModelParams::Competitor(CompetitorParams::Tgr {
                lambda,
                beta,
                theta,
            }) => vec![lambda, beta, theta],
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            ModelParams::Clrbte(p) => p.cdf(x),
            ModelParams::Competitor(c) => c.cdf(x).expect("validated at bind"),
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        match self {
            ModelParams::Clrbte(p) => p.survival(x),
            ModelParams::Competitor(c) => c.survival(x).expect("validated at bind"),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            ModelParams::Clrbte(p) => p.pdf(x),
            ModelParams::Competitor(c) => c.pdf(x).expect("validated at bind"),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            ModelParams::Clrbte(p) => p.ln_pdf(x),
            ModelParams::Competitor(c) => c.ln_pdf(x).expect("validated at bind"),
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            ModelParams::Clrbte(p) => p.quantile(u),
            ModelParams::Competitor(c) => c.quantile(u),
        }
    }

    /// `n` draws: exact composition for CLRBTE, inversion otherwise.
    pub fn sample(&self, n: usize, stream: RngStream) -> Result<Vec<f64>> {
        match self {
            ModelParams::Clrbte(p) => sample_composition(p, n, stream),
            ModelParams::Competitor(c) => {
                let mut rng = stream.rng();
                (0..n)
                    .map(|_| c.quantile(crate::sampling::open_uniform(&mut rng)))
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for m in Model::ALL {
            assert_eq!(m.id().parse::<Model>().unwrap(), m);
            assert_eq!(m.label().parse::<Model>().unwrap(), m);
        }
        assert!("weibull".parse::<Model>().is_err());
    }

    #[test]
    fn bind_validates() {
        assert!(Model::Clrbte.bind(&[1.0, 0.7, 0.7]).is_err());
        assert!(Model::Te.bind(&[1.0, 1.0]).is_err());
        assert!(Model::Tgr.bind(&[1.0, 0.5]).is_err());
        let b = Model::Tgr.bind(&[0.5, 1.0, 0.2]).unwrap();
        assert_eq!(b.model(), Model::Tgr);
        assert_eq!(b.to_vec(), vec![0.5, 1.0, 0.2]);
    }

    #[test]
    fn cdf_of_quantile() {
        for (m, v) in [
            (Model::Clrbte, vec![1.2, 0.3, 0.3]),
            (Model::E, vec![0.4]),
            (Model::Te, vec![2.0, -0.3]),
            (Model::Tgr, vec![0.8, 0.5, 0.6]),
        ] {
            let b = m.bind(&v).unwrap();
            for i in 1..20 {
                let u = i as f64 / 20.0;
                assert!((b.cdf(b.quantile(u).unwrap()) - u).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn competitor_sampler_is_deterministic() {
        let b = Model::Te.bind(&[2.0, 0.5]).unwrap();
        let s = RngStream::new(9, 1);
        assert_eq!(b.sample(50, s).unwrap(), b.sample(50, s).unwrap());
    }
}
