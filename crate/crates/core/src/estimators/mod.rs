//! The nine estimation methods: maximum likelihood, (weighted) least
//! squares, Anderson–Darling and its right-tail variant, Cramér–von Mises,
//! maximum product of spacings, and the two minimum spacing distances.
//!
//! CLRBTE supports all nine; the competitor models are fitted by maximum
//! likelihood only.

mod likelihood;
pub mod objectives;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use likelihood::{model_neg_log_likelihood, neg_log_likelihood, score};

use crate::error::{Error, Result};
use crate::gof::{gof_block, statistics, GofBlock};
use crate::model::{Model, ModelParams};
use crate::optimizer::{
    minimize, numerical_hessian, standard_errors, Direction, ObjectiveSpec, OptOptions, OptResult, SetAside,
    ParamTransform, StandardErrors, SIGNED_UNIT_MARGIN,
};
use crate::sample::Sample;
use crate::sampling::RngStream;
use crate::dist::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorId {
    Mle,
    Lse,
    Wlse,
    Ade,
    Cvme,
    Mpse,
    Rtade,
    Msade,
    Msalde,
}

impl EstimatorId {
    /// Table order.
    pub const ALL: [EstimatorId; 9] = [
        EstimatorId::Mle,
        EstimatorId::Lse,
        EstimatorId::Wlse,
        EstimatorId::Ade,
        EstimatorId::Cvme,
        EstimatorId::Mpse,
        EstimatorId::Rtade,
        EstimatorId::Msade,
        EstimatorId::Msalde,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            EstimatorId::Mle => "mle",
            EstimatorId::Lse => "lse",
            EstimatorId::Wlse => "wlse",
            EstimatorId::Ade => "ade",
            EstimatorId::Cvme => "cvme",
            EstimatorId::Mpse => "mpse",
            EstimatorId::Rtade => "rtade",
            EstimatorId::Msade => "msade",
            EstimatorId::Msalde => "msalde",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EstimatorId::Mle => "MLE",
            EstimatorId::Lse => "LSE",
            EstimatorId::Wlse => "WLSE",
            EstimatorId::Ade => "ADE",
            EstimatorId::Cvme => "CvME",
            EstimatorId::Mpse => "MPSE",
            EstimatorId::Rtade => "RTADE",
            EstimatorId::Msade => "MSADE",
            EstimatorId::Msalde => "MSALDE",
        }
    }

    /// Name used in the simulation tables, where RTADE appears as TADE.
    pub fn table_label(&self) -> &'static str {
        match self {
            EstimatorId::Rtade => "TADE",
            other => other.label(),
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            EstimatorId::Mpse => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    pub fn supports(&self, model: Model) -> bool {
        model == Model::Clrbte || *self == EstimatorId::Mle
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "tade" {
            return Ok(EstimatorId::Rtade);
        }
        EstimatorId::ALL
            .into_iter()
            .find(|e| e.id() == lower)
            .ok_or_else(|| Error::Config(format!("unknown estimator `{s}`")))
    }
}

/// A sample with the bookkeeping the spacing objectives need.
#[derive(Debug, Clone)]
pub struct PreparedSample<'a> {
    pub sample: &'a Sample,
    /// `distinct[i]` is false when `x_i` equals `x_{i−1}`.
    pub distinct: Vec<bool>,
}

impl<'a> PreparedSample<'a> {
    pub fn new(sample: &'a Sample) -> Self {
        let v = sample.values();
        let distinct = (0..v.len()).map(|i| i == 0 || v[i] != v[i - 1]).collect();
        PreparedSample { sample, distinct }
    }
}

/// Value of estimator `est`'s objective for the bound model, in its own
/// sign convention (MPSE is to be maximized, the rest minimized).
pub fn objective_value(est: EstimatorId, m: &ModelParams, s: &PreparedSample<'_>) -> f64 {
    let x = s.sample.values();
    let cdf = || x.iter().map(|&v| m.cdf(v)).collect::<Vec<f64>>();
    let surv = || x.iter().map(|&v| m.survival(v)).collect::<Vec<f64>>();
    let last_surv = || m.survival(x[x.len() - 1]);
    match est {
        EstimatorId::Mle => model_neg_log_likelihood(m, s.sample),
        EstimatorId::Lse => objectives::lse(&cdf()),
        EstimatorId::Wlse => objectives::wlse(&cdf()),
        EstimatorId::Ade => objectives::ade(&cdf(), &surv()),
        EstimatorId::Rtade => objectives::rtade(&cdf(), &surv()),
        EstimatorId::Cvme => objectives::cvme(&cdf()),
        EstimatorId::Mpse => {
            let f = cdf();
            let ln_pdf: Vec<f64> = x
                .iter()
                .zip(&s.distinct)
                .map(|(&v, &d)| if d { 0.0 } else { m.ln_pdf(v) })
                .collect();
            objectives::mpse(&f, last_surv(), &ln_pdf)
        }
        EstimatorId::Msade => {
            objectives::msade(&objectives::merged_spacings(&cdf(), &s.distinct, last_surv()))
        }
        EstimatorId::Msalde => {
            objectives::msalde(&objectives::merged_spacings(&cdf(), &s.distinct, last_surv()))
        }
    }
}

macro_rules! clrbte_objective {
    ($name:ident, $est:expr) => {
        pub fn $name(p: &Params, s: &Sample) -> f64 {
            objective_value($est, &ModelParams::Clrbte(*p), &PreparedSample::new(s))
        }
    };
}

clrbte_objective!(lse_objective, EstimatorId::Lse);
clrbte_objective!(wlse_objective, EstimatorId::Wlse);
clrbte_objective!(ade_objective, EstimatorId::Ade);
clrbte_objective!(rtade_objective, EstimatorId::Rtade);
clrbte_objective!(cvme_objective, EstimatorId::Cvme);
clrbte_objective!(mpse_objective, EstimatorId::Mpse);
clrbte_objective!(msade_objective, EstimatorId::Msade);
clrbte_objective!(msalde_objective, EstimatorId::Msalde);

/// Default multi-start grid, scaled by the sample mean.
pub fn default_starts(model: Model, s: &Sample) -> Vec<Vec<f64>> {
    let rate = 1.0 / s.mean();
    match model {
        Model::Clrbte => [(0.3, 0.3), (0.6, 0.2), (0.2, 0.6), (0.8, 0.1), (0.1, 0.1)]
            .iter()
            .map(|&(a, b)| vec![rate, a, b])
            .collect(),
        Model::E => vec![vec![rate]],
        Model::Te => [-0.5, 0.0, 0.5].iter().map(|&t| vec![rate, t]).collect(),
        Model::Tgr => {
            let mut out = Vec::new();
            for shape in [0.3, 1.0, 2.0] {
                for theta in [-0.5, 0.0, 0.5] {
                    out.push(vec![shape, rate, theta]);
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    /// Start points in the constrained parameterization; the default grid
    /// when `None`.
    pub starts: Option<Vec<Vec<f64>>>,
    pub optimizer: OptOptions,
}

/// Optimizer output for one (model, estimator, sample) triple, without the
/// reporting extras of [`fit`].
pub fn estimate(model: Model, est: EstimatorId, s: &Sample, opts: &FitOptions) -> Result<OptResult> {
    s.require_estimable()?;
    if !est.supports(model) {
        return Err(Error::Unsupported {
            estimator: est.label(),
            dist: model.label(),
        });
    }
    let prepared = PreparedSample::new(s);
    let objective = |v: &[f64]| match model.bind(v) {
        Ok(m) => objective_value(est, &m, &prepared),
        Err(_) => f64::NAN,
    };
    let interior = |v: &[f64]| theta_is_interior(model, v);
    let spec = ObjectiveSpec {
        objective: &objective,
        transform: ParamTransform::for_model(model),
        direction: est.direction(),
        admissible: Some(&interior),
    };
    let starts = opts.starts.clone().unwrap_or_else(|| default_starts(model, s));
    let res = minimize(&spec, &starts, &opts.optimizer);
    if res.point.is_empty() {
        return Err(Error::Optimizer(res.termination));
    }
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub objective_value: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub evaluations: usize,
    pub start_index: usize,
    pub termination: String,
    /// ∞-norm of the log-likelihood score at the estimate (CLRBTE MLE only).
    pub score_norm: Option<f64>,
    /// A better objective value approached with theta against ±1, when an
    /// interior optimum was reported instead.
    pub set_aside: Option<SetAside>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub distribution: String,
    pub model: Model,
    pub estimator: String,
    pub param_names: Vec<&'static str>,
    pub estimates: Vec<f64>,
    pub standard_errors: Option<StandardErrors>,
    pub loglik: f64,
    pub aic: f64,
    pub gof: GofBlock,
    pub diagnostics: FitDiagnostics,
    pub n: usize,
    pub sample_source: String,
    pub sample_fingerprint: String,
}

impl FitReport {
    pub fn converged(&self) -> bool {
        self.diagnostics.converged
    }

    pub fn bound(&self) -> ModelParams {
        self.model.bind(&self.estimates).expect("estimates are valid")
    }
}

/// Negative log-likelihood that tolerates weights just outside the simplex,
/// so central differences at a near-boundary optimum stay evaluable.
fn loose_nll(model: Model, v: &[f64], s: &Sample) -> f64 {
    let m = match model {
        Model::Clrbte => Params::relaxed(v[0], v[1], v[2]).map(ModelParams::Clrbte),
        _ => model.bind(v),
    };
    match m {
        Ok(m) => model_neg_log_likelihood(&m, s),
        Err(_) => f64::NAN,
    }
}

/// Tolerance for calling an estimate boundary-adjacent.
pub const BOUNDARY_TOL: f64 = 1e-4;

/// The transmutation parameter lives on the open interval (−1, 1). An
/// optimum pinned against ±1 is a supremum that no parameter attains, so
/// interior stationary points are preferred over it.
fn theta_is_interior(model: Model, v: &[f64]) -> bool {
    match model {
        Model::Te | Model::Tgr => v[v.len() - 1].abs() <= 1.0 - BOUNDARY_TOL - SIGNED_UNIT_MARGIN,
        Model::Clrbte | Model::E => true,
    }
}

fn boundary_note(model: Model, v: &[f64]) -> Option<String> {
    match model {
        Model::Clrbte => {
            let (p1, p2) = (v[1], v[2]);
            let near = |t: f64| t < BOUNDARY_TOL || t > 1.0 - BOUNDARY_TOL;
            if near(p1) || near(p2) || 1.0 - p1 - p2 < BOUNDARY_TOL {
                Some("estimate is within 1e-4 of the weight simplex boundary".into())
            } else {
                None
            }
        }
        Model::Te | Model::Tgr => {
            let theta = v[v.len() - 1];
            if theta.abs() > 1.0 - BOUNDARY_TOL - SIGNED_UNIT_MARGIN {
                Some("theta is within 1e-4 of ±1".into())
            } else {
                None
            }
        }
        Model::E => None,
    }
}

/// Observed-information standard errors at an MLE in the original
/// parameterization.
pub fn mle_standard_errors(model: Model, estimates: &[f64], s: &Sample) -> StandardErrors {
    let h = numerical_hessian(|v| loose_nll(model, v, s), estimates);
    let mut se = standard_errors(&h);
    if let Some(note) = boundary_note(model, estimates) {
        se.unreliable(note);
    }
    se
}

/// Fits `model` to `s` with estimator `est` and assembles the full report.
///
/// Non-convergence is reported in `diagnostics`, not as an error.
pub fn fit(model: Model, est: EstimatorId, s: &Sample, opts: &FitOptions) -> Result<FitReport> {
    let res = estimate(model, est, s, opts)?;
    let bound = model.bind(&res.point)?;
    let loglik = -model_neg_log_likelihood(&bound, s);
    let k = model.n_params() as f64;
    let aic = 2.0 * k - 2.0 * loglik;
    let standard_errors = (est == EstimatorId::Mle).then(|| mle_standard_errors(model, &res.point, s));
    let score_norm = match (&bound, est) {
        (ModelParams::Clrbte(p), EstimatorId::Mle) => {
            Some(score(p, s).iter().fold(0.0, |m: f64, g| m.max(g.abs())))
        }
        _ => None,
    };
    Ok(FitReport {
        distribution: model.label().to_string(),
        model,
        estimator: est.label().to_string(),
        param_names: model.param_names(),
        estimates: res.point.clone(),
        standard_errors,
        loglik,
        aic,
        gof: gof_block(&bound, s, aic),
        diagnostics: FitDiagnostics {
            converged: res.converged,
            objective_value: res.objective_value,
            iterations: res.iterations,
            restarts_used: res.restarts_used,
            evaluations: res.evaluations,
            start_index: res.start_index,
            termination: res.termination,
            score_norm,
            set_aside: res.set_aside,
        },
        n: s.len(),
        sample_source: s.source().to_string(),
        sample_fingerprint: s.fingerprint(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapPValues {
    pub replications: usize,
    /// Replications whose refit failed; they are left out of the counts.
    pub failed: usize,
    pub p_ks: f64,
    pub p_ad: f64,
    pub p_cvm: f64,
}

/// Parametric-bootstrap p-values: resample from the fitted model, refit with
/// the same estimator, and count statistics at least as large as observed.
/// Replication `b` uses stream `(seed, b)`, so the result does not depend on
/// the thread count.
pub fn bootstrap_pvalues(
    report: &FitReport,
    est: EstimatorId,
    s: &Sample,
    replications: usize,
    seed: u64,
) -> Result<BootstrapPValues> {
    let fitted = report.bound();
    let observed = (report.gof.ks, report.gof.ad, report.gof.cvm);
    let opts = FitOptions {
        starts: Some(vec![report.estimates.clone()]),
        ..FitOptions::default()
    };
    let outcomes: Vec<Option<(bool, bool, bool)>> = (0..replications)
        .into_par_iter()
        .map(|b| {
            let draws = fitted.sample(s.len(), RngStream::new(seed, b as u64)).ok()?;
            let resample = Sample::new(draws, "bootstrap").ok()?;
            let res = estimate(report.model, est, &resample, &opts).ok()?;
            let refit = report.model.bind(&res.point).ok()?;
            let (ks, ad, cvm) = statistics(&refit, &resample);
            Some((ks >= observed.0, ad >= observed.1, cvm >= observed.2))
        })
        .collect();
    let ok: Vec<(bool, bool, bool)> = outcomes.iter().flatten().copied().collect();
    let denom = (ok.len() + 1) as f64;
    let p = |pick: fn(&(bool, bool, bool)) -> bool| (1 + ok.iter().filter(|o| pick(o)).count()) as f64 / denom;
    Ok(BootstrapPValues {
        replications,
        failed: replications - ok.len(),
        p_ks: p(|o| o.0),
        p_ad: p(|o| o.1),
        p_cvm: p(|o| o.2),
    })
}
