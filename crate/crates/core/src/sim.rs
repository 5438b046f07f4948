//! Monte-Carlo study of the nine CLRBTE estimators: scenarios × sample sizes
//! × estimators × replications, summarized as bias, MSE and MRE per
//! parameter with Monte-Carlo standard errors.
//!
//! Replication `r` at size `n` draws its sample from stream `r` of a seed
//! derived from `(base_seed, n)`. Replications run on a private rayon pool
//! and are reduced in replication order, so a report does not depend on the
//! number of threads.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::Params;
use crate::error::{Error, Result};
use crate::estimators::{default_starts, estimate, EstimatorId, FitOptions};
use crate::format::g17;
use crate::model::Model;
use crate::sample::Sample;
use crate::sampling::{sample_ar, sample_composition, tune_envelope, RngStream};

pub const PARAMETERS: [&str; 3] = ["lambda", "p1", "p2"];

/// A cell with fewer converged fits than this fraction is flagged.
pub const DEGENERATE_RATE: f64 = 0.5;

/// Where each replication's optimizer starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StartPolicy {
    /// At the true parameter values.
    Truth,
    /// The data-scaled multi-start grid used for real data.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Composition,
    Ar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimScenario {
    pub name: String,
    pub truth: Params,
    pub sizes: Vec<usize>,
    pub estimators: Vec<EstimatorId>,
    pub replications: usize,
    pub base_seed: u64,
    pub start: StartPolicy,
    pub sampler: SamplerKind,
}

impl SimScenario {
    /// All nine estimators, 500 replications, truth starts, composition draws.
    pub fn new(name: impl Into<String>, truth: Params, sizes: Vec<usize>) -> Result<Self> {
        let sc = SimScenario {
            name: name.into(),
            truth,
            sizes,
            estimators: EstimatorId::ALL.to_vec(),
            replications: 500,
            base_seed: 1,
            start: StartPolicy::Truth,
            sampler: SamplerKind::Composition,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes must not be empty".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sizes must be strictly ascending".into()));
        }
        if self.sizes[0] < 3 {
            return Err(Error::Config("every sample size must be at least 3".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("estimators must not be empty".into()));
        }
        Ok(())
    }

    /// Parses `key = value` lines. Recognized keys: `name`, `truth`
    /// (λ, p1, p2) or `lambda`/`p1`/`p2`, `sizes`, `estimators` (list or
    /// `all`), `reps`, `seed`, `start` (`truth` | `grid`) and `sampler`
    /// (`composition` | `ar`). `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = String::from("scenario");
        let mut truth: [Option<f64>; 3] = [None; 3];
        let mut sizes = None;
        let mut estimators = EstimatorId::ALL.to_vec();
        let mut replications = 500;
        let mut base_seed = 1;
        let mut start = StartPolicy::Truth;
        let mut sampler = SamplerKind::Composition;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Config(format!("line {}: {msg}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            let num = |v: &str| -> Result<f64> {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("`{v}` is not a number")))
            };
            let count = |v: &str| -> Result<usize> {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| bad(format!("`{v}` is not a non-negative integer")))
            };
            match key.as_str() {
                "name" => name = value.to_string(),
                "truth" => {
                    let v = list(value).map(num).collect::<Result<Vec<_>>>()?;
                    if v.len() != 3 {
                        return Err(bad("truth takes three values: lambda, p1, p2".into()));
                    }
                    truth = [Some(v[0]), Some(v[1]), Some(v[2])];
                }
                "lambda" => truth[0] = Some(num(value)?),
                "p1" => truth[1] = Some(num(value)?),
                "p2" => truth[2] = Some(num(value)?),
                "sizes" => sizes = Some(list(value).map(count).collect::<Result<Vec<_>>>()?),
                "estimators" => {
                    estimators = if value.eq_ignore_ascii_case("all") {
                        EstimatorId::ALL.to_vec()
                    } else {
                        list(value)
                            .map(EstimatorId::from_str)
                            .collect::<Result<Vec<_>>>()
                            .map_err(|e| bad(e.to_string()))?
                    }
                }
                "reps" | "replications" => replications = count(value)?,
                "seed" => {
                    base_seed = value
                        .parse()
                        .map_err(|_| bad(format!("`{value}` is not a 64-bit seed")))?
                }
                "start" => {
                    start = match value.to_ascii_lowercase().as_str() {
                        "truth" => StartPolicy::Truth,
                        "grid" => StartPolicy::Grid,
                        other => return Err(bad(format!("unknown start `{other}`"))),
                    }
                }
                "sampler" => {
                    sampler = match value.to_ascii_lowercase().as_str() {
                        "composition" => SamplerKind::Composition,
                        "ar" => SamplerKind::Ar,
                        other => return Err(bad(format!("unknown sampler `{other}`"))),
                    }
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let [Some(lambda), Some(p1), Some(p2)] = truth else {
            return Err(Error::Config("truth (lambda, p1, p2) is incomplete".into()));
        };
        let sc = SimScenario {
            name,
            truth: Params::new(lambda, p1, p2)?,
            sizes: sizes.ok_or_else(|| Error::Config("sizes is missing".into()))?,
            estimators,
            replications,
            base_seed,
            start,
            sampler,
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Seed for the size-`n` block: a SplitMix64 step keyed by `n`, so that
    /// sizes use unrelated streams.
    pub fn seed_for_size(&self, n: usize) -> u64 {
        let mut z = self
            .base_seed
            .wrapping_add((n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split([',', ' ', '\t']).map(str::trim).filter(|s| !s.is_empty())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimCell {
    pub estimator: EstimatorId,
    pub n: usize,
    pub parameter: &'static str,
    pub bias: f64,
    pub mse: f64,
    pub mre: f64,
    pub mc_se_bias: f64,
    pub mc_se_mse: f64,
    pub convergence_rate: f64,
    pub converged: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub scenario: SimScenario,
    pub cells: Vec<SimCell>,
    /// Seconds; excluded from CSV output so reports stay byte-stable.
    pub wall_time: f64,
}

/// Estimates for one replication, or `None` when the fit failed or did not
/// converge.
pub type Fitter = dyn Fn(EstimatorId, &Sample, &SimScenario) -> Option<[f64; 3]> + Sync;

/// The production fitter: truth or grid starts, default optimizer settings.
pub fn default_fitter(est: EstimatorId, s: &Sample, sc: &SimScenario) -> Option<[f64; 3]> {
    let starts = match sc.start {
        StartPolicy::Truth => vec![sc.truth.to_array().to_vec()],
        StartPolicy::Grid => default_starts(Model::Clrbte, s),
    };
    let opts = FitOptions {
        starts: Some(starts),
        ..FitOptions::default()
    };
    let res = estimate(Model::Clrbte, est, s, &opts).ok()?;
    res.converged.then(|| [res.point[0], res.point[1], res.point[2]])
}

pub fn run_scenario(sc: &SimScenario, parallelism: usize) -> Result<SimReport> {
    run_scenario_with(sc, parallelism, &default_fitter)
}

fn draw(sc: &SimScenario, n: usize, r: usize) -> Result<Sample> {
    let stream = RngStream::new(sc.seed_for_size(n), r as u64);
    let values = match sc.sampler {
        SamplerKind::Composition => sample_composition(&sc.truth, n, stream)?,
        SamplerKind::Ar => {
            let proposal = tune_envelope(&sc.truth)?;
            sample_ar(&sc.truth, &proposal, n, stream)?.values
        }
    };
    Sample::new(values, format!("{}/n={n}/rep={r}", sc.name))
}

pub fn run_scenario_with(sc: &SimScenario, parallelism: usize, fitter: &Fitter) -> Result<SimReport> {
    sc.validate()?;
    let clock = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    let truth = sc.truth.to_array();
    let mut cells = Vec::new();
    for &n in &sc.sizes {
        // outcomes[r][e]: estimates of estimator e in replication r.
        let outcomes: Vec<Vec<Option<[f64; 3]>>> = pool.install(|| {
            (0..sc.replications)
                .into_par_iter()
                .map(|r| {
                    let s = draw(sc, n, r)?;
                    Ok(sc.estimators.iter().map(|&e| fitter(e, &s, sc)).collect())
                })
                .collect::<Result<_>>()
        })?;
        for (e, &est) in sc.estimators.iter().enumerate() {
            let hits: Vec<[f64; 3]> = outcomes.iter().filter_map(|o| o[e]).collect();
            for (j, parameter) in PARAMETERS.iter().enumerate() {
                let errors: Vec<f64> = hits.iter().map(|h| h[j] - truth[j]).collect();
                cells.push(summarize(est, n, parameter, &errors, truth[j], sc.replications));
            }
        }
    }
    Ok(SimReport {
        scenario: sc.clone(),
        cells,
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn summarize(
    estimator: EstimatorId,
    n: usize,
    parameter: &'static str,
    errors: &[f64],
    truth: f64,
    replications: usize,
) -> SimCell {
    let converged = errors.len();
    let rate = converged as f64 / replications as f64;
    let squares: Vec<f64> = errors.iter().map(|d| d * d).collect();
    let (bias, mc_se_bias) = mean_and_se(errors);
    let (mse, mc_se_mse) = mean_and_se(&squares);
    let mre = errors.iter().map(|d| d.abs() / truth).sum::<f64>() / converged as f64;
    SimCell {
        estimator,
        n,
        parameter,
        bias,
        mse,
        mre,
        mc_se_bias,
        mc_se_mse,
        convergence_rate: rate,
        converged,
        degenerate: rate < DEGENERATE_RATE || converged < 2,
    }
}

impl SimReport {
    pub fn cell(&self, est: EstimatorId, n: usize, parameter: &str) -> Option<&SimCell> {
        self.cells
            .iter()
            .find(|c| c.estimator == est && c.n == n && c.parameter == parameter)
    }

    /// One row per cell, numbers as `%.17g`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimator,n,parameter,bias,mse,mre,mc_se_bias,convergence_rate\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.estimator.table_label(),
                c.n,
                c.parameter,
                g17(c.bias),
                g17(c.mse),
                g17(c.mre),
                g17(c.mc_se_bias),
                g17(c.convergence_rate)
            );
        }
        out
    }

    /// Bias, MSE and MRE blocks side by side, one row per (estimator, n).
    /// Degenerate cells are marked with `!`.
    pub fn to_text(&self) -> String {
        let [l, a, b] = self.scenario.truth.to_array();
        let mut out = format!(
            "Simulation results for lambda = {l}, p1 = {a}, p2 = {b} ({} replications)\n",
            self.scenario.replications
        );
        let _ = writeln!(
            out,
            "{:<9}{:>6} |{:>27} |{:>27} |{:>27}",
            "", "", "Bias", "MSE", "MRE"
        );
        let sub = format!("{:>9}{:>9}{:>9}", "lambda", "p1", "p2");
        let _ = writeln!(out, "{:<9}{:>6} |{sub} |{sub} |{sub}", "Estimator", "n");
        for &est in &self.scenario.estimators {
            for (k, &n) in self.scenario.sizes.iter().enumerate() {
                let label = if k == 0 { est.table_label() } else { "" };
                let _ = write!(out, "{label:<9}{n:>6} |");
                let row: Vec<&SimCell> = PARAMETERS
                    .iter()
                    .filter_map(|p| self.cell(est, n, p))
                    .collect();
                for pick in [|c: &SimCell| c.bias, |c: &SimCell| c.mse, |c: &SimCell| c.mre] {
                    for c in &row {
                        let flag = if c.degenerate { "!" } else { " " };
                        let _ = write!(out, "{:>8.4}{flag}", pick(c));
                    }
                    out.push_str(" |");
                }
                out.pop();
                out.pop();
                out.push('\n');
            }
        }
        if self.cells.iter().any(|c| c.degenerate) {
            let _ = writeln!(
                out,
                "! fewer than half of the replications converged (or fewer than 2)"
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    pub rank: usize,
    pub estimator: EstimatorId,
    pub mse: f64,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub n: usize,
    pub parameter: &'static str,
    pub entries: Vec<RankEntry>,
}

/// Per (n, parameter): estimators ordered by MSE, ties broken by |bias|, then
/// by estimator order. Degenerate cells go last.
pub fn rank_estimators(rep: &SimReport) -> Result<Vec<Ranking>> {
    if rep.scenario.estimators.len() < 2 {
        return Err(Error::Config("ranking needs at least two estimators".into()));
    }
    let mut out = Vec::new();
    for &n in &rep.scenario.sizes {
        for parameter in PARAMETERS {
            let mut cells: Vec<&SimCell> = rep
                .scenario
                .estimators
                .iter()
                .filter_map(|&e| rep.cell(e, n, parameter))
                .collect();
            // Stable sort keeps estimator order for exact ties.
            cells.sort_by(|x, y| {
                x.degenerate
                    .cmp(&y.degenerate)
                    .then(x.mse.total_cmp(&y.mse))
                    .then(x.bias.abs().total_cmp(&y.bias.abs()))
            });
            out.push(Ranking {
                n,
                parameter,
                entries: cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| RankEntry {
                        rank: i + 1,
                        estimator: c.estimator,
                        mse: c.mse,
                        bias: c.bias,
                    })
                    .collect(),
            });
        }
    }
    Ok(out)
}
