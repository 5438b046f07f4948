//! `clrbte`: moments, sampling, fitting, model comparison, Monte-Carlo
//! studies and plot data for the CLRBTE distribution.
//!
//! Exit codes: 0 success, 2 input or domain error, 3 sampler envelope
//! failure, 4 optimizer non-convergence.

mod json;

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use clrbte::data::read_sample;
use clrbte::estimators::{bootstrap_pvalues, BootstrapPValues};
use clrbte::format::g17;
use clrbte::gof::{compare, ComparisonTable};
use clrbte::properties::{describe, MomentReport};
use clrbte::sampling::{sample_ar, sample_composition, tune_envelope};
use clrbte::sim::{rank_estimators, run_scenario, Ranking, SimReport, SimScenario};
use clrbte::{fit, Error, EstimatorId, FitOptions, FitReport, Model, Params, RngStream};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "clrbte", version, about = "CLRBTE distribution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean, variance, SD, CV, skewness and kurtosis.
    Describe {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        /// Accept p1 + p2 > 1 (each weight still in [0, 1]).
        #[arg(long)]
        relaxed: bool,
    },
    /// Random draws, one per line.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long, value_enum, default_value_t = SamplerArg::Composition)]
        method: SamplerArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Substream of the seed.
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Fit one distribution to a data file.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        dist: Model,
        #[arg(long, default_value = "mle")]
        estimator: EstimatorId,
        /// Parametric-bootstrap p-values from this many refits.
        #[arg(long, value_name = "B")]
        bootstrap_p: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Fit several distributions and tabulate AIC and goodness of fit.
    Compare {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "clrbte,te,e,tgr")]
        dists: Vec<Model>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Monte-Carlo study of the estimators.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's replication count.
        #[arg(long)]
        reps: Option<usize>,
        /// Worker threads; the report does not depend on it.
        #[arg(long)]
        parallel: Option<usize>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = SimFormat::Csv)]
        format: SimFormat,
        /// Append per-(n, parameter) MSE rankings (text and JSON output).
        #[arg(long)]
        rank: bool,
    },
    /// Empirical and fitted CDF, and fitted PDF, on a 400-point grid.
    Plotdata {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        dist: Model,
        /// Parameter values, comma-separated; fitted when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Option<Vec<f64>>,
        #[arg(long, default_value = "mle")]
        estimator: EstimatorId,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Composition,
    Ar,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimFormat {
    Csv,
    Text,
    Json,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EnvelopeViolation { .. } | Error::ProposalShape(_) => 3,
            Error::Optimizer(_) => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 2,
            message: format!("cannot write output: {e}"),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn command_line() -> String {
    std::iter::once("clrbte".to_string())
        .chain(std::env::args().skip(1).map(|a| {
            if a.is_empty() || a.contains(char::is_whitespace) {
                format!("'{a}'")
            } else {
                a
            }
        }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn print_envelope<T: Serialize>(seed: Option<u64>, payload: T) -> io::Result<()> {
    let cmd = command_line();
    io::stdout().write_all(json::to_string(&json::envelope(&cmd, seed, payload)).as_bytes())
}

#[derive(Serialize)]
struct DescribePayload {
    lambda: f64,
    p1: f64,
    p2: f64,
    p3: f64,
    relaxed: bool,
    moments: MomentReport,
}

fn cmd_describe(lambda: f64, p1: f64, p2: f64, relaxed: bool) -> Outcome {
    let p = if relaxed {
        Params::relaxed(lambda, p1, p2)?
    } else {
        Params::new(lambda, p1, p2)?
    };
    let moments = describe(&p)?;
    print_envelope(
        None,
        DescribePayload {
            lambda,
            p1,
            p2,
            p3: 1.0 - p1 - p2,
            relaxed,
            moments,
        },
    )?;
    Ok(0)
}

fn cmd_sample(n: usize, p: Params, method: SamplerArg, stream: RngStream) -> Outcome {
    let values = match method {
        SamplerArg::Composition => sample_composition(&p, n, stream)?,
        SamplerArg::Ar => {
            let proposal = tune_envelope(&p)?;
            let out = sample_ar(&p, &proposal, n, stream)?;
            eprintln!(
                "accepted {} of {} proposals (rate {:.4}; 1/k = {:.4})",
                out.accepted,
                out.proposals,
                out.acceptance_rate(),
                1.0 / proposal.envelope_k
            );
            out.values
        }
    };
    let mut text = String::with_capacity(values.len() * 20);
    for v in values {
        text.push_str(&g17(v));
        text.push('\n');
    }
    io::stdout().write_all(text.as_bytes())?;
    Ok(0)
}

#[derive(Serialize)]
struct FitPayload {
    fit: FitReport,
    bootstrap: Option<BootstrapPValues>,
}

fn cmd_fit(data: PathBuf, dist: Model, est: EstimatorId, bootstrap: Option<usize>, seed: u64) -> Outcome {
    let s = read_sample(&data)?;
    let report = fit(dist, est, &s, &FitOptions::default())?;
    let bootstrap = match bootstrap {
        Some(b) => Some(bootstrap_pvalues(&report, est, &s, b, seed)?),
        None => None,
    };
    let converged = report.converged();
    if !converged {
        eprintln!("warning: optimizer did not converge: {}", report.diagnostics.termination);
    }
    print_envelope(bootstrap.as_ref().map(|_| seed), FitPayload { fit: report, bootstrap })?;
    Ok(if converged { 0 } else { 4 })
}

#[derive(Serialize)]
struct ComparePayload {
    table: ComparisonTable,
    fits: Vec<FitReport>,
}

fn cmd_compare(data: PathBuf, dists: Vec<Model>, format: OutputFormat) -> Outcome {
    let s = read_sample(&data)?;
    if dists.len() < 2 {
        return Err(Failure {
            code: 2,
            message: "compare needs at least two distributions (--dists)".into(),
        });
    }
    let fits = dists
        .iter()
        .map(|&m| fit(m, EstimatorId::Mle, &s, &FitOptions::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let table = compare(&s, &fits)?;
    let all_converged = fits.iter().all(FitReport::converged);
    for f in fits.iter().filter(|f| !f.converged()) {
        eprintln!("warning: {} fit did not converge: {}", f.distribution, f.diagnostics.termination);
    }
    match format {
        OutputFormat::Text => io::stdout().write_all(table.to_text().as_bytes())?,
        OutputFormat::Json => print_envelope(None, ComparePayload { table, fits })?,
    }
    Ok(if all_converged { 0 } else { 4 })
}

#[derive(Serialize)]
struct SimPayload {
    report: SimReport,
    ranking: Option<Vec<Ranking>>,
}

fn ranking_text(ranks: &[Ranking]) -> String {
    let mut out = String::from("\nMSE ranking (ties broken by |bias|)\n");
    for r in ranks {
        let order: Vec<&str> = r.entries.iter().map(|e| e.estimator.table_label()).collect();
        let _ = writeln!(out, "n = {:>5}  {:<7} {}", r.n, r.parameter, order.join(" < "));
    }
    out
}

fn cmd_simulate(
    config: PathBuf,
    reps: Option<usize>,
    parallel: Option<usize>,
    seed: Option<u64>,
    format: SimFormat,
    rank: bool,
) -> Outcome {
    let text = std::fs::read_to_string(&config).map_err(|e| Error::Io {
        path: config.display().to_string(),
        message: e.to_string(),
    })?;
    let mut sc = SimScenario::parse(&text)?;
    if let Some(r) = reps {
        sc.replications = r;
    }
    if let Some(s) = seed {
        sc.base_seed = s;
    }
    sc.validate()?;
    if sc.replications > 500 {
        eprintln!(
            "warning: {} replications × {} sizes × {} estimators may take a long time",
            sc.replications,
            sc.sizes.len(),
            sc.estimators.len()
        );
    }
    let threads = parallel
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1);
    let report = run_scenario(&sc, threads)?;
    let degenerate = report.cells.iter().filter(|c| c.degenerate).count();
    eprintln!(
        "{} cells, {} degenerate, {:.1} s on {} thread(s)",
        report.cells.len(),
        degenerate,
        report.wall_time,
        threads
    );
    let ranking = if rank && sc.estimators.len() >= 2 {
        Some(rank_estimators(&report)?)
    } else {
        None
    };
    match format {
        SimFormat::Csv => io::stdout().write_all(report.to_csv().as_bytes())?,
        SimFormat::Text => {
            let mut out = report.to_text();
            if let Some(r) = &ranking {
                out.push_str(&ranking_text(r));
            }
            io::stdout().write_all(out.as_bytes())?
        }
        SimFormat::Json => print_envelope(Some(sc.base_seed), SimPayload { report, ranking })?,
    }
    Ok(0)
}

const PLOT_POINTS: usize = 400;

fn cmd_plotdata(data: PathBuf, dist: Model, params: Option<Vec<f64>>, est: EstimatorId) -> Outcome {
    let s = read_sample(&data)?;
    let (bound, converged) = match params {
        Some(v) => (dist.bind(&v)?, true),
        None => {
            let r = fit(dist, est, &s, &FitOptions::default())?;
            (r.bound(), r.converged())
        }
    };
    let values = s.values();
    let top = 1.05 * s.max();
    let mut out = String::from("x,empirical_cdf,fitted_cdf,fitted_pdf\n");
    let mut below = 0;
    for i in 0..PLOT_POINTS {
        let x = if i + 1 == PLOT_POINTS {
            top
        } else {
            top * i as f64 / (PLOT_POINTS - 1) as f64
        };
        while below < values.len() && values[below] <= x {
            below += 1;
        }
        let _ = writeln!(
            out,
            "{},{},{},{}",
            g17(x),
            g17(below as f64 / values.len() as f64),
            g17(bound.cdf(x)),
            g17(bound.pdf(x))
        );
    }
    io::stdout().write_all(out.as_bytes())?;
    if !converged {
        eprintln!("warning: optimizer did not converge; curves use the last iterate");
        return Ok(4);
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Describe {
            lambda,
            p1,
            p2,
            relaxed,
        } => cmd_describe(lambda, p1, p2, relaxed),
        Command::Sample {
            n,
            lambda,
            p1,
            p2,
            method,
            seed,
            stream,
        } => cmd_sample(n, Params::new(lambda, p1, p2)?, method, RngStream::new(seed, stream)),
        Command::Fit {
            data,
            dist,
            estimator,
            bootstrap_p,
            seed,
        } => cmd_fit(data, dist, estimator, bootstrap_p, seed),
        Command::Compare { data, dists, format } => cmd_compare(data, dists, format),
        Command::Simulate {
            config,
            reps,
            parallel,
            seed,
            format,
            rank,
        } => cmd_simulate(config, reps, parallel, seed, format, rank),
        Command::Plotdata {
            data,
            dist,
            params,
            estimator,
        } => cmd_plotdata(data, dist, params, estimator),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
