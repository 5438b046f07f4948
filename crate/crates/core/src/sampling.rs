//! Random variate generation for CLRBTE.
//!
//! The composition sampler is exact: the k-th lower record of the base has
//! `G(X) ~ U1·U2⋯Uk`, so a draw picks a record index with probabilities
//! `(p1, p2, p3)` and inverts the exponential CDF at a product of uniforms.
//! The acceptance-rejection sampler uses a Weibull proposal and is kept as a
//! cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dist::Params;
use crate::error::{Error, Result};

/// A reproducible random stream: identical `(seed, stream_id)` pairs give
/// identical sequences regardless of which thread consumes them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// A uniform draw on the open interval (0, 1).
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn composition_draw<R: Rng + ?Sized>(p: &Params, rng: &mut R) -> f64 {
    let pick: f64 = rng.random();
    let records = if pick < p.p1() {
        1
    } else if pick < p.p1() + p.p2() {
        2
    } else {
        3
    };
    let mut v = 1.0;
    for _ in 0..records {
        v *= open_uniform(rng);
    }
    -(-v).ln_1p() / p.lambda()
}

/// `n` exact draws by record-index composition.
///
/// Requires weights on the closed simplex; relaxed weights do not define a
/// mixture.
pub fn sample_composition(p: &Params, n: usize, stream: RngStream) -> Result<Vec<f64>> {
    if !p.weights().is_on_simplex() {
        return Err(Error::Constraint("p1 + p2 ≤ 1"));
    }
    let mut rng = stream.rng();
    Ok((0..n).map(|_| composition_draw(p, &mut rng)).collect())
}

/// Weibull proposal `g(x) = γν x^{ν−1} exp(−γ x^ν)` with envelope constant `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArProposal {
    pub gamma: f64,
    pub nu: f64,
    pub envelope_k: f64,
}

impl ArProposal {
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return if self.nu < 1.0 {
                f64::INFINITY
            } else if self.nu == 1.0 {
                self.gamma.ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        (self.gamma * self.nu).ln() + (self.nu - 1.0) * x.ln() - self.gamma * x.powf(self.nu)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (-open_uniform(rng).ln() / self.gamma).powf(1.0 / self.nu)
    }
}

/// Default Weibull shape; below 1 so the proposal dominates the `(ln x)²`
/// divergence of the target at the origin.
pub const DEFAULT_SHAPE: f64 = 0.8;
/// Multiplier applied to the numerically located supremum of `f/g`.
pub const ENVELOPE_SAFETY: f64 = 1.05;

const GRID_POINTS: usize = 2000;

/// Proposal with the default shape; see [`tune_envelope_with_shape`].
pub fn tune_envelope(p: &Params) -> Result<ArProposal> {
    if p.p1() == 1.0 && p.p2() == 0.0 {
        return Ok(ArProposal {
            gamma: p.lambda(),
            nu: 1.0,
            envelope_k: ENVELOPE_SAFETY,
        });
    }
    tune_envelope_with_shape(p, DEFAULT_SHAPE)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `ln f − ln g` on a log-spaced grid over `[1e-8/λ, 50/λ]`.
fn scan_log_ratio(p: &Params, g: &ArProposal) -> (f64, f64, Vec<f64>) {
    let lo = (1e-8 / p.lambda()).ln();
    let hi = (50.0 / p.lambda()).ln();
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let values = (0..GRID_POINTS)
        .map(|i| {
            let x = (lo + i as f64 * step).exp();
            p.ln_pdf(x) - g.ln_pdf(x)
        })
        .collect();
    (lo, step, values)
}

/// Supremum of `ln f − ln g`: best grid point refined by golden section.
fn peak_log_ratio(p: &Params, g: &ArProposal) -> Result<f64> {
    let (lo, step, grid) = scan_log_ratio(p, g);
    if let Some(i) = grid.iter().position(|v| !v.is_finite()) {
        return Err(Error::ProposalShape(format!(
            "f/g is not finite at x = {:e}",
            (lo + i as f64 * step).exp()
        )));
    }
    let best = (0..GRID_POINTS)
        .max_by(|&a, &b| grid[a].total_cmp(&grid[b]))
        .expect("grid is nonempty");
    if best == 0 && grid[0] > grid[1] {
        return Err(Error::ProposalShape(format!(
            "f/g grows toward the origin (shape {} is too large)",
            g.nu
        )));
    }
    if best == GRID_POINTS - 1 && grid[best] > grid[best - 1] {
        return Err(Error::ProposalShape(
            "f/g grows in the right tail (proposal tail too light)".into(),
        ));
    }
    let a = lo + best.saturating_sub(1) as f64 * step;
    let b = lo + (best + 1).min(GRID_POINTS - 1) as f64 * step;
    let (_, refined) = golden_max(
        |t| {
            let x = t.exp();
            p.ln_pdf(x) - g.ln_pdf(x)
        },
        a,
        b,
        60,
    );
    Ok(grid[best].max(refined))
}

/// Proposal with shape `nu` and the rate that minimizes the envelope constant.
///
/// `sup f/g` is convex in the rate γ, so γ is found by golden section on a
/// bracket around the median-matching rate `ln 2 / median^ν`. `k` is the
/// supremum of `f/g` over `[1e-8/λ, 50/λ]` times [`ENVELOPE_SAFETY`].
pub fn tune_envelope_with_shape(p: &Params, nu: f64) -> Result<ArProposal> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::ProposalShape(format!("shape {nu} must lie in (0, 1]")));
    }
    let median_rate = std::f64::consts::LN_2 / p.quantile(0.5)?.powf(nu);
    let proposal = |gamma: f64| ArProposal {
        gamma,
        nu,
        envelope_k: 1.0,
    };
    let (gamma, _) = golden_max(
        |gamma| {
            let (_, _, grid) = scan_log_ratio(p, &proposal(gamma));
            -grid.into_iter().fold(f64::NEG_INFINITY, f64::max)
        },
        1e-3 * median_rate,
        4.0 * median_rate,
        80,
    );
    let mut out = proposal(gamma);
    out.envelope_k = ENVELOPE_SAFETY * peak_log_ratio(p, &out)?.exp().max(1.0);
    Ok(out)
}

/// Outcome of an acceptance-rejection run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArOutput {
    pub values: Vec<f64>,
    pub proposals: u64,
    pub accepted: u64,
}

impl ArOutput {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposals as f64
    }
}

/// Proposals inspected before the running acceptance rate is policed.
pub const AR_WARMUP: u64 = 1000;

/// `n` draws by acceptance-rejection against `proposal`.
///
/// Aborts with [`Error::EnvelopeViolation`] once the running acceptance rate
/// falls below `1/(10k)` after [`AR_WARMUP`] proposals.
pub fn sample_ar(p: &Params, proposal: &ArProposal, n: usize, stream: RngStream) -> Result<ArOutput> {
    let k = proposal.envelope_k;
    if !(k.is_finite() && k >= 1.0) {
        return Err(Error::ProposalShape(format!("envelope constant {k} must be finite and ≥ 1")));
    }
    let ln_k = k.ln();
    let floor = 1.0 / (10.0 * k);
    let mut rng = stream.rng();
    let mut out = ArOutput {
        values: Vec::with_capacity(n),
        proposals: 0,
        accepted: 0,
    };
    while out.values.len() < n {
        let y = proposal.draw(&mut rng);
        let u = open_uniform(&mut rng);
        out.proposals += 1;
        if u.ln() <= p.ln_pdf(y) - proposal.ln_pdf(y) - ln_k {
            out.values.push(y);
            out.accepted += 1;
        }
        if out.proposals >= AR_WARMUP && out.acceptance_rate() < floor {
            return Err(Error::EnvelopeViolation {
                rate: out.acceptance_rate(),
                proposals: out.proposals,
                k,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        let n = sorted.len() as f64;
        sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).max((i + 1) as f64 / n - f)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..5).map(|_| RngStream::new(1, 2).rng().random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut r1 = RngStream::new(1, 2).rng();
        let mut r2 = RngStream::new(1, 3).rng();
        assert_ne!(r1.random::<u64>(), r2.random::<u64>());
    }

    #[test]
    fn first_record_only_is_exponential_inversion() {
        let p = Params::new(2.0, 1.0, 0.0).unwrap();
        let s = RngStream::new(11, 0);
        let draws = sample_composition(&p, 20, s).unwrap();
        let mut rng = s.rng();
        for d in draws {
            let _pick: f64 = rng.random();
            let u = open_uniform(&mut rng);
            assert_eq!(d, -(-u).ln_1p() / 2.0);
        }
    }

    #[test]
    fn product_of_two_uniforms_has_record_law() {
        let mut rng = RngStream::new(5, 0).rng();
        let mut v: Vec<f64> = (0..100_000)
            .map(|_| open_uniform(&mut rng) * open_uniform(&mut rng))
            .collect();
        v.sort_by(f64::total_cmp);
        let d = ks_distance(&v, |t| t - t * t.ln());
        assert!(d < 0.01, "sup distance {d}");
    }

    #[test]
    fn composition_matches_cdf() {
        let p = Params::new(1.5, 0.5, 0.3).unwrap();
        let mut v = sample_composition(&p, 100_000, RngStream::new(3, 0)).unwrap();
        v.sort_by(f64::total_cmp);
        let d = ks_distance(&v, |x| p.cdf(x));
        assert!(d * (v.len() as f64).sqrt() < 1.63, "D = {d}");
    }

    #[test]
    fn composition_rejects_relaxed_weights() {
        let p = Params::relaxed(1.0, 0.9, 0.6).unwrap();
        assert!(sample_composition(&p, 3, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn exact_envelope_accepts_everything() {
        let p = Params::new(1.3, 1.0, 0.0).unwrap();
        let prop = ArProposal {
            gamma: 1.3,
            nu: 1.0,
            envelope_k: 1.0,
        };
        let out = sample_ar(&p, &prop, 500, RngStream::new(1, 1)).unwrap();
        assert_eq!(out.proposals, 500);
        let tuned = tune_envelope(&p).unwrap();
        assert_eq!((tuned.nu, tuned.gamma, tuned.envelope_k), (1.0, 1.3, 1.05));
    }

    #[test]
    fn unit_shape_cannot_cover_the_origin() {
        let p = Params::new(2.0, 0.2, 0.4).unwrap();
        let x = 1e-8 / p.lambda();
        let g08 = ArProposal {
            gamma: 1.0,
            nu: 0.8,
            envelope_k: 1.0,
        };
        let g10 = ArProposal { nu: 1.0, ..g08 };
        assert!((p.ln_pdf(x) - g08.ln_pdf(x)).is_finite());
        // With ν = 1 the ratio keeps growing as x → 0.
        let r = |x: f64| p.ln_pdf(x) - g10.ln_pdf(x);
        assert!(r(1e-12) > r(1e-8) && r(1e-16) > r(1e-12));
        assert!(matches!(
            tune_envelope_with_shape(&p, 1.0),
            Err(Error::ProposalShape(_))
        ));
    }

    #[test]
    fn tuned_envelope_dominates_random_points() {
        let p = Params::new(2.0, 0.2, 0.4).unwrap();
        let prop = tune_envelope(&p).unwrap();
        let mut rng = RngStream::new(8, 0).rng();
        for _ in 0..10_000 {
            let x = (rng.random::<f64>() * (50f64 / 1e-8).ln()).exp() * 1e-8 / p.lambda();
            assert!(p.ln_pdf(x) - prop.ln_pdf(x) <= prop.envelope_k.ln());
        }
    }

    #[test]
    fn bad_envelope_aborts() {
        let p = Params::new(1.0, 0.3, 0.3).unwrap();
        let prop = ArProposal {
            gamma: 1e6,
            nu: 1.0,
            envelope_k: 1.0,
        };
        assert!(matches!(
            sample_ar(&p, &prop, 100, RngStream::new(0, 0)),
            Err(Error::EnvelopeViolation { .. })
        ));
    }
}
