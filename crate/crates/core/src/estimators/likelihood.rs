use crate::dist::Params;
use crate::model::ModelParams;
use crate::sample::Sample;

/// `−Σ ln f(x_i)`.
pub fn neg_log_likelihood(p: &Params, s: &Sample) -> f64 {
    -s.values().iter().map(|&x| p.ln_pdf(x)).sum::<f64>()
}

pub fn model_neg_log_likelihood(m: &ModelParams, s: &Sample) -> f64 {
    -s.values().iter().map(|&x| m.ln_pdf(x)).sum::<f64>()
}

/// Gradient of the log-likelihood with respect to `(λ, p1, p2)`.
///
/// With `L = ln G(x)` and `b = p1 − p2 L + ((1−p1−p2)/2) L²`:
/// `∂ℓ/∂λ = n/λ − Σx + Σ (2cL − p2)·(x/(e^{λx}−1)) / b`,
/// `∂ℓ/∂p1 = Σ (1 − L²/2)/b`, `∂ℓ/∂p2 = Σ (−L − L²/2)/b`.
pub fn score(p: &Params, s: &Sample) -> [f64; 3] {
    let (lambda, p1, p2) = (p.lambda(), p.p1(), p.p2());
    let c = 0.5 * (1.0 - p1 - p2);
    let mut g = [s.len() as f64 / lambda, 0.0, 0.0];
    for &x in s.values() {
        let l = p.ln_base_cdf(x);
        let b = p.weights().bracket(l);
        let dl_dlambda = x / (lambda * x).exp_m1();
        g[0] += -x + (2.0 * c * l - p2) * dl_dlambda / b;
        g[1] += (1.0 - 0.5 * l * l) / b;
        g[2] += (-l - 0.5 * l * l) / b;
    }
    g
}
