use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::TransformKind;

/// Distance kept from ±1 by the signed-unit map.
pub const SIGNED_UNIT_MARGIN: f64 = 1e-6;

/// Bijection between a constrained parameter vector and `ℝ^d`.
///
/// * `Log`: `x = exp(t)`.
/// * `SignedUnit`: `x = (1 − ε) tanh(t)`, onto `(−1 + ε, 1 − ε)`.
/// * `SimplexPair` (two coordinates): `p1 = e^b / (1 + e^b + e^c)`,
///   `p2 = e^c / (1 + e^b + e^c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTransform {
    kinds: Vec<TransformKind>,
}

impl ParamTransform {
    pub fn new(kinds: Vec<TransformKind>) -> Result<Self> {
        let mut i = 0;
        while i < kinds.len() {
            if kinds[i] == TransformKind::SimplexPair {
                if kinds.get(i + 1) != Some(&TransformKind::SimplexPair) {
                    return Err(Error::Optimizer("simplex coordinates must come in pairs".into()));
                }
                i += 2;
            } else {
                i += 1;
            }
        }
        Ok(ParamTransform { kinds })
    }

    pub fn for_model(model: crate::model::Model) -> Self {
        Self::new(model.param_space().iter().map(|s| s.transform).collect())
            .expect("model parameter spaces are well formed")
    }

    pub fn dim(&self) -> usize {
        self.kinds.len()
    }

    /// Constrained → unconstrained. Fails unless `x` is strictly interior.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut out = vec![0.0; x.len()];
        let mut i = 0;
        while i < x.len() {
            match self.kinds[i] {
                TransformKind::Log => {
                    if !(x[i] > 0.0 && x[i].is_finite()) {
                        return Err(not_interior(i, x[i]));
                    }
                    out[i] = x[i].ln();
                }
                TransformKind::SignedUnit => {
                    let s = x[i] / (1.0 - SIGNED_UNIT_MARGIN);
                    if !(s.abs() < 1.0) {
                        return Err(not_interior(i, x[i]));
                    }
                    out[i] = s.atanh();
                }
                TransformKind::SimplexPair => {
                    let (a, b) = (x[i], x[i + 1]);
                    let rest = 1.0 - a - b;
                    if !(a > 0.0 && b > 0.0 && rest > 0.0) {
                        return Err(not_interior(i, a));
                    }
                    out[i] = (a / rest).ln();
                    out[i + 1] = (b / rest).ln();
                    i += 1;
                }
            }
            i += 1;
        }
        Ok(out)
    }

    /// Unconstrained → constrained.
    pub fn inverse(&self, t: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; t.len()];
        let mut i = 0;
        while i < t.len() {
            match self.kinds[i] {
                TransformKind::Log => out[i] = t[i].exp(),
                TransformKind::SignedUnit => out[i] = (1.0 - SIGNED_UNIT_MARGIN) * t[i].tanh(),
                TransformKind::SimplexPair => {
                    // Softmax with a zero reference logit, shifted for stability.
                    let m = t[i].max(t[i + 1]).max(0.0);
                    let (ea, eb, e0) = ((t[i] - m).exp(), (t[i + 1] - m).exp(), (-m).exp());
                    let z = ea + eb + e0;
                    out[i] = ea / z;
                    out[i + 1] = eb / z;
                    i += 1;
                }
            }
            i += 1;
        }
        out
    }

    /// `∂x/∂t` at the unconstrained point `t`.
    pub fn jacobian(&self, t: &[f64]) -> DMatrix<f64> {
        let x = self.inverse(t);
        let d = t.len();
        let mut j = DMatrix::zeros(d, d);
        let mut i = 0;
        while i < d {
            match self.kinds[i] {
                TransformKind::Log => j[(i, i)] = x[i],
                TransformKind::SignedUnit => {
                    let th = t[i].tanh();
                    j[(i, i)] = (1.0 - SIGNED_UNIT_MARGIN) * (1.0 - th * th);
                }
                TransformKind::SimplexPair => {
                    let (a, b) = (x[i], x[i + 1]);
                    j[(i, i)] = a * (1.0 - a);
                    j[(i, i + 1)] = -a * b;
                    j[(i + 1, i)] = -a * b;
                    j[(i + 1, i + 1)] = b * (1.0 - b);
                    i += 1;
                }
            }
            i += 1;
        }
        j
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.kinds.len() {
            return Err(Error::Optimizer(format!(
                "expected {} coordinates, got {}",
                self.kinds.len(),
                x.len()
            )));
        }
        Ok(())
    }
}

fn not_interior(i: usize, v: f64) -> Error {
    Error::Optimizer(format!(
        "start coordinate {i} = {v} is not strictly inside the constraint set"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;
    use rand::Rng;

    #[test]
    fn round_trip_on_random_interior_points() {
        let mut rng = crate::sampling::RngStream::new(4, 0).rng();
        let clr = ParamTransform::for_model(Model::Clrbte);
        let tgr = ParamTransform::for_model(Model::Tgr);
        for _ in 0..1000 {
            let a: f64 = rng.random_range(0.001..0.998);
            let b: f64 = rng.random_range(0.0005..(1.0 - a));
            let x = [rng.random_range(0.01..50.0), a, b];
            let back = clr.inverse(&clr.forward(&x).unwrap());
            for k in 0..3 {
                assert!((back[k] - x[k]).abs() < 1e-12 * x[k].max(1.0), "{x:?} -> {back:?}");
            }
            let y = [rng.random_range(0.01..5.0), rng.random_range(0.01..5.0), rng.random_range(-0.99..0.99)];
            let back = tgr.inverse(&tgr.forward(&y).unwrap());
            for k in 0..3 {
                assert!((back[k] - y[k]).abs() < 1e-12 * y[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_boundary_starts() {
        let clr = ParamTransform::for_model(Model::Clrbte);
        assert!(clr.forward(&[1.0, 0.5, 0.5]).is_err());
        assert!(clr.forward(&[1.0, 0.0, 0.5]).is_err());
        assert!(clr.forward(&[0.0, 0.2, 0.5]).is_err());
        assert!(ParamTransform::for_model(Model::Te).forward(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let clr = ParamTransform::for_model(Model::Clrbte);
        for t in [[0.0, 800.0, -800.0], [0.0, -800.0, -800.0], [0.0, 800.0, 800.0]] {
            let x = clr.inverse(&t);
            assert!(x.iter().all(|v| v.is_finite()), "{x:?}");
            assert!(x[1] + x[2] <= 1.0);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let clr = ParamTransform::for_model(Model::Tgr);
        let t = [0.3, -0.7, 0.4];
        let j = clr.jacobian(&t);
        for c in 0..3 {
            let mut tp = t;
            let mut tm = t;
            tp[c] += 1e-6;
            tm[c] -= 1e-6;
            let (xp, xm) = (clr.inverse(&tp), clr.inverse(&tm));
            for r in 0..3 {
                assert!(((xp[r] - xm[r]) / 2e-6 - j[(r, c)]).abs() < 1e-8);
            }
        }
        let s = ParamTransform::for_model(Model::Clrbte);
        let t = [0.1, 0.5, -1.0];
        let j = s.jacobian(&t);
        for c in 1..3 {
            let mut tp = t;
            let mut tm = t;
            tp[c] += 1e-6;
            tm[c] -= 1e-6;
            let (xp, xm) = (s.inverse(&tp), s.inverse(&tm));
            for r in 1..3 {
                assert!(((xp[r] - xm[r]) / 2e-6 - j[(r, c)]).abs() < 1e-8);
            }
        }
    }
}
