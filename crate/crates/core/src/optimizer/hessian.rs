use nalgebra::DMatrix;
use serde::Serialize;

/// Symmetric central-difference Hessian with steps `1e-4·max(|x_i|, 1e-3)`.
pub fn numerical_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1e-3)).collect();
    let mut p = x.to_vec();
    let f0 = f(x);
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        p[i] = x[i] + h[i];
        let up = f(&p);
        p[i] = x[i] - h[i];
        let down = f(&p);
        p[i] = x[i];
        out[(i, i)] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                p[i] = x[i] + si * h[i];
                p[j] = x[j] + sj * h[j];
                let v = f(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardErrors {
    /// `None` where the variance is not available.
    pub values: Vec<Option<f64>>,
    pub reliable: bool,
    pub note: Option<String>,
}

impl StandardErrors {
    pub fn unreliable(&mut self, why: impl Into<String>) {
        self.reliable = false;
        let why = why.into();
        self.note = Some(match self.note.take() {
            Some(prev) => format!("{prev}; {why}"),
            None => why,
        });
    }
}

/// Square roots of the diagonal of the inverse of the observed information.
///
/// A Hessian that is not positive definite yields `None` entries and an
/// unreliable flag instead of imaginary values.
pub fn standard_errors(hessian: &DMatrix<f64>) -> StandardErrors {
    let d = hessian.nrows();
    if hessian.iter().any(|v| !v.is_finite()) {
        return StandardErrors {
            values: vec![None; d],
            reliable: false,
            note: Some("Hessian has non-finite entries".into()),
        };
    }
    match hessian.clone().cholesky() {
        Some(ch) => {
            let inv = ch.inverse();
            StandardErrors {
                values: (0..d).map(|i| Some(inv[(i, i)].sqrt())).collect(),
                reliable: true,
                note: None,
            }
        }
        None => StandardErrors {
            values: vec![None; d],
            reliable: false,
            note: Some("Hessian is not positive definite".into()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_form_inverse_diagonal() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let f = |x: &[f64]| 0.5 * (4.0 * x[0] * x[0] + 2.0 * x[0] * x[1] + 3.0 * x[1] * x[1]);
        let h = numerical_hessian(f, &[0.3, -0.2]);
        assert!((&h - &a).abs().max() < 1e-6);
        let se = standard_errors(&h);
        let inv = a.try_inverse().unwrap();
        assert!((se.values[0].unwrap() - inv[(0, 0)].sqrt()).abs() < 1e-6);
        assert!((se.values[1].unwrap() - inv[(1, 1)].sqrt()).abs() < 1e-6);
        assert!(se.reliable);
    }

    #[test]
    fn indefinite_is_flagged() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let se = standard_errors(&h);
        assert!(!se.reliable);
        assert_eq!(se.values, vec![None, None]);
    }
}
