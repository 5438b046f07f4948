use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    /// Convergence when the gradient ∞-norm falls below this.
    pub grad_tol: f64,
    /// Stop after two consecutive relative objective changes below this.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            grad_tol: 1e-6,
            f_tol: 1e-10,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Central-difference gradient with step `max(1e-6, 1e-6·|x_i|)`.
pub fn numerical_gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = (1e-6 * x[i].abs()).max(1e-6);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, g| m.max(g.abs()))
}

/// Quasi-Newton descent with an inverse-Hessian BFGS update and Armijo
/// backtracking.
pub fn bfgs<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> BfgsOutcome {
    let d = x0.len();
    let mut evaluations = 0;
    let mut counted = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };
    let mut x = DVector::from_column_slice(x0);
    let mut fx = counted(x.as_slice());
    let mut g = DVector::from_vec(numerical_gradient(&mut counted, x.as_slice()));
    let mut h_inv = DMatrix::<f64>::identity(d, d);
    let mut small_steps = 0;
    let mut iterations = 0;
    let mut converged = inf_norm(g.as_slice()) < opts.grad_tol;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let mut dir = -(&h_inv * &g);
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            h_inv = DMatrix::identity(d, d);
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial = &x + step * &dir;
            let ft = counted(trial.as_slice());
            if ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            break;
        };
        let g_new = DVector::from_vec(numerical_gradient(&mut counted, x_new.as_slice()));
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(d, d);
            let left = &i - rho * &s * y.transpose();
            let right = &i - rho * &y * s.transpose();
            h_inv = &left * &h_inv * &right + rho * &s * s.transpose();
        }
        let change = (fx - f_new).abs();
        x = x_new;
        g = g_new;
        fx = f_new;
        if inf_norm(g.as_slice()) < opts.grad_tol {
            converged = true;
            break;
        }
        if change <= opts.f_tol * fx.abs().max(1.0) {
            small_steps += 1;
            if small_steps >= 2 {
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    BfgsOutcome {
        x: x.as_slice().to_vec(),
        f: fx,
        grad_norm: inf_norm(g.as_slice()),
        iterations,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let out = bfgs(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &BfgsOptions::default(),
        );
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{:?}", out.x);
    }

    #[test]
    fn gradient_of_quadratic() {
        let g = numerical_gradient(&mut |x: &[f64]| 3.0 * x[0] * x[0] + x[0] * x[1], &[1.0, 2.0]);
        assert!((g[0] - 8.0).abs() < 1e-8 && (g[1] - 1.0).abs() < 1e-8);
    }
}
