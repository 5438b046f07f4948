/// Settings for [`nelder_mead`]. Steps and tolerances are in the
/// unconstrained coordinates.
#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub initial_step: f64,
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            initial_step: 0.25,
            x_tol: 1e-7,
            f_tol: 1e-10,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Largest ∞-norm distance from the best vertex at termination.
    pub diameter: f64,
    pub converged: bool,
}

/// Downhill simplex with the standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, ½, ½).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NmOptions) -> NmOutcome {
    let d = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        f(x)
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    simplex.push(x0.to_vec());
    for i in 0..d {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evaluations)).collect();
    let mut iterations = 0;
    let mut converged = false;
    let mut diameter;
    loop {
        // Stable sort keeps ties in insertion order, so runs are reproducible.
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = values[d] - values[0];
        if diameter <= opts.x_tol && spread <= opts.f_tol * values[0].abs().max(1.0) {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; d];
        for v in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evaluations);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evaluations);
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
            continue;
        }
        if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[d] {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evaluations);
            (xc, if fc <= fr { fc } else { f64::INFINITY })
        } else {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evaluations);
            (xc, if fc < values[d] { fc } else { f64::INFINITY })
        };
        if fc.is_finite() {
            simplex[d] = xc;
            values[d] = fc;
            continue;
        }
        for i in 1..=d {
            let shrunk: Vec<f64> = simplex[i]
                .iter()
                .zip(&simplex[0])
                .map(|(x, b)| b + 0.5 * (x - b))
                .collect();
            values[i] = eval(&shrunk, &mut evaluations);
            simplex[i] = shrunk;
        }
    }
    NmOutcome {
        x: simplex.swap_remove(0),
        f: values[0],
        iterations,
        evaluations,
        diameter,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let out = nelder_mead(
            |x| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2),
            &[0.0, 0.0],
            &NmOptions {
                x_tol: 1e-10,
                f_tol: 1e-20,
                ..NmOptions::default()
            },
        );
        assert!(out.converged);
        assert!((out.x[0] - 3.0).abs() < 1e-8 && (out.x[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn stops_at_iteration_cap() {
        let out = nelder_mead(
            |x| (x[0] - 1.0).powi(2),
            &[100.0],
            &NmOptions {
                max_iter: 3,
                ..NmOptions::default()
            },
        );
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }
}
