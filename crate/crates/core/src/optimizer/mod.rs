//! Shared numerical optimization: reparameterization onto `ℝ^d`, Nelder–Mead
//! and BFGS minimizers, a multi-start driver and observed-information
//! standard errors.

mod bfgs;
mod hessian;
mod nelder_mead;
mod transform;

use serde::Serialize;

pub use bfgs::{bfgs, numerical_gradient, BfgsOptions, BfgsOutcome};
pub use hessian::{numerical_hessian, standard_errors, StandardErrors};
pub use nelder_mead::{nelder_mead, NmOptions, NmOutcome};
pub use transform::{ParamTransform, SIGNED_UNIT_MARGIN};

/// Value substituted for non-finite or absurdly large objective values.
pub const PENALTY: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

/// An objective on the constrained parameters together with the map used to
/// search over them.
pub struct ObjectiveSpec<'a> {
    pub objective: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub transform: ParamTransform,
    pub direction: Direction,
    /// Optional test on constrained points. Start results failing it are
    /// used only when no start passes; see [`minimize`].
    pub admissible: Option<&'a Admissible<'a>>,
}

impl ObjectiveSpec<'_> {
    /// The minimized quantity at an unconstrained point, with non-finite
    /// values replaced by [`PENALTY`].
    pub fn evaluate(&self, t: &[f64]) -> f64 {
        let v = (self.objective)(&self.transform.inverse(t));
        let v = match self.direction {
            Direction::Minimize => v,
            Direction::Maximize => -v,
        };
        if v.is_finite() {
            v.min(PENALTY)
        } else {
            PENALTY
        }
    }

    pub fn n_free(&self) -> usize {
        self.transform.dim()
    }

    fn natural(&self, minimized: f64) -> f64 {
        match self.direction {
            Direction::Minimize => minimized,
            Direction::Maximize => -minimized,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OptOptions {
    pub nelder_mead: NmOptions,
    pub bfgs: BfgsOptions,
    /// Fresh-simplex restarts of Nelder–Mead after the first run.
    pub max_restarts: usize,
}

impl Default for OptOptions {
    fn default() -> Self {
        OptOptions {
            nelder_mead: NmOptions::default(),
            bfgs: BfgsOptions::default(),
            max_restarts: 2,
        }
    }
}

pub type Admissible<'a> = dyn Fn(&[f64]) -> bool + Sync + 'a;

/// A better objective value found at an inadmissible point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetAside {
    pub point: Vec<f64>,
    pub objective_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    /// Best point in the constrained parameterization.
    pub point: Vec<f64>,
    /// Objective at `point`, in the objective's own sign convention.
    pub objective_value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts_used: usize,
    pub evaluations: usize,
    /// Index into the start list of the winning start.
    pub start_index: usize,
    pub termination: String,
    /// Set when an inadmissible start result beat the reported one.
    pub set_aside: Option<SetAside>,
}

struct StartOutcome {
    t: Vec<f64>,
    f: f64,
    converged: bool,
    iterations: usize,
    restarts: usize,
    evaluations: usize,
    termination: String,
}

fn run_start(spec: &ObjectiveSpec<'_>, t0: Vec<f64>, opts: &OptOptions) -> StartOutcome {
    let f = |t: &[f64]| spec.evaluate(t);
    let mut nm = nelder_mead(f, &t0, &opts.nelder_mead);
    let mut iterations = nm.iterations;
    let mut evaluations = nm.evaluations;
    let mut restarts = 0;
    while restarts < opts.max_restarts {
        let again = nelder_mead(f, &nm.x, &opts.nelder_mead);
        restarts += 1;
        iterations += again.iterations;
        evaluations += again.evaluations;
        let gain = nm.f - again.f;
        if again.f <= nm.f {
            nm = again;
        }
        if gain <= opts.nelder_mead.f_tol * nm.f.abs().max(1.0) {
            break;
        }
    }
    let polish = bfgs(f, &nm.x, &opts.bfgs);
    iterations += polish.iterations;
    evaluations += polish.evaluations;
    let (t, fval) = if polish.f < nm.f {
        (polish.x, polish.f)
    } else {
        (nm.x, nm.f)
    };
    let diverged = fval >= PENALTY;
    let converged = !diverged && (polish.converged || nm.converged);
    let termination = if diverged {
        "objective is non-finite everywhere visited".to_string()
    } else if polish.converged {
        format!("gradient ∞-norm {:.3e} below tolerance", polish.grad_norm)
    } else if nm.converged {
        format!("simplex diameter {:.3e} below tolerance", nm.diameter)
    } else {
        format!(
            "iteration limit reached (simplex diameter {:.3e}, gradient ∞-norm {:.3e})",
            nm.diameter, polish.grad_norm
        )
    };
    StartOutcome {
        t,
        f: fval,
        converged,
        iterations,
        restarts,
        evaluations,
        termination,
    }
}

/// Best result over `starts` (constrained points), each refined by
/// Nelder–Mead with restarts and then a BFGS polish.
///
/// Ties in the objective are broken by start order. When the spec has an
/// admissibility test, the best admissible result wins and a better
/// inadmissible one is returned in `set_aside`; if no result is admissible
/// the overall best is used. Starts outside the interior are skipped; if none
/// is usable, or every start diverges, the result has `converged = false` and
/// says why.
pub fn minimize(spec: &ObjectiveSpec<'_>, starts: &[Vec<f64>], opts: &OptOptions) -> OptResult {
    let mut best: Option<(usize, StartOutcome)> = None;
    let mut best_admissible: Option<(usize, StartOutcome)> = None;
    let mut rejected = Vec::new();
    let admissible = |t: &[f64]| spec.admissible.is_none_or(|ok| ok(&spec.transform.inverse(t)));
    for (i, s) in starts.iter().enumerate() {
        let t0 = match spec.transform.forward(s) {
            Ok(t) => t,
            Err(e) => {
                rejected.push(e.to_string());
                continue;
            }
        };
        let out = run_start(spec, t0, opts);
        let slot = if admissible(&out.t) {
            &mut best_admissible
        } else {
            &mut best
        };
        if slot.as_ref().is_none_or(|(_, b)| out.f < b.f) {
            *slot = Some((i, out));
        }
    }
    let (chosen, set_aside) = match (best_admissible, best) {
        (Some(a), Some(b)) if b.1.f < a.1.f => {
            let aside = SetAside {
                point: spec.transform.inverse(&b.1.t),
                objective_value: spec.natural(b.1.f),
            };
            (Some(a), Some(aside))
        }
        (Some(a), _) => (Some(a), None),
        (None, b) => (b, None),
    };
    match chosen {
        Some((start_index, out)) => OptResult {
            point: spec.transform.inverse(&out.t),
            objective_value: spec.natural(out.f),
            converged: out.converged,
            iterations: out.iterations,
            restarts_used: out.restarts,
            evaluations: out.evaluations,
            start_index,
            termination: out.termination,
            set_aside,
        },
        None => OptResult {
            point: Vec::new(),
            objective_value: f64::NAN,
            converged: false,
            iterations: 0,
            restarts_used: 0,
            evaluations: 0,
            start_index: 0,
            termination: format!("no usable start point ({})", rejected.join("; ")),
            set_aside: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TransformKind;

    fn free(d: usize) -> ParamTransform {
        // exp maps ℝ onto (0, ∞); shift objectives so their optimum is interior.
        ParamTransform::new(vec![TransformKind::Log; d]).unwrap()
    }

    #[test]
    fn bowl_in_positive_orthant() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] - 0.5).powi(2);
        let spec = ObjectiveSpec {
            objective: &f,
            transform: free(2),
            direction: Direction::Minimize,
            admissible: None,
        };
        let mut opts = OptOptions::default();
        opts.bfgs.grad_tol = 1e-10;
        opts.bfgs.f_tol = 0.0;
        let r = minimize(&spec, &[vec![1.0, 1.0]], &opts);
        assert!(r.converged);
        assert!((r.point[0] - 3.0).abs() < 1e-8 && (r.point[1] - 0.5).abs() < 1e-8, "{:?}", r.point);
    }

    #[test]
    fn maximize_reports_natural_sign() {
        let f = |x: &[f64]| -(x[0] - 2.0).powi(2) + 7.0;
        let spec = ObjectiveSpec {
            objective: &f,
            transform: free(1),
            direction: Direction::Maximize,
            admissible: None,
        };
        let r = minimize(&spec, &[vec![0.5]], &OptOptions::default());
        assert!((r.objective_value - 7.0).abs() < 1e-12);
        assert!((r.point[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn best_start_wins_and_is_deterministic() {
        // Two local minima; the deeper one at x = 4.
        let f = |x: &[f64]| ((x[0] - 1.0).powi(2) * (x[0] - 4.0).powi(2)) - 0.5 * x[0];
        let spec = ObjectiveSpec {
            objective: &f,
            transform: free(1),
            direction: Direction::Minimize,
            admissible: None,
        };
        let starts = [vec![0.5], vec![5.0]];
        let a = minimize(&spec, &starts, &OptOptions::default());
        let b = minimize(&spec, &starts, &OptOptions::default());
        assert_eq!(a, b);
        assert_eq!(a.start_index, 1);
        assert!(a.point[0] > 3.5);
    }

    #[test]
    fn admissible_result_preferred() {
        // Deeper minimum at x = 4, but only x < 3 is admissible.
        let f = |x: &[f64]| ((x[0] - 1.0).powi(2) * (x[0] - 4.0).powi(2)) - 0.5 * x[0];
        let ok = |x: &[f64]| x[0] < 3.0;
        let spec = ObjectiveSpec {
            objective: &f,
            transform: free(1),
            direction: Direction::Minimize,
            admissible: Some(&ok),
        };
        let r = minimize(&spec, &[vec![0.5], vec![5.0]], &OptOptions::default());
        assert_eq!(r.start_index, 0);
        assert!(r.point[0] < 3.0);
        let aside = r.set_aside.unwrap();
        assert!(aside.point[0] > 3.5 && aside.objective_value < r.objective_value);
    }

    #[test]
    fn all_diverged_is_reported() {
        let f = |_: &[f64]| f64::NAN;
        let spec = ObjectiveSpec {
            objective: &f,
            transform: free(1),
            direction: Direction::Minimize,
            admissible: None,
        };
        let r = minimize(&spec, &[vec![1.0]], &OptOptions::default());
        assert!(!r.converged);
        let r = minimize(&spec, &[vec![-1.0]], &OptOptions::default());
        assert!(!r.converged && r.point.is_empty());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            // Adversarial objectives: NaN and ±∞ pockets never leak out of
            // `evaluate`, and the reported value is finite.
            #[test]
            fn penalty_substitution(cut in 0.1f64..5.0, kind in 0u8..3) {
                let f = move |x: &[f64]| {
                    if x[0] > cut {
                        match kind { 0 => f64::NAN, 1 => f64::INFINITY, _ => f64::NEG_INFINITY }
                    } else {
                        (x[0] - cut / 2.0).powi(2)
                    }
                };
                let spec = ObjectiveSpec { objective: &f, transform: free(1), direction: Direction::Minimize, admissible: None };
                for t in [-3.0, 0.0, 2.0, 10.0] {
                    let v = spec.evaluate(&[t]);
                    prop_assert!(v.is_finite());
                }
                let r = minimize(&spec, &[vec![cut / 4.0]], &OptOptions::default());
                prop_assert!(r.objective_value.is_finite());
            }
        }
    }
}
