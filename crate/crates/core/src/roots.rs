//! Safeguarded bracketing root finding and monotone CDF inversion.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Iterates until the bracket is below `x_rel_tol·|x|` (plus a tiny absolute
/// floor) or `|f| <= f_tol`.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    x_rel_tol: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Bracketing(format!(
            "f({a}) = {fa} and f({b}) = {fb} do not bracket a root"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_rel_tol * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= f_tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation, or secant when only two points differ.
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::Bracketing(format!("function is NaN at {b}")));
        }
    }
    Err(Error::Bracketing(format!(
        "no convergence within {max_iter} iterations"
    )))
}

/// Inverts a continuous increasing CDF on `[0, ∞)` at probability `u ∈ [0, 1)`.
///
/// The lower half is solved on `F(x) − u`, the upper half on `(1−u) − S(x)`
/// so the tail is located with relative precision. The bracket starts at
/// `[0, scale]` and doubles until it encloses the root.
pub fn invert_cdf<F, S>(cdf: F, survival: S, u: f64, scale: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    if !(0.0..1.0).contains(&u) || u.is_nan() {
        return Err(Error::domain("u", u, "must lie in [0, 1)"));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let g = |x: f64| {
        if u <= 0.5 {
            cdf(x) - u
        } else {
            (1.0 - u) - survival(x)
        }
    };
    let mut hi = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let mut lo = 0.0;
    let mut doublings = 0;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::Bracketing(format!(
                "could not bracket the {u}-quantile"
            )));
        }
    }
    brent(g, lo, hi, 0.0, 0.0, 500)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 0.0, 0.0, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_bracket() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 0.0, 0.0, 100).is_err());
    }

    #[test]
    fn inverts_exponential() {
        let rate = 0.3;
        for i in 1..1000 {
            let u = i as f64 / 1000.0;
            let x = invert_cdf(
                |x: f64| -(-rate * x).exp_m1(),
                |x: f64| (-rate * x).exp(),
                u,
                1.0 / rate,
            )
            .unwrap();
            let exact = -(-u).ln_1p() / rate;
            assert!((x - exact).abs() <= 1e-14 * exact.max(1.0), "{u}: {x} vs {exact}");
        }
    }

    #[test]
    fn inversion_domain() {
        let cdf = |x: f64| x.min(1.0);
        let surv = |x: f64| 1.0 - x.min(1.0);
        assert_eq!(invert_cdf(cdf, surv, 0.0, 1.0).unwrap(), 0.0);
        assert!(invert_cdf(cdf, surv, 1.0, 1.0).is_err());
        assert!(invert_cdf(cdf, surv, -0.1, 1.0).is_err());
    }
}
