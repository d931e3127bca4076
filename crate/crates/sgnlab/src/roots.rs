//! Bracketed scalar root finding: bisection to localize, secant to polish.

use crate::{Error, Result};

/// Find `x` in `[a, b]` with `f(x) = 0`, assuming `f(a)` and `f(b)` have
/// opposite signs. Residual target is on `|f|`; the bracket is kept valid
/// throughout, so a failed secant step falls back to bisection.
pub fn bracketed<F: Fn(f64) -> f64>(
    f: F,
    mut a: f64,
    mut b: f64,
    f_tol: f64,
    op: &'static str,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootFind {
            op,
            msg: format!("no sign change on [{a}, {b}] (f = {fa:.3e}, {fb:.3e})"),
        });
    }
    for _ in 0..200 {
        // secant candidate, clipped to the open bracket interior
        let mut x = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = mid;
        }
        let fx = f(x);
        if fx.abs() <= f_tol || (b - a).abs() <= f64::EPSILON * (a.abs() + b.abs() + 1.0) {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // force occasional bisection so the bracket shrinks geometrically
        if (b - a).abs() > 0.5 * (a - b).abs() {
            let fm = f(mid);
            if fm.abs() <= f_tol {
                return Ok(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
                fb = fm;
            }
        }
    }
    Err(Error::RootFind {
        op,
        msg: format!("did not converge; bracket [{a}, {b}]"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = bracketed(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, "test").unwrap();
        assert!((r - 2.0f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-12, "test").is_err());
    }
}
