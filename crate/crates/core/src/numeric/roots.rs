//! Scalar root finding and maximisation on brackets.

use crate::error::{Error, Result};

/// Bisection on `[a, b]`; `f(a)` and `f(b)` must differ in sign.
///
/// Stops when the bracket is narrower than `x_tol` (absolute) or after the
/// floating-point midpoint stops moving.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= x_tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Safeguarded Newton iteration inside a sign-changing bracket.
///
/// `fdf` returns `(f, f')`. Newton steps that leave the current bracket, or
/// fail to halve it, are replaced by bisection steps.
pub fn newton_bracketed<F: Fn(f64) -> (f64, f64)>(
    fdf: F,
    mut a: f64,
    mut b: f64,
    x_tol: f64,
    f_tol: f64,
) -> Result<f64> {
    let (mut fa, _) = fdf(a);
    let (fb, _) = fdf(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut x = 0.5 * (a + b);
    let mut width_before = (b - a).abs();
    for _ in 0..500 {
        let (fx, dfx) = fdf(x);
        if !fx.is_finite() {
            x = 0.5 * (a + b);
            continue;
        }
        if fx.abs() <= f_tol {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        let width = (b - a).abs();
        if width <= x_tol {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        let inside = newton.is_finite() && (newton - a) * (newton - b) < 0.0;
        x = if inside && width < 0.5 * width_before {
            newton
        } else if inside {
            // Still allow Newton, but force progress next time round.
            width_before = width;
            newton
        } else {
            width_before = width;
            0.5 * (a + b)
        };
        if x == a || x == b {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    0.5 * (a + b)
}

/// Indices `i` where `values[i]` and `values[i + 1]` have strictly opposite signs.
pub fn sign_changes(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] * w[1] < 0.0)
        .map(|(i, _)| i)
        .collect()
}
