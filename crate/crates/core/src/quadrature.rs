//! Adaptive Simpson quadrature.

use thiserror::Error;

const MAX_DEPTH: u32 = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integration bounds [{0}, {1}] are not finite")]
    InfiniteBounds(f64, f64),
    #[error("integrand is not finite at x = {0}")]
    NonFiniteIntegrand(f64),
}

/// `∫_a^b f` to absolute accuracy `tol`. Reversed bounds flip the sign.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::InfiniteBounds(a, b));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFiniteIntegrand(x))
        }
    };
    let fa = eval(a)?;
    let fb = eval(b)?;
    let m = 0.5 * (a + b);
    let fm = eval(m)?;
    let whole = simpson(a, b, fa, fm, fb);
    refine(&eval, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

/// Sums adaptive Simpson over consecutive pieces, so kinks at the given
/// points never fall inside a panel.
pub fn integrate_piecewise(
    f: &impl Fn(f64) -> f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64, QuadratureError> {
    let pieces = breakpoints.len().saturating_sub(1).max(1) as f64;
    breakpoints
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol / pieces))
        .sum()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    eval: &impl Fn(f64) -> Result<f64, QuadratureError>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadratureError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(lm)?;
    let frm = eval(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(refine(eval, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + refine(eval, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn sine_over_half_period() {
        let v = adaptive_simpson(&f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = adaptive_simpson(&|x: f64| x, 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 0.5).abs() < 1e-14);
    }

    #[test]
    fn piecewise_handles_kinks() {
        let tent = |x: f64| (1.0 - x.abs()).max(0.0);
        let v = integrate_piecewise(&tent, &[-1.0, 0.0, 1.0], 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_infinite_bounds_and_values() {
        assert!(adaptive_simpson(&|x: f64| x, 0.0, f64::INFINITY, 1e-9).is_err());
        assert!(adaptive_simpson(&|x: f64| 1.0 / x, 0.0, 1.0, 1e-9).is_err());
    }
}
