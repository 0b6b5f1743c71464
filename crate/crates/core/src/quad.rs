//! Adaptive Simpson quadrature on a closed interval.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// One panel `[a, b]` with cached endpoint and midpoint samples and its
/// Simpson estimate.
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Panel {
    fn new(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> Self {
        let fm = f(0.5 * (a + b));
        let whole = simpson(a, b, fa, fm, fb);
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        }
    }
}

fn recurse(f: &dyn Fn(f64) -> f64, p: &Panel, tol: f64, depth: u32, residual: &mut f64) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let left = Panel::new(f, p.a, p.fa, m, p.fm);
    let right = Panel::new(f, m, p.fm, p.b, p.fb);
    let delta = left.whole + right.whole - p.whole;
    if delta.abs() <= 15.0 * tol || depth == 0 || m <= p.a || p.b <= m {
        if delta.abs() > 15.0 * tol {
            *residual += delta.abs() / 15.0;
        }
        return left.whole + right.whole + delta / 15.0;
    }
    recurse(f, &left, 0.5 * tol, depth - 1, residual)
        + recurse(f, &right, 0.5 * tol, depth - 1, residual)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Classic adaptive Simpson with Richardson correction; panels split until
/// the local error estimate fits the (halved) local tolerance. Errors with
/// [`Error::Quadrature`] if some panel bottoms out at the depth limit with
/// an error estimate still above its share of `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(Error::InvalidInput(format!(
            "bad integration interval [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!(
            "integration tolerance must be positive, got {tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let root = Panel::new(f, a, f(a), b, f(b));
    let mut residual = 0.0;
    let value = recurse(f, &root, tol, MAX_DEPTH, &mut residual);
    if residual > tol {
        return Err(Error::Quadrature {
            requested: tol,
            achieved: residual,
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let v = integrate(&|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() <= 1e-12);
        let v = integrate(&|x| x * x * x - 0.5 * x, -1.0, 2.0, 1e-12).unwrap();
        assert!((v - (15.0 / 4.0 - 3.0 / 4.0)).abs() <= 1e-11);
    }

    #[test]
    fn integrates_transcendentals() {
        let v = integrate(&f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() <= 1e-11);
        let v = integrate(&f64::exp, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() <= 1e-11);
    }

    #[test]
    fn handles_a_kink() {
        let v = integrate(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-10).unwrap();
        let want = 0.3 * 0.3 / 2.0 + 0.7 * 0.7 / 2.0;
        assert!((v - want).abs() <= 1e-9);
    }

    #[test]
    fn zero_width_interval_is_zero() {
        assert_eq!(integrate(&|x| x, 0.5, 0.5, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_intervals_and_tolerances() {
        assert!(integrate(&|x| x, 1.0, 0.0, 1e-12).is_err());
        assert!(integrate(&|x| x, 0.0, f64::INFINITY, 1e-12).is_err());
        assert!(integrate(&|x| x, 0.0, 1.0, 0.0).is_err());
        assert!(integrate(&|x| x, 0.0, 1.0, -1.0).is_err());
    }
}
