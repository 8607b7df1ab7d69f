//! Bracketed Newton iteration for strictly increasing scalar maps.

use crate::error::{CoreError, Result};

pub(crate) const ROOT_RTOL: f64 = 1e-12;
pub(crate) const MAX_ITER: usize = 200;

/// Finds the zero of an increasing `f` inside `[lo, hi]`, where
/// `f(lo) <= 0 <= f(hi)`. `f` returns the value and the derivative.
///
/// Newton steps that leave the bracket or fail to halve the previous step
/// fall back to bisection. After the relative step drops under `rtol` one
/// extra Newton step is taken, which puts the iterate at machine precision.
pub(crate) fn newton_bracketed<F>(mut f: F, mut lo: f64, mut hi: f64, x0: f64, rtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(lo <= hi) {
        return Err(CoreError::Convergence(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    for _ in 0..MAX_ITER {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(CoreError::Convergence(format!("non-finite residual at {x}")));
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let usable = dfx.is_finite() && dfx > 0.0 && newton > lo && newton < hi && (2.0 * fx).abs() <= (dx_old * dfx).abs();
        dx_old = dx;
        let next = if usable { newton } else { 0.5 * (lo + hi) };
        dx = next - x;
        if dx.abs() <= rtol * next.abs() || next == x {
            if usable {
                // polish
                let (fn_, dfn) = f(next);
                let polished = next - fn_ / dfn;
                if fn_ != 0.0 && polished.is_finite() && (polished - next).abs() <= rtol * next.abs() {
                    return Ok(polished);
                }
                return Ok(next);
            }
            if hi - lo <= 4.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE) {
                return Ok(next);
            }
        }
        x = next;
    }
    Err(CoreError::Convergence(format!(
        "no convergence after {MAX_ITER} iterations in [{lo}, {hi}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = newton_bracketed(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1.0, 1e-12).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn bad_derivative_falls_back_to_bisection() {
        // derivative deliberately wrong sign
        let r = newton_bracketed(|x| (x - 0.3, -1.0), 0.0, 1.0, 0.9, 1e-12).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
    }
}
