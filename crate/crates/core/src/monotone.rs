//! Numerical surrogate for complete monotonicity: the forward differences
//! `(-1)^n Δ_h^n f(s)` of a completely monotone `f` are non-negative for
//! every order `n`.

use crate::error::{CoreError, Result};

pub const MAX_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub s: f64,
    pub order: usize,
    /// `(-1)^n Δ_h^n f(s)`
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub max_order: usize,
    pub step: f64,
    pub tol: f64,
    pub points: usize,
    /// Smallest signed difference seen over the grid and all orders.
    pub min_signed: f64,
    pub violations: Vec<Violation>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for j in 1..n {
        row[j] = row[j - 1] * (n + 1 - j) as f64 / j as f64;
    }
    row
}

/// Checks `(-1)^n Δ_h^n f(s) >= -tol` for all `s` in the grid and
/// `0 <= n <= max_order`.
///
/// Fails only on violated preconditions: every grid point must exceed
/// `h · max_order` and `max_order` must not exceed [`MAX_ORDER`].
pub fn check_complete_monotone<F>(mut f: F, s_grid: &[f64], max_order: usize, h: f64, tol: f64) -> Result<MonotonicityReport>
where
    F: FnMut(f64) -> f64,
{
    if max_order > MAX_ORDER {
        return Err(CoreError::Domain(format!("max_order {max_order} exceeds {MAX_ORDER}")));
    }
    if !(h > 0.0) {
        return Err(CoreError::Domain(format!("difference step must be positive, got {h}")));
    }
    if let Some(&bad) = s_grid.iter().find(|&&s| !(s > h * max_order as f64)) {
        return Err(CoreError::Domain(format!("grid point {bad} not above h*max_order")));
    }
    let rows: Vec<Vec<f64>> = (0..=max_order).map(binomial_row).collect();
    let mut report = MonotonicityReport {
        max_order,
        step: h,
        tol,
        points: s_grid.len(),
        min_signed: f64::INFINITY,
        violations: Vec::new(),
    };
    for &s in s_grid {
        let values: Vec<f64> = (0..=max_order).map(|j| f(s + j as f64 * h)).collect();
        for (n, row) in rows.iter().enumerate() {
            // (-1)^n Δ^n f(s) = Σ_j (-1)^j C(n,j) f(s + jh)
            let signed: f64 = row
                .iter()
                .enumerate()
                .map(|(j, c)| if j % 2 == 0 { c * values[j] } else { -c * values[j] })
                .sum();
            report.min_signed = report.min_signed.min(signed);
            if signed < -tol || signed.is_nan() {
                report.violations.push(Violation { s, order: n, value: signed });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..20).map(|i| 0.1 * 1.3f64.powi(i)).collect()
    }

    #[test]
    fn exponential_is_completely_monotone() {
        let r = check_complete_monotone(|s| (-s).exp(), &grid(), 8, 0.01, 1e-12).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn identity_fails_at_order_one_only() {
        let h = 0.01;
        let r = check_complete_monotone(|s| s, &grid(), 2, h, 1e-12).unwrap();
        assert!(r.violations.iter().all(|v| v.order == 1));
        assert_eq!(r.violations.len(), grid().len());
        for v in &r.violations {
            assert!((v.value + h).abs() < 1e-12);
        }
    }

    #[test]
    fn preconditions() {
        assert!(check_complete_monotone(|s| s, &[0.05], 8, 0.01, 0.0).is_err());
        assert!(check_complete_monotone(|s| s, &[1.0], 11, 0.01, 0.0).is_err());
    }
}
