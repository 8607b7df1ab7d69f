//! Self-similar profile `L★(s) = 1 + s - k W((s/k) e^{(1+s)/k})` and its
//! distribution function `M★`, together with the auxiliary map
//! `h(z) = (1+s) z + k z ln z` whose inverse gives `L★ = -k ln h⁻¹(s)`.

use crate::error::{CoreError, Result};
use crate::laplace::LaplaceEvaluator;
use crate::roots::newton_bracketed;

const W_MAX_ITER: usize = 50;

fn halley_w(z: f64, mut w: f64) -> f64 {
    for _ in 0..W_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let dw = f / denom;
        w -= dw;
        if dw.abs() <= 1e-16 * w.abs() || f == 0.0 {
            break;
        }
    }
    w
}

/// Principal branch of the Lambert W function on `[0, ∞)`.
pub fn lambert_w(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(CoreError::Domain(format!("lambert_w is only defined here for z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let w0 = if z < 1e-3 {
        z * (1.0 - z * (1.0 - z * (1.5 - z * 8.0 / 3.0)))
    } else if z <= std::f64::consts::E {
        let a = z.ln_1p();
        a * (1.0 - a.ln_1p() / (2.0 + a))
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    Ok(halley_w(z, w0))
}

/// `W(e^y)`, i.e. the root of `w + ln w = y`; usable where `e^y` overflows.
pub fn lambert_w_of_exp(y: f64) -> Result<f64> {
    if y.is_nan() {
        return Err(CoreError::Domain("lambert_w_of_exp of NaN".into()));
    }
    if y < 1.0 {
        return lambert_w(y.exp());
    }
    let mut w = y - y.ln();
    for _ in 0..W_MAX_ITER {
        let g = w + w.ln() - y;
        let g1 = 1.0 + 1.0 / w;
        let g2 = -1.0 / (w * w);
        let dw = g / (g1 - 0.5 * g * g2 / g1);
        w -= dw;
        if dw.abs() <= 1e-16 * w {
            break;
        }
    }
    Ok(w)
}

/// Gaver–Stehfest weights `V_1..V_n` for an even order `n`.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    let fact = |m: usize| (1..=m).fold(1.0f64, |acc, i| acc * i as f64);
    (1..=n)
        .map(|k| {
            let lo = k.div_ceil(2);
            let hi = k.min(half);
            let mut sum = 0.0;
            for j in lo..=hi {
                sum += (j as f64).powi(half as i32) * fact(2 * j)
                    / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
            }
            if (k + half).is_multiple_of(2) {
                sum
            } else {
                -sum
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionWarning {
    pub x: f64,
    pub message: &'static str,
    pub magnitude: f64,
}

/// `M★` on a grid with diagnostics for the numerical inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionReport {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// `|M★_10 - M★_14|` at each grid point.
    pub order_gap: Vec<f64>,
    pub warnings: Vec<InversionWarning>,
}

/// Tolerance on downward steps of the inverted distribution function.
pub const MONOTONE_TOL: f64 = 5e-4;
/// Tolerance on the order-10 / order-14 disagreement.
pub const ORDER_GAP_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarProfile {
    k: f64,
    w_tol: f64,
    order: usize,
    weights: Vec<f64>,
}

impl SelfSimilarProfile {
    pub fn new(k: f64) -> Result<Self> {
        Self::with_order(k, 12)
    }

    pub fn with_order(k: f64, order: usize) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(CoreError::Domain(format!("k must be positive, got {k}")));
        }
        if !order.is_multiple_of(2) || !(8..=18).contains(&order) {
            return Err(CoreError::Domain(format!("inversion order must be even in 8..=18, got {order}")));
        }
        Ok(SelfSimilarProfile { k, w_tol: 1e-13, order, weights: stehfest_weights(order) })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn w_tol(&self) -> f64 {
        self.w_tol
    }

    /// `L★(s)` through the Lambert W function.
    pub fn l_star(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(CoreError::Domain(format!("L_star needs s >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(1.0);
        }
        let k = self.k;
        let y = (s / k).ln() + (1.0 + s) / k;
        let w = if y > 600.0 { lambert_w_of_exp(y)? } else { lambert_w((s / k) * ((1.0 + s) / k).exp())? };
        Ok(1.0 + s - k * w)
    }

    /// `h(z) = (1+s) z + k z ln z` on `[e^{-1/k}, 1]`.
    pub fn h_eval(&self, z: f64, s: f64) -> Result<f64> {
        let lo = (-1.0 / self.k).exp();
        if !(z >= lo && z <= 1.0) {
            return Err(CoreError::Domain(format!("h is defined on [{lo}, 1], got z = {z}")));
        }
        if z == lo {
            return Ok(s * lo);
        }
        Ok((1.0 + s) * z + self.k * z * z.ln())
    }

    /// Inverse of `h(·; s)` from `[s e^{-1/k}, s + 1]` onto `[e^{-1/k}, 1]`.
    pub fn h_inverse(&self, y: f64, s: f64) -> Result<f64> {
        let k = self.k;
        let zlo = (-1.0 / k).exp();
        let (ylo, yhi) = (s * zlo, s + 1.0);
        if !(y >= ylo && y <= yhi) {
            return Err(CoreError::Domain(format!("h^-1 is defined on [{ylo}, {yhi}], got {y}")));
        }
        if y == ylo {
            return Ok(zlo);
        }
        if y == yhi {
            return Ok(1.0);
        }
        newton_bracketed(
            |z| ((1.0 + s) * z + k * z * z.ln() - y, 1.0 + s + k * (z.ln() + 1.0)),
            zlo,
            1.0,
            0.5 * (zlo + 1.0),
            1e-14,
        )
    }

    /// `L★(s) = -k ln h⁻¹(s)`, the second route.
    pub fn l_star_via_h(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        Ok(-self.k * self.h_inverse(s, s)?.ln())
    }

    fn invert_with(&self, weights: &[f64], x: f64) -> Result<f64> {
        let a = std::f64::consts::LN_2 / x;
        let mut sum = 0.0;
        for (j, v) in weights.iter().enumerate() {
            let s = a * (j + 1) as f64;
            sum += v * self.l_star(s)? / s;
        }
        Ok(a * sum)
    }

    /// `M★(x)` by Gaver–Stehfest inversion of `L★(s)/s` at the configured order.
    pub fn m_star(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(CoreError::Domain(format!("M_star needs x > 0, got {x}")));
        }
        self.invert_with(&self.weights, x)
    }

    /// `M★` on a grid, flagging non-monotone steps beyond [`MONOTONE_TOL`]
    /// and order-10/14 disagreement beyond [`ORDER_GAP_TOL`].
    pub fn m_star_grid(&self, xs: &[f64]) -> Result<InversionReport> {
        let w10 = stehfest_weights(10);
        let w14 = stehfest_weights(14);
        let mut values = Vec::with_capacity(xs.len());
        let mut order_gap = Vec::with_capacity(xs.len());
        let mut warnings = Vec::new();
        for &x in xs {
            values.push(self.m_star(x)?);
            let gap = (self.invert_with(&w10, x)? - self.invert_with(&w14, x)?).abs();
            if gap > ORDER_GAP_TOL {
                warnings.push(InversionWarning { x, message: "order 10 and 14 disagree", magnitude: gap });
            }
            order_gap.push(gap);
        }
        for i in 1..values.len() {
            if xs[i] > xs[i - 1] && values[i] < values[i - 1] - MONOTONE_TOL {
                warnings.push(InversionWarning {
                    x: xs[i],
                    message: "inverted distribution decreases",
                    magnitude: values[i - 1] - values[i],
                });
            }
        }
        Ok(InversionReport { xs: xs.to_vec(), values, order_gap, warnings })
    }
}

/// `sup_s |L(t, t s) - L★(s)|` over the grid.
pub fn selfsim_error(ev: &LaplaceEvaluator, profile: &SelfSimilarProfile, t: f64, s_grid: &[f64]) -> Result<f64> {
    if (ev.k() - profile.k()).abs() > 1e-15 * ev.k() {
        return Err(CoreError::Domain(format!("evaluator k = {} differs from profile k = {}", ev.k(), profile.k())));
    }
    let slice = ev.at_time(t)?;
    let mut worst: f64 = 0.0;
    for &s in s_grid {
        if !(s >= 0.0) {
            return Err(CoreError::Domain(format!("self-similar grid point must be >= 0, got {s}")));
        }
        let err = (slice.l(t * s)? - profile.l_star(s)?).abs();
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn bisect_w(z: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, z.max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > z {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(E).unwrap() - 1.0).abs() < 1e-15);
        let w = lambert_w(E * E).unwrap();
        assert!((w - bisect_w(E * E)).abs() < 1e-14);
        assert!((w - 1.557_145_59).abs() < 1e-8);
        assert!(lambert_w(-0.1).is_err());
    }

    #[test]
    fn lambert_residual_on_log_grid() {
        let mut prev = 0.0;
        for i in 0..=160 {
            let z = 10f64.powf(-8.0 + 0.1 * f64::from(i));
            let w = lambert_w(z).unwrap();
            assert!((w * w.exp() - z).abs() <= 1e-13 * z.max(1.0), "z={z}");
            assert!(w > prev);
            prev = w;
        }
    }

    #[test]
    fn lambert_of_exp_agrees() {
        for &y in &[1.5, 5.0, 40.0, 300.0] {
            let a = lambert_w_of_exp(y).unwrap();
            let b = lambert_w(y.exp()).unwrap();
            assert!((a - b).abs() < 1e-13 * b, "y={y}");
        }
        let w = lambert_w_of_exp(5000.0).unwrap();
        assert!((w + w.ln() - 5000.0).abs() < 1e-11);
    }

    #[test]
    fn stehfest_weights_sum_to_zero() {
        for n in [8, 10, 12, 14] {
            let w = stehfest_weights(n);
            let total: f64 = w.iter().sum();
            assert!(total.abs() < 1e-6 * w.iter().map(|v| v.abs()).fold(0.0, f64::max), "n={n}");
        }
        // order 2: V = [2, -2]
        assert_eq!(stehfest_weights(2), vec![2.0, -2.0]);
    }

    #[test]
    fn l_star_examples() {
        let p = SelfSimilarProfile::new(1.0).unwrap();
        assert_eq!(p.l_star(0.0).unwrap(), 1.0);
        let expected = 2.0 - bisect_w(E * E);
        assert!((p.l_star(1.0).unwrap() - expected).abs() < 1e-14);
        assert!((p.l_star(1.0).unwrap() - 0.442_854).abs() < 1e-6);
        let mut prev = 1.0;
        for i in 0..50 {
            let s = 0.01 * 1.4f64.powi(i);
            let v = p.l_star(s).unwrap();
            assert!(v < prev && v > 0.0, "s={s}");
            prev = v;
        }
    }

    #[test]
    fn h_endpoints_and_inverse() {
        let p = SelfSimilarProfile::new(1.0).unwrap();
        let s = 1.0;
        assert_eq!(p.h_eval(1.0, s).unwrap(), 1.0 + s);
        let lo = (-1.0f64).exp();
        assert_eq!(p.h_eval(lo, s).unwrap(), s * lo);
        for &z in &[0.4, 0.6, 0.9, 0.999] {
            let y = p.h_eval(z, s).unwrap();
            assert!((p.h_inverse(y, s).unwrap() - z).abs() < 1e-12);
        }
        assert!(p.h_inverse(0.1, s).is_err());
        assert!(p.h_eval(0.1, s).is_err());
        assert!((-p.h_inverse(1.0, 1.0).unwrap().ln() - 0.442_854).abs() < 1e-6);
    }

    #[test]
    fn routes_agree() {
        for &k in &[0.5, 1.0, 2.0] {
            let p = SelfSimilarProfile::new(k).unwrap();
            for i in 0..=40 {
                let s = 10f64.powf(-2.0 + 0.1 * f64::from(i));
                let a = p.l_star(s).unwrap();
                let b = p.l_star_via_h(s).unwrap();
                assert!((a - b).abs() <= 1e-12, "k={k} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn order_validation() {
        assert!(SelfSimilarProfile::with_order(1.0, 11).is_err());
        assert!(SelfSimilarProfile::with_order(1.0, 20).is_err());
        assert!(SelfSimilarProfile::with_order(0.0, 12).is_err());
    }

    #[test]
    fn m_star_limits() {
        let p = SelfSimilarProfile::new(1.0).unwrap();
        assert!((p.m_star(200.0).unwrap() - 1.0).abs() < 5e-3);
        let near0 = p.m_star(1e-3).unwrap();
        assert!((-5e-4..=0.05).contains(&near0), "{near0}");
    }

    #[test]
    fn m_star_grid_is_monotone_and_orders_agree() {
        let p = SelfSimilarProfile::new(1.0).unwrap();
        let xs: Vec<f64> = (0..60).map(|i| 1e-3 * 1.2f64.powi(i)).collect();
        let r = p.m_star_grid(&xs).unwrap();
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }

    #[test]
    fn m_star_reproduces_transform() {
        // ∫ e^{-sx} dM★ = s ∫ e^{-sx} M★(x) dx by composite Simpson on [0, 60]
        let p = SelfSimilarProfile::new(1.0).unwrap();
        let s = 1.0;
        let n = 1200;
        let h = 60.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = i as f64 * h;
            let m = if i == 0 { 0.0 } else { p.m_star(x).unwrap() };
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * (-s * x).exp() * m;
        }
        let transform = s * acc * h / 3.0;
        assert!((transform - p.l_star(s).unwrap()).abs() < 1e-3, "{transform}");
    }
}
