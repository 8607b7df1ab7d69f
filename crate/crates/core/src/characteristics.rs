//! Characteristic curves of the Laplace-space equation.
//!
//! For a starting point `s > 0` the pair `(Σ, ℓ)` solves
//!
//! ```text
//! dΣ/dt = ℓ - 1 - k,     dℓ/dt = k (1 - ℓ) / Σ,     (Σ, ℓ)(0) = (s, L0(s))
//! ```
//!
//! until `Σ` reaches zero at the hitting time `T(s)`. Closed forms exist for
//! all three; [`Characteristics::integrate_oracle`] integrates the system
//! directly and is kept independent of them for cross-checking.

use crate::error::{CoreError, Result};
use crate::measure::{MeasureSpec, TransformValue};
use crate::roots::{newton_bracketed, ROOT_RTOL};
use crate::special::{log1p_minus_x, psi};

/// Relative window around `T(s)` inside which the terminal values
/// `Σ = 0`, `ℓ = 1` are returned directly.
pub const NEAR_AXIS: f64 = 1e-10;

const MAX_DOUBLINGS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub t: f64,
    pub sigma: f64,
    pub ell: f64,
}

/// A sampled trajectory of the characteristic system from one start point.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicPath {
    pub s0: f64,
    pub k: f64,
    pub samples: Vec<PathSample>,
    pub t_hit: f64,
}

impl CharacteristicPath {
    /// `ln Σ - ln(1 - ℓ) + ℓ/k`, constant along exact trajectories.
    pub fn invariant(&self, sample: &PathSample) -> f64 {
        sample.sigma.ln() - (1.0 - sample.ell).ln() + sample.ell / self.k
    }
}

/// The characteristic system for a given initial measure and fragmentation
/// constant `k > 0`.
#[derive(Debug, Clone)]
pub struct Characteristics {
    measure: MeasureSpec,
    k: f64,
}

impl Characteristics {
    pub fn new(measure: MeasureSpec, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(CoreError::Domain(format!("fragmentation constant k must be positive, got {k}")));
        }
        Ok(Characteristics { measure, k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn measure(&self) -> &MeasureSpec {
        &self.measure
    }

    fn transform(&self, s: f64) -> Result<TransformValue> {
        self.measure.eval_transform(s)
    }

    fn hit_from(&self, tv: &TransformValue) -> f64 {
        // T = s (1 - e^{-(1-L0)/k}) / (1 - L0)
        let u = tv.one_minus_l0();
        tv.s * psi(u / self.k) / self.k
    }

    /// `dT/ds`, obtained by differentiating `1 - L0 + k ln(1 + T L1) = 0`.
    fn hit_slope_from(&self, tv: &TransformValue, hit: f64) -> f64 {
        let k = self.k;
        let decay = (-tv.one_minus_l0() / k).exp();
        (tv.l0_prime * decay - k * tv.l1_prime * hit) / (k * tv.l1)
    }

    /// Hitting time `T(s)` at which `Σ(·, s)` reaches zero.
    pub fn time_to_axis(&self, s: f64) -> Result<f64> {
        let tv = self.transform(s)?;
        Ok(self.hit_from(&tv))
    }

    fn check_time(&self, t: f64, tv: &TransformValue) -> Result<Option<f64>> {
        if !(t >= 0.0) {
            return Err(CoreError::Domain(format!("time must be non-negative, got {t}")));
        }
        let hit = self.hit_from(tv);
        if t > hit * (1.0 + NEAR_AXIS) {
            return Err(CoreError::PastSingularity { t, hit });
        }
        if t >= hit * (1.0 - NEAR_AXIS) {
            return Ok(None);
        }
        Ok(Some(hit))
    }

    fn ell_at(&self, t: f64, tv: &TransformValue) -> f64 {
        tv.l0 - self.k * (t * tv.l1).ln_1p()
    }

    fn sigma_at(&self, t: f64, tv: &TransformValue) -> f64 {
        let x = t * tv.l1;
        (1.0 + x) * (tv.s - self.k * x.ln_1p() / tv.l1)
    }

    /// `ℓ(t, s) = L0(s) - k ln(1 + t L1(s))` for `0 <= t <= T(s)`.
    pub fn ell_closed(&self, t: f64, s: f64) -> Result<f64> {
        let tv = self.transform(s)?;
        Ok(match self.check_time(t, &tv)? {
            Some(_) => self.ell_at(t, &tv),
            None => 1.0,
        })
    }

    /// `Σ(t, s) = -((1 + t L1)/L1) [1 - L0 + k ln(1 + t L1)]` for `0 <= t <= T(s)`.
    pub fn sigma_closed(&self, t: f64, s: f64) -> Result<f64> {
        let tv = self.transform(s)?;
        Ok(match self.check_time(t, &tv)? {
            Some(_) => self.sigma_at(t, &tv).max(0.0),
            None => 0.0,
        })
    }

    fn dsigma_ds_at(&self, t: f64, tv: &TransformValue) -> f64 {
        let x = t * tv.l1;
        1.0 + t * tv.l0_prime + self.k * tv.l1_prime / (tv.l1 * tv.l1) * log1p_minus_x(x)
    }

    /// `∂Σ/∂s (t, s)`, defined for `T^{-1}(t) <= s`.
    pub fn dsigma_ds(&self, t: f64, s: f64) -> Result<f64> {
        let tv = self.transform(s)?;
        if !(t >= 0.0) {
            return Err(CoreError::Domain(format!("time must be non-negative, got {t}")));
        }
        let hit = self.hit_from(&tv);
        if t > hit * (1.0 + NEAR_AXIS) {
            return Err(CoreError::Domain(format!("s = {s} lies below T^-1({t}) (T(s) = {hit})")));
        }
        Ok(self.dsigma_ds_at(t, &tv))
    }

    /// `∂ℓ/∂s (t, s) = L0'(s) - k t L1'(s) / (1 + t L1(s))`.
    pub fn dell_ds(&self, t: f64, s: f64) -> Result<f64> {
        let tv = self.transform(s)?;
        Ok(tv.l0_prime - self.k * t * tv.l1_prime / (1.0 + t * tv.l1))
    }

    /// `T^{-1}(t)`: the start point whose characteristic hits the axis at `t`.
    pub fn t_inverse(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CoreError::Domain(format!("T^-1 needs t > 0, got {t}")));
        }
        let k = self.k;
        // s/(1+k) < T(s) < s/k  ⇒  k t < T^{-1}(t) < (1+k) t
        let mut lo = k * t;
        let mut hi = (1.0 + k) * t;
        let mut n = 0;
        while self.time_to_axis(lo)? > t {
            lo *= 0.5;
            n += 1;
            if n > MAX_DOUBLINGS {
                return Err(CoreError::Convergence(format!("no lower bracket for T^-1({t})")));
            }
        }
        while self.time_to_axis(hi)? < t {
            hi *= 2.0;
            n += 1;
            if n > MAX_DOUBLINGS {
                return Err(CoreError::Convergence(format!("no upper bracket for T^-1({t})")));
            }
        }
        let guess = (t / (1.0 - (-1.0 / k).exp())).clamp(lo, hi);
        let mut failure = None;
        let root = newton_bracketed(
            |s| match self.transform(s) {
                Ok(tv) => {
                    let hit = self.hit_from(&tv);
                    (hit - t, self.hit_slope_from(&tv, hit))
                }
                Err(e) => {
                    failure = Some(e);
                    (f64::NAN, f64::NAN)
                }
            },
            lo,
            hi,
            guess,
            ROOT_RTOL,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        root
    }

    /// `ζ(t, target)`: the start point `σ >= T^{-1}(t)` with `Σ(t, σ) = target`.
    pub fn zeta(&self, t: f64, target: f64) -> Result<f64> {
        let theta = self.t_inverse(t)?;
        self.zeta_from(t, target, theta)
    }

    /// As [`zeta`](Self::zeta) with a precomputed `T^{-1}(t)`.
    pub fn zeta_from(&self, t: f64, target: f64, theta: f64) -> Result<f64> {
        if !(target >= 0.0) || !target.is_finite() {
            return Err(CoreError::Domain(format!("zeta target must be >= 0, got {target}")));
        }
        if target == 0.0 {
            return Ok(theta);
        }
        // ∂_t Σ >= -(1+k) gives Σ(t, target + (1+k)t) >= target
        let mut hi = target + (1.0 + self.k) * t;
        let mut n = 0;
        while self.sigma_closed(t, hi)? < target {
            hi *= 2.0;
            n += 1;
            if n > MAX_DOUBLINGS {
                return Err(CoreError::Convergence(format!("no upper bracket for zeta({t}, {target})")));
            }
        }
        let guess = (target + t).clamp(theta, hi);
        let mut failure = None;
        let root = newton_bracketed(
            |s| match self.transform(s) {
                Ok(tv) => {
                    let sig = if s <= theta { 0.0 } else { self.sigma_at(t, &tv) };
                    (sig - target, self.dsigma_ds_at(t, &tv))
                }
                Err(e) => {
                    failure = Some(e);
                    (f64::NAN, f64::NAN)
                }
            },
            theta,
            hi,
            guess,
            ROOT_RTOL,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        root
    }

    /// Integrates the characteristic system with classical RK4.
    ///
    /// Uses a fixed step `dt` while `Σ` is large compared with the step; near
    /// the axis the step shrinks with `Σ` so the `1/Σ` factor stays resolved,
    /// and the hitting time is closed off by a Taylor extrapolation once `Σ`
    /// is below `1e-10 · s`.
    pub fn integrate_oracle(&self, s: f64, dt: f64) -> Result<CharacteristicPath> {
        if !(s > 0.0) || !(dt > 0.0) {
            return Err(CoreError::Domain(format!("oracle needs s > 0 and dt > 0, got ({s}, {dt})")));
        }
        let k = self.k;
        let l0 = self.transform(s)?.l0;
        let rhs = |sig: f64, ell: f64| (ell - 1.0 - k, k * (1.0 - ell) / sig);
        let rk4 = |sig: f64, ell: f64, h: f64| {
            let (a1, b1) = rhs(sig, ell);
            let (a2, b2) = rhs(sig + 0.5 * h * a1, ell + 0.5 * h * b1);
            let (a3, b3) = rhs(sig + 0.5 * h * a2, ell + 0.5 * h * b2);
            let (a4, b4) = rhs(sig + h * a3, ell + h * b3);
            (
                sig + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
                ell + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
            )
        };

        let mut samples = vec![PathSample { t: 0.0, sigma: s, ell: l0 }];
        let (mut t, mut sig, mut ell) = (0.0, s, l0);
        let stop = 1e-10 * s;
        while sig > stop {
            // shrink once one step could move Σ by more than an eighth of itself
            let h = if sig > 8.0 * (1.0 + k) * dt { dt } else { sig / (8.0 * (1.0 + k)) };
            let (ns, nl) = rk4(sig, ell, h);
            t += h;
            if !(ns < sig) || !(ns > 0.0) || !(nl > ell) || !(0.0..1.0).contains(&nl) {
                return Err(CoreError::OracleInconsistency {
                    t,
                    reason: format!("step from (Σ={sig}, ℓ={ell}) produced (Σ={ns}, ℓ={nl})"),
                });
            }
            sig = ns;
            ell = nl;
            samples.push(PathSample { t, sigma: sig, ell });
        }
        // Σ(t+τ) ≈ Σ + Σ' τ + Σ'' τ²/2 with Σ'' = dℓ/dt
        let d1 = ell - 1.0 - k;
        let d2 = k * (1.0 - ell) / sig;
        let mut tau = -sig / d1;
        for _ in 0..3 {
            tau = -sig / (d1 + 0.5 * d2 * tau);
        }
        let t_hit = t + tau;
        samples.push(PathSample { t: t_hit, sigma: 0.0, ell: 1.0 });
        Ok(CharacteristicPath { s0: s, k, samples, t_hit })
    }

    /// Default oracle step `min(1e-4, T_guess / 1e4)` with the lower bound
    /// `s / (1 + k)` of the hitting time as guess.
    pub fn default_oracle_step(&self, s: f64) -> f64 {
        (s / (1.0 + self.k) / 1e4).min(1e-4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(k: f64) -> Characteristics {
        Characteristics::new(MeasureSpec::monodisperse(), k).unwrap()
    }

    #[test]
    fn closed_forms_at_origin_and_axis() {
        let c = mono(1.0);
        for &s in &[0.1f64, 1.0, 5.0] {
            let l0 = (-s).exp();
            assert!((c.ell_closed(0.0, s).unwrap() - l0).abs() < 1e-15);
            assert!((c.sigma_closed(0.0, s).unwrap() - s).abs() < 1e-15);
            let hit = c.time_to_axis(s).unwrap();
            assert_eq!(c.ell_closed(hit, s).unwrap(), 1.0);
            assert!(c.sigma_closed(hit * (1.0 - 1e-9), s).unwrap() < 1e-8 * s);
            assert!(matches!(c.ell_closed(hit * 1.01, s), Err(CoreError::PastSingularity { .. })));
        }
    }

    #[test]
    fn hitting_time_reference_value() {
        // T(1) = (1/(1-e^{-1})) (1 - e^{e^{-1}-1}) for δ_1, k = 1
        let e1 = (-1.0f64).exp();
        let expected = (1.0 - (e1 - 1.0).exp()) / (1.0 - e1);
        let hit = mono(1.0).time_to_axis(1.0).unwrap();
        assert!((hit - expected).abs() < 1e-15);
        assert!((hit - 0.7412).abs() < 1e-4);
    }

    #[test]
    fn hit_slope_matches_difference_quotient() {
        for m in [MeasureSpec::monodisperse(), MeasureSpec::exponential(2.0).unwrap()] {
            let c = Characteristics::new(m, 0.7).unwrap();
            for &s in &[0.01, 0.8, 30.0] {
                let h = 1e-5 * s;
                let fd = (c.time_to_axis(s + h).unwrap() - c.time_to_axis(s - h).unwrap()) / (2.0 * h);
                let tv = c.transform(s).unwrap();
                let an = c.hit_slope_from(&tv, c.hit_from(&tv));
                assert!(((fd - an) / an).abs() < 1e-7, "s={s}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn ell_reference_value() {
        let e1 = (-1.0f64).exp();
        let expected = e1 - (1.0 + 0.5 * (e1 - 1.0)).ln();
        let v = mono(1.0).ell_closed(0.5, 1.0).unwrap();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.747_765).abs() < 1e-6);
    }

    #[test]
    fn hitting_time_identity_holds() {
        for &k in &[0.25, 1.0, 4.0] {
            let c = mono(k);
            for &s in &[1e-3, 0.2, 3.0, 40.0] {
                let tv = MeasureSpec::monodisperse().eval_transform(s).unwrap();
                let hit = c.time_to_axis(s).unwrap();
                let resid = tv.one_minus_l0() + k * (hit * tv.l1).ln_1p();
                assert!(resid.abs() < 1e-12, "k={k} s={s} resid={resid}");
                assert!(hit < s / tv.one_minus_l0());
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        let c = mono(1.0);
        let t = c.time_to_axis(1.0).unwrap();
        assert!((c.t_inverse(t).unwrap() - 1.0).abs() < 1e-10);
        let small = c.t_inverse(1e-6).unwrap();
        assert!((small / 1e-6 - 1.0).abs() < 0.01);
        let big = c.t_inverse(1e6).unwrap();
        assert!((big * (1.0 - (-1.0f64).exp()) / 1e6 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zeta_round_trip_and_edges() {
        let c = mono(1.0);
        let t = 0.7;
        let theta = c.t_inverse(t).unwrap();
        assert_eq!(c.zeta(t, 0.0).unwrap(), theta);
        for &s in &[theta * 1.001, theta + 0.5, 3.0, 50.0] {
            let sig = c.sigma_closed(t, s).unwrap();
            let back = c.zeta(t, sig).unwrap();
            assert!((back - s).abs() < 1e-10 * s.max(1.0), "s={s} back={back}");
        }
        let big = 1e7;
        assert!((c.zeta(t, big).unwrap() / big - 1.0).abs() < 1e-6);
        assert!(c.zeta(t, -1.0).is_err());
    }

    #[test]
    fn dsigma_ds_matches_finite_difference() {
        let c = mono(1.0);
        let (t, s, h) = (0.3, 2.0, 1e-5);
        let fd = (c.sigma_closed(t, s + h).unwrap() - c.sigma_closed(t, s - h).unwrap()) / (2.0 * h);
        let an = c.dsigma_ds(t, s).unwrap();
        assert!(((fd - an) / an).abs() < 1e-6);
        assert!((c.dsigma_ds(1e-12, s).unwrap() - 1.0).abs() < 1e-9);
        // below T^-1(t) is outside the domain
        let theta = c.t_inverse(t).unwrap();
        assert!(c.dsigma_ds(t, 0.5 * theta).is_err());
    }

    #[test]
    fn oracle_matches_closed_form() {
        let c = mono(1.0);
        let path = c.integrate_oracle(1.0, 1e-4).unwrap();
        let hit = c.time_to_axis(1.0).unwrap();
        assert!(((path.t_hit - hit) / hit).abs() < 1e-8, "{} vs {}", path.t_hit, hit);
        let inv0 = path.invariant(&path.samples[0]);
        for smp in path.samples.iter().step_by(97) {
            if smp.sigma == 0.0 {
                continue;
            }
            let ell = c.ell_closed(smp.t, 1.0).unwrap();
            assert!((smp.ell - ell).abs() < 1e-8 * ell, "t={}", smp.t);
            assert!((path.invariant(smp) - inv0).abs() < 1e-8);
        }
    }

    #[test]
    fn small_s_oracle_hits_near_s_over_k() {
        let c = mono(2.0);
        let s = 0.1;
        let path = c.integrate_oracle(s, c.default_oracle_step(s)).unwrap();
        // T(s) ~ s/k with a correction of order s
        assert!((path.t_hit * 2.0 / s - 1.0).abs() < 0.1);
        assert!(((path.t_hit - c.time_to_axis(s).unwrap()) / path.t_hit).abs() < 1e-8);
    }
}
