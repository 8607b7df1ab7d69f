//! The exact solution `L(t, s) = ℓ(t, ζ(t, s))` of the Laplace-space
//! equation
//!
//! ```text
//! ∂_t L = (1 + k - L) ∂_s L + k (1 - L) / s,     L(0, s) = L0(s).
//! ```

use crate::characteristics::Characteristics;
use crate::error::{CoreError, Result};
use crate::measure::MeasureSpec;
use crate::roots::ROOT_RTOL;

/// Assembled exact solution for one initial measure and one `k`.
#[derive(Debug, Clone)]
pub struct LaplaceEvaluator {
    chars: Characteristics,
    root_tol: f64,
    residual_step: Option<f64>,
}

/// `L(t, ·)` at a fixed time, holding `T^{-1}(t)` so that scanning an
/// `s`-grid costs one root find per point.
#[derive(Debug, Clone)]
pub struct TimeSlice<'a> {
    ev: &'a LaplaceEvaluator,
    t: f64,
    theta: f64,
}

impl LaplaceEvaluator {
    pub fn new(measure: MeasureSpec, k: f64) -> Result<Self> {
        Ok(LaplaceEvaluator { chars: Characteristics::new(measure, k)?, root_tol: ROOT_RTOL, residual_step: None })
    }

    /// Overrides the PDE-residual step; the default is `1e-4 · max(1, s, t)`.
    pub fn with_residual_step(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(CoreError::Domain(format!("residual step must be positive, got {h}")));
        }
        self.residual_step = Some(h);
        Ok(self)
    }

    pub fn root_tol(&self) -> f64 {
        self.root_tol
    }

    pub fn k(&self) -> f64 {
        self.chars.k()
    }

    pub fn measure(&self) -> &MeasureSpec {
        self.chars.measure()
    }

    pub fn characteristics(&self) -> &Characteristics {
        &self.chars
    }

    pub fn at_time(&self, t: f64) -> Result<TimeSlice<'_>> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CoreError::Domain(format!("L(t, s) needs t > 0, got {t}")));
        }
        Ok(TimeSlice { ev: self, t, theta: self.chars.t_inverse(t)? })
    }

    /// `L(t, s)` for `t > 0`, `s >= 0`.
    pub fn l(&self, t: f64, s: f64) -> Result<f64> {
        self.at_time(t)?.l(s)
    }

    /// `∂_s L(t, 0) = L1(θ) / (1 + t L1(θ))` with `θ = T^{-1}(t)`; equals
    /// minus the first moment of `ν(t)`.
    pub fn dl_ds_at_zero(&self, t: f64) -> Result<f64> {
        self.at_time(t)?.dl_ds_at_zero()
    }

    pub fn default_residual_step(&self, t: f64, s: f64) -> f64 {
        self.residual_step.unwrap_or(1e-4 * t.max(s).max(1.0))
    }

    /// `|∂_t L - (1 + k - L) ∂_s L - k (1 - L)/s|` with central differences
    /// of step `h` in both variables.
    pub fn pde_residual(&self, t: f64, s: f64, h: f64) -> Result<f64> {
        if !(t > h && s > h && h > 0.0) {
            return Err(CoreError::Domain(format!("residual needs t > h, s > h > 0; got t={t}, s={s}, h={h}")));
        }
        let k = self.k();
        let here = self.at_time(t)?;
        let l = here.l(s)?;
        let ds = (here.l(s + h)? - here.l(s - h)?) / (2.0 * h);
        let dt = (self.l(t + h, s)? - self.l(t - h, s)?) / (2.0 * h);
        Ok((dt - (1.0 + k - l) * ds - k * (1.0 - l) / s).abs())
    }
}

impl TimeSlice<'_> {
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `T^{-1}(t)`, equal to `ζ(t, 0)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `L(t, 0)` from the identity at `s = T^{-1}(t)`.
    pub fn mass(&self) -> Result<f64> {
        let tv = self.ev.measure().eval_transform(self.theta)?;
        Ok(tv.l0 - self.ev.k() * (self.t * tv.l1).ln_1p())
    }

    pub fn l(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(CoreError::Domain(format!("L(t, s) needs s >= 0, got {s}")));
        }
        if s == 0.0 {
            return self.mass();
        }
        let chars = &self.ev.chars;
        let sigma = chars.zeta_from(self.t, s, self.theta)?;
        let tv = self.ev.measure().eval_transform(sigma)?;
        Ok(tv.l0 - chars.k() * (self.t * tv.l1).ln_1p())
    }

    /// `∂_s L(t, s) = ∂_s ℓ / ∂_s Σ` evaluated at `ζ(t, s)`.
    pub fn dl_ds(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return self.dl_ds_at_zero();
        }
        let chars = &self.ev.chars;
        let sigma = chars.zeta_from(self.t, s, self.theta)?;
        Ok(chars.dell_ds(self.t, sigma)? / chars.dsigma_ds(self.t, sigma)?)
    }

    pub fn dl_ds_at_zero(&self) -> Result<f64> {
        let tv = self.ev.measure().eval_transform(self.theta)?;
        Ok(tv.l1 / (1.0 + self.t * tv.l1))
    }
}

/// `e^{1/k} - 1`, the limit of `t · ∫ x ν(t, dx)` as `t → ∞`.
pub fn moment_asymptote(k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(CoreError::Domain(format!("k must be positive, got {k}")));
    }
    Ok((1.0 / k).exp_m1())
}
