//! Initial probability measures on `(0, ∞)` and their Laplace transforms.
//!
//! Every family exposes the same four quantities at a point `s > 0`:
//!
//! * `L0(s)  = ∫ e^{-sx} ν(dx)`
//! * `L0'(s) = -∫ x e^{-sx} ν(dx)`
//! * `L1(s)  = (L0(s) - 1) / s`
//! * `L1'(s) = (s L0'(s) + 1 - L0(s)) / s^2`
//!
//! `L1` and `L1'` are never formed by subtracting from one when that loses
//! digits: atomic and closed-form families use the kernels `x·psi(sx)` and
//! `x^2·phi(sx)` directly, generic densities switch to them below
//! [`SMALL_S`].

use std::fmt;
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::quad;
use crate::special::{expint_n, phi, psi};

/// Below this `s`, generic densities evaluate `L1` and `L1'` by quadrature of
/// the cancellation-free kernels instead of differencing `L0`.
pub const SMALL_S: f64 = 1e-4;

/// Tolerance on `|total mass - 1|` accepted at construction.
pub const MASS_TOL: f64 = 1e-12;

const GENERIC_ABS_TOL: f64 = 1e-12;
const TAIL_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Atomic,
    Exponential,
    PowerTail,
    Generic,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Atomic => "atomic",
            Family::Exponential => "exponential",
            Family::PowerTail => "power-tail",
            Family::Generic => "generic",
        };
        f.write_str(name)
    }
}

/// A point mass `weight · δ_mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub mass: f64,
    pub weight: f64,
}

type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied density on `[lower, upper)`, normalised at construction.
#[derive(Clone)]
pub struct GenericDensity {
    label: String,
    density: Arc<DensityFn>,
    scale: f64,
    lower: f64,
    /// Point beyond which the density alone is below the tail cutoff.
    tail: f64,
}

impl GenericDensity {
    fn eval(&self, x: f64) -> f64 {
        self.scale * (self.density)(x)
    }

    fn upper_for(&self, s: f64) -> f64 {
        if s > 0.0 {
            // e^{-sx} < 1e-16 · e^{-sx_lower} past lower + 37/s
            self.tail.min(self.lower + 37.0 / s)
        } else {
            self.tail
        }
    }

    fn integrate<F: Fn(f64) -> f64>(&self, s: f64, kernel: F) -> Result<f64> {
        let hi = self.upper_for(s);
        quad::integrate(|x| kernel(x) * self.eval(x), self.lower, hi, GENERIC_ABS_TOL, 1e-13)
    }
}

impl fmt::Debug for GenericDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericDensity")
            .field("label", &self.label)
            .field("lower", &self.lower)
            .field("tail", &self.tail)
            .finish()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Atomic(Vec<Atom>),
    Exponential { rate: f64 },
    /// density `(n-1) c^{n-1} x^{-n}` on `(c, ∞)`
    PowerTail { exponent: u32, cut: f64 },
    Generic(GenericDensity),
}

/// An admissible initial condition: a probability measure on `(0, ∞)`.
///
/// Immutable after construction and cheap to clone.
#[derive(Debug, Clone)]
pub struct MeasureSpec {
    kind: Kind,
}

/// `L0`, `L0'`, `L1`, `L1'` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformValue {
    pub s: f64,
    pub l0: f64,
    pub l0_prime: f64,
    pub l1: f64,
    pub l1_prime: f64,
}

impl TransformValue {
    /// `1 - L0(s)` computed as `-s L1(s)`.
    pub fn one_minus_l0(&self) -> f64 {
        -self.s * self.l1
    }
}

impl MeasureSpec {
    /// The unit point mass `δ_1`.
    pub fn monodisperse() -> Self {
        MeasureSpec { kind: Kind::Atomic(vec![Atom { mass: 1.0, weight: 1.0 }]) }
    }

    /// Finite sum of point masses given as `(mass, weight)` pairs.
    pub fn atomic(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(CoreError::Measure("atomic measure needs at least one atom".into()));
        }
        let mut out = Vec::with_capacity(atoms.len());
        for &(mass, weight) in atoms {
            if !(mass > 0.0 && mass.is_finite()) || !(weight > 0.0 && weight.is_finite()) {
                return Err(CoreError::Measure(format!(
                    "atom ({mass}, {weight}) must have positive finite mass and weight"
                )));
            }
            out.push(Atom { mass, weight });
        }
        let total: f64 = out.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(CoreError::Measure(format!("atom weights sum to {total}, expected 1")));
        }
        Ok(MeasureSpec { kind: Kind::Atomic(out) })
    }

    /// Density `rate · e^{-rate·x}`.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(CoreError::Measure(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(MeasureSpec { kind: Kind::Exponential { rate } })
    }

    /// Density `(n-1) c^{n-1} x^{-n}` on `(c, ∞)` for an integer exponent
    /// `n >= 2`. With `n = 2` the first moment is infinite.
    pub fn power_tail(exponent: u32, cut: f64) -> Result<Self> {
        if exponent < 2 {
            return Err(CoreError::Measure(format!("power-tail exponent must be >= 2, got {exponent}")));
        }
        if !(cut > 0.0 && cut.is_finite()) {
            return Err(CoreError::Measure(format!("power-tail cut must be positive, got {cut}")));
        }
        Ok(MeasureSpec { kind: Kind::PowerTail { exponent, cut } })
    }

    /// A density on `[lower, ∞)` evaluated by adaptive quadrature. The
    /// density must decay at infinity; it is rescaled to unit mass.
    pub fn generic<F>(label: &str, lower: f64, density: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lower >= 0.0 && lower.is_finite()) {
            return Err(CoreError::Measure(format!("generic lower bound must be >= 0, got {lower}")));
        }
        let density: Arc<DensityFn> = Arc::new(density);
        let mut tail = (2.0 * lower).max(1.0);
        while tail < 1e300 {
            let v = density(tail) * tail.max(1.0);
            if !v.is_finite() || v < 0.0 {
                return Err(CoreError::Measure(format!("density of '{label}' invalid at x = {tail}")));
            }
            if v < TAIL_CUTOFF && density(2.0 * tail) * 2.0 * tail < TAIL_CUTOFF {
                break;
            }
            tail *= 2.0;
        }
        if tail >= 1e300 {
            return Err(CoreError::Measure(format!("density of '{label}' does not decay")));
        }
        let mut g = GenericDensity { label: label.to_string(), density, scale: 1.0, lower, tail };
        let mass = g.integrate(0.0, |_| 1.0)?;
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(CoreError::Measure(format!("density of '{label}' has total mass {mass}")));
        }
        g.scale = 1.0 / mass;
        Ok(MeasureSpec { kind: Kind::Generic(g) })
    }

    /// Gamma density `rate^a x^{a-1} e^{-rate x} / Γ(a)`, routed through the
    /// generic quadrature path.
    pub fn generic_gamma(shape: f64, rate: f64) -> Result<Self> {
        if !(shape >= 1.0 && rate > 0.0) {
            return Err(CoreError::Measure(format!("gamma needs shape >= 1 and rate > 0, got ({shape}, {rate})")));
        }
        MeasureSpec::generic(&format!("gamma({shape},{rate})"), 0.0, move |x| {
            (x * rate).powf(shape - 1.0) * (-rate * x).exp()
        })
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Atomic(_) => Family::Atomic,
            Kind::Exponential { .. } => Family::Exponential,
            Kind::PowerTail { .. } => Family::PowerTail,
            Kind::Generic(_) => Family::Generic,
        }
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.kind {
            Kind::Atomic(a) => Some(a),
            _ => None,
        }
    }

    /// Short human-readable description used in reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            Kind::Atomic(a) if a.len() == 1 => format!("atomic(delta_{})", a[0].mass),
            Kind::Atomic(a) => format!("atomic({} atoms)", a.len()),
            Kind::Exponential { rate } => format!("exponential({rate})"),
            Kind::PowerTail { exponent, cut } => format!("power-tail(x^-{exponent} on ({cut},inf))"),
            Kind::Generic(g) => format!("generic({})", g.label),
        }
    }

    /// Whether `∫ x ν(dx)` is finite.
    pub fn has_finite_first_moment(&self) -> bool {
        !matches!(self.kind, Kind::PowerTail { exponent: 2, .. })
    }

    /// Total mass `∫ ν(dx)`.
    pub fn total_mass(&self) -> Result<f64> {
        match &self.kind {
            Kind::Atomic(a) => Ok(a.iter().map(|a| a.weight).sum()),
            Kind::Exponential { .. } | Kind::PowerTail { .. } => Ok(1.0),
            Kind::Generic(g) => g.integrate(0.0, |_| 1.0),
        }
    }

    /// Evaluates the transform family at `s > 0`.
    pub fn eval_transform(&self, s: f64) -> Result<TransformValue> {
        if !(s > 0.0) || s.is_nan() {
            return Err(CoreError::Domain(format!("transform needs s > 0, got {s}")));
        }
        let tv = match &self.kind {
            Kind::Atomic(atoms) => {
                let (mut l0, mut d0, mut l1, mut d1) = (0.0, 0.0, 0.0, 0.0);
                for a in atoms {
                    let u = s * a.mass;
                    let e = (-u).exp();
                    l0 += a.weight * e;
                    d0 -= a.weight * a.mass * e;
                    l1 -= a.weight * a.mass * psi(u);
                    d1 += a.weight * a.mass * a.mass * phi(u);
                }
                TransformValue { s, l0, l0_prime: d0, l1, l1_prime: d1 }
            }
            Kind::Exponential { rate } => {
                let r = rate + s;
                TransformValue { s, l0: rate / r, l0_prime: -rate / (r * r), l1: -1.0 / r, l1_prime: 1.0 / (r * r) }
            }
            Kind::PowerTail { exponent: n, cut: c } => {
                let n = *n;
                let z = c * s;
                let l0 = f64::from(n - 1) * expint_n(n, z);
                let e_nm1 = expint_n(n - 1, z);
                TransformValue {
                    s,
                    l0,
                    l0_prime: -c * f64::from(n - 1) * e_nm1,
                    l1: -c * (psi(z) + e_nm1),
                    l1_prime: c * c * (phi(z) + expint_n(n - 2, z)),
                }
            }
            Kind::Generic(g) => {
                let l0 = g.integrate(s, |x| (-s * x).exp())?;
                let d0 = -g.integrate(s, |x| x * (-s * x).exp())?;
                let (l1, d1) = if s < SMALL_S {
                    let l1 = -g.integrate(0.0, |x| x * psi(s * x))?;
                    let d1 = g.integrate(0.0, |x| x * x * phi(s * x))?;
                    (l1, d1)
                } else {
                    ((l0 - 1.0) / s, (s * d0 + 1.0 - l0) / (s * s))
                };
                TransformValue { s, l0, l0_prime: d0, l1, l1_prime: d1 }
            }
        };
        if !(tv.l0.is_finite() && tv.l0_prime.is_finite() && tv.l1.is_finite() && tv.l1_prime.is_finite()) {
            return Err(CoreError::Measure(format!("non-finite transform at s = {s}: {tv:?}")));
        }
        Ok(tv)
    }

    /// Draws one sample by inverse CDF. Atomic measures are handled by the
    /// particle initialiser with proportional allocation instead.
    pub(crate) fn sample_continuous(&self, u: f64) -> Result<f64> {
        match &self.kind {
            Kind::Exponential { rate } => Ok(-(1.0 - u).ln() / rate),
            Kind::PowerTail { exponent, cut } => Ok(cut * (1.0 - u).powf(-1.0 / f64::from(exponent - 1))),
            Kind::Atomic(_) => Err(CoreError::Measure("atomic measures are allocated, not sampled".into())),
            Kind::Generic(g) => Err(CoreError::Measure(format!(
                "sampling is not supported for generic density '{}'",
                g.label
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn families() -> Vec<MeasureSpec> {
        vec![
            MeasureSpec::monodisperse(),
            MeasureSpec::atomic(&[(0.5, 0.5), (2.0, 0.5)]).unwrap(),
            MeasureSpec::exponential(1.0).unwrap(),
            MeasureSpec::power_tail(2, 1.0).unwrap(),
            MeasureSpec::power_tail(3, 0.5).unwrap(),
            MeasureSpec::generic_gamma(2.0, 2.0).unwrap(),
        ]
    }

    #[test]
    fn total_mass_examples() {
        assert_eq!(MeasureSpec::monodisperse().total_mass().unwrap(), 1.0);
        let m = MeasureSpec::atomic(&[(0.5, 0.5), (2.0, 0.5)]).unwrap();
        assert_eq!(m.total_mass().unwrap(), 1.0);
        let m = MeasureSpec::power_tail(2, 1.0).unwrap();
        assert_eq!(m.total_mass().unwrap(), 1.0);
        // x^-2 on (1, ∞) through the generic path: mass is analytic 1 before normalisation
        let g = MeasureSpec::generic("x^-2", 1.0, |x| if x > 1.0 { x.powi(-2) } else { 0.0 });
        // tail decays too slowly for a 1e-16 cutoff within range; rejected or normalised
        if let Ok(g) = g {
            assert!((g.total_mass().unwrap() - 1.0).abs() < 1e-10);
        }
        for m in families() {
            assert!((m.total_mass().unwrap() - 1.0).abs() <= MASS_TOL, "{}", m.describe());
        }
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(MeasureSpec::atomic(&[]).is_err());
        assert!(MeasureSpec::atomic(&[(1.0, 0.5)]).is_err());
        assert!(MeasureSpec::atomic(&[(-1.0, 1.0)]).is_err());
        assert!(MeasureSpec::atomic(&[(1.0, 0.0), (2.0, 1.0)]).is_err());
        assert!(MeasureSpec::exponential(0.0).is_err());
        assert!(MeasureSpec::power_tail(1, 1.0).is_err());
        assert!(MeasureSpec::generic("grow", 0.0, |x| x).is_err());
    }

    #[test]
    fn transform_examples() {
        let tv = MeasureSpec::monodisperse().eval_transform(1.0).unwrap();
        assert!((tv.l0 - (-1.0f64).exp()).abs() < 1e-16);
        let tv = MeasureSpec::monodisperse().eval_transform(1e-12).unwrap();
        assert!((tv.l1 + 1.0).abs() < 1e-12);
        let tv = MeasureSpec::exponential(1.0).unwrap().eval_transform(1.0).unwrap();
        assert_eq!(tv.l0, 0.5);
        // e^{-1} - E1(1), oracle value from independent quadrature
        let tv = MeasureSpec::power_tail(2, 1.0).unwrap().eval_transform(1.0).unwrap();
        let oracle = 1.0 / E - 0.219_383_934_395_520_27;
        assert!((tv.l0 - oracle).abs() < 1e-15);
        assert!((tv.l0 - 0.148_495_5).abs() < 1e-7);
    }

    #[test]
    fn power_tail_against_quadrature_oracle() {
        // ∫_1^∞ e^{-x} x^{-2} dx by quadrature after substituting x = 1/u
        let q = crate::quad::integrate(|u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 }, 0.0, 1.0, 1e-15, 1e-15)
            .unwrap();
        let tv = MeasureSpec::power_tail(2, 1.0).unwrap().eval_transform(1.0).unwrap();
        assert!((tv.l0 - q).abs() < 1e-13, "{} vs {}", tv.l0, q);
    }

    #[test]
    fn generic_gamma_matches_closed_form() {
        // Gamma(2, 2): L0 = (2/(2+s))^2
        let m = MeasureSpec::generic_gamma(2.0, 2.0).unwrap();
        for &s in &[1e-6, 1e-3, 0.3, 1.0, 7.0, 100.0] {
            let tv = m.eval_transform(s).unwrap();
            let r = 2.0 / (2.0 + s);
            assert!((tv.l0 - r * r).abs() < 1e-12, "s={s}");
            assert!((tv.l0_prime + r * r * r).abs() < 1e-11, "s={s}");
            // L1 = (r^2 - 1)/s = -(4 + s)/(2+s)^2
            let l1 = -(4.0 + s) / ((2.0 + s) * (2.0 + s));
            assert!((tv.l1 - l1).abs() < 1e-8, "s={s}: {} vs {l1}", tv.l1);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        // at s = 0.5 the truncation error dominates round-off for both steps
        for m in families() {
            let s = 0.5;
            let tv = m.eval_transform(s).unwrap();
            let mut errs = vec![];
            for &h in &[1e-4, 1e-5] {
                let fd = (m.eval_transform(s + h).unwrap().l0 - m.eval_transform(s - h).unwrap().l0) / (2.0 * h);
                errs.push((fd - tv.l0_prime).abs());
            }
            if m.family() == Family::Generic {
                // quadrature noise floor; only check agreement
                assert!(errs[1] < 1e-6, "{}", m.describe());
                continue;
            }
            let order = (errs[0] / errs[1]).log10();
            assert!(errs[0] < 1e-7, "{}: {errs:?}", m.describe());
            assert!(order >= 1.8, "{}: order {order} {errs:?}", m.describe());
        }
    }

    #[test]
    fn small_s_l1_matches_large_s_formula_at_switch() {
        let m = MeasureSpec::generic_gamma(2.0, 2.0).unwrap();
        let a = m.eval_transform(SMALL_S * (1.0 - 1e-9)).unwrap();
        let b = m.eval_transform(SMALL_S * (1.0 + 1e-9)).unwrap();
        assert!((a.l1 - b.l1).abs() < 1e-8);
        assert!((a.l1_prime - b.l1_prime).abs() < 1e-3);
    }

    #[test]
    fn domain_error_for_nonpositive_s() {
        let m = MeasureSpec::monodisperse();
        assert!(matches!(m.eval_transform(0.0), Err(CoreError::Domain(_))));
        assert!(matches!(m.eval_transform(-1.0), Err(CoreError::Domain(_))));
    }
}
