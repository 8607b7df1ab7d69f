//! Elementary special functions used by the transform families.
//!
//! Everything here is evaluated in a cancellation-free form, since the
//! characteristic formulas divide by `s` and by `L1(s)` repeatedly.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `(1 - e^{-u}) / u`, equal to 1 at `u = 0`.
pub fn psi(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        -(-u).exp_m1() / u
    }
}

/// `(1 - e^{-u} - u e^{-u}) / u^2`, equal to 1/2 at `u = 0`.
pub fn phi(u: f64) -> f64 {
    if u.abs() < 1.0 {
        // sum_{n>=2} (-1)^n (n-1) u^{n-2} / n!
        let mut term = 1.0; // u^{n-2} / n! * 2 for n = 2 folded below
        let mut sum = 0.0;
        let mut fact = 2.0;
        for n in 2..30u32 {
            if n > 2 {
                term *= u;
                fact *= f64::from(n);
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * f64::from(n - 1) * term / fact;
            sum += c;
            if c.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (1.0 - (-u).exp() * (1.0 + u)) / (u * u)
    }
}

/// `ln(1 + x) - x`, accurate for small `|x|`.
pub fn log1p_minus_x(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut pow = x * x;
        let mut sum = 0.0;
        for n in 2..40u32 {
            let c = pow / f64::from(n);
            sum += if n % 2 == 0 { -c } else { c };
            if c.abs() < 1e-18 * sum.abs() {
                break;
            }
            pow *= x;
        }
        sum
    } else {
        x.ln_1p() - x
    }
}

/// Generalised exponential integral `E_n(z) = ∫_1^∞ e^{-zu} u^{-n} du` for
/// integer `n >= 0` and `z > 0`.
pub fn expint_n(n: u32, z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if n == 0 {
        return (-z).exp() / z;
    }
    const EPS: f64 = 1e-17;
    const MAXIT: u32 = 500;
    let nm1 = n - 1;
    if z > 1.0 {
        // modified Lentz on the continued fraction
        let tiny = 1e-300;
        let mut b = z + f64::from(n);
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAXIT {
            let a = -f64::from(i) * (f64::from(nm1) + f64::from(i));
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h * (-z).exp()
    } else {
        let mut ans = if nm1 != 0 {
            1.0 / f64::from(nm1)
        } else {
            -z.ln() - EULER_GAMMA
        };
        let mut fact = 1.0;
        for i in 1..=MAXIT {
            fact *= -z / f64::from(i);
            let del = if i != nm1 {
                -fact / (f64::from(i) - f64::from(nm1))
            } else {
                let digamma = -EULER_GAMMA + (1..=nm1).map(|j| 1.0 / f64::from(j)).sum::<f64>();
                fact * (-z.ln() + digamma)
            };
            ans += del;
            if del.abs() < ans.abs() * EPS {
                break;
            }
        }
        ans
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_match_direct_formulas_away_from_zero() {
        for &u in &[0.5, 1.0, 3.0, 20.0] {
            assert!((psi(u) - (1.0 - (-u).exp()) / u).abs() < 1e-15);
            let direct = (1.0 - (-u).exp() - u * (-u).exp()) / (u * u);
            assert!((phi(u) - direct).abs() < 1e-14, "u={u}");
        }
        // series branch near the switch point
        let u: f64 = 0.999;
        let direct = (1.0 - (-u).exp() - u * (-u).exp()) / (u * u);
        assert!((phi(u) - direct).abs() < 1e-14);
        assert_eq!(phi(0.0), 0.5);
        assert!((phi(1e-9) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn log1p_minus_x_is_continuous_at_switch() {
        let a = log1p_minus_x(0.099_999_999);
        let b = log1p_minus_x(0.100_000_001);
        assert!((a - b).abs() < 1e-9);
        assert!((log1p_minus_x(1e-8) + 0.5e-16).abs() < 1e-24);
    }

    #[test]
    fn expint_reference_values() {
        // E1(1) = 0.21938393439552027
        assert!((expint_n(1, 1.0) - 0.219_383_934_395_520_27).abs() < 1e-15);
        // E1(0.1) = 1.8229239584193906
        assert!((expint_n(1, 0.1) - 1.822_923_958_419_390_6).abs() < 1e-14);
        // E2(2) = 0.03753426182049045
        assert!((expint_n(2, 2.0) - 0.037_534_261_820_490_45).abs() < 1e-16);
        // recurrence n E_{n+1}(z) = e^{-z} - z E_n(z)
        for &z in &[0.05, 0.7, 1.3, 9.0] {
            for n in 1..5 {
                let lhs = f64::from(n) * expint_n(n + 1, z);
                let rhs = (-z).exp() - z * expint_n(n, z);
                assert!((lhs - rhs).abs() < 1e-14, "n={n} z={z}");
            }
        }
    }
}
