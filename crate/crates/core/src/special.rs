//! Gamma-family special functions and the normalized Bessel function.

/// Γ(x) for x > 0.
#[inline]
pub fn gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "gamma requires a positive argument, got {x}");
    libm::tgamma(x)
}

/// ln Γ(x) for x > 0.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    libm::lgamma(x)
}

/// Euler Beta function B(a, b) for a, b > 0, evaluated in log space.
#[inline]
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Normalized Bessel function
///
/// ```text
/// j_λ(z) = Γ(λ+1) Σ_{n≥0} (−1)^n z^{2n} / (2^{2n} n! Γ(n+λ+1)),
/// ```
///
/// summed by term recurrence until the relative term drops below 1e−16.
/// `j_λ(0) = 1` and `j_{1/2}(z) = sin z / z`.
pub fn bessel_j(lambda: f64, z: f64) -> f64 {
    debug_assert!(lambda > -1.0);
    let q = -0.25 * z * z;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for n in 1..200 {
        let n = n as f64;
        term *= q / (n * (n + lambda));
        sum += term;
        if term.abs() <= 1e-16 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Regularized lower incomplete gamma P(a, z) = γ(a, z)/Γ(a) by the
/// Kummer series z^a e^{−z} Σ_{n≥0} z^n / (a(a+1)⋯(a+n)), reliable for
/// z ≲ a + 1 (the only regime used here).
pub fn lower_gamma_reg(a: f64, z: f64) -> f64 {
    debug_assert!(a > 0.0 && z >= 0.0);
    if z == 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    for n in 1..500 {
        term *= z / (a + n as f64);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum * (a * z.ln() - z - ln_gamma(a)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gamma_matches_factorials_and_half_integers() {
        assert_abs_diff_eq!(gamma(1.0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gamma(5.0), 24.0, epsilon = 1e-12);
        // Γ(1/2) = √π, Γ(3/2) = √π/2.
        assert_abs_diff_eq!(gamma(0.5), std::f64::consts::PI.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            gamma(1.5),
            0.5 * std::f64::consts::PI.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn beta_matches_gamma_ratio() {
        assert_abs_diff_eq!(beta(2.0, 3.0), 1.0 / 12.0, epsilon = 1e-14);
        assert_abs_diff_eq!(beta(0.5, 0.5), std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn bessel_half_is_sinc() {
        for &z in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            assert_abs_diff_eq!(bessel_j(0.5, z), z.sin() / z, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(bessel_j(0.5, 1.0), 0.8414709848078965, epsilon = 1e-13);
    }

    #[test]
    fn bessel_at_zero_is_one() {
        for &l in &[0.1, 0.5, 1.0, 2.3] {
            assert_eq!(bessel_j(l, 0.0), 1.0);
        }
    }

    #[test]
    fn bessel_bounded_by_one_on_reals() {
        for &l in &[0.3, 0.5, 1.0, 1.8, 3.0] {
            for i in 0..200 {
                let z = 0.1 * i as f64;
                assert!(bessel_j(l, z).abs() <= 1.0 + 1e-12, "λ={l}, z={z}");
            }
        }
    }

    #[test]
    fn bessel_even_in_z() {
        for &l in &[0.5, 1.2] {
            for &z in &[0.3, 1.7, 4.0] {
                assert_eq!(bessel_j(l, z), bessel_j(l, -z));
            }
        }
    }

    #[test]
    fn lower_gamma_matches_closed_forms() {
        // P(1, z) = 1 − e^{−z}; P(1/2, z) = erf(√z).
        for &z in &[0.0, 0.05, 0.4, 1.3] {
            assert_abs_diff_eq!(lower_gamma_reg(1.0, z), 1.0 - (-z).exp(), epsilon = 1e-14);
            assert_abs_diff_eq!(
                lower_gamma_reg(0.5, z),
                libm::erf(z.sqrt()),
                epsilon = 1e-14
            );
        }
    }
}
