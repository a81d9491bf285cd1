//! Gamma and Beta functions, the unit-ball constant `γ_k = π^{k/2} / Γ(k/2 + 1)`
//! and the ratio `γ_{N+1-s} / γ_{N-s}` that relates `s`-dimensional contents
//! of the same set in `R^N` and `R^{N+1}`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

// Lanczos approximation, g = 7, n = 9. statrs' gamma drifts past 1e-13
// relative error above x ≈ 20.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for `x > 0`.
///
/// Relative error stays below `1e-13` on `[0.5, 50]`; arguments below `1.5`
/// are shifted up with `Γ(x) = Γ(x + 1) / x`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(format!(
            "gamma_fn needs a positive finite argument, got {x}"
        )));
    }
    if x < 1.5 {
        return Ok(gamma_fn(x + 1.0)? / x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // t^(z+1/2) split in two halves so large arguments do not overflow early.
    let half = t.powf(0.5 * (z + 0.5));
    Ok((2.0 * PI).sqrt() * half * (half * (-t).exp()) * sum)
}

/// B(a, b) = Γ(a) Γ(b) / Γ(a + b).
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(Error::domain(format!(
            "beta_fn needs positive arguments, got ({a}, {b})"
        )));
    }
    Ok(gamma_fn(a)? * gamma_fn(b)? / gamma_fn(a + b)?)
}

/// `γ_k = π^{k/2} / Γ(k/2 + 1)`, the volume of the unit ball in `R^k` for
/// integer `k`.
pub fn gamma_ball(k: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::domain(format!("gamma_ball needs k >= 0, got {k}")));
    }
    Ok(PI.powf(0.5 * k) / gamma_fn(0.5 * k + 1.0)?)
}

/// The constant `γ_{N+1-s} / γ_{N-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRatio {
    pub ambient_n: usize,
    pub s: f64,
    pub value: f64,
}

pub fn gamma_ratio(ambient_n: usize, s: f64) -> Result<GammaRatio> {
    check_exponent(ambient_n, s)?;
    let n = ambient_n as f64;
    let value = gamma_ball(n + 1.0 - s)? / gamma_ball(n - s)?;
    Ok(GammaRatio {
        ambient_n,
        s,
        value,
    })
}

pub(crate) fn check_exponent(ambient_n: usize, s: f64) -> Result<()> {
    if ambient_n == 0 {
        return Err(Error::domain("ambient dimension must be at least 1"));
    }
    if !(s.is_finite() && (0.0..=ambient_n as f64).contains(&s)) {
        return Err(Error::domain(format!(
            "exponent s = {s} outside [0, {ambient_n}]"
        )));
    }
    Ok(())
}

/// Closed form of `2 ∫₀^ε (ε² - y²)^{(N-s)/2} dy` through the Beta function,
/// `B(1/2, (N-s)/2 + 1) ε^{N+1-s}`.
pub fn lift_power_closed_form(ambient_n: usize, s: f64, eps: f64) -> Result<f64> {
    check_exponent(ambient_n, s)?;
    let p = ambient_n as f64 - s;
    Ok(beta_fn(0.5, 0.5 * p + 1.0)? * eps.powf(p + 1.0))
}

/// Evaluates `2 ∫₀^ε (√(ε² - y²))^{N-s} dy` by adaptive quadrature after the
/// substitution `y = ε sin t`, with absolute error at most `tol`.
pub fn lift_power_integral(ambient_n: usize, s: f64, eps: f64, tol: f64) -> Result<f64> {
    check_exponent(ambient_n, s)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::domain(format!("tol must be positive, got {tol}")));
    }
    let p = ambient_n as f64 - s;
    let integrand = |t: f64| {
        let r = eps * t.cos();
        2.0 * r * r.powf(p)
    };
    Ok(integrate(integrand, 0.0, FRAC_PI_2, QuadOptions::absolute(tol))?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(n: u32) -> f64 {
        (1..=n).fold(1.0, |acc, k| acc * k as f64)
    }

    // Γ(n + 1/2) = (2n)! √π / (4^n n!), evaluated as a running product.
    fn gamma_half_integer(n: u32) -> f64 {
        (1..=n).fold(PI.sqrt(), |acc, k| acc * (k as f64 - 0.5))
    }

    #[test]
    fn gamma_examples() {
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            gamma_fn(0.5).unwrap(),
            1.772_453_850_905_516,
            max_relative = 1e-14
        );
        assert_relative_eq!(gamma_fn(5.0).unwrap(), 24.0, max_relative = 1e-14);
    }

    #[test]
    fn gamma_accuracy_on_grid() {
        for n in 1..=50u32 {
            let exact = factorial(n - 1);
            let got = gamma_fn(n as f64).unwrap();
            assert!(
                ((got - exact) / exact).abs() <= 1e-13,
                "Γ({n}) = {got}, want {exact}"
            );
        }
        for n in 0..=49u32 {
            let exact = gamma_half_integer(n);
            let got = gamma_fn(n as f64 + 0.5).unwrap();
            assert!(
                ((got - exact) / exact).abs() <= 1e-13,
                "Γ({n}.5) = {got}, want {exact}"
            );
        }
    }

    #[test]
    fn gamma_agrees_with_statrs() {
        let mut x = 0.5;
        while x <= 50.0 {
            let want = statrs::function::gamma::gamma(x);
            let got = gamma_fn(x).unwrap();
            assert!(((got - want) / want).abs() <= 5e-13, "x = {x}");
            x += 0.137;
        }
    }

    #[test]
    fn gamma_domain_errors() {
        for x in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(gamma_fn(x), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(gamma_ball(0.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(gamma_ball(1.0).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_ball(2.0).unwrap(), PI, max_relative = 1e-14);
        assert_relative_eq!(
            gamma_ball(3.0).unwrap(),
            4.0 * PI / 3.0,
            max_relative = 1e-14
        );
        assert!(gamma_ball(-0.5).is_err());
    }

    #[test]
    fn ball_volume_is_log_concave_with_peak_at_five() {
        let v: Vec<f64> = (0..=10).map(|k| gamma_ball(k as f64).unwrap()).collect();
        for k in 1..10 {
            assert!(v[k] * v[k] >= v[k - 1] * v[k + 1], "k = {k}");
        }
        assert!(v[5] > v[4] && v[5] > v[6]);
    }

    #[test]
    fn ratio_examples() {
        assert_relative_eq!(
            gamma_ratio(1, 0.0).unwrap().value,
            PI / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            gamma_ratio(1, 1.0).unwrap().value,
            2.0,
            max_relative = 1e-14
        );
        assert!(gamma_ratio(1, 1.5).is_err());
        assert!(gamma_ratio(2, -0.1).is_err());
    }

    #[test]
    fn ratio_against_quadrature() {
        // γ_{2.5}/γ_{1.5}: both γ through gamma_fn, checked against the
        // integral evaluated directly in y (no substitution) at ε = 1.
        let r = gamma_ratio(3, 1.5).unwrap().value;
        let direct = integrate(
            |y: f64| 2.0 * (1.0 - y * y).powf(0.75),
            0.0,
            1.0,
            QuadOptions::absolute(1e-13),
        )
        .unwrap()
        .value;
        assert!((r - direct).abs() < 1e-11, "{r} vs {direct}");
        assert_relative_eq!(r, 1.437_768_281_682_710_6, max_relative = 1e-12);
    }

    #[test]
    fn ratio_depends_only_on_codimension() {
        for n in 1..=4usize {
            let mut s = 0.0;
            while s <= n as f64 {
                let a = gamma_ratio(n, s).unwrap().value;
                let b = gamma_ratio(n + 1, s + 1.0).unwrap().value;
                assert!((a - b).abs() <= 1e-13 * a, "n = {n}, s = {s}");
                s += 0.25;
            }
        }
    }

    #[test]
    fn lift_power_examples() {
        let v = lift_power_integral(1, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - PI / 2.0).abs() <= 1e-12);
        let v = lift_power_integral(2, 2.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() <= 1e-12);
        let v = lift_power_integral(2, 0.5, 0.1, 1e-12).unwrap();
        let closed = gamma_ratio(2, 0.5).unwrap().value * 0.1f64.powf(2.5);
        assert!((v - closed).abs() <= 1e-12);
    }

    #[test]
    fn lift_power_grid_matches_both_closed_forms() {
        for n in 1..=3usize {
            for step in 0..=(4 * n) {
                let s = step as f64 * 0.25;
                for eps in [1.0f64, 0.1, 0.01] {
                    let p = n as f64 + 1.0 - s;
                    let scale = eps.powf(p).max(1.0);
                    let quad = lift_power_integral(n, s, eps, 1e-12).unwrap();
                    let ratio = gamma_ratio(n, s).unwrap().value * eps.powf(p);
                    let beta = lift_power_closed_form(n, s, eps).unwrap();
                    assert!((quad - ratio).abs() <= 1e-10 * scale, "({n}, {s}, {eps})");
                    assert!((beta - ratio).abs() <= 1e-12 * scale.max(ratio));
                }
            }
        }
    }
}
