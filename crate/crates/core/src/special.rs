//! Log-space special functions shared by the coefficient and moment code.

use std::f64::consts::{PI, SQRT_2};

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma called with {x}");
    libm::lgamma_r(x).0
}

/// `ln (a)_n = ln Γ(a + n) − ln Γ(a)` for `a > 0`.
pub fn ln_pochhammer(a: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    ln_gamma(a + n as f64) - ln_gamma(a)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

// B_{2j} / (2j)! for j = 1..=7.
const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
];

/// `Σ_{k ≥ start} k^{−s}` for `s > 1` and `start ≥ 16`, by Euler–Maclaurin.
pub fn power_sum_tail(s: f64, start: usize) -> f64 {
    assert!(s > 1.0, "power_sum_tail requires s > 1, got {s}");
    assert!(start >= 16, "Euler–Maclaurin start index too small");
    let n = start as f64;
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising product s (s+1) ... (s+2j)
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            rising *= (s + m - 1.0) * (s + m);
            power /= n * n;
        }
        tail += coef * rising * power;
    }
    tail
}

/// Riemann zeta function for real `s > 1`.
pub fn riemann_zeta(s: f64) -> f64 {
    assert!(s > 1.0, "riemann_zeta requires s > 1, got {s}");
    const N: usize = 16;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    head + power_sum_tail(s, N)
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `ln sinh(x)` for `x > 0` without overflow.
pub fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
}

/// `ln cosh(x)` without overflow.
pub fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

/// `2 Γ((d+1)/2) / (√π Γ(d/2))`, the normalizer turning a half-range
/// integral over the polar angle into an expectation over the sphere.
pub fn polar_half_normalizer(d: usize) -> f64 {
    let d = d as f64;
    (std::f64::consts::LN_2 + ln_gamma(0.5 * (d + 1.0)) - 0.5 * PI.ln() - ln_gamma(0.5 * d)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        assert!((riemann_zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((riemann_zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        // ζ(1.5) = 2.612375348685488...
        assert!((riemann_zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-13);
        assert!((riemann_zeta(40.0) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn zeta_near_pole_matches_laurent_leading_terms() {
        // ζ(s) = 1/(s−1) + γ + O(s−1)
        let s = 1.0 + 1e-6;
        let euler_gamma = 0.577_215_664_901_532_9;
        assert!((riemann_zeta(s) - (1e6 + euler_gamma)).abs() < 1e-4);
    }

    #[test]
    fn power_tail_matches_direct_sum() {
        // Σ_{k≥20} k^{-3} = ζ(3) − Σ_{k<20} k^{-3}
        let zeta3 = 1.202_056_903_159_594_3;
        let head: f64 = (1..20).map(|k| (k as f64).powi(-3)).sum();
        assert!((power_sum_tail(3.0, 20) - (zeta3 - head)).abs() < 1e-15);
    }

    #[test]
    fn pochhammer_and_beta() {
        assert!((ln_pochhammer(3.0, 4).exp() - 3.0 * 4.0 * 5.0 * 6.0).abs() < 1e-10);
        assert_eq!(ln_pochhammer(2.5, 0), 0.0);
        // B(1, x) = 1/x
        assert!((ln_beta(1.0, 5.5).exp() - 1.0 / 5.5).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_logs_agree_with_direct() {
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            let x: f64 = x;
            assert!((ln_sinh(x) - x.sinh().ln()).abs() < 1e-13);
            assert!((ln_cosh(x) - x.cosh().ln()).abs() < 1e-13);
        }
        assert!(ln_sinh(2000.0).is_finite());
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-12);
        assert!((normal_cdf(-1.3) + normal_cdf(1.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polar_normalizer_for_two_sphere() {
        // 2 Γ(3/2) / (√π Γ(1)) = 1
        assert!((polar_half_normalizer(2) - 1.0).abs() < 1e-15);
        // d = 3: 2 Γ(2) / (√π Γ(3/2)) = 4/π
        assert!((polar_half_normalizer(3) - 4.0 / PI).abs() < 1e-15);
    }
}
