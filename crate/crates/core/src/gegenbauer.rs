//! Gegenbauer (ultraspherical) polynomials `G_n^λ`.
//!
//! Evaluation uses the forward three-term recurrence
//!
//! ```text
//! G_0 = 1,  G_1 = 2λr,
//! G_n = 2(n+λ−1)/n · r · G_{n−1} − (n+2λ−2)/n · G_{n−2}
//! ```
//!
//! which is stable in the increasing-degree direction for `λ > 0`. The
//! `λ = 0` limit (circle, `d = 1`) is never evaluated here; the simulator uses
//! `cos(nϑ)` for that case.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::special::{ln_factorial, ln_gamma};

/// Order `λ` and degree `n` of a Gegenbauer polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerOrder {
    lambda: f64,
    degree: usize,
}

impl GegenbauerOrder {
    pub fn new(lambda: f64, degree: usize) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { lambda, degree })
    }

    /// The order attached to the sphere `S^d`, `λ = (d−1)/2`.
    pub fn for_sphere(d: usize, degree: usize) -> Result<Self> {
        Self::new(sphere_lambda(d), degree)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// `λ = (d − 1)/2`.
pub fn sphere_lambda(d: usize) -> f64 {
    (d as f64 - 1.0) / 2.0
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("Gegenbauer order λ must be positive, got {lambda}")))
    }
}

fn check_argument(r: f64) -> Result<()> {
    if r.abs() <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("Gegenbauer argument must lie in [-1, 1], got {r}")))
    }
}

/// Recurrence coefficients `(2(n+λ−1)/n, (n+2λ−2)/n)` for degree `n ≥ 2`.
#[inline]
pub(crate) fn recurrence_coefficients(lambda: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    (
        2.0 * (nf + lambda - 1.0) / nf,
        (nf + 2.0 * lambda - 2.0) / nf,
    )
}

/// Coefficients of the recurrence for `h_n = G_n / G_n(1)`:
/// `h_n = A_n r h_{n−1} − C_n h_{n−2}` with
/// `A_n = 2(n+λ−1)/(n+2λ−1)` and `C_n = (n−1)/(n+2λ−1)`.
#[inline]
pub(crate) fn normalized_coefficients(lambda: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let denom = nf + 2.0 * lambda - 1.0;
    (2.0 * (nf + lambda - 1.0) / denom, (nf - 1.0) / denom)
}

/// `G_n^λ(r)` by the forward recurrence.
pub fn gegenbauer_eval(order: GegenbauerOrder, r: f64) -> Result<f64> {
    check_lambda(order.lambda)?;
    check_argument(r)?;
    Ok(eval_unchecked(order.lambda, order.degree, r))
}

pub(crate) fn eval_unchecked(lambda: f64, degree: usize, r: f64) -> f64 {
    if degree == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = 2.0 * lambda * r;
    for n in 2..=degree {
        let (a, c) = recurrence_coefficients(lambda, n);
        let next = a * r * curr - c * prev;
        prev = curr;
        curr = next;
    }
    curr
}

/// `G_n^λ(r) / G_n^λ(1)`, bounded by one in magnitude for `|r| ≤ 1`.
pub(crate) fn eval_normalized(lambda: f64, degree: usize, r: f64) -> f64 {
    if degree == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = r;
    for n in 2..=degree {
        let (a, c) = normalized_coefficients(lambda, n);
        let next = a * r * curr - c * prev;
        prev = curr;
        curr = next;
    }
    curr
}

/// `[G_0^λ(r), …, G_{max_degree}^λ(r)]` from a single recurrence pass.
pub fn gegenbauer_eval_table(lambda: f64, max_degree: usize, r: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    check_argument(r)?;
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(1.0);
    if max_degree >= 1 {
        out.push(2.0 * lambda * r);
    }
    for n in 2..=max_degree {
        let (a, c) = recurrence_coefficients(lambda, n);
        let next = a * r * out[n - 1] - c * out[n - 2];
        out.push(next);
    }
    Ok(out)
}

/// `ln G_n^λ(1) = ln Γ(n+2λ) − ln Γ(2λ) − ln n!`.
pub fn ln_gegenbauer_at_one(lambda: f64, n: usize) -> Result<f64> {
    check_lambda(lambda)?;
    if n == 0 {
        return Ok(0.0);
    }
    Ok(ln_gamma(n as f64 + 2.0 * lambda) - ln_gamma(2.0 * lambda) - ln_factorial(n))
}

/// `G_n^λ(1) = Γ(n+2λ) / (Γ(2λ) Γ(n+1))`.
pub fn gegenbauer_at_one(lambda: f64, n: usize) -> Result<f64> {
    ln_gegenbauer_at_one(lambda, n).map(f64::exp)
}

/// Squared weighted norm `‖G_n^{(d−1)/2}‖² = ∫_0^π G_n(cos θ)² sin^{d−1}θ dθ`.
///
/// For `d = 1` this is the `2π/n²` branch, i.e. the norm of the `λ → 0`
/// limit `G_n^λ/λ → (2/n) cos(nθ)`. It has no value at `n = 0`.
pub fn gegenbauer_norm_sq(d: usize, n: usize) -> Result<f64> {
    match d {
        0 => Err(domain("sphere dimension must be at least 1")),
        1 if n == 0 => Err(domain(
            "the d = 1 norm 2π/n² is undefined at n = 0",
        )),
        1 => Ok(2.0 * PI / (n as f64 * n as f64)),
        _ => {
            let df = d as f64;
            let nf = n as f64;
            let ln = (3.0 - df) * std::f64::consts::LN_2 + PI.ln() - (2.0 * nf + df - 1.0).ln()
                + ln_gamma(df - 1.0 + nf)
                - ln_factorial(n)
                - 2.0 * ln_gamma((df - 1.0) / 2.0);
            Ok(ln.exp())
        }
    }
}
