//! Isotropic covariance models on `S^d` and their Schoenberg sequences.
//!
//! A covariance `K(θ) = Σ_n b_{n,d} G_n^{(d−1)/2}(cos θ)` is described here by
//! its Schoenberg coefficients `b_{n,d} ≥ 0`. The catalog covers the
//! negative binomial, spectral Matérn, generalized F, Chentsov and
//! exponential families, plus user-supplied finite sequences. Bivariate
//! negative binomial and spectral Matérn models (and arbitrary finite matrix
//! sequences) provide Schoenberg matrices `B_{n,d}` together with a factor
//! `Γ` with `Γ Γᵀ = B`.
//!
//! All gamma, beta and Pochhammer arithmetic is carried out in log space:
//! on `S^256` the order `λ = 127.5` overflows raw gamma values immediately.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Error, Result, Violation};
use crate::gegenbauer::{
    gegenbauer_norm_sq, ln_gegenbauer_at_one, normalized_coefficients, sphere_lambda,
};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::special::{ln_beta, ln_cosh, ln_factorial, ln_gamma, ln_pochhammer, power_sum_tail};

/// Coefficients at or below this are treated as zero when comparing supports.
pub const NUMERIC_ZERO: f64 = 1e-300;

/// Absolute remainder bound used to truncate series-valued covariances.
pub const SERIES_TOLERANCE: f64 = 1e-8;

const SERIES_MAX_TERMS: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `b_n = (1−δ) δⁿ` on `S²`.
    NegativeBinomial { delta: f64 },
    /// `b_n ∝ (n² + α²)^{−ν−1/2}` on `S²`, normalized to `K(0) = 1`.
    SpectralMatern { alpha: f64, nu: f64 },
    /// `b_n = B(α,ν+τ)/B(α,ν) · (α)_n (τ)_n / ((α+ν+τ)_n n!)`.
    GeneralizedF { alpha: f64, nu: f64, tau: f64 },
    /// `K(θ) = 1 − 2θ/π`.
    Chentsov,
    /// `K(θ) = exp(−νθ)`.
    Exponential { nu: f64 },
    /// A user-supplied finite Schoenberg sequence `b_0, …, b_N`.
    Finite { coeffs: Vec<f64> },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::NegativeBinomial { delta } => write!(f, "nb(delta={delta})"),
            Family::SpectralMatern { alpha, nu } => write!(f, "sm(alpha={alpha},nu={nu})"),
            Family::GeneralizedF { alpha, nu, tau } => {
                write!(f, "f(alpha={alpha},nu={nu},tau={tau})")
            }
            Family::Chentsov => write!(f, "chentsov"),
            Family::Exponential { nu } => write!(f, "exp(nu={nu})"),
            Family::Finite { coeffs } => {
                let list: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "finite(b=[{}])", list.join(" "))
            }
        }
    }
}

/// A covariance family together with the sphere dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpec {
    pub family: Family,
    pub dim: usize,
}

impl CovarianceSpec {
    pub fn new(family: Family, dim: usize) -> Self {
        Self { family, dim }
    }

    pub fn negative_binomial(delta: f64) -> Self {
        Self::new(Family::NegativeBinomial { delta }, 2)
    }

    pub fn spectral_matern(alpha: f64, nu: f64) -> Self {
        Self::new(Family::SpectralMatern { alpha, nu }, 2)
    }

    pub fn generalized_f(alpha: f64, nu: f64, tau: f64, dim: usize) -> Self {
        Self::new(Family::GeneralizedF { alpha, nu, tau }, dim)
    }

    pub fn chentsov(dim: usize) -> Self {
        Self::new(Family::Chentsov, dim)
    }

    pub fn exponential(nu: f64, dim: usize) -> Self {
        Self::new(Family::Exponential { nu }, dim)
    }

    pub fn finite(coeffs: Vec<f64>, dim: usize) -> Self {
        Self::new(Family::Finite { coeffs }, dim)
    }

    /// Checks every parameter constraint; the returned list names each
    /// failed constraint.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        let d = self.dim;
        if d == 0 {
            v.push(Violation::new("d ≥ 1", "sphere dimension is 0"));
        }
        match &self.family {
            Family::NegativeBinomial { delta } => {
                if !(*delta > 0.0 && *delta < 1.0) {
                    v.push(Violation::new("δ ∈ ]0,1[", format!("δ = {delta}")));
                }
                if d != 2 {
                    v.push(Violation::new("d = 2", format!("negative binomial model is defined on S², got d = {d}")));
                }
            }
            Family::SpectralMatern { alpha, nu } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    v.push(Violation::new("α > 0", format!("α = {alpha}")));
                }
                if !(*nu > 0.0 && nu.is_finite()) {
                    v.push(Violation::new("ν > 0", format!("ν = {nu}")));
                }
                if d != 2 {
                    v.push(Violation::new("d = 2", format!("spectral Matérn model is defined on S², got d = {d}")));
                }
            }
            Family::GeneralizedF { alpha, nu, tau } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    v.push(Violation::new("α > 0", format!("α = {alpha}")));
                }
                if !(*nu > 0.0 && nu.is_finite()) {
                    v.push(Violation::new("ν > 0", format!("ν = {nu}")));
                }
                if !(*tau > 0.0 && tau.is_finite()) {
                    v.push(Violation::new("τ > 0", format!("τ = {tau}")));
                }
                if d >= 1 && !(*nu > d as f64 - 2.0) {
                    v.push(Violation::new("ν > d − 2", format!("ν = {nu}, d = {d}")));
                }
            }
            Family::Chentsov => {
                if d < 2 {
                    v.push(Violation::new("d ≥ 2", format!("closed-form Chentsov coefficients need d ≥ 2, got d = {d}")));
                }
            }
            Family::Exponential { nu } => {
                if !(*nu > 0.0 && nu.is_finite()) {
                    v.push(Violation::new("ν > 0", format!("ν = {nu}")));
                }
                if d < 2 {
                    v.push(Violation::new("d ≥ 2", format!("closed-form exponential coefficients need d ≥ 2, got d = {d}")));
                }
            }
            Family::Finite { coeffs } => {
                if coeffs.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
                    v.push(Violation::new("b_n ≥ 0", "finite Schoenberg sequence has a negative or non-finite entry"));
                }
                if !coeffs.iter().any(|b| *b > 0.0) {
                    v.push(Violation::new("Σ b_n > 0", "finite Schoenberg sequence is empty or all zero"));
                }
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

impl fmt::Display for CovarianceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)
    }
}

/// How fast the Schoenberg sequence decays; drives the degree-law choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// Nonzero for finitely many degrees, the largest being `last`.
    Finite { last: usize },
    /// `limsup ⁿ√b_n = rate < 1`.
    Geometric { rate: f64 },
    /// `b_n = O(n^{−theta})`; `odd_only` when even coefficients vanish.
    Polynomial { theta: f64, odd_only: bool },
}

/// Result of evaluating `K(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceValue {
    pub value: f64,
    /// Present when the value came from a truncated Schoenberg series.
    pub series: Option<SeriesInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesInfo {
    /// Highest degree included.
    pub last_degree: usize,
    /// Bound on the omitted remainder `Σ_{n > last} b_n G_n(1)`.
    pub remainder_bound: f64,
}

/// A validated covariance model.
#[derive(Debug)]
pub struct CovarianceModel {
    spec: CovarianceSpec,
    sm_normalizer: OnceLock<f64>,
    variance: OnceLock<f64>,
}

impl Clone for CovarianceModel {
    fn clone(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            sm_normalizer: self.sm_normalizer.clone(),
            variance: self.variance.clone(),
        }
    }
}

impl CovarianceModel {
    pub fn new(spec: CovarianceSpec) -> Result<Self> {
        spec.validate().map_err(Error::InvalidModel)?;
        Ok(Self {
            spec,
            sm_normalizer: OnceLock::new(),
            variance: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &CovarianceSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    fn lambda(&self) -> f64 {
        sphere_lambda(self.spec.dim)
    }

    /// `ln b_{n,d}`, `−∞` for a vanishing coefficient.
    pub fn ln_schoenberg_coeff(&self, n: usize) -> f64 {
        let nf = n as f64;
        match &self.spec.family {
            Family::NegativeBinomial { delta } => (1.0 - delta).ln() + nf * delta.ln(),
            Family::SpectralMatern { alpha, nu } => {
                -(nu + 0.5) * (nf * nf + alpha * alpha).ln() - self.sm_normalizer().ln()
            }
            Family::GeneralizedF { alpha, nu, tau } => {
                ln_beta(*alpha, nu + tau) - ln_beta(*alpha, *nu) + ln_pochhammer(*alpha, n)
                    + ln_pochhammer(*tau, n)
                    - ln_pochhammer(alpha + nu + tau, n)
                    - ln_factorial(n)
            }
            Family::Chentsov => ln_chentsov_coeff(self.lambda(), n),
            Family::Exponential { nu } => ln_exponential_coeff(*nu, self.spec.dim, n),
            Family::Finite { coeffs } => coeffs.get(n).map_or(f64::NEG_INFINITY, |b| b.ln()),
        }
    }

    /// The Schoenberg coefficient `b_{n,d}`.
    pub fn schoenberg_coeff(&self, n: usize) -> f64 {
        match &self.spec.family {
            Family::NegativeBinomial { delta } => (1.0 - delta) * delta.powf(n as f64),
            Family::Finite { coeffs } => coeffs.get(n).copied().unwrap_or(0.0),
            _ => self.ln_schoenberg_coeff(n).exp(),
        }
    }

    /// `Σ_k (k² + α²)^{−ν−1/2}`, computed once per model.
    fn sm_normalizer(&self) -> f64 {
        *self.sm_normalizer.get_or_init(|| match self.spec.family {
            Family::SpectralMatern { alpha, nu } => spectral_matern_normalizer(alpha, nu),
            _ => unreachable!("normalizer requested for a non spectral-Matérn model"),
        })
    }

    pub fn decay(&self) -> Decay {
        let d = self.spec.dim as f64;
        match &self.spec.family {
            Family::NegativeBinomial { delta } => Decay::Geometric { rate: *delta },
            Family::SpectralMatern { nu, .. } => Decay::Polynomial {
                theta: 2.0 * nu + 1.0,
                odd_only: false,
            },
            Family::GeneralizedF { nu, .. } => Decay::Polynomial {
                theta: nu + 1.0,
                odd_only: false,
            },
            Family::Chentsov => Decay::Polynomial {
                theta: d,
                odd_only: true,
            },
            Family::Exponential { .. } => Decay::Polynomial {
                theta: d,
                odd_only: false,
            },
            Family::Finite { coeffs } => Decay::Finite {
                last: coeffs.iter().rposition(|b| *b > 0.0).unwrap_or(0),
            },
        }
    }

    /// `b_n G_n(1)`, the contribution of degree `n` to the variance; on the
    /// circle `G_n(1)` is replaced by `cos(0) = 1`.
    pub fn variance_term(&self, n: usize) -> f64 {
        self.ln_variance_term(n).exp()
    }

    fn ln_variance_term(&self, n: usize) -> f64 {
        let ln_b = self.ln_schoenberg_coeff(n);
        if self.spec.dim == 1 || ln_b == f64::NEG_INFINITY {
            return ln_b;
        }
        ln_b + ln_gegenbauer_at_one(self.lambda(), n).expect("λ > 0 for d ≥ 2")
    }

    /// Bound (or, for the generalized F, chentsov and exponential families, a
    /// decay-order estimate) on `Σ_{k > n} b_k G_k(1)`.
    pub fn remainder_bound(&self, n: usize) -> f64 {
        let nf = n as f64;
        match &self.spec.family {
            Family::NegativeBinomial { delta } => self.schoenberg_coeff(n) * delta / (1.0 - delta),
            Family::SpectralMatern { nu, .. } => {
                if n == 0 {
                    return f64::INFINITY;
                }
                let two_s = 2.0 * nu + 1.0;
                nf.powf(1.0 - two_s) / ((two_s - 1.0) * self.sm_normalizer())
            }
            Family::Finite { coeffs } => {
                if n + 1 >= coeffs.len() {
                    0.0
                } else {
                    coeffs[n + 1..]
                        .iter()
                        .enumerate()
                        .map(|(i, b)| b * self.gegenbauer_one(n + 1 + i))
                        .sum()
                }
            }
            Family::GeneralizedF { alpha, nu, tau } => {
                let q = if self.spec.dim == 1 {
                    nu + 1.0
                } else {
                    nu + 1.0 - (self.spec.dim as f64 - 2.0)
                };
                let settled = 10.0 * (alpha + nu + tau + self.spec.dim as f64);
                if nf < settled {
                    return f64::INFINITY;
                }
                2.0 * self.variance_term(n) * nf / (q - 1.0)
            }
            Family::Chentsov | Family::Exponential { .. } => {
                if n < 2 {
                    return f64::INFINITY;
                }
                // terms decay like n^{-2}; Chentsov only has odd degrees
                let last = if matches!(self.spec.family, Family::Chentsov) && n % 2 == 0 {
                    n - 1
                } else {
                    n
                };
                2.0 * self.variance_term(last) * nf
            }
        }
    }

    fn gegenbauer_one(&self, n: usize) -> f64 {
        if self.spec.dim == 1 {
            1.0
        } else {
            ln_gegenbauer_at_one(self.lambda(), n)
                .expect("λ > 0 for d ≥ 2")
                .exp()
        }
    }

    /// `K(0) = Σ_n b_n G_n(1)`.
    pub fn variance(&self) -> f64 {
        *self.variance.get_or_init(|| match &self.spec.family {
            Family::NegativeBinomial { .. }
            | Family::SpectralMatern { .. }
            | Family::Chentsov
            | Family::Exponential { .. } => 1.0,
            Family::GeneralizedF { .. } if self.spec.dim == 2 => 1.0,
            _ => self.series_eval(1.0, 0.0).value,
        })
    }

    /// `K(θ)`. Closed forms where available; the generalized F and spectral
    /// Matérn families are summed from their Schoenberg series.
    pub fn covariance_eval(&self, theta: f64) -> Result<CovarianceValue> {
        if !(0.0..=PI).contains(&theta) {
            return Err(domain(format!("θ must lie in [0, π], got {theta}")));
        }
        let closed = |value| CovarianceValue {
            value,
            series: None,
        };
        Ok(match &self.spec.family {
            Family::NegativeBinomial { delta } => closed(negative_binomial_k(*delta, theta)),
            Family::Chentsov => closed(1.0 - 2.0 * theta / PI),
            Family::Exponential { nu } => closed((-nu * theta).exp()),
            _ => self.series_eval(theta.cos(), theta),
        })
    }

    /// Shorthand for [`Self::covariance_eval`] returning the value only.
    pub fn eval(&self, theta: f64) -> Result<f64> {
        self.covariance_eval(theta).map(|v| v.value)
    }

    fn series_eval(&self, r: f64, theta: f64) -> CovarianceValue {
        let d = self.spec.dim;
        let lambda = self.lambda();
        let finite_len = match &self.spec.family {
            Family::Finite { coeffs } => Some(coeffs.len()),
            _ => None,
        };
        let mut sum = 0.0;
        let (mut h_prev, mut h_curr) = (1.0, r);
        let mut n = 0usize;
        loop {
            let shape = if d == 1 {
                (n as f64 * theta).cos()
            } else {
                match n {
                    0 => 1.0,
                    1 => r,
                    _ => {
                        let (a, c) = normalized_coefficients(lambda, n);
                        let next = a * r * h_curr - c * h_prev;
                        h_prev = h_curr;
                        h_curr = next;
                        next
                    }
                }
            };
            let ln_t = self.ln_variance_term(n);
            if ln_t > f64::NEG_INFINITY {
                sum += ln_t.exp() * shape;
            }
            if let Some(len) = finite_len {
                if n + 1 >= len {
                    return CovarianceValue {
                        value: sum,
                        series: Some(SeriesInfo {
                            last_degree: n,
                            remainder_bound: 0.0,
                        }),
                    };
                }
            } else if n >= 1 && (n % 64 == 0 || n + 1 >= SERIES_MAX_TERMS) {
                let bound = self.remainder_bound(n);
                if bound < SERIES_TOLERANCE || n + 1 >= SERIES_MAX_TERMS {
                    return CovarianceValue {
                        value: sum,
                        series: Some(SeriesInfo {
                            last_degree: n,
                            remainder_bound: bound,
                        }),
                    };
                }
            }
            n += 1;
        }
    }
}

impl fmt::Display for CovarianceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec)
    }
}

/// `K_NB(θ; δ) = (1−δ) / √(1 + δ² − 2δ cos θ)`.
pub fn negative_binomial_k(delta: f64, theta: f64) -> f64 {
    (1.0 - delta) / (1.0 + delta * delta - 2.0 * delta * theta.cos()).sqrt()
}

/// `Σ_{k≥0} (k² + α²)^{−ν−1/2}`: a direct partial sum followed by an exact
/// Euler–Maclaurin tail obtained from the binomial expansion
/// `(x²+α²)^{−s} = Σ_j binom(−s, j) α^{2j} x^{−2s−2j}` (valid for `x > α`).
pub fn spectral_matern_normalizer(alpha: f64, nu: f64) -> f64 {
    let s = nu + 0.5;
    let start = (20.0 * alpha).ceil().max(1000.0) as usize;
    let head: f64 = (0..start)
        .map(|k| {
            let k = k as f64;
            (k * k + alpha * alpha).powf(-s)
        })
        .sum();
    let ratio = (alpha / start as f64).powi(2);
    let mut tail = 0.0;
    // c_j = binom(−s, j) α^{2j}, carried relative to start^{-2j}
    let mut coef = 1.0;
    for j in 0..40 {
        let jf = j as f64;
        if j > 0 {
            coef *= -(s + jf - 1.0) / jf * alpha * alpha;
        }
        let term = coef * power_sum_tail(2.0 * s + 2.0 * jf, start);
        tail += term;
        if term.abs() < 1e-18 * (head + tail).abs() || ratio == 0.0 {
            break;
        }
    }
    head + tail
}

/// `ln b_{n,d}` for the Chentsov covariance, direct gamma-quotient form
/// `(λ+2m+1) Γ(λ) Γ(λ+1) Γ(m+½)² / (π² Γ(λ+m+3/2)²)` at `n = 2m+1`.
pub fn ln_chentsov_coeff(lambda: f64, n: usize) -> f64 {
    if n % 2 == 0 {
        return f64::NEG_INFINITY;
    }
    let m = ((n - 1) / 2) as f64;
    (lambda + 2.0 * m + 1.0).ln() + ln_gamma(lambda) + ln_gamma(lambda + 1.0)
        - 2.0 * PI.ln()
        + 2.0 * ln_gamma(m + 0.5)
        - 2.0 * ln_gamma(lambda + m + 1.5)
}

/// Chentsov coefficients `b_0, …, b_{max_degree}` on `S^d` by the odd-degree
/// induction `b_{2m+1} = (λ+2m+1)/(λ+2m−1) · (m−½)²/(λ+m+½)² · b_{2m−1}`
/// started from `b_1 = Γ(λ)Γ(λ+2) / (π Γ(λ+3/2)²)`.
pub fn chentsov_coefficients_by_induction(dim: usize, max_degree: usize) -> Result<Vec<f64>> {
    if dim < 2 {
        return Err(domain("Chentsov coefficients need d ≥ 2"));
    }
    let lambda = sphere_lambda(dim);
    let mut out = vec![0.0; max_degree + 1];
    if max_degree == 0 {
        return Ok(out);
    }
    let mut b = (ln_gamma(lambda) + ln_gamma(lambda + 2.0)
        - PI.ln()
        - 2.0 * ln_gamma(lambda + 1.5))
    .exp();
    out[1] = b;
    let mut m = 1usize;
    while 2 * m + 1 <= max_degree {
        let mf = m as f64;
        b *= (lambda + 2.0 * mf + 1.0) / (lambda + 2.0 * mf - 1.0) * (mf - 0.5).powi(2)
            / (lambda + mf + 0.5).powi(2);
        out[2 * m + 1] = b;
        m += 1;
    }
    Ok(out)
}

/// `ln |Γ((m + iν)/2)|² − ln |Γ((m+1 + iν)/2)|²`, accumulated from the
/// `m = 0, 1` initial values through the two-step induction
/// `|Γ((m+iν)/2)|² = ((m−2)² + ν²)/4 · |Γ((m−2+iν)/2)|²`.
///
/// Working with the difference keeps every increment small, so the result
/// stays accurate even when `ln |Γ|²` itself is of order `m ln m`.
fn ln_gamma_modulus_step(nu: f64, m: usize) -> f64 {
    if 0.25 * ((m * m) as f64 + nu * nu) >= 400.0 {
        return ln_gamma_modulus_step_asymptotic(nu, m);
    }
    let half_pi_nu = 0.5 * PI * nu;
    // D(0) = ln 2 − ln ν + ln coth(πν/2)
    let e = (-2.0 * half_pi_nu).exp();
    let d0 = std::f64::consts::LN_2 - nu.ln() + e.ln_1p() - (-e).ln_1p();
    // D(1) = −D(0) − ln(ν²/4)
    let d1 = -d0 - (0.25 * nu * nu).ln();
    let mut acc = if m % 2 == 0 { d0 } else { d1 };
    let mut k = m % 2 + 2;
    while k <= m {
        let kf = k as f64;
        acc += (((kf - 2.0).powi(2) + nu * nu) / ((kf - 1.0).powi(2) + nu * nu)).ln();
        k += 2;
    }
    acc
}

// ln Γ(z) − ln Γ(z+½) ~ −½ ln z + Σ c_k z^{−k}, from the Bernoulli-polynomial
// Stirling series; only odd k contribute.
const HALF_SHIFT_SERIES: [(i32, f64); 6] = [
    (1, 1.0 / 8.0),
    (3, -1.0 / 192.0),
    (5, 1.0 / 640.0),
    (7, -17.0 / 14336.0),
    (9, 31.0 / 18432.0),
    (11, -691.0 * 4095.0 / (2730.0 * 2048.0 * 132.0)),
];

/// The step `D(m)` as `2 Re[ln Γ(z) − ln Γ(z+½)]` at `z = (m + iν)/2`, for
/// `|z| ≥ 20`, where the asymptotic series is accurate to rounding.
fn ln_gamma_modulus_step_asymptotic(nu: f64, m: usize) -> f64 {
    let (x, y) = (0.5 * m as f64, 0.5 * nu);
    let modulus = x.hypot(y);
    let phase = y.atan2(x);
    let mut acc = -0.5 * modulus.ln();
    for (k, c) in HALF_SHIFT_SERIES {
        acc += c * (-(k as f64) * phase).cos() * modulus.powi(-k);
    }
    2.0 * acc
}

/// `ln b_{n,d}` for `K(θ) = exp(−νθ)` via
/// `b_n = C(ν,n) (λ+n) Γ(λ) Γ(λ+1) |Γ((n+iν)/2)|² / |Γ((n+d+1+iν)/2)|²`,
/// with `e^{−πν/2} sinh(πν/2) = (1 − e^{−πν})/2` and the cosh analogue.
pub fn ln_exponential_coeff(nu: f64, dim: usize, n: usize) -> f64 {
    let lambda = sphere_lambda(dim);
    let e = (-PI * nu).exp();
    let ln_c = if n % 2 == 0 {
        nu.ln() + (-e).ln_1p() - (4.0 * PI).ln()
    } else {
        nu.ln() + e.ln_1p() - (4.0 * PI).ln()
    };
    // ln g(n) − ln g(n+d+1), with g(m) = |Γ((m+iν)/2)|²
    let steps = |from: usize, count: usize| -> f64 {
        (0..count)
            .map(|j| {
                let m = (from + 2 * j) as f64;
                ((m * m + nu * nu) / 4.0).ln()
            })
            .sum::<f64>()
    };
    let ratio = if dim % 2 == 1 {
        -steps(n, (dim + 1) / 2)
    } else {
        ln_gamma_modulus_step(nu, n) - steps(n + 1, dim / 2)
    };
    ln_c + (lambda + n as f64).ln() + ln_gamma(lambda) + ln_gamma(lambda + 1.0) + ratio
}

/// Exponential-model coefficient computed literally from the absolute
/// `|Γ((m+iν)/2)|²` induction (numerator and denominator separately) with
/// the raw `sinh`/`cosh` prefactors. Usable for moderate `ν` and `n`; kept as
/// an independent route for cross-checking [`ln_exponential_coeff`].
pub fn exponential_coeff_by_gamma_induction(nu: f64, dim: usize, n: usize) -> f64 {
    let lambda = sphere_lambda(dim);
    let half = 0.5 * PI * nu;
    let ln_gsq = |m: usize| -> f64 {
        let mut acc = if m % 2 == 0 {
            (2.0 * PI).ln() - nu.ln() - half.sinh().ln()
        } else {
            PI.ln() - ln_cosh(half)
        };
        let mut k = m % 2 + 2;
        while k <= m {
            let prev = (k - 2) as f64;
            acc += ((prev * prev + nu * nu) / 4.0).ln();
            k += 2;
        }
        acc
    };
    let c = if n % 2 == 0 {
        nu * (-half).exp() * half.sinh() / (2.0 * PI)
    } else {
        nu * (-half).exp() * half.cosh() / (2.0 * PI)
    };
    c * (lambda + n as f64)
        * (ln_gamma(lambda) + ln_gamma(lambda + 1.0) + ln_gsq(n) - ln_gsq(n + dim + 1)).exp()
}

/// `b_{n,d} = ‖G_n‖^{−2} ∫_0^π G_n(cos θ) sin^{d−1}θ K(θ) dθ`, to absolute
/// accuracy `1e−10` on `b`.
pub fn schoenberg_coeff_quadrature<K: Fn(f64) -> f64>(k: K, n: usize, d: usize) -> Result<f64> {
    schoenberg_coeff_quadrature_with_tol(k, n, d, Tolerance::absolute(1e-10))
}

/// As [`schoenberg_coeff_quadrature`] with an explicit tolerance, expressed
/// on the coefficient (not on the raw integral).
pub fn schoenberg_coeff_quadrature_with_tol<K: Fn(f64) -> f64>(
    k: K,
    n: usize,
    d: usize,
    tol: Tolerance,
) -> Result<f64> {
    if d < 2 {
        return Err(domain("quadrature oracle needs d ≥ 2"));
    }
    let lambda = sphere_lambda(d);
    let norm = gegenbauer_norm_sq(d, n)?;
    let panels = 2 * (n + 1);
    let breaks: Vec<f64> = (0..=panels).map(|i| PI * i as f64 / panels as f64).collect();
    let integrand = |theta: f64| {
        crate::gegenbauer::eval_unchecked(lambda, n, theta.cos())
            * theta.sin().powi(d as i32 - 1)
            * k(theta)
    };
    let scaled = Tolerance {
        abs: tol.abs * norm,
        ..tol
    };
    let est = integrate_with_breaks(integrand, &breaks, scaled)?;
    Ok(est.value / norm)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MultiFamily {
    /// Bivariate negative binomial with `δ = (δ₁₁, δ₁₂, δ₂₂)` and cross
    /// correlation `ρ`.
    NegativeBinomial {
        delta11: f64,
        delta12: f64,
        delta22: f64,
        rho: f64,
    },
    /// Bivariate spectral Matérn with `ν = (ν₁₁, ν₁₂, ν₂₂)`.
    SpectralMatern {
        alpha: f64,
        nu11: f64,
        nu12: f64,
        nu22: f64,
        rho: f64,
    },
    /// User-supplied finite sequence of `p × p` Schoenberg matrices.
    Finite { matrices: Vec<DMatrix<f64>> },
}

impl fmt::Display for MultiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiFamily::NegativeBinomial {
                delta11,
                delta12,
                delta22,
                rho,
            } => write!(
                f,
                "nb2(delta11={delta11},delta12={delta12},delta22={delta22},rho={rho})"
            ),
            MultiFamily::SpectralMatern {
                alpha,
                nu11,
                nu12,
                nu22,
                rho,
            } => write!(
                f,
                "sm2(alpha={alpha},nu11={nu11},nu12={nu12},nu22={nu22},rho={rho})"
            ),
            MultiFamily::Finite { matrices } => write!(
                f,
                "finite{}(degrees={})",
                matrices.first().map_or(0, |m| m.nrows()),
                matrices.len()
            ),
        }
    }
}

/// A `p`-variate covariance model on `S^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiCovarianceSpec {
    pub family: MultiFamily,
    pub dim: usize,
    /// Skip the sufficient cross-smoothness condition `ν₁₂ ≥ (ν₁₁+ν₂₂)/2`
    /// of the bivariate spectral Matérn model. Schoenberg matrices are still
    /// checked for positive semi-definiteness degree by degree.
    pub allow_invalid_cross: bool,
}

impl MultiCovarianceSpec {
    pub fn negative_binomial(delta11: f64, delta12: f64, delta22: f64, rho: f64) -> Self {
        Self {
            family: MultiFamily::NegativeBinomial {
                delta11,
                delta12,
                delta22,
                rho,
            },
            dim: 2,
            allow_invalid_cross: false,
        }
    }

    pub fn spectral_matern(alpha: f64, nu11: f64, nu12: f64, nu22: f64, rho: f64) -> Self {
        Self {
            family: MultiFamily::SpectralMatern {
                alpha,
                nu11,
                nu12,
                nu22,
                rho,
            },
            dim: 2,
            allow_invalid_cross: false,
        }
    }

    pub fn finite(matrices: Vec<DMatrix<f64>>, dim: usize) -> Self {
        Self {
            family: MultiFamily::Finite { matrices },
            dim,
            allow_invalid_cross: false,
        }
    }

    pub fn components(&self) -> usize {
        match &self.family {
            MultiFamily::NegativeBinomial { .. } | MultiFamily::SpectralMatern { .. } => 2,
            MultiFamily::Finite { matrices } => matrices.first().map_or(0, |m| m.nrows()),
        }
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        match &self.family {
            MultiFamily::NegativeBinomial {
                delta11,
                delta12,
                delta22,
                rho,
            } => {
                for (name, delta) in [("δ₁₁", delta11), ("δ₁₂", delta12), ("δ₂₂", delta22)] {
                    if !(*delta > 0.0 && *delta < 1.0) {
                        v.push(Violation::new("δ ∈ ]0,1[", format!("{name} = {delta}")));
                    }
                }
                if delta12 > &delta11.min(*delta22) {
                    v.push(Violation::new(
                        "δ₁₂ ≤ min(δ₁₁,δ₂₂)",
                        format!("δ₁₂ = {delta12}, δ₁₁ = {delta11}, δ₂₂ = {delta22}"),
                    ));
                }
                let bound = ((1.0 - delta11) * (1.0 - delta22)).sqrt() / (1.0 - delta12);
                if !(rho.abs() <= bound) {
                    v.push(Violation::new(
                        "|ρ| ≤ √((1−δ₁₁)(1−δ₂₂))/(1−δ₁₂)",
                        format!("|ρ| = {}, bound = {bound}", rho.abs()),
                    ));
                }
                if self.dim != 2 {
                    v.push(Violation::new("d = 2", format!("got d = {}", self.dim)));
                }
            }
            MultiFamily::SpectralMatern {
                alpha,
                nu11,
                nu12,
                nu22,
                rho,
            } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    v.push(Violation::new("α > 0", format!("α = {alpha}")));
                }
                for (name, nu) in [("ν₁₁", nu11), ("ν₁₂", nu12), ("ν₂₂", nu22)] {
                    if !(*nu > 0.0 && nu.is_finite()) {
                        v.push(Violation::new("ν > 0", format!("{name} = {nu}")));
                    }
                }
                if !self.allow_invalid_cross && nu12 < &(0.5 * (nu11 + nu22)) {
                    v.push(Violation::new(
                        "ν₁₂ ≥ (ν₁₁+ν₂₂)/2",
                        format!("ν₁₂ = {nu12}, (ν₁₁+ν₂₂)/2 = {}", 0.5 * (nu11 + nu22)),
                    ));
                }
                let bound = alpha.powf(2.0 * nu12 - nu11 - nu22).min(1.0);
                if !(rho.abs() <= bound) {
                    v.push(Violation::new(
                        "|ρ| ≤ min(1, α^{2ν₁₂−ν₁₁−ν₂₂})",
                        format!("|ρ| = {}, bound = {bound}", rho.abs()),
                    ));
                }
                if self.dim != 2 {
                    v.push(Violation::new("d = 2", format!("got d = {}", self.dim)));
                }
            }
            MultiFamily::Finite { matrices } => {
                let p = self.components();
                if matrices.is_empty() || p == 0 {
                    v.push(Violation::new("p ≥ 1", "no Schoenberg matrices supplied"));
                }
                for (n, m) in matrices.iter().enumerate() {
                    if m.nrows() != p || m.ncols() != p {
                        v.push(Violation::new("B_n is p × p", format!("degree {n} has shape {}×{}", m.nrows(), m.ncols())));
                    } else if !is_symmetric(m) {
                        v.push(Violation::new("B_n symmetric", format!("degree {n}")));
                    }
                }
                if self.dim == 0 {
                    v.push(Violation::new("d ≥ 1", "sphere dimension is 0"));
                }
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

impl fmt::Display for MultiCovarianceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)
    }
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() <= 1e-12 * scale
}

/// A validated multivariate model.
#[derive(Debug, Clone)]
pub struct MultiCovarianceModel {
    spec: MultiCovarianceSpec,
    parts: Parts,
}

#[derive(Debug, Clone)]
enum Parts {
    Bivariate {
        first: CovarianceModel,
        cross: CovarianceModel,
        second: CovarianceModel,
        rho: f64,
    },
    Finite,
}

impl MultiCovarianceModel {
    pub fn new(spec: MultiCovarianceSpec) -> Result<Self> {
        spec.validate().map_err(Error::InvalidModel)?;
        let scalar = |family| CovarianceModel::new(CovarianceSpec::new(family, spec.dim));
        let parts = match spec.family {
            MultiFamily::NegativeBinomial {
                delta11,
                delta12,
                delta22,
                rho,
            } => Parts::Bivariate {
                first: scalar(Family::NegativeBinomial { delta: delta11 })?,
                cross: scalar(Family::NegativeBinomial { delta: delta12 })?,
                second: scalar(Family::NegativeBinomial { delta: delta22 })?,
                rho,
            },
            MultiFamily::SpectralMatern {
                alpha,
                nu11,
                nu12,
                nu22,
                rho,
            } => Parts::Bivariate {
                first: scalar(Family::SpectralMatern { alpha, nu: nu11 })?,
                cross: scalar(Family::SpectralMatern { alpha, nu: nu12 })?,
                second: scalar(Family::SpectralMatern { alpha, nu: nu22 })?,
                rho,
            },
            MultiFamily::Finite { .. } => Parts::Finite,
        };
        Ok(Self { spec, parts })
    }

    pub fn spec(&self) -> &MultiCovarianceSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn components(&self) -> usize {
        self.spec.components()
    }

    /// Diagonal models for the bivariate catalog entries.
    pub fn direct_models(&self) -> Option<[&CovarianceModel; 2]> {
        match &self.parts {
            Parts::Bivariate { first, second, .. } => Some([first, second]),
            Parts::Finite => None,
        }
    }

    /// `B_{n,d}` without the positive semi-definiteness check.
    pub fn raw_schoenberg_matrix(&self, n: usize) -> DMatrix<f64> {
        match (&self.parts, &self.spec.family) {
            (
                Parts::Bivariate {
                    first,
                    cross,
                    second,
                    rho,
                },
                _,
            ) => {
                let off = rho * cross.schoenberg_coeff(n);
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[first.schoenberg_coeff(n), off, off, second.schoenberg_coeff(n)],
                )
            }
            (Parts::Finite, MultiFamily::Finite { matrices }) => matrices
                .get(n)
                .cloned()
                .unwrap_or_else(|| DMatrix::zeros(self.components(), self.components())),
            _ => unreachable!("parts and family always agree"),
        }
    }

    /// `B_{n,d}`, checked to be positive semi-definite.
    pub fn schoenberg_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        let b = self.raw_schoenberg_matrix(n);
        let min_eigenvalue = min_eigenvalue(&b);
        if min_eigenvalue < -psd_tolerance(&b) {
            return Err(Error::NotPositiveSemiDefinite {
                degree: n,
                min_eigenvalue,
            });
        }
        Ok(b)
    }

    /// `Γ_{n,d}` with `Γ Γᵀ = B_{n,d}`.
    pub fn factor(&self, n: usize) -> Result<SchoenbergFactor> {
        let b = self.schoenberg_matrix(n)?;
        let mut f = factor_schoenberg_matrix(&b).map_err(|e| match e {
            Error::Indefinite { min_eigenvalue } => Error::NotPositiveSemiDefinite {
                degree: n,
                min_eigenvalue,
            },
            other => other,
        })?;
        f.degree = n;
        Ok(f)
    }

    /// Largest-degree nonzero matrix for finite sequences.
    pub fn last_degree(&self) -> Option<usize> {
        match &self.spec.family {
            MultiFamily::Finite { matrices } => matrices.iter().rposition(|m| m.amax() > 0.0),
            _ => None,
        }
    }

    /// Matrix covariance `K(θ)`.
    pub fn eval(&self, theta: f64) -> Result<DMatrix<f64>> {
        match (&self.parts, &self.spec.family) {
            (
                Parts::Bivariate {
                    first,
                    cross,
                    second,
                    rho,
                },
                _,
            ) => {
                let off = rho * cross.eval(theta)?;
                Ok(DMatrix::from_row_slice(
                    2,
                    2,
                    &[first.eval(theta)?, off, off, second.eval(theta)?],
                ))
            }
            (Parts::Finite, MultiFamily::Finite { matrices }) => {
                if !(0.0..=PI).contains(&theta) {
                    return Err(domain(format!("θ must lie in [0, π], got {theta}")));
                }
                let p = self.components();
                let mut out = DMatrix::zeros(p, p);
                for (n, b) in matrices.iter().enumerate() {
                    out += b * shape_value(self.spec.dim, n, theta);
                }
                Ok(out)
            }
            _ => unreachable!("parts and family always agree"),
        }
    }

    pub fn variance(&self) -> Result<DMatrix<f64>> {
        self.eval(0.0)
    }
}

impl fmt::Display for MultiCovarianceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec)
    }
}

/// `G_n^{(d−1)/2}(cos θ)`, or `cos(nθ)` on the circle.
pub(crate) fn shape_value(d: usize, n: usize, theta: f64) -> f64 {
    if d == 1 {
        (n as f64 * theta).cos()
    } else {
        crate::gegenbauer::eval_unchecked(sphere_lambda(d), n, theta.cos().clamp(-1.0, 1.0))
    }
}

fn psd_tolerance(b: &DMatrix<f64>) -> f64 {
    1e-12 * b.trace().abs()
}

fn min_eigenvalue(b: &DMatrix<f64>) -> f64 {
    if b.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(b.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `Γ_{n,d}` and its columns `γ^{(i)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchoenbergFactor {
    pub degree: usize,
    pub gamma: DMatrix<f64>,
}

impl SchoenbergFactor {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.gamma.column(i).iter().copied().collect()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.gamma * self.gamma.transpose()
    }
}

/// Factor a symmetric positive semi-definite matrix as `Γ Γᵀ`.
///
/// Lower Cholesky when the matrix is numerically positive definite;
/// otherwise the symmetric square root from an eigendecomposition with
/// slightly negative eigenvalues clamped to zero. Eigenvalues below
/// `−1e−12 · trace` are an error.
pub fn factor_schoenberg_matrix(b: &DMatrix<f64>) -> Result<SchoenbergFactor> {
    if !b.is_square() {
        return Err(domain("Schoenberg matrix must be square"));
    }
    if !is_symmetric(b) {
        return Err(domain("Schoenberg matrix must be symmetric"));
    }
    if let Some(chol) = b.clone().cholesky() {
        let gamma = chol.l();
        let residual = (&gamma * gamma.transpose() - b).amax();
        if residual <= 1e-13 * b.amax().max(f64::MIN_POSITIVE) {
            return Ok(SchoenbergFactor { degree: 0, gamma });
        }
    }
    let eig = SymmetricEigen::new(b.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -psd_tolerance(b) {
        return Err(Error::Indefinite {
            min_eigenvalue: min,
        });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let gamma = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
    Ok(SchoenbergFactor { degree: 0, gamma })
}
