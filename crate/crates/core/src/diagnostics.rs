//! Statistical checks of simulated fields: lag-binned empirical covariance,
//! third absolute moments of waves, the Berry–Esséen bound on the distance
//! to normality, Kolmogorov–Smirnov distances and the duplication identity.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;

use crate::covariance::{CovarianceModel, MultiCovarianceModel};
use crate::degree::DegreeDistribution;
use crate::error::{domain, Result};
use crate::gegenbauer::{eval_normalized, eval_unchecked, ln_gegenbauer_at_one, sphere_lambda};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::simulator::Realization;
use crate::special::{ln_gamma, normal_cdf, polar_half_normalizer};
use crate::sphere::{geodesic, sample_pole, SpherePoint};

/// Upper Berry–Esséen constant.
pub const BERRY_ESSEEN_XI: f64 = 0.4748;

/// Lower bound on the best possible Berry–Esséen constant (documentation only).
pub const BERRY_ESSEEN_XI_LOWER: f64 = 0.4097;

pub const DEFAULT_LAG_BINS: usize = 20;

/// Relative accuracy of [`mu3_gegenbauer`].
pub const MU3_TOLERANCE: f64 = 1e-8;

/// Lag-binned covariance estimates for every component pair `i ≤ j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub bins: usize,
    pub components: usize,
    /// Number of point pairs per bin.
    pub counts: Vec<usize>,
    // geodesic distances of the pairs in each bin
    lags: Vec<Vec<f64>>,
    // [bin][pair] with pairs in the order (0,0), (0,1), …, (0,p−1), (1,1), …
    estimates: Vec<Vec<f64>>,
    errors: Vec<Vec<f64>>,
}

impl CovarianceEstimate {
    pub fn bin_center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * PI / self.bins as f64
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.components - i * (i + 1) / 2 + j
    }

    /// Mean of `Z_i(x) Z_j(y)` over pairs in `bin`; `None` for an empty bin.
    pub fn estimate(&self, bin: usize, i: usize, j: usize) -> Option<f64> {
        (self.counts[bin] > 0).then(|| self.estimates[bin][self.pair_index(i, j)])
    }

    /// Standard error from the spread across realizations.
    pub fn standard_error(&self, bin: usize, i: usize, j: usize) -> Option<f64> {
        (self.counts[bin] > 0).then(|| self.errors[bin][self.pair_index(i, j)])
    }

    pub fn empty_bins(&self) -> Vec<usize> {
        (0..self.bins).filter(|&b| self.counts[b] == 0).collect()
    }

    /// Expected value of the estimate in `bin`: the model averaged over the
    /// lags of the pairs in the bin. Unlike the model at the bin center it
    /// carries no binning bias.
    pub fn expected(&self, bin: usize, i: usize, j: usize, theory: impl Fn(f64, usize, usize) -> f64) -> f64 {
        let lags = &self.lags[bin];
        lags.iter().map(|&t| theory(t, i, j)).sum::<f64>() / lags.len() as f64
    }

    /// Largest `|estimate − expected| / SE` over non-empty bins and pairs,
    /// with `theory(ϑ, i, j)` the model covariance.
    pub fn max_standardized_deviation(&self, theory: impl Fn(f64, usize, usize) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        for b in 0..self.bins {
            for i in 0..self.components {
                for j in i..self.components {
                    if let (Some(e), Some(se)) = (self.estimate(b, i, j), self.standard_error(b, i, j)) {
                        let dev = (e - self.expected(b, i, j, &theory)).abs();
                        worst = worst.max(if se > 0.0 { dev / se } else if dev > 0.0 { f64::INFINITY } else { 0.0 });
                    }
                }
            }
        }
        worst
    }

    /// CSV with columns `bin,center,i,j,count,estimate,theoretical,se`
    /// (components 1-based); `theoretical` is [`Self::expected`]. Empty
    /// bins are written with `nan` values.
    pub fn to_csv(&self, theory: impl Fn(f64, usize, usize) -> f64) -> String {
        let mut out = String::from("bin,center,i,j,count,estimate,theoretical,se\n");
        for b in 0..self.bins {
            let c = self.bin_center(b);
            for i in 0..self.components {
                for j in i..self.components {
                    let e = self.estimate(b, i, j).unwrap_or(f64::NAN);
                    let se = self.standard_error(b, i, j).unwrap_or(f64::NAN);
                    let k = if self.counts[b] > 0 { self.expected(b, i, j, &theory) } else { f64::NAN };
                    let _ = writeln!(
                        out,
                        "{b},{c:.16e},{},{},{},{e:.16e},{k:.16e},{se:.16e}",
                        i + 1,
                        j + 1,
                        self.counts[b],
                    );
                }
            }
        }
        out
    }
}

/// Lag-binned estimate of `E[Z_i(x) Z_j(y)]` over `M ≥ 2` realizations
/// sharing one point set. Each pair contributes the symmetrized product
/// `(Z_i(x)Z_j(y) + Z_j(x)Z_i(y))/2` to the bin of `ϑ(x, y)`; `bins`
/// equal-width bins partition `[0, π]`.
pub fn empirical_covariance(
    realizations: &[Realization],
    pairs: &[(usize, usize)],
    bins: usize,
) -> Result<CovarianceEstimate> {
    let m = realizations.len();
    if m < 2 {
        return Err(domain("empirical covariance needs at least two realizations"));
    }
    if bins == 0 {
        return Err(domain("need at least one lag bin"));
    }
    let first = &realizations[0];
    let p = first.components();
    if realizations
        .iter()
        .any(|r| r.points != first.points || r.components() != p)
    {
        return Err(domain("realizations must share points and component count"));
    }
    let n_points = first.points.len();
    if pairs.iter().any(|&(x, y)| x >= n_points || y >= n_points) {
        return Err(domain("pair index beyond the point set"));
    }
    let mut lags = vec![Vec::new(); bins];
    let pair_bins: Vec<usize> = pairs
        .iter()
        .map(|&(x, y)| {
            let theta = geodesic(&first.points.point(x), &first.points.point(y));
            let b = ((theta / PI * bins as f64) as usize).min(bins - 1);
            lags[b].push(theta);
            b
        })
        .collect();
    let counts: Vec<usize> = lags.iter().map(Vec::len).collect();
    let n_pairs = p * (p + 1) / 2;
    // per realization bin means, then moments across realizations
    let mut sum = vec![vec![0.0; n_pairs]; bins];
    let mut sum_sq = vec![vec![0.0; n_pairs]; bins];
    let mut current = vec![vec![0.0; n_pairs]; bins];
    for r in realizations {
        current.iter_mut().for_each(|row| row.iter_mut().for_each(|v| *v = 0.0));
        for (&(x, y), &b) in pairs.iter().zip(&pair_bins) {
            let mut k = 0;
            for i in 0..p {
                for j in i..p {
                    let prod = 0.5 * (r.value(x, i) * r.value(y, j) + r.value(x, j) * r.value(y, i));
                    current[b][k] += prod;
                    k += 1;
                }
            }
        }
        for b in 0..bins {
            if counts[b] == 0 {
                continue;
            }
            for k in 0..n_pairs {
                let mean = current[b][k] / counts[b] as f64;
                sum[b][k] += mean;
                sum_sq[b][k] += mean * mean;
            }
        }
    }
    let mf = m as f64;
    let mut estimates = vec![vec![f64::NAN; n_pairs]; bins];
    let mut errors = vec![vec![f64::NAN; n_pairs]; bins];
    for b in 0..bins {
        if counts[b] == 0 {
            continue;
        }
        for k in 0..n_pairs {
            let mean = sum[b][k] / mf;
            let var = ((sum_sq[b][k] - mf * mean * mean) / (mf - 1.0)).max(0.0);
            estimates[b][k] = mean;
            errors[b][k] = (var / mf).sqrt();
        }
    }
    Ok(CovarianceEstimate {
        bins,
        components: p,
        counts,
        lags,
        estimates,
        errors,
    })
}

/// Zeros of `φ ↦ G_n(cos φ)` inside `]0, π/2[`, located by a sign-change
/// scan followed by bisection.
fn gegenbauer_zeros(lambda: f64, n: usize) -> Vec<f64> {
    let h = |phi: f64| eval_normalized(lambda, n, phi.cos());
    let grid = 8 * (n + 1) + 32;
    let step = 0.5 * PI / grid as f64;
    let mut zeros = Vec::new();
    let mut left = (step * 1e-9, h(step * 1e-9));
    for k in 1..grid {
        let x = step * k as f64;
        let right = (x, h(x));
        if left.1 == 0.0 {
            zeros.push(left.0);
        } else if left.1 * right.1 < 0.0 {
            let (mut a, mut b, fa) = (left.0, right.0, left.1);
            for _ in 0..40 {
                let mid = 0.5 * (a + b);
                if h(mid) * fa > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        left = right;
    }
    zeros
}

/// `ln E|h_n(ωᵀx)|³` with `h_n = G_n / G_n(1)`.
fn ln_mu3_normalized(n: usize, d: usize) -> Result<f64> {
    let lambda = sphere_lambda(d);
    let mut breaks = vec![0.0];
    breaks.extend(gegenbauer_zeros(lambda, n));
    breaks.push(0.5 * PI);
    let power = d as i32 - 1;
    let integrand = |phi: f64| eval_normalized(lambda, n, phi.cos()).abs().powi(3) * phi.sin().powi(power);
    let est = integrate_with_breaks(integrand, &breaks, Tolerance::relative(MU3_TOLERANCE))?;
    Ok(polar_half_normalizer(d).ln() + est.value.ln())
}

/// `ln μ₃^G(n) = ln E|G_n^{(d−1)/2}(ωᵀx)|³` for uniform `ω` on `S^d`.
pub fn ln_mu3_gegenbauer(n: usize, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(domain("third moments of Gegenbauer waves need d ≥ 2"));
    }
    Ok(3.0 * ln_gegenbauer_at_one(sphere_lambda(d), n)? + ln_mu3_normalized(n, d)?)
}

/// `μ₃^G(n) = (2Γ((d+1)/2)/(√π Γ(d/2))) ∫_0^{π/2} |G_n(cos φ)|³ sin^{d−1}φ dφ`,
/// to relative accuracy `1e−8`.
pub fn mu3_gegenbauer(n: usize, d: usize) -> Result<f64> {
    ln_mu3_gegenbauer(n, d).map(f64::exp)
}

/// `ln` of an upper bound on `μ₃^G(n)`.
///
/// On `S²` the Legendre bound `|P_n(cos φ)| ≤ √(2/(nπ sin φ))` integrates to
/// `(2/(nπ))^{3/2} · √π Γ(1/4) / (2 Γ(3/4))`; on `S³` the Chebyshev bound
/// `π⁵/48 + π² ln(n+1)/2`; otherwise `|G| ≤ G(1)` together with
/// `E G_n² = G_n(1) (d−1)/(2n+d−1)`.
pub fn ln_mu3_gegenbauer_bound(n: usize, d: usize) -> f64 {
    let lambda = sphere_lambda(d);
    let moment = || 2.0 * ln_gegenbauer_at_one(lambda, n).expect("λ > 0") + ((d as f64 - 1.0) / (2.0 * n as f64 + d as f64 - 1.0)).ln();
    match (d, n) {
        (_, 0) => 0.0,
        (2, _) => {
            let legendre = 1.5 * (2.0 / (n as f64 * PI)).ln() + 0.5 * PI.ln() + ln_gamma(0.25)
                - std::f64::consts::LN_2
                - ln_gamma(0.75);
            legendre.min(moment())
        }
        (3, _) => (PI.powi(5) / 48.0 + PI * PI * (n as f64 + 1.0).ln() / 2.0).ln().min(moment()),
        _ => moment(),
    }
}

/// The commonly quoted bound on `μ₃^G(n)` for `S²`, `(2/(nπ))^{3/2} Γ(1/4)/(π Γ(3/4))`.
/// It misses a factor and fails from `n = 16` on; kept for comparison.
pub fn uncorrected_legendre_mu3_bound(n: usize) -> f64 {
    (2.0 / (n as f64 * PI)).powf(1.5) * (ln_gamma(0.25) - ln_gamma(0.75)).exp() / PI
}

/// Outcome of summing a third-moment series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mu3 {
    Finite {
        /// Sum of the terms `n ≤ n_max`.
        value: f64,
        /// Bound on the omitted terms.
        tail_bound: f64,
        n_max: usize,
    },
    /// The bound on the terms does not decay fast enough to be summable;
    /// `exponent` is the fitted power of `n` of the bounding terms.
    Divergent { partial: f64, exponent: f64, n_max: usize },
}

impl Mu3 {
    pub fn value(&self) -> Option<f64> {
        match self {
            Mu3::Finite { value, .. } => Some(*value),
            Mu3::Divergent { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Mu3::Finite { .. })
    }
}

/// Third-moment series of one component of a wave: `Σ_n w(n) μ₃^G(n)`
/// over `n ≤ n_max` with `a_n > 0`, plus a tail from `w̄(n) μ̄₃^G(n)`.
struct Series<'a> {
    d: usize,
    degrees: &'a DegreeDistribution,
    // ln of the exact weight of μ₃^G(n) and of a bound on it
    ln_weight: Box<dyn Fn(usize) -> Result<f64> + 'a>,
    ln_weight_bound: Box<dyn Fn(usize) -> f64 + 'a>,
}

impl Series<'_> {
    fn sum(&self, n_max: usize) -> Result<Mu3> {
        let last = self.degrees.last_degree();
        let top = last.map_or(n_max, |l| l.min(n_max));
        let mut value = 0.0;
        for n in 0..=top {
            if self.degrees.pmf(n) <= 0.0 {
                continue;
            }
            let lw = (self.ln_weight)(n)?;
            if lw == f64::NEG_INFINITY {
                continue;
            }
            value += (lw + ln_mu3_gegenbauer(n, self.d)?).exp();
        }
        if last.is_some_and(|l| l <= n_max) {
            return Ok(Mu3::Finite {
                value,
                tail_bound: 0.0,
                n_max,
            });
        }
        let term = |n: usize| -> f64 {
            if self.degrees.pmf(n) <= 0.0 {
                return 0.0;
            }
            ((self.ln_weight_bound)(n) + ln_mu3_gegenbauer_bound(n, self.d)).exp()
        };
        let far = 16 * n_max.max(4);
        let mut explicit = 0.0;
        for n in n_max + 1..=far {
            explicit += term(n);
        }
        // the odd-only laws leave every other term zero: compare like with like
        let (hi, mid) = (odd_or_even(far, self.degrees), odd_or_even(far / 2, self.degrees));
        let (t_hi, t_mid) = (term(hi), term(mid));
        if t_hi == 0.0 {
            return Ok(Mu3::Finite {
                value,
                tail_bound: explicit,
                n_max,
            });
        }
        let exponent = (t_hi / t_mid).ln() / (hi as f64 / mid as f64).ln();
        // terms ~ n^q: the sum over the support (density 1 or 1/2) converges iff q < −1
        if !(exponent < -1.0) || !t_hi.is_finite() {
            return Ok(Mu3::Divergent {
                partial: value,
                exponent,
                n_max,
            });
        }
        let density = if hi == far { 1.0 } else { 0.5 };
        let power_tail = density * t_hi * hi as f64 / (-exponent - 1.0);
        let step = odd_or_even(hi - 2, self.degrees);
        let ratio = (t_hi / term(step).max(f64::MIN_POSITIVE)).powf(1.0 / (hi - step) as f64);
        let geometric_tail = if ratio < 1.0 {
            t_hi * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        Ok(Mu3::Finite {
            value,
            tail_bound: explicit + power_tail.max(geometric_tail.min(power_tail * 1e6)).min(power_tail.max(geometric_tail)),
            n_max,
        })
    }
}

/// Largest degree `≤ n` in the support pattern of `degrees` (odd laws skip
/// even degrees).
fn odd_or_even(n: usize, degrees: &DegreeDistribution) -> usize {
    if degrees.pmf(n) > 0.0 || n == 0 {
        n
    } else {
        n - 1
    }
}

/// `μ₃^Z` of one scalar wave with Rademacher sign:
/// `(d−1)^{−3/2} Σ_n b_n^{3/2} (2n+d−1)^{3/2} μ₃^G(n) / a_n^{1/2}`.
pub fn mu3_wave(model: &CovarianceModel, degrees: &DegreeDistribution, n_max: usize) -> Result<Mu3> {
    let d = model.dim();
    if d < 2 {
        return Err(domain("third moments of Gegenbauer waves need d ≥ 2"));
    }
    let base = move |n: usize| -> f64 {
        1.5 * ((2.0 * n as f64 + d as f64 - 1.0).ln() - (d as f64 - 1.0).ln()) - 0.5 * degrees.ln_pmf(n)
    };
    let series = Series {
        d,
        degrees,
        ln_weight: Box::new(move |n| Ok(1.5 * model.ln_schoenberg_coeff(n) + base(n))),
        ln_weight_bound: Box::new(move |n| 1.5 * model.ln_schoenberg_coeff(n) + base(n)),
    };
    series.sum(n_max)
}

/// `μ₃` of component `j` of one vector wave:
/// `Σ_n a_n (p(2n+d−1)/(a_n(d−1)))^{3/2} (1/p) Σ_ι |γ^{(ι)}_{j}|³ μ₃^G(n)`.
pub fn mu3_wave_component(
    model: &MultiCovarianceModel,
    degrees: &DegreeDistribution,
    component: usize,
    n_max: usize,
) -> Result<Mu3> {
    let d = model.dim();
    let p = model.components();
    if d < 2 {
        return Err(domain("third moments of Gegenbauer waves need d ≥ 2"));
    }
    if component >= p {
        return Err(domain(format!("component {component} out of range for p = {p}")));
    }
    let base = move |n: usize| -> f64 {
        let ln_a = degrees.ln_pmf(n);
        ln_a + 1.5 * ((p as f64).ln() + (2.0 * n as f64 + d as f64 - 1.0).ln() - ln_a - (d as f64 - 1.0).ln())
    };
    let series = Series {
        d,
        degrees,
        ln_weight: Box::new(move |n| {
            let gamma = model.factor(n)?.gamma;
            let cubes: f64 = (0..p).map(|i| gamma[(component, i)].abs().powi(3)).sum::<f64>() / p as f64;
            Ok(cubes.ln() + base(n))
        }),
        // |γ_{jι}|³ ≤ B_jj^{3/2}
        ln_weight_bound: Box::new(move |n| {
            let bjj = model.raw_schoenberg_matrix(n)[(component, component)];
            1.5 * bjj.ln() + base(n)
        }),
    };
    series.sum(n_max)
}

/// Doubles `n_max` from `start` until the tail bound is below `rel` times
/// the value or `cap` is reached.
pub fn mu3_auto(mut compute: impl FnMut(usize) -> Result<Mu3>, start: usize, cap: usize, rel: f64) -> Result<Mu3> {
    let mut n_max = start.max(1);
    loop {
        let r = compute(n_max)?;
        match r {
            Mu3::Divergent { .. } => return Ok(r),
            Mu3::Finite { value, tail_bound, .. } => {
                if tail_bound <= rel * value || n_max >= cap {
                    return Ok(r);
                }
            }
        }
        n_max = (2 * n_max).min(cap);
    }
}

/// `ξ μ₃ / (σ³ √L)` with `ξ = 0.4748`.
pub fn berry_esseen_bound(mu3: f64, sigma: f64, waves: usize) -> f64 {
    BERRY_ESSEEN_XI * mu3 / (sigma.powi(3) * (waves as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerryEsseenReport {
    pub mu3: f64,
    pub sigma: f64,
    pub waves: usize,
    pub bound: f64,
    pub ks: Option<f64>,
}

impl BerryEsseenReport {
    pub fn new(mu3: f64, sigma: f64, waves: usize) -> Self {
        Self {
            mu3,
            sigma,
            waves,
            bound: berry_esseen_bound(mu3, sigma, waves),
            ks: None,
        }
    }
}

/// One-sample Kolmogorov–Smirnov distance of `samples / σ` from `N(0, 1)`.
pub fn ks_normality(samples: &[f64], sigma: f64) -> Result<f64> {
    if samples.len() < 100 {
        return Err(domain("KS distance needs at least 100 samples"));
    }
    if !(sigma > 0.0) {
        return Err(domain("σ must be positive"));
    }
    let mut z: Vec<f64> = samples.iter().map(|x| x / sigma).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    Ok(z.iter().enumerate().fold(0.0, |acc: f64, (i, x)| {
        let f = normal_cdf(*x);
        acc.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f)
    }))
}

/// Scale of the KS statistic's sampling error, `1/√n`.
pub fn ks_sampling_error(n: usize) -> f64 {
    1.0 / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuplicationCheck {
    pub mean: f64,
    pub standard_error: f64,
    /// `δ_{nk} (d−1)/(2n+d−1) G_n(x₁ᵀx₂)`.
    pub expected: f64,
}

impl DuplicationCheck {
    pub fn deviation_in_se(&self) -> f64 {
        let dev = (self.mean - self.expected).abs();
        if self.standard_error > 0.0 {
            dev / self.standard_error
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Monte Carlo check of `E_ω[G_n(ωᵀx₁) G_k(ωᵀx₂)] = δ_{nk} (d−1)/(2n+d−1) G_n(x₁ᵀx₂)`
/// over `draws ≥ 10⁴` uniform poles.
pub fn duplication_check<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    x1: &SpherePoint,
    x2: &SpherePoint,
    draws: usize,
    rng: &mut R,
) -> Result<DuplicationCheck> {
    let d = x1.dim();
    if d < 2 || x2.dim() != d {
        return Err(domain("duplication check needs two points on the same S^d, d ≥ 2"));
    }
    if draws < 10_000 {
        return Err(domain("duplication check needs at least 10⁴ draws"));
    }
    let lambda = sphere_lambda(d);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        let w = sample_pole(d, rng);
        let v = eval_unchecked(lambda, n, w.dot(x1).clamp(-1.0, 1.0)) * eval_unchecked(lambda, k, w.dot(x2).clamp(-1.0, 1.0));
        s += v;
        s2 += v * v;
    }
    let m = draws as f64;
    let mean = s / m;
    let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
    let expected = if n == k {
        (d as f64 - 1.0) / (2.0 * n as f64 + d as f64 - 1.0) * eval_unchecked(lambda, n, x1.dot(x2).clamp(-1.0, 1.0))
    } else {
        0.0
    };
    Ok(DuplicationCheck {
        mean,
        standard_error: (var / m).sqrt(),
        expected,
    })
}
