//! Wave-degree laws `{a_n}`: probabilities, exact samplers, and the choice
//! of a law that keeps the third absolute moment of one wave finite.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::covariance::{CovarianceModel, Decay, MultiCovarianceModel, MultiFamily, NUMERIC_ZERO};
use crate::error::{domain, Error, Result};
use crate::gegenbauer::{ln_gegenbauer_at_one, sphere_lambda};
use crate::special::{power_sum_tail, riemann_zeta};

/// Exponent used when the polynomial-decay interval gives no better guidance.
pub const DEFAULT_ZETA_EXPONENT: f64 = 2.0;

// Zeta proposals at or beyond 2^53 are no longer exact integers.
const MAX_ZETA_PROPOSAL: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Finite { pmf: Vec<f64>, cdf: Vec<f64> },
    Geometric { p: f64 },
    ShiftedZeta { s: f64, zeta: f64 },
    OddShiftedZeta { s: f64, zeta: f64 },
}

/// A probability law on wave degrees `κ ∈ ℕ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    kind: Kind,
}

impl DegreeDistribution {
    /// A finite law; `pmf` must sum to one within `1e−12`.
    pub fn finite(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(domain("finite pmf needs nonnegative finite entries"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("finite pmf sums to {total}, not 1")));
        }
        Ok(Self::finite_unchecked(pmf))
    }

    /// A finite law proportional to nonnegative `weights`.
    pub fn finite_from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(domain("weights must be nonnegative and finite"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(domain("weights sum to zero"));
        }
        Ok(Self::finite_unchecked(weights.iter().map(|w| w / total).collect()))
    }

    fn finite_unchecked(pmf: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cdf = pmf
            .iter()
            .map(|a| {
                acc += a;
                acc
            })
            .collect();
        Self {
            kind: Kind::Finite { pmf, cdf },
        }
    }

    /// `a_n = p (1−p)ⁿ` on `n ≥ 0`.
    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("geometric success probability must lie in ]0,1[, got {p}")));
        }
        Ok(Self {
            kind: Kind::Geometric { p },
        })
    }

    /// `a_n = (n+1)^{−s} / ζ(s)` on `n ≥ 0`.
    pub fn shifted_zeta(s: f64) -> Result<Self> {
        check_exponent(s)?;
        Ok(Self {
            kind: Kind::ShiftedZeta {
                s,
                zeta: riemann_zeta(s),
            },
        })
    }

    /// `a_{2m+1} = (m+1)^{−s} / ζ(s)` on odd degrees.
    pub fn odd_shifted_zeta(s: f64) -> Result<Self> {
        check_exponent(s)?;
        Ok(Self {
            kind: Kind::OddShiftedZeta {
                s,
                zeta: riemann_zeta(s),
            },
        })
    }

    /// `a_n`; zero outside the support.
    pub fn pmf(&self, n: usize) -> f64 {
        match &self.kind {
            Kind::Finite { pmf, .. } => pmf.get(n).copied().unwrap_or(0.0),
            _ => self.ln_pmf(n).exp(),
        }
    }

    /// `ln a_n`, `−∞` outside the support.
    pub fn ln_pmf(&self, n: usize) -> f64 {
        match &self.kind {
            Kind::Finite { pmf, .. } => pmf.get(n).map_or(f64::NEG_INFINITY, |a| a.ln()),
            Kind::Geometric { p } => p.ln() + n as f64 * (-p).ln_1p(),
            Kind::ShiftedZeta { s, zeta } => -s * (n as f64 + 1.0).ln() - zeta.ln(),
            Kind::OddShiftedZeta { s, zeta } => {
                if n % 2 == 0 {
                    f64::NEG_INFINITY
                } else {
                    -s * (((n + 1) / 2) as f64).ln() - zeta.ln()
                }
            }
        }
    }

    /// `P(κ > n)`, computed analytically for the infinite laws.
    pub fn tail_mass(&self, n: usize) -> f64 {
        match &self.kind {
            Kind::Finite { pmf, .. } => pmf.iter().skip(n + 1).sum(),
            Kind::Geometric { p } => ((n as f64 + 1.0) * (-p).ln_1p()).exp(),
            // Σ_{k ≥ n+2} k^{−s}
            Kind::ShiftedZeta { s, zeta } => zeta_tail(*s, n + 2) / zeta,
            // odd κ = 2m+1 > n means m+1 ≥ ⌊n/2⌋ + 1 + 1
            Kind::OddShiftedZeta { s, zeta } => zeta_tail(*s, n / 2 + 2 - usize::from(n % 2 == 0)) / zeta,
        }
    }

    /// Mean of the law (infinite for zeta exponents `s ≤ 2`).
    pub fn mean(&self) -> f64 {
        match &self.kind {
            Kind::Finite { pmf, .. } => pmf.iter().enumerate().map(|(n, a)| n as f64 * a).sum(),
            Kind::Geometric { p } => (1.0 - p) / p,
            Kind::ShiftedZeta { s, zeta } if *s > 2.0 => riemann_zeta(s - 1.0) / zeta - 1.0,
            Kind::OddShiftedZeta { s, zeta } if *s > 2.0 => 2.0 * riemann_zeta(s - 1.0) / zeta - 1.0,
            _ => f64::INFINITY,
        }
    }

    /// The exponent `s` of the zeta laws.
    pub fn zeta_exponent(&self) -> Option<f64> {
        match &self.kind {
            Kind::ShiftedZeta { s, .. } | Kind::OddShiftedZeta { s, .. } => Some(*s),
            _ => None,
        }
    }

    /// Largest degree with positive mass, if the support is finite.
    pub fn last_degree(&self) -> Option<usize> {
        match &self.kind {
            Kind::Finite { pmf, .. } => pmf.iter().rposition(|a| *a > 0.0),
            _ => None,
        }
    }

    /// Draws one degree. Exact: no truncation of the support.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.kind {
            Kind::Finite { cdf, .. } => {
                let total = *cdf.last().expect("non-empty pmf");
                let u = rng.random::<f64>() * total;
                let idx = cdf.partition_point(|c| *c <= u);
                // rounding can leave u ≥ last cdf entry; fall back to the last positive mass
                idx.min(self.last_degree().unwrap_or(0))
            }
            Kind::Geometric { p } => {
                let u = 1.0 - rng.random::<f64>();
                (u.ln() / (-p).ln_1p()).floor() as usize
            }
            Kind::ShiftedZeta { s, .. } => sample_zeta(*s, rng) - 1,
            Kind::OddShiftedZeta { s, .. } => 2 * sample_zeta(*s, rng) - 1,
        }
    }
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(domain(format!("zeta exponent must exceed 1, got {s}")));
    }
    Ok(())
}

/// `Σ_{k ≥ start} k^{−s}` for `start ≥ 1`.
fn zeta_tail(s: f64, start: usize) -> f64 {
    const SWITCH: usize = 16;
    if start >= SWITCH {
        power_sum_tail(s, start)
    } else {
        (start..SWITCH).map(|k| (k as f64).powf(-s)).sum::<f64>() + power_sum_tail(s, SWITCH)
    }
}

/// Zeta law `P(X = k) = k^{−s}/ζ(s)`, `k ≥ 1`, by rejection from the
/// continuous Pareto envelope.
fn sample_zeta<R: Rng + ?Sized>(s: f64, rng: &mut R) -> usize {
    let b = (s - 1.0).exp2();
    loop {
        let u = 1.0 - rng.random::<f64>();
        let v = rng.random::<f64>();
        let x = u.powf(-1.0 / (s - 1.0)).floor();
        if !(x.is_finite() && x < MAX_ZETA_PROPOSAL) {
            continue;
        }
        let t = (1.0 + 1.0 / x).powf(s - 1.0);
        if v * x * (t - 1.0) / (b - 1.0) <= t / b {
            return x as usize;
        }
    }
}

impl fmt::Display for DegreeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Finite { pmf, .. } => {
                let list: Vec<String> = pmf.iter().map(|a| a.to_string()).collect();
                write!(f, "finite:{}", list.join(","))
            }
            Kind::Geometric { p } => write!(f, "geometric:{p}"),
            Kind::ShiftedZeta { s, .. } => write!(f, "zeta:{s}"),
            Kind::OddShiftedZeta { s, .. } => write!(f, "odd-zeta:{s}"),
        }
    }
}

impl FromStr for DegreeDistribution {
    type Err = Error;

    /// Parses `geometric:P`, `zeta:S`, `odd-zeta:S` or `finite:A0,A1,...`
    /// (finite weights are normalized).
    fn from_str(text: &str) -> Result<Self> {
        let (name, arg) = text
            .split_once(':')
            .ok_or_else(|| domain(format!("degree law `{text}` is missing `:PARAM`")))?;
        let number = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| domain(format!("`{s}` is not a number in degree law `{text}`")))
        };
        match name.trim() {
            "geometric" => Self::geometric(number(arg)?),
            "zeta" => Self::shifted_zeta(number(arg)?),
            "odd-zeta" => Self::odd_shifted_zeta(number(arg)?),
            "finite" => {
                let weights = arg.split(',').map(number).collect::<Result<Vec<_>>>()?;
                Self::finite_from_weights(&weights)
            }
            other => Err(domain(format!("unknown degree law `{other}`"))),
        }
    }
}

/// Which of the three convergence regimes a Schoenberg sequence falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// Finitely many nonzero coefficients.
    FiniteSupport,
    /// `limsup ⁿ√b_n = r < 1`.
    GeometricDecay,
    /// `b_n = O(n^{−θ})`.
    PolynomialDecay,
}

impl Case {
    pub fn number(self) -> u8 {
        match self {
            Case::FiniteSupport => 1,
            Case::GeometricDecay => 2,
            Case::PolynomialDecay => 3,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Case {}", self.number())
    }
}

pub const UNBOUNDED_WARNING: &str = "Berry-Esséen bound not guaranteed finite";

/// A recommended degree law with the reasoning behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub case: Case,
    pub distribution: DegreeDistribution,
    /// `r` for geometric decay; the law satisfies `1−p ≥ r³`.
    pub rate: Option<f64>,
    /// `θ` for polynomial decay.
    pub theta: Option<f64>,
    /// Upper end of the admissible open interval `]1, θ′_max[`.
    pub theta_prime_max: Option<f64>,
    pub warning: Option<&'static str>,
}

impl Recommendation {
    pub fn interval_is_empty(&self) -> bool {
        self.theta_prime_max.is_some_and(|m| m <= 1.0)
    }
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.case, self.distribution)?;
        if let Some(r) = self.rate {
            write!(f, " (r = {r}, need 1-p >= r^3 = {})", r.powi(3))?;
        }
        if let (Some(theta), Some(max)) = (self.theta, self.theta_prime_max) {
            write!(f, " (theta = {theta}, theta' in ]1, {max}[)")?;
        }
        if let Some(w) = self.warning {
            write!(f, " [{w}]")?;
        }
        Ok(())
    }
}

/// Upper end of the admissible zeta-exponent interval for `b_n = O(n^{−θ})`
/// on `S^d`.
pub fn theta_prime_max(theta: f64, d: usize) -> f64 {
    match d {
        0 | 1 | 2 => 3.0 * theta - 2.0,
        3 => 3.0 * theta - 5.0,
        _ => 3.0 * theta - 5.0 - 6.0 * ((d - 1) / 2) as f64,
    }
}

fn zeta_choice(theta: f64, d: usize, odd_only: bool) -> Recommendation {
    let max = theta_prime_max(theta, d);
    let empty = max <= 1.0;
    let s = if empty {
        DEFAULT_ZETA_EXPONENT
    } else {
        DEFAULT_ZETA_EXPONENT.min(0.5 * (1.0 + max))
    };
    let distribution = if odd_only {
        DegreeDistribution::odd_shifted_zeta(s)
    } else {
        DegreeDistribution::shifted_zeta(s)
    }
    .expect("exponent exceeds 1");
    Recommendation {
        case: Case::PolynomialDecay,
        distribution,
        rate: None,
        theta: Some(theta),
        theta_prime_max: Some(max),
        warning: empty.then_some(UNBOUNDED_WARNING),
    }
}

fn geometric_choice(rate: f64) -> Recommendation {
    Recommendation {
        case: Case::GeometricDecay,
        distribution: DegreeDistribution::geometric(1.0 - rate).expect("rate in ]0,1["),
        rate: Some(rate),
        theta: None,
        theta_prime_max: None,
        warning: None,
    }
}

fn finite_choice(weights: &[f64]) -> Recommendation {
    Recommendation {
        case: Case::FiniteSupport,
        distribution: DegreeDistribution::finite_from_weights(weights)
            .expect("validated models have positive mass"),
        rate: None,
        theta: None,
        theta_prime_max: None,
        warning: None,
    }
}

fn gegenbauer_one(d: usize, n: usize) -> f64 {
    if d == 1 {
        1.0
    } else {
        ln_gegenbauer_at_one(sphere_lambda(d), n)
            .expect("λ > 0 for d ≥ 2")
            .exp()
    }
}

/// Chooses a degree law giving a finite third moment for `model` whenever
/// the decay of its Schoenberg sequence allows one.
pub fn recommend_distribution(model: &CovarianceModel) -> Recommendation {
    let d = model.dim();
    match model.decay() {
        Decay::Finite { last } => {
            let weights: Vec<f64> = (0..=last).map(|n| model.variance_term(n)).collect();
            finite_choice(&weights)
        }
        Decay::Geometric { rate } => geometric_choice(rate),
        Decay::Polynomial { theta, odd_only } => zeta_choice(theta, d, odd_only),
    }
}

/// As [`recommend_distribution`] for a multivariate model.
pub fn recommend_distribution_multi(model: &MultiCovarianceModel) -> Recommendation {
    let d = model.dim();
    match &model.spec().family {
        MultiFamily::NegativeBinomial { delta11, delta22, .. } => {
            geometric_choice(delta11.max(*delta22))
        }
        MultiFamily::SpectralMatern { nu11, nu12, nu22, .. } => {
            let nu = nu11.min(*nu12).min(*nu22);
            zeta_choice(2.0 * nu + 1.0, d, false)
        }
        MultiFamily::Finite { matrices } => {
            let weights: Vec<f64> = matrices
                .iter()
                .enumerate()
                .map(|(n, b)| b.trace().max(0.0) * gegenbauer_one(d, n))
                .collect();
            finite_choice(&weights)
        }
    }
}

/// Checks `a_n > 0` wherever `b_n` exceeds [`NUMERIC_ZERO`], for `n ≤ n_max`.
pub fn support_covers(dist: &DegreeDistribution, model: &CovarianceModel, n_max: usize) -> Result<()> {
    covers(dist, n_max, |n| model.schoenberg_coeff(n) > NUMERIC_ZERO)
}

/// As [`support_covers`], with `B_n` nonzero when any entry exceeds the
/// threshold in magnitude.
pub fn support_covers_multi(
    dist: &DegreeDistribution,
    model: &MultiCovarianceModel,
    n_max: usize,
) -> Result<()> {
    covers(dist, n_max, |n| model.raw_schoenberg_matrix(n).amax() > NUMERIC_ZERO)
}

fn covers(dist: &DegreeDistribution, n_max: usize, needed: impl Fn(usize) -> bool) -> Result<()> {
    match (0..=n_max).find(|&n| dist.pmf(n) <= 0.0 && needed(n)) {
        Some(degree) => Err(Error::SupportNotCovered { degree }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{CovarianceSpec, MultiCovarianceSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::f64::consts::PI;

    fn model(spec: CovarianceSpec) -> CovarianceModel {
        CovarianceModel::new(spec).unwrap()
    }

    #[test]
    fn pmf_examples() {
        let z = DegreeDistribution::shifted_zeta(2.0).unwrap();
        assert!((z.pmf(0) - 6.0 / (PI * PI)).abs() < 1e-15);
        let g = DegreeDistribution::geometric(0.01).unwrap();
        assert!((g.pmf(0) - 0.01).abs() < 1e-17);
        let o = DegreeDistribution::odd_shifted_zeta(2.0).unwrap();
        assert_eq!(o.pmf(4), 0.0);
        assert!((o.pmf(1) - 6.0 / (PI * PI)).abs() < 1e-15);
        assert!((o.pmf(3) - 1.5 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn constructor_errors() {
        assert!(DegreeDistribution::geometric(0.0).is_err());
        assert!(DegreeDistribution::geometric(1.0).is_err());
        assert!(DegreeDistribution::shifted_zeta(1.0).is_err());
        assert!(DegreeDistribution::finite(vec![0.5, 0.4]).is_err());
        assert!(DegreeDistribution::finite(vec![0.5, -0.5, 1.0]).is_err());
        assert!(DegreeDistribution::finite_from_weights(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn pmf_plus_tail_brackets_one() {
        let laws = [
            DegreeDistribution::finite(vec![0.25, 0.25, 0.5]).unwrap(),
            DegreeDistribution::geometric(0.01).unwrap(),
            DegreeDistribution::geometric(0.7).unwrap(),
            DegreeDistribution::shifted_zeta(2.0).unwrap(),
            DegreeDistribution::shifted_zeta(1.3).unwrap(),
            DegreeDistribution::odd_shifted_zeta(2.0).unwrap(),
            DegreeDistribution::odd_shifted_zeta(3.5).unwrap(),
        ];
        for law in &laws {
            for n_max in [0usize, 1, 2, 7, 30, 1000, 20_001] {
                let head: f64 = (0..=n_max).map(|n| law.pmf(n)).sum();
                let total = head + law.tail_mass(n_max);
                assert!((total - 1.0).abs() < 1e-9, "{law} n_max={n_max}: {total}");
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["geometric:0.01", "zeta:2", "odd-zeta:1.5", "finite:0.25,0.75"] {
            let law: DegreeDistribution = text.parse().unwrap();
            assert_eq!(law.to_string(), text);
        }
        let law: DegreeDistribution = "finite:1,3".parse().unwrap();
        assert_eq!(law.pmf(1), 0.75);
        assert!("zeta".parse::<DegreeDistribution>().is_err());
        assert!("poisson:2".parse::<DegreeDistribution>().is_err());
        assert!("zeta:x".parse::<DegreeDistribution>().is_err());
    }

    #[test]
    fn degenerate_finite_law() {
        let law = DegreeDistribution::finite(vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| law.sample(&mut rng) == 0));
        let law = DegreeDistribution::finite(vec![0.0, 0.0, 1.0]).unwrap();
        assert!((0..1000).all(|_| law.sample(&mut rng) == 2));
    }

    fn chi_square_p_value(law: &DegreeDistribution, draws: usize, bins: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; bins + 1];
        for _ in 0..draws {
            let k = law.sample(&mut rng);
            counts[k.min(bins)] += 1;
        }
        let mut stat = 0.0;
        let mut dof = 0;
        for (k, &c) in counts.iter().enumerate() {
            let p = if k < bins { law.pmf(k) } else { law.tail_mass(bins - 1) };
            if p == 0.0 {
                assert_eq!(c, 0, "draw outside support at {k}");
                continue;
            }
            let e = p * draws as f64;
            stat += (c as f64 - e).powi(2) / e;
            dof += 1;
        }
        1.0 - ChiSquared::new((dof - 1) as f64).unwrap().cdf(stat)
    }

    #[test]
    fn samplers_agree_with_pmf() {
        let cases = [
            (DegreeDistribution::shifted_zeta(2.0).unwrap(), 50, 11),
            (DegreeDistribution::shifted_zeta(1.2).unwrap(), 50, 12),
            (DegreeDistribution::odd_shifted_zeta(2.0).unwrap(), 100, 13),
            (DegreeDistribution::geometric(0.01).unwrap(), 400, 14),
            (DegreeDistribution::finite(vec![0.1, 0.0, 0.6, 0.3]).unwrap(), 4, 15),
        ];
        for (law, bins, seed) in cases {
            let p = chi_square_p_value(&law, 1_000_000, bins, seed);
            assert!(p > 1e-3, "{law}: p = {p}");
        }
    }

    #[test]
    fn geometric_sample_mean() {
        let law = DegreeDistribution::geometric(0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 1_000_000;
        let mean = (0..n).map(|_| law.sample(&mut rng) as f64).sum::<f64>() / n as f64;
        let se = (0.99f64).sqrt() / 0.01 / (n as f64).sqrt();
        assert!((mean - 99.0).abs() < 3.0 * se, "mean {mean}");
        assert_eq!(law.mean(), 0.99 / 0.01);
    }

    #[test]
    fn recommendation_examples() {
        let sm = recommend_distribution(&model(CovarianceSpec::spectral_matern(1.0, 0.75)));
        assert_eq!(sm.case, Case::PolynomialDecay);
        assert_eq!(sm.theta_prime_max, Some(5.5));
        assert_eq!(sm.distribution, DegreeDistribution::shifted_zeta(2.0).unwrap());
        let nb = recommend_distribution(&model(CovarianceSpec::negative_binomial(0.5)));
        assert_eq!(nb.case, Case::GeometricDecay);
        assert!(1.0 - nb.distribution.pmf(1) / nb.distribution.pmf(0) >= 0.0);
        // ⁿ√a_n → 1−p
        let ratio = nb.distribution.pmf(11) / nb.distribution.pmf(10);
        assert!(ratio >= 0.125);
        let f = recommend_distribution(&model(CovarianceSpec::generalized_f(1.0, 3.5, 2.0, 3)));
        assert_eq!(f.case, Case::PolynomialDecay);
        assert_eq!(f.theta_prime_max, Some(8.5));
        let c2 = recommend_distribution(&model(CovarianceSpec::chentsov(2)));
        assert_eq!(c2.distribution, DegreeDistribution::odd_shifted_zeta(2.0).unwrap());
        assert!(c2.warning.is_none());
        for d in [4usize, 8, 16, 256] {
            let c = recommend_distribution(&model(CovarianceSpec::chentsov(d)));
            assert!(c.interval_is_empty(), "d={d}");
            assert_eq!(c.warning, Some(UNBOUNDED_WARNING));
            assert_eq!(c.distribution, DegreeDistribution::odd_shifted_zeta(2.0).unwrap());
        }
        let tight = recommend_distribution(&model(CovarianceSpec::spectral_matern(1.0, 0.1)));
        // θ′_max = 1.6 clamps the exponent to the midpoint 1.3
        assert!((tight.distribution.zeta_exponent().unwrap() - 1.3).abs() < 1e-12);
        let fin = recommend_distribution(&model(CovarianceSpec::finite(vec![0.5, 0.0, 0.5], 1)));
        assert_eq!(fin.case, Case::FiniteSupport);
        assert_eq!(fin.distribution.pmf(1), 0.0);
        assert_eq!(fin.distribution.pmf(2), 0.5);
    }

    #[test]
    fn theta_prime_interval_formulas() {
        for nu in [0.25, 0.75, 2.0, 5.5] {
            assert_eq!(theta_prime_max(2.0 * nu + 1.0, 2), 6.0 * nu + 1.0);
            assert_eq!(theta_prime_max(nu + 1.0, 3), 3.0 * nu - 2.0);
        }
        // nonempty at d ≥ 4 only when θ > 2⌊(d+1)/2⌋
        for d in 4usize..40 {
            let edge = 2.0 * ((d + 1) / 2) as f64;
            assert!(theta_prime_max(edge, d) <= 1.0);
            assert!(theta_prime_max(edge + 0.01, d) > 1.0);
        }
    }

    #[test]
    fn support_cover_examples() {
        let nb = model(CovarianceSpec::negative_binomial(0.5));
        let chentsov = model(CovarianceSpec::chentsov(2));
        let zeta = DegreeDistribution::shifted_zeta(2.0).unwrap();
        let odd = DegreeDistribution::odd_shifted_zeta(2.0).unwrap();
        assert!(support_covers(&zeta, &nb, 100).is_ok());
        match support_covers(&odd, &nb, 100) {
            Err(Error::SupportNotCovered { degree }) => assert_eq!(degree, 0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(support_covers(&odd, &chentsov, 100).is_ok());
    }

    #[test]
    fn recommendations_cover_their_own_models() {
        let specs = vec![
            CovarianceSpec::negative_binomial(0.5),
            CovarianceSpec::spectral_matern(1.0, 0.75),
            CovarianceSpec::generalized_f(1.0, 3.5, 2.0, 3),
            CovarianceSpec::chentsov(2),
            CovarianceSpec::chentsov(256),
            CovarianceSpec::exponential(1.0, 2),
            CovarianceSpec::exponential(3.0, 6),
            CovarianceSpec::finite(vec![0.2, 0.0, 0.3, 0.5], 3),
        ];
        for spec in specs {
            let m = model(spec.clone());
            let r = recommend_distribution(&m);
            assert!(support_covers(&r.distribution, &m, 10_000).is_ok(), "{spec}");
        }
        let multi = MultiCovarianceModel::new(MultiCovarianceSpec::negative_binomial(0.2, 0.2, 0.7, 0.6)).unwrap();
        let r = recommend_distribution_multi(&multi);
        assert_eq!(r.distribution, DegreeDistribution::geometric(0.30000000000000004).unwrap());
        assert!(support_covers_multi(&r.distribution, &multi, 10_000).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn geometric_criterion_holds(delta in 0.01f64..0.99) {
                let m = CovarianceModel::new(CovarianceSpec::negative_binomial(delta)).unwrap();
                let r = recommend_distribution(&m);
                let a0 = r.distribution.pmf(0);
                let ratio = r.distribution.pmf(1) / a0;
                prop_assert!(ratio >= delta.powi(3));
            }

            #[test]
            fn zeta_exponent_inside_interval(nu in 0.05f64..10.0) {
                let m = CovarianceModel::new(CovarianceSpec::spectral_matern(1.0, nu)).unwrap();
                let r = recommend_distribution(&m);
                let max = r.theta_prime_max.unwrap();
                let s = r.distribution.zeta_exponent().unwrap();
                prop_assert!(s > 1.0 && s < max);
            }

            #[test]
            fn samples_lie_in_support(seed in any::<u64>(), s in 1.05f64..4.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let odd = DegreeDistribution::odd_shifted_zeta(s).unwrap();
                for _ in 0..50 {
                    prop_assert!(odd.sample(&mut rng) % 2 == 1);
                }
            }
        }
    }
}
