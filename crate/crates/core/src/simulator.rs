//! Turning-arcs simulation: sums of randomly oriented Gegenbauer waves.
//!
//! One wave is `ε · w_κ · G_κ^{(d−1)/2}(ωᵀx)` (or `cos(κ ϑ(ω, x))` on the
//! circle) with a Rademacher sign `ε`, a uniform pole `ω` and a random
//! degree `κ ~ {a_n}`. The weight `w_κ` makes each wave have the target
//! covariance; `L` independent waves are summed and scaled by `L^{−1/2}`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::covariance::{CovarianceModel, MultiCovarianceModel};
use crate::degree::{support_covers, support_covers_multi, DegreeDistribution};
use crate::error::{domain, Error, Result};
use crate::gegenbauer::{ln_gegenbauer_at_one, normalized_coefficients, sphere_lambda};
use crate::sphere::{dot, sample_pole, PointSet, SpherePoint};

/// Degrees checked by [`SimulationConfig::new`] for support coverage.
pub const SUPPORT_CHECK_DEGREES: usize = 2000;

// Points per evaluation block.
const CHUNK: usize = 512;

/// Scalar or multivariate target model.
#[derive(Debug, Clone)]
pub enum Model {
    Scalar(CovarianceModel),
    Multi(MultiCovarianceModel),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Scalar(m) => m.dim(),
            Model::Multi(m) => m.dim(),
        }
    }

    /// Number of field components `p`.
    pub fn components(&self) -> usize {
        match self {
            Model::Scalar(_) => 1,
            Model::Multi(m) => m.components(),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Scalar(m) => write!(f, "{m}"),
            Model::Multi(m) => write!(f, "{m}"),
        }
    }
}

impl From<CovarianceModel> for Model {
    fn from(m: CovarianceModel) -> Self {
        Model::Scalar(m)
    }
}

impl From<MultiCovarianceModel> for Model {
    fn from(m: MultiCovarianceModel) -> Self {
        Model::Multi(m)
    }
}

/// Everything that determines a realization apart from the points.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    model: Model,
    degrees: DegreeDistribution,
    waves: usize,
    seed: u64,
}

impl SimulationConfig {
    /// Checks `L ≥ 1` and that the degree law charges every degree with a
    /// nonzero Schoenberg coefficient up to [`SUPPORT_CHECK_DEGREES`].
    pub fn new(model: impl Into<Model>, degrees: DegreeDistribution, waves: usize, seed: u64) -> Result<Self> {
        let model = model.into();
        if waves == 0 {
            return Err(domain("the number of waves L must be at least 1"));
        }
        match &model {
            Model::Scalar(m) => support_covers(&degrees, m, SUPPORT_CHECK_DEGREES)?,
            Model::Multi(m) => support_covers_multi(&degrees, m, SUPPORT_CHECK_DEGREES)?,
        }
        Ok(Self {
            model,
            degrees,
            waves,
            seed,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn degrees(&self) -> &DegreeDistribution {
        &self.degrees
    }

    /// `L`.
    pub fn waves(&self) -> usize {
        self.waves
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn components(&self) -> usize {
        self.model.components()
    }
}

/// The randomness of one wave.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveParams {
    /// `ε ∈ {−1, +1}`.
    pub epsilon: f64,
    /// `ω`.
    pub pole: SpherePoint,
    /// `κ`.
    pub degree: usize,
    /// `ι`, 0-based; `None` for scalar models.
    pub component: Option<usize>,
}

/// Sequential or multi-threaded evaluation. Both give identical bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

/// Provenance of a realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub model: String,
    pub dim: usize,
    pub components: usize,
    pub waves: usize,
    pub seed: u64,
    pub degrees: String,
}

/// Simulated values, `values[i * p + j]` being component `j` at point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub points: PointSet,
    pub values: Vec<f64>,
    pub metadata: Metadata,
}

impl Realization {
    pub fn components(&self) -> usize {
        self.metadata.components
    }

    pub fn value(&self, point: usize, component: usize) -> f64 {
        self.values[point * self.components() + component]
    }

    /// Values of one component at all points.
    pub fn component(&self, component: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(component)
            .step_by(self.components())
            .copied()
            .collect()
    }
}

/// A wave ready for evaluation: `values = amplitudes · h_κ(ωᵀx)` where
/// `h_κ = G_κ / G_κ(1)` (or `cos(κ ϑ)` on the circle).
#[derive(Debug, Clone)]
struct PreparedWave {
    pole: Vec<f64>,
    degree: usize,
    amplitudes: Vec<f64>,
    // ln of a common factor left out of `amplitudes` to keep them finite;
    // nonzero only for degrees where G_κ(1) overflows
    ln_scale: f64,
}

impl PreparedWave {
    fn is_zero(&self) -> bool {
        self.amplitudes.iter().all(|a| *a == 0.0)
    }
}

/// Draws and evaluates waves for one [`SimulationConfig`].
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimulationConfig,
}

impl Simulator {
    pub fn new(config: SimulationConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    /// The random stream of wave `index`: the master seed selects the key,
    /// the wave index selects the stream.
    pub fn wave_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index);
        rng
    }

    /// Wave `index` of the realization; a pure function of the seed and index.
    pub fn draw_wave(&self, index: u64) -> WaveParams {
        let mut rng = self.wave_rng(index);
        let degree = self.config.degrees.sample(&mut rng);
        let epsilon = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let pole = sample_pole(self.config.dim(), &mut rng);
        let component = match self.config.model {
            Model::Scalar(_) => None,
            Model::Multi(_) => Some(rng.random_range(0..self.config.components())),
        };
        WaveParams {
            epsilon,
            pole,
            degree,
            component,
        }
    }

    /// Per-component factors multiplying `h_κ`, and the log scale split off
    /// from them.
    fn amplitudes(&self, wave: &WaveParams) -> Result<(Vec<f64>, f64)> {
        let d = self.config.dim();
        let kappa = wave.degree;
        let ln_a = self.config.degrees.ln_pmf(kappa);
        if ln_a == f64::NEG_INFINITY {
            return Err(Error::SupportNotCovered { degree: kappa });
        }
        // ln of the weight without b: (2κ+d−1)/(a(d−1)) · G_κ(1)² on S^d, c/a on the circle
        let ln_weight = if d == 1 {
            let c: f64 = if kappa == 0 { 1.0 } else { 2.0 };
            c.ln() - ln_a
        } else {
            let lambda = sphere_lambda(d);
            (2.0 * kappa as f64 + d as f64 - 1.0).ln() - ln_a - (d as f64 - 1.0).ln()
                + 2.0 * ln_gegenbauer_at_one(lambda, kappa)?
        };
        match &self.config.model {
            Model::Scalar(m) => {
                let ln_b = m.ln_schoenberg_coeff(kappa);
                if ln_b == f64::NEG_INFINITY {
                    return Ok((vec![0.0], 0.0));
                }
                let (ln_amp, ln_scale) = split_scale(0.5 * (ln_b + ln_weight));
                Ok((vec![wave.epsilon * ln_amp.exp()], ln_scale))
            }
            Model::Multi(m) => {
                let p = m.components();
                let iota = wave
                    .component
                    .filter(|i| *i < p)
                    .ok_or_else(|| domain("vector wave needs a component index below p"))?;
                let factor = m.factor(kappa)?;
                let (ln_amp, ln_scale) = split_scale(0.5 * ((p as f64).ln() + ln_weight));
                let scale = wave.epsilon * ln_amp.exp();
                Ok((factor.column(iota).into_iter().map(|g| scale * g).collect(), ln_scale))
            }
        }
    }

    fn prepare(&self, wave: &WaveParams) -> Result<PreparedWave> {
        if wave.pole.dim() != self.config.dim() {
            return Err(domain("wave pole lies on a sphere of the wrong dimension"));
        }
        let (amplitudes, ln_scale) = self.amplitudes(wave)?;
        Ok(PreparedWave {
            pole: wave.pole.coords().to_vec(),
            degree: wave.degree,
            amplitudes,
            ln_scale,
        })
    }

    /// One scalar wave at every point.
    pub fn wave_eval_scalar(&self, wave: &WaveParams, points: &PointSet) -> Result<Vec<f64>> {
        if self.config.components() != 1 {
            return Err(domain("scalar evaluation needs a scalar model"));
        }
        self.wave_eval(wave, points)
    }

    /// One vector wave at every point, as `points × p` row-major values.
    pub fn wave_eval_vector(&self, wave: &WaveParams, points: &PointSet) -> Result<Vec<f64>> {
        if !matches!(self.config.model, Model::Multi(_)) {
            return Err(domain("vector evaluation needs a multivariate model"));
        }
        self.wave_eval(wave, points)
    }

    fn wave_eval(&self, wave: &WaveParams, points: &PointSet) -> Result<Vec<f64>> {
        self.check_points(points)?;
        let prepared = self.prepare(wave)?;
        let p = self.config.components();
        let mut out = vec![0.0; points.len() * p];
        let mut scratch = Scratch::default();
        for (block, chunk) in out.chunks_mut(CHUNK * p).enumerate() {
            let start = block * CHUNK;
            let count = chunk.len() / p;
            scratch.load(points, start, count, &prepared.pole);
            scratch.shape(&prepared, self.config.dim());
            for (i, row) in chunk.chunks_mut(p).enumerate() {
                for (v, a) in row.iter_mut().zip(&prepared.amplitudes) {
                    *v = a * scratch.h[i];
                }
            }
        }
        Ok(out)
    }

    fn check_points(&self, points: &PointSet) -> Result<()> {
        if points.dim() != self.config.dim() {
            return Err(domain(format!(
                "points lie on S^{} but the model lives on S^{}",
                points.dim(),
                self.config.dim()
            )));
        }
        Ok(())
    }

    /// `Z̃(x) = L^{−1/2} Σ_ℓ Z_ℓ(x)` at every point.
    ///
    /// Waves are added in ascending index order at every point, so the
    /// parallel mode (which splits the points into blocks) reproduces the
    /// sequential result bit for bit.
    pub fn simulate(&self, points: &PointSet, execution: Execution) -> Result<Realization> {
        self.check_points(points)?;
        let waves = (0..self.config.waves as u64)
            .map(|l| self.prepare(&self.draw_wave(l)))
            .collect::<Result<Vec<_>>>()?;
        let p = self.config.components();
        let d = self.config.dim();
        let mut values = vec![0.0; points.len() * p];
        let run = |(block, chunk): (usize, &mut [f64])| -> Result<()> {
            let mut scratch = Scratch::default();
            accumulate_block(&waves, points, block * CHUNK, chunk, p, d, &mut scratch)
        };
        let outcome: Vec<Result<()>> = match execution {
            Execution::Sequential => values.chunks_mut(CHUNK * p).enumerate().map(run).collect(),
            Execution::Parallel => values.par_chunks_mut(CHUNK * p).enumerate().map(run).collect(),
        };
        // report the lowest offending wave whichever block found it
        let mut first: Option<u64> = None;
        for r in outcome {
            match r {
                Ok(()) => {}
                Err(Error::NonFinite { wave }) => first = Some(first.map_or(wave, |f| f.min(wave))),
                Err(e) => return Err(e),
            }
        }
        if let Some(wave) = first {
            return Err(Error::NonFinite { wave });
        }
        let scale = 1.0 / (self.config.waves as f64).sqrt();
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(Realization {
            points: points.clone(),
            values,
            metadata: Metadata {
                model: self.config.model.to_string(),
                dim: d,
                components: p,
                waves: self.config.waves,
                seed: self.config.seed,
                degrees: self.config.degrees.to_string(),
            },
        })
    }
}

fn accumulate_block(
    waves: &[PreparedWave],
    points: &PointSet,
    start: usize,
    chunk: &mut [f64],
    p: usize,
    d: usize,
    scratch: &mut Scratch,
) -> Result<()> {
    let count = chunk.len() / p;
    for (index, wave) in waves.iter().enumerate() {
        if wave.is_zero() {
            continue;
        }
        scratch.load(points, start, count, &wave.pole);
        scratch.shape(wave, d);
        let mut finite = true;
        for (i, row) in chunk.chunks_mut(p).enumerate() {
            let h = scratch.h[i];
            for (v, a) in row.iter_mut().zip(&wave.amplitudes) {
                *v += a * h;
                finite &= v.is_finite();
            }
        }
        if !finite {
            return Err(Error::NonFinite { wave: index as u64 });
        }
    }
    Ok(())
}

// Amplitudes up to e^300 are applied directly: h_κ values lost to underflow
// (|h| < e^−745) then contribute less than e^−445.
const LN_AMPLITUDE_LIMIT: f64 = 300.0;

fn split_scale(ln_amp: f64) -> (f64, f64) {
    let excess = (ln_amp - LN_AMPLITUDE_LIMIT).max(0.0);
    (ln_amp - excess, excess)
}

// Rescaling step of the guarded recurrence.
const RESCALE: f64 = 1.0715086071862673e301; // 2^1000
const LN_RESCALE: f64 = 1000.0 * std::f64::consts::LN_2;

/// Per-block buffers: `t = ωᵀx` and the recurrence state.
#[derive(Debug, Default)]
struct Scratch {
    t: Vec<f64>,
    h: Vec<f64>,
    prev: Vec<f64>,
}

impl Scratch {
    fn load(&mut self, points: &PointSet, start: usize, count: usize, pole: &[f64]) {
        self.t.clear();
        self.t
            .extend((start..start + count).map(|i| dot(points.coords(i), pole).clamp(-1.0, 1.0)));
    }

    /// Fills `h` with `G_κ(t)/G_κ(1)` (or `cos(κ arccos t)` on the circle).
    fn shape(&mut self, wave: &PreparedWave, d: usize) {
        if wave.ln_scale > 0.0 && d > 1 {
            return self.shape_rescaled(wave, d);
        }
        let n = self.t.len();
        let kappa = wave.degree;
        self.h.clear();
        if kappa == 0 {
            self.h.resize(n, 1.0);
            return;
        }
        if d == 1 {
            let k = kappa as f64;
            self.h.extend(self.t.iter().map(|t| (k * t.acos()).cos()));
            return;
        }
        self.h.extend_from_slice(&self.t);
        if kappa == 1 {
            return;
        }
        self.prev.clear();
        self.prev.resize(n, 1.0);
        let lambda = sphere_lambda(d);
        let (mut cur, mut old) = (&mut self.h, &mut self.prev);
        for m in 2..=kappa {
            let (a, c) = normalized_coefficients(lambda, m);
            for ((o, &h), &t) in old.iter_mut().zip(cur.iter()).zip(&self.t) {
                *o = a * t * h - c * *o;
            }
            std::mem::swap(&mut cur, &mut old);
        }
        if kappa % 2 == 0 {
            // after an odd number of swaps the newest values sit in `prev`
            std::mem::swap(&mut self.h, &mut self.prev);
        }
    }

    /// Fills `h` with `e^{ln_scale} G_κ(t)/G_κ(1)`, running the recurrence
    /// point by point and rescaling by 2^1000 whenever the state becomes
    /// small, so that the product is formed without underflow.
    fn shape_rescaled(&mut self, wave: &PreparedWave, d: usize) {
        let lambda = sphere_lambda(d);
        let kappa = wave.degree;
        let coeffs: Vec<(f64, f64)> = (2..=kappa).map(|m| normalized_coefficients(lambda, m)).collect();
        self.h.clear();
        self.h.extend(self.t.iter().map(|&t| {
            let (mut old, mut cur) = (1.0, t);
            let mut shifts = 0.0;
            for &(a, c) in &coeffs {
                let next = a * t * cur - c * old;
                old = cur;
                cur = next;
                if cur.abs() < 1.0 / RESCALE && old.abs() < 1.0 / RESCALE {
                    cur *= RESCALE;
                    old *= RESCALE;
                    shifts += 1.0;
                }
            }
            if cur == 0.0 {
                return 0.0;
            }
            cur.signum() * (cur.abs().ln() - shifts * LN_RESCALE + wave.ln_scale).exp()
        }));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{CovarianceSpec, MultiCovarianceSpec};
    use crate::sphere::geodesic;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;
    use rand_chacha::ChaCha8Rng;

    fn scalar(spec: CovarianceSpec, law: &str, waves: usize, seed: u64) -> Simulator {
        let model = CovarianceModel::new(spec).unwrap();
        Simulator::new(SimulationConfig::new(model, law.parse().unwrap(), waves, seed).unwrap())
    }

    fn single(point: &SpherePoint) -> PointSet {
        PointSet::from_points(std::slice::from_ref(point)).unwrap()
    }

    fn wave(pole: SpherePoint, degree: usize, epsilon: f64) -> WaveParams {
        WaveParams {
            epsilon,
            pole,
            degree,
            component: None,
        }
    }

    #[test]
    fn constant_wave_at_degree_zero() {
        let sim = scalar(CovarianceSpec::negative_binomial(0.5), "geometric:0.5", 1, 0);
        let pts = PointSet::from_points(&[
            SpherePoint::from_angles(0.3, 1.0),
            SpherePoint::from_angles(2.0, 4.0),
        ])
        .unwrap();
        let v = sim
            .wave_eval_scalar(&wave(SpherePoint::from_angles(1.0, 1.0), 0, -1.0), &pts)
            .unwrap();
        // √(b_0/a_0) = √(0.5/0.5)
        assert_eq!(v, vec![-1.0, -1.0]);
    }

    #[test]
    fn rescaled_recurrence_matches_plain_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pole = sample_pole(9, &mut rng);
        let pts: Vec<SpherePoint> = (0..40).map(|_| sample_pole(9, &mut rng)).collect();
        let set = PointSet::from_points(&pts).unwrap();
        let mut wave = PreparedWave {
            pole: pole.coords().to_vec(),
            degree: 57,
            amplitudes: vec![1.0],
            ln_scale: 0.0,
        };
        let mut scratch = Scratch::default();
        scratch.load(&set, 0, set.len(), &wave.pole);
        scratch.shape(&wave, 9);
        let plain = scratch.h.clone();
        wave.ln_scale = 5.0;
        scratch.shape(&wave, 9);
        for (a, b) in plain.iter().zip(&scratch.h) {
            assert!((a * 5f64.exp() - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} {b}");
        }
    }

    #[test]
    fn huge_degree_on_a_high_dimensional_sphere() {
        // G_κ(1) overflows for κ = 20001 on S^256; the wave must not
        let model = CovarianceModel::new(CovarianceSpec::chentsov(256)).unwrap();
        let law = DegreeDistribution::odd_shifted_zeta(2.0).unwrap();
        let sim = Simulator::new(SimulationConfig::new(model.clone(), law.clone(), 1, 0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pole = sample_pole(256, &mut rng);
        let mut pts: Vec<SpherePoint> = (0..20).map(|_| sample_pole(256, &mut rng)).collect();
        pts.push(pole.clone());
        let set = PointSet::from_points(&pts).unwrap();
        let kappa = 20001;
        let v = sim.wave_eval_scalar(&wave(pole, kappa, 1.0), &set).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        let lambda = sphere_lambda(256);
        let ln_g1 = ln_gegenbauer_at_one(lambda, kappa).unwrap();
        assert!(ln_g1 > 710.0);
        let expected = 0.5
            * (model.ln_schoenberg_coeff(kappa) + (2.0 * kappa as f64 + 255.0).ln() - law.ln_pmf(kappa) - 255f64.ln()
                + 2.0 * ln_g1);
        // at the pole h = 1
        assert!((v[20].ln() - expected).abs() < 1e-9 * expected.abs(), "{} {expected}", v[20].ln());
    }

    #[test]
    fn degree_one_wave_at_its_pole() {
        let sim = scalar(CovarianceSpec::negative_binomial(0.5), "geometric:0.5", 1, 0);
        let x = SpherePoint::from_angles(0.7, 2.0);
        let v = sim.wave_eval_scalar(&wave(x.clone(), 1, 1.0), &single(&x)).unwrap();
        let expected = (3.0f64 * 0.25 / 0.25).sqrt();
        assert!((v[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn circle_wave_uses_cosine_and_degree_zero_weight() {
        let sim = scalar(
            CovarianceSpec::finite(vec![0.4, 0.3, 0.3], 1),
            "finite:0.2,0.3,0.5",
            1,
            0,
        );
        let pole = SpherePoint::new(vec![1.0, 0.0]).unwrap();
        let x = SpherePoint::new(vec![0.0, 1.0]).unwrap();
        let v = sim.wave_eval_scalar(&wave(pole.clone(), 2, 1.0), &single(&x)).unwrap();
        assert!((v[0] + (2.0f64 * 0.3 / 0.5).sqrt()).abs() < 1e-14);
        let v0 = sim.wave_eval_scalar(&wave(pole, 0, 1.0), &single(&x)).unwrap();
        assert!((v0[0] - (0.4f64 / 0.2).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn normalized_recurrence_matches_direct_gegenbauer() {
        for d in [2usize, 3, 5, 256] {
            let spec = if d == 2 {
                CovarianceSpec::negative_binomial(0.5)
            } else {
                CovarianceSpec::chentsov(d)
            };
            let law = if d == 2 { "geometric:0.1" } else { "odd-zeta:2" };
            let sim = scalar(spec, law, 1, 0);
            let model = match sim.config().model() {
                Model::Scalar(m) => m.clone(),
                _ => unreachable!(),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
            let pts: Vec<SpherePoint> = (0..40).map(|_| sample_pole(d, &mut rng)).collect();
            let set = PointSet::from_points(&pts).unwrap();
            let pole = sample_pole(d, &mut rng);
            for kappa in [1usize, 3, 7, 25] {
                let v = sim.wave_eval_scalar(&wave(pole.clone(), kappa, 1.0), &set).unwrap();
                let lambda = sphere_lambda(d);
                let a = sim.config().degrees().pmf(kappa);
                let b = model.schoenberg_coeff(kappa);
                let w = (b * (2.0 * kappa as f64 + d as f64 - 1.0) / (a * (d as f64 - 1.0))).sqrt();
                for (x, got) in pts.iter().zip(&v) {
                    let g = crate::gegenbauer::eval_unchecked(lambda, kappa, x.dot(&pole).clamp(-1.0, 1.0));
                    let scale = w * crate::gegenbauer::gegenbauer_at_one(lambda, kappa).unwrap();
                    assert!((got - w * g).abs() <= 1e-10 * scale, "d={d} κ={kappa}");
                }
            }
        }
    }

    #[test]
    fn vector_wave_examples() {
        let identity = vec![DMatrix::identity(2, 2)];
        let model = MultiCovarianceModel::new(MultiCovarianceSpec::finite(identity, 2)).unwrap();
        let config = SimulationConfig::new(model, "finite:1".parse().unwrap(), 1, 0).unwrap();
        let sim = Simulator::new(config);
        let x = SpherePoint::from_angles(0.5, 0.5);
        let w = WaveParams {
            epsilon: -1.0,
            pole: SpherePoint::from_angles(1.0, 2.0),
            degree: 0,
            component: Some(0),
        };
        let v = sim.wave_eval_vector(&w, &single(&x)).unwrap();
        assert!((v[0] + 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
        assert!(sim.wave_eval_scalar(&w, &single(&x)).is_err());

        let zero = vec![DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])];
        let model = MultiCovarianceModel::new(MultiCovarianceSpec::finite(zero, 2)).unwrap();
        let sim = Simulator::new(SimulationConfig::new(model, "finite:1".parse().unwrap(), 1, 0).unwrap());
        let v = sim.wave_eval_vector(&w, &single(&x)).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn config_rejects_uncovered_support_and_zero_waves() {
        let model = CovarianceModel::new(CovarianceSpec::negative_binomial(0.5)).unwrap();
        let odd = DegreeDistribution::odd_shifted_zeta(2.0).unwrap();
        assert!(matches!(
            SimulationConfig::new(model.clone(), odd, 10, 1),
            Err(Error::SupportNotCovered { degree: 0 })
        ));
        let geo = DegreeDistribution::geometric(0.1).unwrap();
        assert!(SimulationConfig::new(model, geo, 0, 1).is_err());
    }

    #[test]
    fn single_wave_realization_equals_the_wave() {
        let sim = scalar(CovarianceSpec::negative_binomial(0.5), "geometric:0.3", 1, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<SpherePoint> = (0..1100).map(|_| sample_pole(2, &mut rng)).collect();
        let set = PointSet::from_points(&pts).unwrap();
        let r = sim.simulate(&set, Execution::Sequential).unwrap();
        let w = sim.wave_eval_scalar(&sim.draw_wave(0), &set).unwrap();
        assert_eq!(r.values, w);
    }

    #[test]
    fn deterministic_and_parallel_invariant() {
        let sim = scalar(CovarianceSpec::spectral_matern(1.0, 0.75), "zeta:2", 60, 42);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<SpherePoint> = (0..3000).map(|_| sample_pole(2, &mut rng)).collect();
        let set = PointSet::from_points(&pts).unwrap();
        let a = sim.simulate(&set, Execution::Sequential).unwrap();
        let b = sim.simulate(&set, Execution::Sequential).unwrap();
        let c = sim.simulate(&set, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.values.iter().zip(&c.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(a.metadata.seed, 42);
        assert_eq!(a.metadata.waves, 60);
    }

    #[test]
    fn waves_have_zero_mean() {
        let sim = scalar(CovarianceSpec::negative_binomial(0.5), "geometric:0.5", 1, 8);
        let x = single(&SpherePoint::from_angles(1.1, 0.4));
        let m = 10_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for l in 0..m {
            let v = sim.wave_eval_scalar(&sim.draw_wave(l), &x).unwrap()[0];
            s += v;
            s2 += v * v;
        }
        let mean = s / m as f64;
        let se = ((s2 / m as f64 - mean * mean) / m as f64).sqrt();
        assert!(mean.abs() < 4.0 * se);
    }

    #[test]
    fn single_wave_covariance_on_two_sphere() {
        let sim = scalar(CovarianceSpec::negative_binomial(0.5), "geometric:0.5", 1, 21);
        let model = CovarianceModel::new(CovarianceSpec::negative_binomial(0.5)).unwrap();
        let base = SpherePoint::from_angles(0.0, 0.0);
        let others: Vec<SpherePoint> = (0..10)
            .map(|k| SpherePoint::from_angles(PI * k as f64 / 9.0, 0.0))
            .collect();
        let mut all = vec![base.clone()];
        all.extend(others.iter().cloned());
        let set = PointSet::from_points(&all).unwrap();
        let m = 100_000u64;
        let mut sums = vec![(0.0, 0.0); 10];
        for l in 0..m {
            let v = sim.wave_eval_scalar(&sim.draw_wave(l), &set).unwrap();
            for k in 0..10 {
                let prod = v[0] * v[k + 1];
                sums[k].0 += prod;
                sums[k].1 += prod * prod;
            }
        }
        for (k, (s, s2)) in sums.iter().enumerate() {
            let mean = s / m as f64;
            let se = ((s2 / m as f64 - mean * mean) / m as f64).sqrt();
            let target = model.eval(geodesic(&base, &others[k])).unwrap();
            assert!((mean - target).abs() < 4.0 * se, "lag {k}: {mean} vs {target} (se {se})");
        }
    }

    #[test]
    fn rejects_points_on_the_wrong_sphere() {
        let sim = scalar(CovarianceSpec::negative_binomial(0.5), "geometric:0.5", 3, 1);
        let set = PointSet::from_points(&[SpherePoint::new(vec![0.0, 1.0]).unwrap()]).unwrap();
        assert!(sim.simulate(&set, Execution::Sequential).is_err());
    }
}
