//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 failed validation
//! experiment, 3 I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::covariance::{CovarianceModel, CovarianceSpec, Family, MultiCovarianceModel, MultiCovarianceSpec};
use crate::degree::{recommend_distribution, recommend_distribution_multi, DegreeDistribution, Recommendation};
use crate::diagnostics::{
    berry_esseen_bound, empirical_covariance, mu3_auto, mu3_wave, mu3_wave_component, Mu3, DEFAULT_LAG_BINS,
};
use crate::error::Error;
use crate::grid::{build_grid, GridSpec};
use crate::output::{write_coefficients, write_realization};
use crate::simulator::{Execution, Model, Realization, SimulationConfig, Simulator};
use crate::sphere::{sample_pole, PointSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "turning-arcs", version, about = "Simulate isotropic Gaussian random fields on spheres by turning arcs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one realization on a grid and write it as CSV.
    Simulate(SimulateArgs),
    /// Print the Schoenberg coefficients b_0 … b_N as CSV.
    Coeffs(CoeffsArgs),
    /// Compare the empirical covariance of many realizations with the model.
    Validate(ValidateArgs),
    /// Third absolute moment of one wave and the Berry–Esséen bound.
    Mu3(Mu3Args),
    /// Recommend a degree distribution for a model.
    Recommend(RecommendArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    /// Negative binomial (d = 2).
    Nb,
    /// Spectral Matérn (d = 2).
    Sm,
    /// Generalized F.
    F,
    Chentsov,
    #[value(name = "exp")]
    Exponential,
    /// Explicit Schoenberg sequence given by --b.
    Finite,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Sphere dimension d.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Number of field components (1 or 2).
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    #[arg(long)]
    delta11: Option<f64>,
    #[arg(long)]
    delta12: Option<f64>,
    #[arg(long)]
    delta22: Option<f64>,
    #[arg(long)]
    nu11: Option<f64>,
    #[arg(long)]
    nu12: Option<f64>,
    #[arg(long)]
    nu22: Option<f64>,
    /// Comma-separated Schoenberg coefficients b_0,b_1,… for --model finite.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    /// Accept bivariate spectral Matérn parameters violating ν₁₂ ≥ (ν₁₁+ν₂₂)/2;
    /// each Schoenberg matrix is still checked when used.
    #[arg(long)]
    allow_invalid_cross: bool,
}

#[derive(Debug, Args)]
struct DegreeArgs {
    /// Degree law: geometric:P, zeta:S, odd-zeta:S or finite:a0,a1,…
    #[arg(long, conflicts_with = "auto_degree")]
    degree_dist: Option<DegreeDistribution>,
    /// Choose the degree law from the decay of the Schoenberg sequence
    /// (the default when --degree-dist is absent).
    #[arg(long)]
    auto_degree: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    degrees: DegreeArgs,
    /// Number of waves L.
    #[arg(long = "L", default_value_t = 1500)]
    waves: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// latlon:NxM, slice3:W:NxM, section:D:NxM or points:FILE.
    #[arg(long)]
    grid: GridSpec,
    #[arg(long)]
    out: PathBuf,
    /// Evaluate on one thread (the output is identical either way).
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
struct CoeffsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 50)]
    n_max: usize,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    degrees: DegreeArgs,
    #[arg(long = "L", default_value_t = 500)]
    waves: usize,
    /// Number of independent realizations M.
    #[arg(long, default_value_t = 200)]
    realizations: usize,
    /// Number of uniformly drawn evaluation points.
    #[arg(long, default_value_t = 60)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_LAG_BINS)]
    bins: usize,
    /// Largest accepted |estimate − model| in standard errors.
    #[arg(long, default_value_t = 4.0)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-bin CSV table (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Mu3Args {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    degrees: DegreeArgs,
    #[arg(long = "L", default_value_t = 1500)]
    waves: usize,
    /// Initial truncation degree; doubled until the tail bound is below
    /// 1e-4 of the sum.
    #[arg(long, default_value_t = 128)]
    n_max: usize,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    #[command(flatten)]
    model: ModelArgs,
}

// Largest truncation tried by `mu3`.
const MU3_CAP: usize = 1 << 14;
const MU3_REL: f64 = 1e-4;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

impl ModelArgs {
    fn need(&self, value: Option<f64>, flag: &str) -> Outcome<f64> {
        value.ok_or_else(|| Failure::Usage(format!("--model {} needs --{flag}", self.model_name())))
    }

    fn model_name(&self) -> &'static str {
        match self.model {
            ModelKind::Nb => "nb",
            ModelKind::Sm => "sm",
            ModelKind::F => "f",
            ModelKind::Chentsov => "chentsov",
            ModelKind::Exponential => "exp",
            ModelKind::Finite => "finite",
        }
    }

    fn build(&self) -> Outcome<Model> {
        match self.p {
            1 => Ok(Model::Scalar(self.build_scalar()?)),
            2 => Ok(Model::Multi(self.build_bivariate()?)),
            p => Err(Failure::Usage(format!("--p {p} is not supported; use 1 or 2"))),
        }
    }

    fn build_scalar(&self) -> Outcome<CovarianceModel> {
        let family = match self.model {
            ModelKind::Nb => Family::NegativeBinomial {
                delta: self.need(self.delta, "delta")?,
            },
            ModelKind::Sm => Family::SpectralMatern {
                alpha: self.need(self.alpha, "alpha")?,
                nu: self.need(self.nu, "nu")?,
            },
            ModelKind::F => Family::GeneralizedF {
                alpha: self.need(self.alpha, "alpha")?,
                nu: self.need(self.nu, "nu")?,
                tau: self.need(self.tau, "tau")?,
            },
            ModelKind::Chentsov => Family::Chentsov,
            ModelKind::Exponential => Family::Exponential {
                nu: self.need(self.nu, "nu")?,
            },
            ModelKind::Finite => Family::Finite {
                coeffs: self
                    .b
                    .clone()
                    .ok_or_else(|| Failure::Usage("--model finite needs --b".into()))?,
            },
        };
        Ok(CovarianceModel::new(CovarianceSpec::new(family, self.d))?)
    }

    fn build_bivariate(&self) -> Outcome<MultiCovarianceModel> {
        let rho = self.need(self.rho, "rho")?;
        let mut spec = match self.model {
            ModelKind::Nb => MultiCovarianceSpec::negative_binomial(
                self.need(self.delta11, "delta11")?,
                self.need(self.delta12, "delta12")?,
                self.need(self.delta22, "delta22")?,
                rho,
            ),
            ModelKind::Sm => MultiCovarianceSpec::spectral_matern(
                self.need(self.alpha, "alpha")?,
                self.need(self.nu11, "nu11")?,
                self.need(self.nu12, "nu12")?,
                self.need(self.nu22, "nu22")?,
                rho,
            ),
            _ => {
                return Err(Failure::Usage(format!(
                    "--p 2 is available for nb and sm, not {}",
                    self.model_name()
                )))
            }
        };
        spec.dim = self.d;
        spec.allow_invalid_cross = self.allow_invalid_cross;
        Ok(MultiCovarianceModel::new(spec)?)
    }
}

fn recommendation(model: &Model) -> Recommendation {
    match model {
        Model::Scalar(m) => recommend_distribution(m),
        Model::Multi(m) => recommend_distribution_multi(m),
    }
}

/// The degree law and, when chosen automatically, the recommendation.
fn degree_law(args: &DegreeArgs, model: &Model) -> (DegreeDistribution, Option<Recommendation>) {
    match &args.degree_dist {
        Some(law) => (law.clone(), None),
        None => {
            let rec = recommendation(model);
            (rec.distribution.clone(), Some(rec))
        }
    }
}

fn create(path: &PathBuf) -> Outcome<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Outcome {
    let model = args.model.build()?;
    let (law, rec) = degree_law(&args.degrees, &model);
    let config = SimulationConfig::new(model, law, args.waves, args.seed)?;
    let points = build_grid(&args.grid)?;
    let mut out = create(&args.out)?;
    let start = Instant::now();
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let realization = Simulator::new(config).simulate(&points, execution)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut extra = Vec::new();
    if let Some(rec) = &rec {
        extra.push(("degree-choice", format!("auto, {rec}")));
    }
    write_realization(&mut out, &realization, &args.grid, &extra)?;
    out.flush()?;
    writeln!(
        stdout,
        "wrote {} points to {} ({elapsed:.2} s simulation)",
        points.len(),
        args.out.display()
    )?;
    Ok(())
}

fn coeffs(args: &CoeffsArgs, stdout: &mut dyn Write) -> Outcome {
    if args.model.p != 1 {
        return Err(Failure::Usage("coeffs prints scalar Schoenberg sequences; use --p 1".into()));
    }
    let model = args.model.build_scalar()?;
    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            write_coefficients(&mut out, &model, args.n_max)?;
            out.flush()?;
        }
        None => write_coefficients(stdout, &model, args.n_max)?,
    }
    Ok(())
}

fn theory(model: &Model, theta: f64, i: usize, j: usize) -> f64 {
    match model {
        Model::Scalar(m) => m.eval(theta).unwrap_or(f64::NAN),
        Model::Multi(m) => m.eval(theta).map_or(f64::NAN, |k| k[(i, j)]),
    }
}

fn validate(args: &ValidateArgs, stdout: &mut dyn Write) -> Outcome {
    if args.realizations < 2 {
        return Err(Failure::Usage("--realizations must be at least 2".into()));
    }
    if args.points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    let model = args.model.build()?;
    let (law, _) = degree_law(&args.degrees, &model);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let pts: Vec<_> = (0..args.points).map(|_| sample_pole(model.dim(), &mut rng)).collect();
    let points = PointSet::from_points(&pts)?;
    let start = Instant::now();
    let realizations = (0..args.realizations as u64)
        .map(|m| {
            let seed = args.seed.wrapping_add(1).wrapping_add(m);
            let config = SimulationConfig::new(model.clone(), law.clone(), args.waves, seed)?;
            Simulator::new(config).simulate(&points, Execution::Parallel)
        })
        .collect::<Result<Vec<Realization>, Error>>()?;
    let elapsed = start.elapsed().as_secs_f64();
    let pairs: Vec<(usize, usize)> = (0..args.points)
        .flat_map(|i| (i..args.points).map(move |j| (i, j)))
        .collect();
    let estimate = empirical_covariance(&realizations, &pairs, args.bins)?;
    let k = |theta: f64, i: usize, j: usize| theory(&model, theta, i, j);
    let table = estimate.to_csv(k);
    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            out.write_all(table.as_bytes())?;
            out.flush()?;
        }
        None => stdout.write_all(table.as_bytes())?,
    }
    let worst = estimate.max_standardized_deviation(k);
    writeln!(
        stdout,
        "# model {model}, degrees {law}, L = {}, M = {}, {} points, {} bins ({} empty), {elapsed:.2} s",
        args.waves,
        args.realizations,
        args.points,
        args.bins,
        estimate.empty_bins().len()
    )?;
    writeln!(stdout, "# largest deviation {worst:.3} SE (tolerance {} SE)", args.tolerance)?;
    if worst > args.tolerance {
        return Err(Failure::Validation(format!(
            "empirical covariance deviates by {worst:.3} SE, more than {} SE",
            args.tolerance
        )));
    }
    writeln!(stdout, "PASS")?;
    Ok(())
}

fn print_mu3(stdout: &mut dyn Write, label: &str, mu3: &Mu3, sigma: f64, waves: usize) -> Outcome {
    match *mu3 {
        Mu3::Finite {
            value,
            tail_bound,
            n_max,
        } => {
            writeln!(stdout, "{label}mu3 = {value}")?;
            writeln!(stdout, "{label}tail_bound = {tail_bound:e} (n_max = {n_max})")?;
            writeln!(stdout, "{label}sigma = {sigma}")?;
            writeln!(stdout, "{label}L = {waves}")?;
            writeln!(stdout, "{label}bound = {}", berry_esseen_bound(value, sigma, waves))?;
        }
        Mu3::Divergent {
            partial,
            exponent,
            n_max,
        } => {
            writeln!(
                stdout,
                "{label}mu3 = inf (terms decay like n^{exponent:.3}; partial sum {partial} at n_max = {n_max})"
            )?;
            writeln!(stdout, "{label}bound = inf")?;
        }
    }
    Ok(())
}

fn mu3(args: &Mu3Args, stdout: &mut dyn Write) -> Outcome {
    if args.waves == 0 {
        return Err(Failure::Usage("--L must be at least 1".into()));
    }
    let model = args.model.build()?;
    let (law, _) = degree_law(&args.degrees, &model);
    writeln!(stdout, "model = {model}")?;
    writeln!(stdout, "degrees = {law}")?;
    match &model {
        Model::Scalar(m) => {
            let r = mu3_auto(|n| mu3_wave(m, &law, n), args.n_max, MU3_CAP, MU3_REL)?;
            print_mu3(stdout, "", &r, m.variance().sqrt(), args.waves)?;
        }
        Model::Multi(m) => {
            let variance = m.variance()?;
            for j in 0..m.components() {
                let r = mu3_auto(|n| mu3_wave_component(m, &law, j, n), args.n_max, MU3_CAP, MU3_REL)?;
                print_mu3(stdout, &format!("z{}.", j + 1), &r, variance[(j, j)].sqrt(), args.waves)?;
            }
        }
    }
    Ok(())
}

fn recommend(args: &RecommendArgs, stdout: &mut dyn Write) -> Outcome {
    let model = args.model.build()?;
    let rec = recommendation(&model);
    writeln!(stdout, "model = {model}")?;
    writeln!(stdout, "case = {}", rec.case)?;
    if let Some(r) = rec.rate {
        writeln!(stdout, "rate = {r}")?;
    }
    if let Some(theta) = rec.theta {
        writeln!(stdout, "theta = {theta}")?;
    }
    if let Some(max) = rec.theta_prime_max {
        if rec.interval_is_empty() {
            writeln!(stdout, "theta' interval = ]1, {max}[ (empty)")?;
        } else {
            writeln!(stdout, "theta' interval = ]1, {max}[")?;
        }
    }
    writeln!(stdout, "distribution = {}", rec.distribution)?;
    if let Some(w) = rec.warning {
        writeln!(stdout, "warning = {w}")?;
    }
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Diagnostics go to `stderr` as a single line.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let text = e.to_string();
                    let line = text.lines().next().unwrap_or("usage error");
                    let _ = writeln!(stderr, "{line}");
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Simulate(a) => simulate(a, stdout),
        Command::Coeffs(a) => coeffs(a, stdout),
        Command::Validate(a) => validate(a, stdout),
        Command::Mu3(a) => mu3(a, stdout),
        Command::Recommend(a) => recommend(a, stdout),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message().replace('\n', " "));
            f.code()
        }
    }
}
