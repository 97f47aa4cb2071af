// Empirical covariance of 100 realizations against the model, lag by lag.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use turning_arcs::covariance::{CovarianceModel, CovarianceSpec};
use turning_arcs::diagnostics::empirical_covariance;
use turning_arcs::simulator::{Execution, SimulationConfig, Simulator};
use turning_arcs::sphere::{sample_pole, PointSet};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = CovarianceModel::new(CovarianceSpec::exponential(1.0, 2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<_> = (0..50).map(|_| sample_pole(2, &mut rng)).collect();
    let points = PointSet::from_points(&pts)?;
    let realizations = (0..100)
        .map(|m| {
            let config = SimulationConfig::new(model.clone(), "zeta:2".parse()?, 500, 100 + m)?;
            Ok(Simulator::new(config).simulate(&points, Execution::Sequential)?)
        })
        .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
    let pairs: Vec<(usize, usize)> = (0..50).flat_map(|i| (i..50).map(move |j| (i, j))).collect();
    let est = empirical_covariance(&realizations, &pairs, 10)?;
    let k = |t: f64, _: usize, _: usize| model.eval(t).unwrap_or(f64::NAN);
    println!("{:>8} {:>6} {:>10} {:>10} {:>8}", "lag", "pairs", "estimate", "model", "se");
    for b in 0..est.bins {
        let c = est.bin_center(b);
        match (est.estimate(b, 0, 0), est.standard_error(b, 0, 0)) {
            (Some(e), Some(se)) => println!("{c:>8.4} {:>6} {e:>10.4} {:>10.4} {se:>8.4}", est.counts[b], est.expected(b, 0, 0, k)),
            _ => println!("{c:>8.4} {:>6} (empty)", est.counts[b]),
        }
    }
    let worst = est.max_standardized_deviation(k);
    println!("largest deviation {worst:.2} standard errors");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
