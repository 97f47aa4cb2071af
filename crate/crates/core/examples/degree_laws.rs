// Degree laws: recommendations from the decay of the Schoenberg sequence,
// and draws from the recommended law.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use turning_arcs::covariance::{CovarianceModel, CovarianceSpec};
use turning_arcs::degree::recommend_distribution;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        CovarianceSpec::negative_binomial(0.5),
        CovarianceSpec::spectral_matern(1.0, 0.75),
        CovarianceSpec::generalized_f(1.0, 3.5, 2.0, 3),
        CovarianceSpec::chentsov(2),
        CovarianceSpec::chentsov(8),
        CovarianceSpec::finite(vec![0.2, 0.5, 0.3], 1),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for spec in specs {
        let model = CovarianceModel::new(spec)?;
        let rec = recommend_distribution(&model);
        let draws: Vec<usize> = (0..12).map(|_| rec.distribution.sample(&mut rng)).collect();
        println!("{model} on S^{}: {rec}", model.dim());
        println!("  draws {draws:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
