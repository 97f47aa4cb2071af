// Fields on higher-dimensional spheres viewed through 2-sphere sections:
// a generalized F field on slices of S³ and a Chentsov field on S^16.

use turning_arcs::covariance::{CovarianceModel, CovarianceSpec};
use turning_arcs::degree::DegreeDistribution;
use turning_arcs::grid::{build_grid, GridSpec};
use turning_arcs::simulator::{Execution, SimulationConfig, Simulator};

fn summary(values: &[f64]) -> String {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    format!("mean {mean:+.3}, sd {sd:.3}")
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let f = CovarianceModel::new(CovarianceSpec::generalized_f(1.0, 3.5, 2.0, 3))?;
    let config = SimulationConfig::new(f, DegreeDistribution::shifted_zeta(2.0)?, 1500, 3)?;
    let sim = Simulator::new(config);
    for w in [-0.75, -0.25, 0.25, 0.75] {
        let grid = GridSpec::Slice3 { w, n_colat: 30, n_lon: 60 };
        let field = sim.simulate(&build_grid(&grid)?, Execution::Parallel)?;
        println!("S^3 slice w = {w:+}: {}", summary(&field.values));
    }

    let chentsov = CovarianceModel::new(CovarianceSpec::chentsov(16))?;
    let config = SimulationConfig::new(chentsov, DegreeDistribution::odd_shifted_zeta(2.0)?, 1500, 5)?;
    let grid = GridSpec::Section { dim: 16, n_colat: 30, n_lon: 60 };
    let field = Simulator::new(config).simulate(&build_grid(&grid)?, Execution::Parallel)?;
    println!("S^16 section: {}", summary(&field.values));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
