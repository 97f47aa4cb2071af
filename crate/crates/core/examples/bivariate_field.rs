// A bivariate negative binomial field: Schoenberg matrices, their factors
// and the correlation between the two simulated components.

use turning_arcs::covariance::{MultiCovarianceModel, MultiCovarianceSpec};
use turning_arcs::grid::build_grid;
use turning_arcs::simulator::{Execution, SimulationConfig, Simulator};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = MultiCovarianceModel::new(MultiCovarianceSpec::negative_binomial(0.2, 0.2, 0.7, 0.6))?;
    for n in 0..3 {
        let f = model.factor(n)?;
        println!("B_{n} = {:?}", model.schoenberg_matrix(n)?.as_slice());
        println!("  factor columns {:?} / {:?}", f.column(0), f.column(1));
    }
    println!("K(0) = {:?}", model.variance()?.as_slice());

    let points = build_grid(&"latlon:40x80".parse()?)?;
    let config = SimulationConfig::new(model, "geometric:0.01".parse()?, 1500, 11)?;
    let field = Simulator::new(config).simulate(&points, Execution::Parallel)?;
    let (z1, z2) = (field.component(0), field.component(1));
    let n = z1.len() as f64;
    let m1 = z1.iter().sum::<f64>() / n;
    let m2 = z2.iter().sum::<f64>() / n;
    let cov = z1.iter().zip(&z2).map(|(a, b)| (a - m1) * (b - m2)).sum::<f64>() / n;
    let s1 = (z1.iter().map(|a| (a - m1).powi(2)).sum::<f64>() / n).sqrt();
    let s2 = (z2.iter().map(|b| (b - m2).powi(2)).sum::<f64>() / n).sqrt();
    println!("spatial correlation of the components: {:.3} (model: 0.6)", cov / (s1 * s2));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
