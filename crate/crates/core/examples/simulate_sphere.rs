// A scalar negative binomial field on a 60 x 120 grid of S², written as CSV.

use std::fs::File;
use std::io::BufWriter;

use turning_arcs::covariance::{CovarianceModel, CovarianceSpec};
use turning_arcs::grid::{build_grid, GridSpec};
use turning_arcs::output::write_realization;
use turning_arcs::simulator::{Execution, SimulationConfig, Simulator};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = CovarianceModel::new(CovarianceSpec::negative_binomial(0.5))?;
    let config = SimulationConfig::new(model, "geometric:0.01".parse()?, 1500, 7)?;
    let grid: GridSpec = "latlon:60x120".parse()?;
    let points = build_grid(&grid)?;
    let field = Simulator::new(config).simulate(&points, Execution::Parallel)?;

    let n = field.values.len() as f64;
    let mean = field.values.iter().sum::<f64>() / n;
    let var = field.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    println!("{} points, spatial mean {mean:.3}, spatial variance {var:.3}", points.len());

    let path = std::env::temp_dir().join("turning_arcs_nb.csv");
    let mut out = BufWriter::new(File::create(&path)?);
    write_realization(&mut out, &field, &grid, &[])?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
