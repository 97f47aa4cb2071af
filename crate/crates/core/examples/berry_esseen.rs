// Distance to normality: the third moment of one wave, the resulting
// Berry–Esséen bound and the observed Kolmogorov–Smirnov distance at a
// fixed point for a few numbers of waves.

use turning_arcs::covariance::{CovarianceModel, CovarianceSpec};
use turning_arcs::degree::DegreeDistribution;
use turning_arcs::diagnostics::{berry_esseen_bound, ks_normality, mu3_gegenbauer, mu3_wave, Mu3};
use turning_arcs::simulator::{SimulationConfig, Simulator};
use turning_arcs::sphere::{PointSet, SpherePoint};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for n in [1usize, 4, 16, 64] {
        println!("E|P_{n}|^3 on S^2 = {:.6e}", mu3_gegenbauer(n, 2)?);
    }
    let model = CovarianceModel::new(CovarianceSpec::negative_binomial(0.5))?;
    let law = DegreeDistribution::geometric(0.01)?;
    let Mu3::Finite { value: mu3, tail_bound, .. } = mu3_wave(&model, &law, 128)? else {
        return Err("third moment diverges".into());
    };
    println!("mu3 of one wave = {mu3:.6} (tail <= {tail_bound:.1e})");

    let point = PointSet::from_points(&[SpherePoint::from_angles(1.0, 2.0)])?;
    for waves in [15usize, 150, 1500] {
        let samples: Vec<f64> = (0..2000u64)
            .map(|seed| {
                let config = SimulationConfig::new(model.clone(), law.clone(), waves, seed)?;
                Ok(Simulator::new(config).simulate(&point, Default::default())?.values[0])
            })
            .collect::<Result<_, Box<dyn std::error::Error>>>()?;
        println!(
            "L = {waves:>4}: bound {:.4}, observed KS {:.4} (2000 samples)",
            berry_esseen_bound(mu3, 1.0, waves),
            ks_normality(&samples, 1.0)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
