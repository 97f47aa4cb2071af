// The covariance catalog: Schoenberg coefficients, decay class and the
// covariance at a few geodesic distances.

use std::f64::consts::PI;

use turning_arcs::covariance::{CovarianceModel, CovarianceSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        CovarianceSpec::negative_binomial(0.5),
        CovarianceSpec::spectral_matern(1.0, 0.75),
        CovarianceSpec::generalized_f(1.0, 3.5, 2.0, 3),
        CovarianceSpec::chentsov(4),
        CovarianceSpec::exponential(1.0, 2),
        CovarianceSpec::finite(vec![0.2, 0.5, 0.3], 1),
    ];
    for spec in specs {
        let model = CovarianceModel::new(spec)?;
        let b: Vec<String> = (0..5).map(|n| format!("{:.5}", model.schoenberg_coeff(n))).collect();
        println!("{model} on S^{}: {:?}", model.dim(), model.decay());
        println!("  b_0..b_4 = [{}]", b.join(", "));
        for theta in [0.0, PI / 4.0, PI / 2.0, PI] {
            let k = model.covariance_eval(theta)?;
            let note = match k.series {
                Some(s) => format!(" (series to n = {}, remainder <= {:.1e})", s.last_degree, s.remainder_bound),
                None => String::new(),
            };
            println!("  K({theta:.4}) = {:.6}{note}", k.value);
        }
    }
    // invalid parameters are reported constraint by constraint
    if let Err(e) = CovarianceModel::new(CovarianceSpec::generalized_f(-1.0, 0.5, 2.0, 3)) {
        println!("rejected: {e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
