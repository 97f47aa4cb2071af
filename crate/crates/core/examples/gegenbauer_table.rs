// Gegenbauer polynomials on a few spheres: values, G_n(1) and norms.

use turning_arcs::gegenbauer::{gegenbauer_at_one, gegenbauer_eval_table, gegenbauer_norm_sq, sphere_lambda};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for d in [2usize, 3, 8] {
        let lambda = sphere_lambda(d);
        let table = gegenbauer_eval_table(lambda, 6, 0.3)?;
        println!("S^{d} (lambda = {lambda}): G_n(0.3) for n = 0..6");
        for (n, g) in table.iter().enumerate() {
            println!(
                "  n = {n}: {g:>12.6}   G_n(1) = {:>10.3}   ||G_n||^2 = {:.6}",
                gegenbauer_at_one(lambda, n)?,
                gegenbauer_norm_sq(d, n)?
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
