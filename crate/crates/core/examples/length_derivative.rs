//! Transport a shooting solution by the flow and differentiate its length.

use su_balance::sl2flow::{length_derivative_check, shoot, ShootingConfig};

fn main() -> su_balance::Result<()> {
    let outcome = shoot(0.05, &ShootingConfig::default())?;
    let r = outcome.first();
    println!("{:>10} {:>22} {:>22} {:>10}", "r", "finite difference", "2ℓ(E_u - E_s)", "mismatch");
    for step in [1e-2, 1e-3, 1e-4] {
        let d = length_derivative_check(r, step)?;
        println!("{step:10.0e} {:22.3e} {:22.3e} {:10.2e}", d.finite_difference, d.formula, d.mismatch);
    }
    Ok(())
}
