//! A circulating pendulum with ω = √2 run over one period of its modulus:
//! both half-angle integrals vanish, and so does the integral of sin θ. An
//! oscillating pendulum never satisfies the hypothesis.

use su_balance::pendulum::{fit_solution, verify_lemma_int, PendulumParams};

fn main() -> su_balance::Result<()> {
    let omega = std::f64::consts::SQRT_2;
    let circulating = fit_solution(&PendulumParams::new(omega, 0.0, 4.0)?)?;
    let length = 4.0 * circulating.quarter_period().expect("circulating") / circulating.energy.sqrt();

    let oscillating = fit_solution(&PendulumParams::new(omega, 0.0, 1.0)?)?;
    let runs = [
        ("circulating, ℓ√I = 4K", circulating, length),
        ("circulating, ℓ√I = 3.2K", circulating, 0.8 * length),
        ("oscillating, one period", oscillating, oscillating.period().expect("oscillating")),
    ];
    for (label, sol, ell) in runs {
        let report = verify_lemma_int(&sol, ell)?;
        println!("{label} (I = {}, ℓ = {ell:.12}):", sol.energy);
        let (s, c) = report.halfangle_integrals;
        println!("  ∫ sin(θ/2) = {s:.3e}, ∫ cos(θ/2) = {c:.3e}");
        println!("  hypothesis holds: {}", report.hypothesis_holds);
        println!("  distance of ℓ√I from 4Kℤ: {:?}", report.period_multiple_defect);
        println!("  ∫ sin θ = {:.3e}", report.sin_integral);
    }
    Ok(())
}
