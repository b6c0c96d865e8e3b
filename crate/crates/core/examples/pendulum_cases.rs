//! Classify a few pendulum initial conditions, fit closed forms, and compare
//! them with direct integration.

use su_balance::pendulum::{classify, fit_solution, solve_closed_form, solve_numeric, PendulumParams};

fn main() -> su_balance::Result<()> {
    let starts = [
        ("small swing", 1.0, 0.3, 0.0),
        ("separatrix", 1.0, 0.0, 2.0),
        ("circulating", 1.0, 0.5, 3.0),
        ("hanging at rest", 1.0, 0.0, 0.0),
    ];
    for (label, omega, theta0, thetadot0) in starts {
        let params = PendulumParams::new(omega, theta0, thetadot0)?;
        let case = classify(&params);
        println!("{label}: {case:?}");
        if case.is_equilibrium() {
            continue;
        }
        let sol = fit_solution(&params)?;
        println!("  k = {:?}, t0 = {:.12}, period = {:?}", sol.k, sol.t0, sol.period());
        let numeric = solve_numeric(&params, 10.0, 1e-12)?;
        let mut worst = 0.0_f64;
        for i in 0..=100 {
            let t = 0.1 * i as f64;
            let closed = solve_closed_form(&sol, t)?;
            let num = numeric.evaluate(t.min(10.0)).expect("within span")[0];
            worst = worst.max((closed - num).abs());
        }
        println!("  max |closed form - numeric| on [0, 10]: {worst:.2e}");
    }
    Ok(())
}
