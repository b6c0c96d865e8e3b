//! Find su-geodesics from the identity to its image under the time-τ geodesic
//! flow on SL(2,R), then measure their energy balance.

use su_balance::sl2flow::{balance_report, lemma_chain, shoot, ShootingConfig};

fn main() -> su_balance::Result<()> {
    let config = ShootingConfig::default();
    for tau in [0.02, 0.1] {
        let outcome = shoot(tau, &config)?;
        println!("τ = {tau}: {} distinct solutions", outcome.solutions.len());
        let r = outcome.shortest();
        let report = balance_report(r)?;
        let (c, s) = r.closure_integrals()?;
        let lemma = lemma_chain(r)?;
        println!("  θ₀ = {:.12}, P_X = {:.12}, ℓ = {:.12}", r.theta0, r.px0, r.length);
        println!("  endpoint residual {:.2e}", r.endpoint_residual);
        println!("  E_s = {:.12}, E_u = {:.12}, defect {:.2e}", report.e1, report.e2, report.defect);
        println!("  ∫cos θ, ∫sin θ = {c:.3e}, {s:.3e}");
        println!("  ℓ√I mod 4K defect: {:?}", lemma.period_multiple_defect);
    }
    Ok(())
}
