//! Evaluate sn, cn, dn over one period and compare against the AGM/Landen route.

use su_balance::elliptic::landen::jacobi_landen;
use su_balance::elliptic::{quarter_period, JacobiEvaluator, Modulus};

fn main() -> su_balance::Result<()> {
    let k = Modulus::new(0.8)?;
    let quarter = quarter_period(k)?;
    println!("k = 0.8, K(k) = {quarter:.15}");

    let eval = JacobiEvaluator::new(k)?;
    println!("{:>10} {:>19} {:>19} {:>19} {:>10}", "t", "sn", "cn", "dn", "|Δ landen|");
    for i in 0..=8 {
        let t = quarter * i as f64 / 2.0;
        let e = eval.eval(t)?;
        let (s, c, d) = jacobi_landen(t, k);
        let diff = (e.sn - s).abs().max((e.cn - c).abs()).max((e.dn - d).abs());
        println!("{t:10.6} {:19.15} {:19.15} {:19.15} {diff:10.2e}", e.sn, e.cn, e.dn);
    }

    let e = eval.eval(1.234)?;
    println!(
        "identity residuals at t = 1.234: sn²+cn²-1 = {:.1e}, dn²+k²sn²-1 = {:.1e}",
        e.circle_residual(),
        e.modulus_residual()
    );
    Ok(())
}
