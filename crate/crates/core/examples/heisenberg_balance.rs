//! Heisenberg geodesics: the energy split between X₁ and X₂ against the
//! vertical return of the endpoint, as the turning rate v₀ varies.

use std::f64::consts::PI;

use su_balance::heisenberg::{balance_report, geodesic, vertical_endpoint_defect, HeisenbergGeodesicParams, HeisenbergPoint};

fn main() -> su_balance::Result<()> {
    let full = HeisenbergGeodesicParams::new(2.0 * PI, 0.0, HeisenbergPoint::origin(), 1.0)?;
    let end = geodesic(&full)?.endpoint();
    println!("one full turn ends at ({:.2e}, {:.2e}, {:.12})", end.x, end.y, end.z);

    println!("{:>10} {:>10} {:>12} {:>12}", "v0", "theta0", "E1 - E2", "vertical");
    for (v0, theta0) in [(0.0, 0.3), (1.0, 0.3), (PI / 2.0, 0.0), (PI, 0.4), (2.0 * PI, 0.4), (3.0 * PI, 1.0)] {
        let params = HeisenbergGeodesicParams::new(v0, theta0, HeisenbergPoint::origin(), 1.0)?;
        let report = balance_report(&params)?;
        println!(
            "{v0:10.6} {theta0:10.6} {:12.3e} {:12.3e}",
            report.defect,
            vertical_endpoint_defect(&params)
        );
    }
    Ok(())
}
