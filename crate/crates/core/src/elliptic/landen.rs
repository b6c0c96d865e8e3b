//! Arithmetic–geometric-mean evaluation of K(k) and of sn, cn, dn by the
//! descending Landen transformation. Shares nothing with the ODE path.

use std::f64::consts::FRAC_PI_2;

use super::Modulus;

/// Arithmetic–geometric mean of two nonnegative numbers.
pub fn agm(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a.abs() {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// K(k) = π / (2·agm(1, √(1 − k²))).
pub fn quarter_period_agm(k: Modulus) -> f64 {
    FRAC_PI_2 / agm(1.0, k.complementary())
}

/// `(sn, cn, dn)` at `u` by descending Landen transformation.
pub fn jacobi_landen(u: f64, k: Modulus) -> (f64, f64, f64) {
    const CA: f64 = 1e-9;
    let mut em = [0.0f64; 16];
    let mut en = [0.0f64; 16];
    let mut emc = k.complementary().powi(2);
    let mut a = 1.0;
    let mut c = 1.0;
    let mut dn = 1.0;
    let mut levels = 0;
    for i in 0..16 {
        levels = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= CA * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let u = c * u;
    let mut sn = u.sin();
    let mut cn = u.cos();
    if sn != 0.0 {
        let mut a = cn / sn;
        c *= a;
        for ii in (0..=levels).rev() {
            let b = em[ii];
            a *= c;
            c *= dn;
            dn = (en[ii] + a) / (b + a);
            a = c / b;
        }
        let a = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { a } else { -a };
        cn = c * sn;
    }
    (sn, cn, dn)
}
