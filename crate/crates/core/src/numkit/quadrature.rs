//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tolerance`.
///
/// Panels with the largest error estimate are bisected until the summed
/// estimate drops below the tolerance.
pub fn quadrature<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tolerance: f64) -> Result<f64> {
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("quadrature needs finite a <= b, got [{a}, {b}]")));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut panels = vec![gauss_kronrod(&mut f, a, b)];
    loop {
        let (value, error) = panels
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if !value.is_finite() {
            return Err(Error::Domain("integrand is not finite on the interval".into()));
        }
        // Bisection cannot help once panels reach rounding level.
        let roundoff = 50.0 * f64::EPSILON * panels.iter().map(|p| p.value.abs()).sum::<f64>();
        if error <= tolerance.max(roundoff) {
            return Ok(value);
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("non-empty panel list");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
            });
        }
        panels.push(gauss_kronrod(&mut f, p.a, mid));
        panels.push(gauss_kronrod(&mut f, mid, p.b));
    }
}

/// Composite trapezoid rule over tabulated samples `(x_i, y_i)`.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_integrand() {
        assert_eq!(quadrature(|_| 0.0, 0.0, 1.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn cosine_over_full_period_cancels() {
        let v = quadrature(f64::cos, 0.0, 2.0 * PI, 1e-12).unwrap();
        assert!(v.abs() <= 1e-12, "{v}");
    }

    #[test]
    fn parabola_matches_antiderivative() {
        let v = quadrature(|t| t * t, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn peaked_integrand_needs_refinement() {
        // ∫ 1/(1e-4 + x²) over [-1, 1] = 2·atan(100)/1e-2.
        let exact = 2.0 * (100.0f64).atan() / 1e-2;
        let v = quadrature(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-9).unwrap();
        assert!((v - exact).abs() <= 1e-9, "{}", v - exact);
    }

    #[test]
    fn non_convergence_reports_best_estimate() {
        // Far more oscillations than the panel budget can resolve.
        let r = quadrature(|x: f64| (1e6 * x).sin(), 0.0, 1000.0, 1e-10);
        match r {
            Err(Error::Accuracy { estimate, error_bound }) => {
                assert!(estimate.is_finite() && error_bound > 1e-10)
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_reversed_interval() {
        assert!(matches!(
            quadrature(|x| x, 1.0, 0.0, 1e-8),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let xs = [0.0, 0.3, 1.0, 2.5];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((trapezoid(&xs, &ys) - (2.5 * 2.5 + 2.5)).abs() < 1e-14);
    }
}
