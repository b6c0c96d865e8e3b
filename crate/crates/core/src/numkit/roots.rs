//! Damped Newton iteration for square nonlinear systems, plus a bracketed
//! scalar solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

type ResidualFn<'a> = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a;
type JacobianFn<'a> = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'a;

/// A square system `residual(x) = 0`.
pub struct RootProblem<'a> {
    dimension: usize,
    residual: Box<ResidualFn<'a>>,
    jacobian: Option<Box<JacobianFn<'a>>>,
}

impl<'a> RootProblem<'a> {
    pub fn new<F>(dimension: usize, residual: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a,
    {
        Self {
            dimension,
            residual: Box::new(residual),
            jacobian: None,
        }
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'a,
    {
        self.jacobian = Some(Box::new(jacobian));
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        (self.residual)(x)
    }

    fn checked_residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.residual(x);
        if r.len() != self.dimension {
            return Err(Error::Domain(format!(
                "residual returned {} components, expected {}",
                r.len(),
                self.dimension
            )));
        }
        Ok(r)
    }

    fn jacobian_at(&self, x: &[f64], r: &[f64]) -> Result<DMatrix<f64>> {
        if let Some(j) = &self.jacobian {
            return Ok(j(x));
        }
        // Forward differences, step sqrt(eps) * max(1, |x_i|).
        let n = self.dimension;
        let h_base = f64::EPSILON.sqrt();
        let mut jac = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for col in 0..n {
            let h = h_base * x[col].abs().max(1.0);
            xp[col] = x[col] + h;
            let h_eff = xp[col] - x[col];
            let rp = self.checked_residual(&xp)?;
            for row in 0..n {
                jac[(row, col)] = (rp[row] - r[row]) / h_eff;
            }
            xp[col] = x[col];
        }
        Ok(jac)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Newton's method with backtracking on the residual sup-norm.
///
/// Returns `x` with `‖residual(x)‖∞ ≤ tolerance`. On failure the error
/// carries the best iterate seen and its residual norm.
pub fn find_root(
    problem: &RootProblem<'_>,
    initial_guess: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let n = problem.dimension;
    if initial_guess.len() != n {
        return Err(Error::Domain(format!(
            "initial guess has length {}, expected {n}",
            initial_guess.len()
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Domain("root tolerance must be positive".into()));
    }
    let mut x = initial_guess.to_vec();
    let mut r = problem.checked_residual(&x)?;
    let mut norm = inf_norm(&r);
    if !norm.is_finite() {
        return Err(Error::NonConvergence {
            best: x,
            residual_norm: norm,
            iterations: 0,
        });
    }

    for iteration in 0..max_iterations {
        if norm <= tolerance {
            return Ok(x);
        }
        let jac = problem.jacobian_at(&x, &r)?;
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let step = match jac.clone().lu().solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            // Singular Jacobian: fall back to least squares.
            _ => match jac.svd(true, true).solve(&rhs, 1e-14) {
                Ok(s) => s,
                Err(_) => {
                    return Err(Error::NonConvergence {
                        best: x,
                        residual_norm: norm,
                        iterations: iteration,
                    })
                }
            },
        };

        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 1024.0 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            let r_trial = problem.checked_residual(&trial)?;
            let n_trial = inf_norm(&r_trial);
            if n_trial.is_finite() && n_trial < norm {
                x = trial;
                r = r_trial;
                norm = n_trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                best: x,
                residual_norm: norm,
                iterations: iteration + 1,
            });
        }
    }
    if norm <= tolerance {
        return Ok(x);
    }
    Err(Error::NonConvergence {
        best: x,
        residual_norm: norm,
        iterations: max_iterations,
    })
}

/// Root of a scalar function on a sign-changing bracket `[a, b]`.
///
/// Illinois-modified regula falsi; converges superlinearly and never leaves
/// the bracket.
pub fn find_root_bracketed<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tolerance: f64,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Domain(format!(
            "no sign change on [{a}, {b}]: f = ({fa}, {fb})"
        )));
    }
    // The bracket cannot shrink below a few ulps of its endpoints.
    let width = |a: f64, b: f64| tolerance.max(4.0 * f64::EPSILON * a.abs().max(b.abs()));
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() <= width(a, b) {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= width(a, b) {
            return Ok(0.5 * (a + b));
        }
    }
    Err(Error::NonConvergence {
        best: vec![0.5 * (a + b)],
        residual_norm: fa.abs().min(fb.abs()),
        iterations: 200,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_tolerance_below_ulp_still_terminates() {
        let root = 8.548770739587336_f64;
        let x = find_root_bracketed(|t| (t - root).sin(), 8.0, 9.0, 1e-15).unwrap();
        assert!((x - root).abs() <= 8.0 * f64::EPSILON * root);
    }

    #[test]
    fn linear_root() {
        let p = RootProblem::new(1, |x| vec![x[0]]);
        let x = find_root(&p, &[0.5], 1e-12, 20).unwrap();
        assert!(x[0].abs() <= 1e-12);
    }

    #[test]
    fn square_root_of_two() {
        let p = RootProblem::new(1, |x| vec![x[0] * x[0] - 2.0]);
        let x = find_root(&p, &[1.0], 1e-12, 50).unwrap();
        assert!((x[0] - 2f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn decoupled_linear_system() {
        let p = RootProblem::new(2, |x| vec![x[0] - 1.0, x[1] + 2.0]);
        let x = find_root(&p, &[0.0, 0.0], 1e-12, 20).unwrap();
        assert!((x[0] - 1.0).abs() <= 1e-12 && (x[1] + 2.0).abs() <= 1e-12);
    }

    #[test]
    fn analytic_jacobian_is_used() {
        let p = RootProblem::new(2, |x| vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1]])
            .with_jacobian(|x| DMatrix::from_row_slice(2, 2, &[2.0 * x[0], 2.0 * x[1], 1.0, -1.0]));
        let x = find_root(&p, &[1.0, 0.5], 1e-13, 50).unwrap();
        assert!((x[0] - 2f64.sqrt()).abs() < 1e-12 && (x[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn no_root_reports_best_iterate() {
        let p = RootProblem::new(1, |x| vec![x[0] * x[0] + 1.0]);
        match find_root(&p, &[0.3], 1e-10, 30) {
            Err(Error::NonConvergence { best, residual_norm, .. }) => {
                assert_eq!(best.len(), 1);
                assert!(residual_norm >= 1.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn wrong_guess_length_is_domain_error() {
        let p = RootProblem::new(2, |x| x.to_vec());
        assert!(matches!(find_root(&p, &[1.0], 1e-8, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn bracketed_scalar_root() {
        let r = find_root_bracketed(|x| x.cos() - x, 0.0, 1.0, 1e-14).unwrap();
        assert!((r.cos() - r).abs() < 1e-13);
        assert!(find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-10).is_err());
    }
}
