//! The special contact Anosov flow on `SL(2, ℝ)`.
//!
//! The frame `X = ½ diag(1, −1)`, `Y = E/√2`, `Z = F/√2` is left invariant,
//! `X` generates the flow `f_t(g) = g·exp(tX)`, `Y` spans the stable and `Z`
//! the unstable direction. Unit-speed su-geodesics live on the level set
//! `P_Y² + P_Z² = 1`, parametrized by `P_Y = cos θ`, `P_Z = −sin θ`:
//!
//! ```text
//! ġ = g·(cos θ Y − sin θ Z),   θ̇ = −P_X,   Ṗ_X = −cos 2θ.
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_8, PI, SQRT_2};

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::{quarter_period, Modulus};
use crate::error::{Error, Result};
use crate::numkit::{find_root, integrate, quadrature, OdeProblem, RootProblem, Trajectory};
use crate::pendulum::{fit_solution, verify_lemma_int, LemmaIntReport, PendulumParams};
use crate::srgeom::{energy_split, EnergyReport, HorizontalPath};

/// Largest entrywise bracket residual accepted for the frame.
pub const BRACKET_TOLERANCE: f64 = 1e-14;

/// Accepted `|det g − 1|` for a group element.
pub const DET_TOLERANCE: f64 = 1e-9;

/// Frequency of the reduced pendulum `φ = 2θ − π/2`.
pub const REDUCED_OMEGA: f64 = SQRT_2;

const PATH_SAMPLES: usize = 8001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupPoint(Matrix2<f64>);

impl GroupPoint {
    pub fn new(m: Matrix2<f64>) -> Result<Self> {
        let det = m.determinant();
        if !((det - 1.0).abs() <= DET_TOLERANCE) {
            return Err(Error::Domain(format!("determinant {det} is not 1")));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    /// Scale by `1/√det`; fails when `det ≤ 0`.
    pub fn renormalized(m: Matrix2<f64>) -> Result<Self> {
        let det = m.determinant();
        if !(det > 0.0) {
            return Err(Error::Domain(format!("cannot renormalize determinant {det}")));
        }
        Ok(Self(m / det.sqrt()))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    /// `[m11, m12, m21, m22]`.
    pub fn entries(&self) -> [f64; 4] {
        [self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)]]
    }

    fn from_entries(e: &[f64]) -> Matrix2<f64> {
        Matrix2::new(e[0], e[1], e[2], e[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRealization {
    pub xm: Matrix2<f64>,
    pub ym: Matrix2<f64>,
    pub zm: Matrix2<f64>,
}

fn commutator(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix2<f64> {
    a * b - b * a
}

impl FrameRealization {
    /// `([X,Y] − Y, [Y,Z] − X, [Z,X] − Z)` as largest absolute entries.
    pub fn bracket_residuals(&self) -> [f64; 3] {
        let norm = |m: Matrix2<f64>| m.abs().max();
        [
            norm(commutator(&self.xm, &self.ym) - self.ym),
            norm(commutator(&self.ym, &self.zm) - self.xm),
            norm(commutator(&self.zm, &self.xm) - self.zm),
        ]
    }
}

pub fn frame_realization() -> Result<FrameRealization> {
    let frame = FrameRealization {
        xm: Matrix2::new(0.5, 0.0, 0.0, -0.5),
        ym: Matrix2::new(0.0, FRAC_1_SQRT_2, 0.0, 0.0),
        zm: Matrix2::new(0.0, 0.0, FRAC_1_SQRT_2, 0.0),
    };
    let worst = frame.bracket_residuals().into_iter().fold(0.0, f64::max);
    if worst > BRACKET_TOLERANCE {
        return Err(Error::Consistency(format!("frame bracket residual {worst:e}")));
    }
    Ok(frame)
}

/// `exp(tX) = diag(e^{t/2}, e^{−t/2})`.
pub fn flow_generator_exp(t: f64) -> Matrix2<f64> {
    Matrix2::new((0.5 * t).exp(), 0.0, 0.0, (-0.5 * t).exp())
}

/// `f_t(g) = g·exp(tX)`.
pub fn flow(g: &GroupPoint, t: f64) -> GroupPoint {
    GroupPoint(g.0 * flow_generator_exp(t))
}

/// Factors by which `Tf_t` scales the `Y` and `Z` coefficients of a
/// tangent vector: `(e^{−t}, e^{t})`.
pub fn tangent_flow_scaling(t: f64) -> (f64, f64) {
    ((-t).exp(), t.exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub g: GroupPoint,
    pub theta: f64,
    pub px: f64,
}

impl ReducedState {
    /// Momenta `(P_X, P_Y, P_Z)` of the state's covector.
    pub fn momentum(&self) -> [f64; 3] {
        [self.px, self.theta.cos(), -self.theta.sin()]
    }

    /// Energy of the reduced pendulum `φ = 2θ − π/2` with `ω = √2`:
    /// `I = P_X² + 2 sin²(θ − π/4)`.
    pub fn pendulum_energy(&self) -> f64 {
        let s = (self.theta - 0.25 * PI).sin();
        self.px * self.px + 2.0 * s * s
    }

    /// `(φ, φ̇)` of the reduced pendulum.
    pub fn pendulum_state(&self) -> (f64, f64) {
        (2.0 * self.theta - FRAC_PI_2, -2.0 * self.px)
    }

    fn to_vec(self) -> Vec<f64> {
        let e = self.g.entries();
        vec![e[0], e[1], e[2], e[3], self.theta, self.px]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDerivative {
    pub g_dot: Matrix2<f64>,
    pub theta_dot: f64,
    pub px_dot: f64,
}

/// Horizontal velocity `cos θ Y − sin θ Z` as a Lie-algebra element.
fn velocity(theta: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, FRAC_1_SQRT_2 * theta.cos(), -FRAC_1_SQRT_2 * theta.sin(), 0.0)
}

pub fn geodesic_ode(state: &ReducedState) -> ReducedDerivative {
    ReducedDerivative {
        g_dot: state.g.0 * velocity(state.theta),
        theta_dot: -state.px,
        px_dot: -(2.0 * state.theta).cos(),
    }
}

fn rhs(y: &[f64], dy: &mut [f64]) {
    let (c, s) = (FRAC_1_SQRT_2 * y[4].cos(), -FRAC_1_SQRT_2 * y[4].sin());
    // g·[[0, c], [s, 0]] for g = [[y0, y1], [y2, y3]].
    dy[0] = y[1] * s;
    dy[1] = y[0] * c;
    dy[2] = y[3] * s;
    dy[3] = y[2] * c;
    dy[4] = -y[5];
    dy[5] = -(2.0 * y[4]).cos();
}

fn renormalize(y: &mut [f64]) {
    let det = y[0] * y[3] - y[1] * y[2];
    if det > 0.0 {
        let s = det.sqrt().recip();
        y[..4].iter_mut().for_each(|v| *v *= s);
    }
}

/// A geodesic integrated from `t = 0` to `t = ℓ`.
#[derive(Debug, Clone)]
pub struct GeodesicTrajectory {
    trajectory: Trajectory,
}

impl GeodesicTrajectory {
    pub fn length(&self) -> f64 {
        self.trajectory.last_time()
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn state_at(&self, t: f64) -> Option<ReducedState> {
        let y = self.trajectory.evaluate(t)?;
        Some(ReducedState {
            g: GroupPoint(GroupPoint::from_entries(&y)),
            theta: y[4],
            px: y[5],
        })
    }

    pub fn final_state(&self) -> ReducedState {
        self.state_at(self.length()).expect("endpoint is covered")
    }

    /// Largest `|det g − 1|` over the integrator's nodes.
    pub fn det_drift(&self) -> f64 {
        self.trajectory
            .states()
            .map(|y| (y[0] * y[3] - y[1] * y[2] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `θ` at `samples` equally spaced times on `[0, ℓ]`, with those times.
    pub fn sample_theta(&self, samples: usize) -> (Vec<f64>, Vec<f64>) {
        let ell = self.length();
        let n = samples.max(2);
        let mut y = [0.0; 6];
        (0..n)
            .map(|i| {
                let t = if i + 1 == n { ell } else { ell * i as f64 / (n - 1) as f64 };
                self.trajectory.evaluate_into(t, &mut y);
                (t, y[4])
            })
            .unzip()
    }
}

/// Integrate the joint `(g, θ, P_X)` system over `[0, ℓ]`, renormalizing
/// `det g = 1` after every step.
pub fn integrate_geodesic(
    initial: &ReducedState,
    length: f64,
    tolerance: f64,
) -> Result<GeodesicTrajectory> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Domain(format!("geodesic length must be positive, got {length}")));
    }
    let problem = OdeProblem::new(|_, y, dy| rhs(y, dy), 0.0, initial.to_vec())?
        .with_projection(renormalize);
    Ok(GeodesicTrajectory {
        trajectory: integrate(&problem, length, tolerance)?,
    })
}

/// Knobs of the multistart boundary-value solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingConfig {
    pub theta_grid: Vec<f64>,
    pub px_grid: Vec<f64>,
    pub tau_max: f64,
    /// Newton stops once the sup-norm endpoint residual is below this.
    pub residual_tolerance: f64,
    pub integration_tolerance: f64,
    pub max_iterations: usize,
    /// Parameter distance below which two solutions are the same.
    pub distinct_threshold: f64,
    /// Candidates shorter than this count as the trivial loop.
    pub min_length: f64,
    /// Newton iterates leaving `0 < ℓ ≤ max_length`, `|P_X| ≤ max_px` are rejected.
    pub max_length: f64,
    pub max_px: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        let magnitudes = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        Self {
            theta_grid: (0..16).map(|i| i as f64 * FRAC_PI_8).collect(),
            px_grid: magnitudes.iter().flat_map(|&m| [m, -m]).collect(),
            tau_max: 0.2,
            residual_tolerance: 1e-11,
            integration_tolerance: 1e-12,
            max_iterations: 40,
            distinct_threshold: 1e-4,
            min_length: 1e-6,
            max_length: 4.0,
            max_px: 64.0,
        }
    }
}

/// A converged geodesic from the identity to `exp(τX)`.
#[derive(Debug, Clone)]
pub struct ShootingResult {
    pub tau: f64,
    pub theta0: f64,
    pub px0: f64,
    pub length: f64,
    pub endpoint_residual: f64,
    pub geodesic: GeodesicTrajectory,
}

impl ShootingResult {
    pub fn initial_state(&self) -> ReducedState {
        ReducedState {
            g: GroupPoint::identity(),
            theta: self.theta0,
            px: self.px0,
        }
    }

    /// `(∫₀^ℓ cos θ dt, ∫₀^ℓ sin θ dt)`.
    pub fn closure_integrals(&self) -> Result<(f64, f64)> {
        let traj = self.geodesic.trajectory();
        let theta = |t: f64| traj.evaluate(t).map_or(f64::NAN, |y| y[4]);
        Ok((
            quadrature(|t| theta(t).cos(), 0.0, self.length, 1e-12)?,
            quadrature(|t| theta(t).sin(), 0.0, self.length, 1e-12)?,
        ))
    }

    /// The geodesic's velocity `(w_s, w_u) = (cos θ, −sin θ)` on a uniform grid.
    pub fn horizontal_path(&self) -> Result<HorizontalPath> {
        let (times, thetas) = self.geodesic.sample_theta(PATH_SAMPLES);
        reduced_path(times, &thetas)
    }
}

/// Every distinct solution found, in start-grid order.
#[derive(Debug, Clone)]
pub struct ShootingOutcome {
    pub solutions: Vec<ShootingResult>,
}

impl ShootingOutcome {
    /// The solution reached from the earliest start of the grid.
    pub fn first(&self) -> &ShootingResult {
        &self.solutions[0]
    }

    pub fn shortest(&self) -> &ShootingResult {
        self.solutions
            .iter()
            .min_by(|a, b| a.length.total_cmp(&b.length))
            .expect("outcome holds at least one solution")
    }
}

/// `ℓ` at which the reduced pendulum of `(θ₀, P_X)` completes one period.
pub fn heuristic_length(theta0: f64, px0: f64) -> Result<f64> {
    let state = ReducedState {
        g: GroupPoint::identity(),
        theta: theta0,
        px: px0,
    };
    let i = state.pendulum_energy();
    let w2 = REDUCED_OMEGA * REDUCED_OMEGA;
    if i > w2 * (1.0 + 1e-9) {
        Ok(4.0 * quarter_period(Modulus::new(REDUCED_OMEGA / i.sqrt())?)? / i.sqrt())
    } else if i < w2 * (1.0 - 1e-9) && i > 0.0 {
        Ok(4.0 * quarter_period(Modulus::new(i.sqrt() / REDUCED_OMEGA)?)? / REDUCED_OMEGA)
    } else {
        Err(Error::Domain(format!("no finite period at reduced energy {i}")))
    }
}

fn endpoint_residual(tau: f64, x: &[f64], config: &ShootingConfig) -> Vec<f64> {
    let (theta0, px0, ell) = (x[0], x[1], x[2]);
    let nan = vec![f64::NAN; 3];
    let inside = ell > 0.0 && ell <= config.max_length && px0.abs() <= config.max_px;
    if !inside || !theta0.is_finite() {
        return nan;
    }
    let start = ReducedState {
        g: GroupPoint::identity(),
        theta: theta0,
        px: px0,
    };
    match integrate_geodesic(&start, ell, config.integration_tolerance) {
        Ok(geo) => {
            let m = geo.trajectory().final_state();
            let target = flow_generator_exp(tau);
            vec![m[0] - target[(0, 0)], m[1] - target[(0, 1)], m[2] - target[(1, 0)]]
        }
        Err(_) => nan,
    }
}

fn theta_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Find su-geodesics from the identity to `f_τ(e) = exp(τX)` by Newton
/// shooting on `(θ₀, P_X(0), ℓ)` from every start of the configured grid.
pub fn shoot(tau: f64, config: &ShootingConfig) -> Result<ShootingOutcome> {
    if !(tau >= 0.0 && tau <= config.tau_max) {
        return Err(Error::Domain(format!(
            "tau must lie in [0, {}], got {tau}",
            config.tau_max
        )));
    }
    let starts: Vec<(f64, f64)> = config
        .theta_grid
        .iter()
        .flat_map(|&th| config.px_grid.iter().map(move |&px| (th, px)))
        .collect();
    let tol = config.integration_tolerance;

    let attempts: Vec<std::result::Result<[f64; 3], f64>> = starts
        .par_iter()
        .map(|&(th, px)| {
            let ell = match heuristic_length(th, px) {
                Ok(ell) => ell,
                Err(_) => return Err(f64::INFINITY),
            };
            let problem = RootProblem::new(3, move |x| endpoint_residual(tau, x, config));
            match find_root(&problem, &[th, px, ell], config.residual_tolerance, config.max_iterations)
            {
                Ok(x) if x[2] > config.min_length => Ok([x[0], x[1], x[2]]),
                Ok(_) => Err(f64::INFINITY),
                Err(Error::NonConvergence { residual_norm, .. }) => Err(residual_norm),
                Err(_) => Err(f64::INFINITY),
            }
        })
        .collect();

    let mut solutions: Vec<ShootingResult> = Vec::new();
    let mut best_residuals = Vec::new();
    for attempt in attempts {
        let x = match attempt {
            Ok(x) => x,
            Err(r) => {
                best_residuals.push(r);
                continue;
            }
        };
        let theta0 = x[0].rem_euclid(2.0 * PI);
        let duplicate = solutions.iter().any(|s| {
            theta_distance(s.theta0, theta0)
                .max((s.px0 - x[1]).abs())
                .max((s.length - x[2]).abs())
                <= config.distinct_threshold
        });
        if duplicate {
            continue;
        }
        let start = ReducedState {
            g: GroupPoint::identity(),
            theta: theta0,
            px: x[1],
        };
        let geodesic = integrate_geodesic(&start, x[2], tol)?;
        let residual = endpoint_residual(tau, &[theta0, x[1], x[2]], config)
            .into_iter()
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        solutions.push(ShootingResult {
            tau,
            theta0,
            px0: x[1],
            length: x[2],
            endpoint_residual: residual,
            geodesic,
        });
    }
    if solutions.is_empty() {
        best_residuals.sort_by(f64::total_cmp);
        best_residuals.truncate(8);
        return Err(Error::SearchFailure { best_residuals });
    }
    Ok(ShootingOutcome { solutions })
}

/// Horizontal path with `(w_s, w_u) = (cos θ, −sin θ)` from samples of `θ`.
pub fn reduced_path(times: Vec<f64>, thetas: &[f64]) -> Result<HorizontalPath> {
    let components = thetas.iter().map(|&th| [th.cos(), -th.sin()]).collect();
    HorizontalPath::new(times, components)
}

/// Energy split against `E^s ⊕ E^u = ⟨Y⟩ ⊕ ⟨Z⟩`: `e1 = 𝓔_s`, `e2 = 𝓔_u`.
pub fn balance_report(result: &ShootingResult) -> Result<EnergyReport> {
    energy_split(&result.horizontal_path()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthDerivativeCheck {
    pub r_step: f64,
    /// Central difference of `r ↦ |f_r∘γ|` at `r = 0`.
    pub finite_difference: f64,
    /// `2ℓ(𝓔_u − 𝓔_s)`.
    pub formula: f64,
    /// `|finite_difference − formula|`.
    pub mismatch: f64,
    /// `ℓ(𝓔_u − 𝓔_s)`, the exact derivative of the transported length.
    pub first_order: f64,
}

/// `|f_r∘γ| = ∫ √(e^{−2r} w_s² + e^{2r} w_u²) dt` by the trapezoid rule.
pub fn transported_length(path: &HorizontalPath, r: f64) -> f64 {
    let (a, b) = tangent_flow_scaling(r);
    let speeds: Vec<f64> = path
        .components()
        .iter()
        .map(|w| ((a * w[0]).powi(2) + (b * w[1]).powi(2)).sqrt())
        .collect();
    crate::numkit::trapezoid(path.times(), &speeds)
}

pub fn length_derivative_on(path: &HorizontalPath, r_step: f64) -> Result<LengthDerivativeCheck> {
    if !(r_step > 0.0) || !r_step.is_finite() {
        return Err(Error::Domain(format!("r_step must be positive, got {r_step}")));
    }
    let split = energy_split(path)?;
    let ell = split.length;
    let finite_difference =
        (transported_length(path, r_step) - transported_length(path, -r_step)) / (2.0 * r_step);
    let first_order = ell * (split.e2 - split.e1);
    let formula = 2.0 * first_order;
    Ok(LengthDerivativeCheck {
        r_step,
        finite_difference,
        formula,
        mismatch: (finite_difference - formula).abs(),
        first_order,
    })
}

pub fn length_derivative_check(result: &ShootingResult, r_step: f64) -> Result<LengthDerivativeCheck> {
    length_derivative_on(&result.horizontal_path()?, r_step)
}

/// Run the vanishing-integral lemma on the reduced pendulum of a geodesic.
pub fn lemma_chain(result: &ShootingResult) -> Result<LemmaIntReport> {
    let (phi0, phidot0) = result.initial_state().pendulum_state();
    let params = PendulumParams::new(REDUCED_OMEGA, phi0, phidot0)?;
    let solution = fit_solution(&params)?;
    verify_lemma_int(&solution, result.length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pendulum::{energy_of, solve_numeric};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    fn max_abs(m: Matrix2<f64>) -> f64 {
        m.abs().max()
    }

    fn state(theta: f64, px: f64) -> ReducedState {
        ReducedState {
            g: GroupPoint::identity(),
            theta,
            px,
        }
    }

    #[test]
    fn frame_brackets() {
        let f = frame_realization().unwrap();
        for r in f.bracket_residuals() {
            assert!(r <= BRACKET_TOLERANCE);
        }
        for m in [f.xm, f.ym, f.zm] {
            assert_eq!(m.trace(), 0.0);
        }
    }

    #[test]
    fn flow_examples() {
        let id = GroupPoint::identity();
        assert_eq!(flow(&id, 0.0), id);
        let m = flow(&id, 2.0);
        assert!(max_abs(m.matrix() - Matrix2::new(E, 0.0, 0.0, 1.0 / E)) <= 1e-15);

        let g = GroupPoint::new(Matrix2::new(2.0, 1.0, 3.0, 2.0)).unwrap();
        let a = flow(&flow(&g, 0.4), -1.1);
        let b = flow(&g, -0.7);
        assert!(max_abs(a.matrix() - b.matrix()) <= 1e-12);
    }

    #[test]
    fn group_point_validation() {
        assert!(GroupPoint::new(Matrix2::new(1.0, 0.0, 0.0, 2.0)).is_err());
        let g = GroupPoint::renormalized(Matrix2::new(2.0, 0.0, 0.0, 2.0)).unwrap();
        assert_eq!(g, GroupPoint::identity());
        assert!(GroupPoint::renormalized(Matrix2::new(0.0, 1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn tangent_scaling_examples() {
        assert_eq!(tangent_flow_scaling(0.0), (1.0, 1.0));
        let (s, u) = tangent_flow_scaling(1.0);
        assert!((s - 1.0 / E).abs() < 1e-15 && (u - E).abs() < 1e-15);
        for t in [-3.0, -0.2, 0.5, 7.0] {
            let (s, u) = tangent_flow_scaling(t);
            assert!((s * u - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tangent_scaling_matches_transport_through_flow() {
        // exp(sY) = I + sY since Y² = 0, so the difference quotient is exact
        // up to rounding.
        let f = frame_realization().unwrap();
        let g = GroupPoint::new(Matrix2::new(1.0, 0.5, -0.4, 0.8)).unwrap();
        let h = 1e-6;
        for t in [0.3, -1.2] {
            let base = flow(&g, t);
            let (s_factor, u_factor) = tangent_flow_scaling(t);
            for (field, factor) in [(f.ym, s_factor), (f.zm, u_factor)] {
                let moved = GroupPoint(g.matrix() * (Matrix2::identity() + field * h));
                let d = (flow(&moved, t).matrix() - base.matrix()) / h;
                // Body coordinates of the transported vector.
                let body = base.matrix().try_inverse().unwrap() * d;
                assert!(max_abs(body - field * factor) <= 1e-8, "{body}");
            }
        }
    }

    #[test]
    fn ode_at_reduced_equilibrium() {
        let s = state(0.25 * PI, 0.0);
        let d = geodesic_ode(&s);
        assert!(d.px_dot.abs() < 1e-15);
        assert_eq!(d.theta_dot, 0.0);
        let f = frame_realization().unwrap();
        assert!(max_abs(d.g_dot - (f.ym - f.zm) * FRAC_1_SQRT_2) < 1e-15);
    }

    #[test]
    fn packed_rhs_matches_geodesic_ode() {
        let g = GroupPoint::new(Matrix2::new(1.0, 0.5, -0.4, 0.8)).unwrap();
        let s = ReducedState { g, theta: 0.9, px: -1.3 };
        let d = geodesic_ode(&s);
        let mut dy = [0.0; 6];
        rhs(&s.to_vec(), &mut dy);
        let packed = [d.g_dot[(0, 0)], d.g_dot[(0, 1)], d.g_dot[(1, 0)], d.g_dot[(1, 1)]];
        for i in 0..4 {
            assert!((dy[i] - packed[i]).abs() < 1e-15);
        }
        assert_eq!((dy[4], dy[5]), (d.theta_dot, d.px_dot));
    }

    #[test]
    fn theta_second_derivative_is_cos_two_theta() {
        let geo = integrate_geodesic(&state(0.3, 1.1), 6.0, 1e-12).unwrap();
        let h = 5e-3;
        let thetadot = |t: f64| -geo.state_at(t).unwrap().px;
        for i in 1..10 {
            let t = 0.6 * i as f64;
            let fd = (-thetadot(t + 2.0 * h) + 8.0 * thetadot(t + h) - 8.0 * thetadot(t - h)
                + thetadot(t - 2.0 * h))
                / (12.0 * h);
            let theta = geo.state_at(t).unwrap().theta;
            assert!((fd - (2.0 * theta).cos()).abs() <= 1e-8, "{t} {}", fd - (2.0 * theta).cos());
        }
    }

    #[test]
    fn reduced_angle_solves_pendulum() {
        let s0 = state(0.2, 2.3);
        let geo = integrate_geodesic(&s0, 5.0, 1e-12).unwrap();
        let (phi0, phidot0) = s0.pendulum_state();
        let pend = solve_numeric(&PendulumParams::new(SQRT_2, phi0, phidot0).unwrap(), 5.0, 1e-12)
            .unwrap();
        let i0 = s0.pendulum_energy();
        assert!((i0 - energy_of(SQRT_2, phi0, phidot0)).abs() < 1e-14);
        for i in 0..=50 {
            let t = 0.1 * i as f64;
            let s = geo.state_at(t).unwrap();
            let (phi, phidot) = s.pendulum_state();
            let p = pend.evaluate(t).unwrap();
            assert!((phi - p[0]).abs() <= 1e-7 && (phidot - p[1]).abs() <= 1e-7);
            assert!((s.pendulum_energy() - i0).abs() <= 1e-8);
        }
    }

    #[test]
    fn short_time_continuity() {
        for ell in [1e-2, 1e-3, 1e-4] {
            let geo = integrate_geodesic(&state(1.0, 3.0), ell, 1e-12).unwrap();
            let d = max_abs(geo.final_state().g.matrix() - Matrix2::identity());
            assert!(d <= 2.0 * ell, "{d}");
        }
    }

    #[test]
    fn det_drift_over_long_integration() {
        let geo = integrate_geodesic(&state(0.7, -0.4), 20.0, 1e-10).unwrap();
        assert!(geo.det_drift() <= 1e-9, "{}", geo.det_drift());
    }

    #[test]
    fn reduced_subsystem_decouples() {
        let s0 = state(2.1, 0.6);
        let geo = integrate_geodesic(&s0, 8.0, 1e-12).unwrap();
        let reduced = integrate(
            &OdeProblem::new(
                |_, y, dy| {
                    dy[0] = -y[1];
                    dy[1] = -(2.0 * y[0]).cos();
                },
                0.0,
                vec![s0.theta, s0.px],
            )
            .unwrap(),
            8.0,
            1e-12,
        )
        .unwrap();
        for i in 0..=80 {
            let t = 0.1 * i as f64;
            let a = geo.state_at(t).unwrap();
            let b = reduced.evaluate(t).unwrap();
            assert!((a.theta - b[0]).abs() <= 1e-8 && (a.px - b[1]).abs() <= 1e-8);
        }
    }

    #[test]
    fn left_translation_maps_geodesics_to_geodesics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s0 = state(0.4, 1.7);
        let geo = integrate_geodesic(&s0, 3.0, 1e-12).unwrap();
        for _ in 0..5 {
            let h = GroupPoint::renormalized(Matrix2::new(
                rng.gen_range(0.5..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.5..2.0),
            ))
            .unwrap();
            let moved = integrate_geodesic(&ReducedState { g: h, ..s0 }, 3.0, 1e-12).unwrap();
            for i in 0..=30 {
                let t = 0.1 * i as f64;
                let a = h.matrix() * geo.state_at(t).unwrap().g.matrix();
                let b = *moved.state_at(t).unwrap().g.matrix();
                assert!(max_abs(a - b) <= 1e-8);
            }
        }
    }

    #[test]
    fn shooting_reaches_the_flow_image() {
        let outcome = shoot(0.05, &ShootingConfig::default()).unwrap();
        for r in &outcome.solutions {
            assert!(r.endpoint_residual <= 1e-8, "{}", r.endpoint_residual);
            assert!(r.length > 0.0);
            let end = r.geodesic.final_state();
            assert!(max_abs(end.g.matrix() - flow_generator_exp(0.05)) <= 1e-8);
        }
        assert!(outcome.shortest().length <= outcome.first().length);
    }

    #[test]
    fn shooting_rejects_out_of_range_tau() {
        let config = ShootingConfig::default();
        assert!(matches!(shoot(0.5, &config), Err(Error::Domain(_))));
        assert!(matches!(shoot(-0.1, &config), Err(Error::Domain(_))));
    }

    #[test]
    fn shooting_at_zero_tau_finds_loop_or_reports_failure() {
        let config = ShootingConfig {
            theta_grid: vec![0.0, 0.5],
            px_grid: vec![4.0],
            ..ShootingConfig::default()
        };
        match shoot(0.0, &config) {
            Ok(outcome) => {
                for r in &outcome.solutions {
                    assert!(r.endpoint_residual <= 1e-8 && r.length > config.min_length);
                }
            }
            Err(Error::SearchFailure { best_residuals }) => assert!(!best_residuals.is_empty()),
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn shooting_is_balanced_and_truncated_path_is_not() {
        let outcome = shoot(0.05, &ShootingConfig::default()).unwrap();
        let r = outcome.first();
        let report = balance_report(r).unwrap();
        assert!(report.defect.abs() <= 1e-6, "{}", report.defect);

        let (times, thetas) = r.geodesic.sample_theta(PATH_SAMPLES);
        // Over half the loop θ turns by about π, a full period of cos 2θ, so
        // the first quarter is the informative truncation.
        let quarter = PATH_SAMPLES / 4;
        let truncated = reduced_path(times[..quarter].to_vec(), &thetas[..quarter]).unwrap();
        let d = energy_split(&truncated).unwrap().defect;
        assert!(d.abs() > 1e-3, "{d}");
    }

    #[test]
    fn constant_angle_paths() {
        let times: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let flat = reduced_path(times.clone(), &vec![0.0; times.len()]).unwrap();
        assert_eq!(energy_split(&flat).unwrap().defect, 1.0);

        // Pure unstable direction: |f_r∘γ| = e^r, derivative 1 against the formula's 2.
        let unstable = reduced_path(times.clone(), &vec![FRAC_PI_2; times.len()]).unwrap();
        let check = length_derivative_on(&unstable, 1e-3).unwrap();
        assert!((check.formula - 2.0).abs() <= 1e-12);
        assert!((check.first_order - 1.0).abs() <= 1e-12);
        assert!((check.finite_difference - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn heuristic_length_regimes() {
        // Large |P_X|: θ turns once in about 2π/|P_X|.
        let ell = heuristic_length(0.0, 40.0).unwrap();
        assert!((ell - 2.0 * PI / 40.0).abs() < 1e-3);
        // Small oscillation about θ = π/4: period 2π/√2.
        let ell = heuristic_length(0.25 * PI, 1e-3).unwrap();
        assert!((ell - SQRT_2 * PI).abs() < 1e-5);
        assert!(heuristic_length(0.25 * PI, 0.0).is_err());
    }
}
