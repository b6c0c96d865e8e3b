//! The pendulum `θ̈ + ω² sin θ = 0`: energy classification, closed-form
//! solutions through Jacobi elliptic functions, numerical solutions, and the
//! vanishing-integral lemma for circulating motion.
//!
//! With the conserved energy `I = ¼θ̇² + ω² sin²(θ/2)` the motion is
//!
//! * at rest at the bottom when `I = 0`,
//! * oscillating when `0 < I < ω²`: `θ = 2 arcsin(k sn(ω(t − t₀); k))`, `k = √I/ω`,
//! * on the separatrix (or at the top) when `I = ω²`: `θ = 2 arcsin tanh(ω(t − t₀))`,
//! * circulating when `I > ω²`: `θ = 2 arcsin sn(√I (t − t₀); k)`, `k = ω/√I`,
//!   with the arcsine branch advanced at every quarter period.

use std::f64::consts::PI;

use serde::Serialize;

use crate::elliptic::{JacobiEvaluator, Modulus};
use crate::error::{Error, Result};
use crate::numkit::{find_root_bracketed, integrate, quadrature, OdeProblem, Trajectory};

/// Relative tolerance on `|I − ω²|` for the separatrix case.
pub const SEPARATRIX_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Integration tolerance used when fitting closed-form parameters.
pub const FIT_TOLERANCE: f64 = 1e-12;

/// Default threshold below which the half-angle integrals count as zero.
pub const LEMMA_HYPOTHESIS_TOLERANCE: f64 = 1e-8;

const QUADRATURE_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PendulumParams {
    pub omega: f64,
    pub theta0: f64,
    pub thetadot0: f64,
}

impl PendulumParams {
    pub fn new(omega: f64, theta0: f64, thetadot0: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("frequency omega must be positive, got {omega}")));
        }
        if !theta0.is_finite() || !thetadot0.is_finite() {
            return Err(Error::Domain("initial angle and velocity must be finite".into()));
        }
        Ok(Self {
            omega,
            theta0,
            thetadot0,
        })
    }
}

/// Conserved energy `I ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct PendulumEnergy(f64);

impl PendulumEnergy {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `I = ¼θ̇² + ω² sin²(θ/2)` evaluated at a state.
pub fn energy_of(omega: f64, theta: f64, thetadot: f64) -> f64 {
    let s = (0.5 * theta).sin();
    0.25 * thetadot * thetadot + omega * omega * s * s
}

pub fn energy(params: &PendulumParams) -> PendulumEnergy {
    PendulumEnergy(energy_of(params.omega, params.theta0, params.thetadot0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PendulumCase {
    /// `I = 0`: `θ ≡ 0 (mod 2π)`.
    DownEquilibrium,
    /// `0 < I < ω²`.
    Oscillating,
    /// `I = ω²` with `θ̇ = 0`: `θ ≡ π (mod 2π)`.
    UpEquilibrium,
    /// `I = ω²` with `θ̇ ≠ 0`.
    Separatrix,
    /// `I > ω²`.
    Circulating,
}

impl PendulumCase {
    /// Case number 1–4 in the usual numbering (both `I = ω²` motions are 3).
    pub fn number(self) -> u8 {
        match self {
            Self::DownEquilibrium => 1,
            Self::Oscillating => 2,
            Self::UpEquilibrium | Self::Separatrix => 3,
            Self::Circulating => 4,
        }
    }

    pub fn is_equilibrium(self) -> bool {
        matches!(self, Self::DownEquilibrium | Self::UpEquilibrium)
    }
}

pub fn classify(params: &PendulumParams) -> PendulumCase {
    let w2 = params.omega * params.omega;
    let i = energy(params).value();
    if (i - w2).abs() <= SEPARATRIX_RELATIVE_TOLERANCE * w2 {
        if params.thetadot0 == 0.0 {
            PendulumCase::UpEquilibrium
        } else {
            PendulumCase::Separatrix
        }
    } else if i > w2 {
        PendulumCase::Circulating
    } else if params.thetadot0 == 0.0 && at_multiple_of_two_pi(params.theta0) {
        PendulumCase::DownEquilibrium
    } else {
        PendulumCase::Oscillating
    }
}

// θ ≡ 0 (mod 2π) up to the rounding of θ itself, so that 4π counts.
fn at_multiple_of_two_pi(theta: f64) -> bool {
    (0.5 * theta).sin().abs() <= 4.0 * f64::EPSILON * theta.abs().max(1.0)
}

/// Parameters of a closed-form solution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PendulumSolution {
    pub case: PendulumCase,
    pub omega: f64,
    #[serde(rename = "I")]
    pub energy: f64,
    /// Elliptic modulus for the oscillating and circulating cases.
    pub k: Option<f64>,
    /// A time at which `θ ≡ 0 (mod 2π)`.
    pub t0: f64,
    /// `±1`, the sign of `θ̇` at `t0`.
    pub sign: f64,
    /// `θ(t0) = 2π·winding`.
    pub winding: i64,
    #[serde(skip)]
    jacobi: Option<JacobiEvaluator>,
}

impl PendulumSolution {
    /// Build a solution descriptor directly from its parameters.
    pub fn new(
        case: PendulumCase,
        omega: f64,
        energy: f64,
        t0: f64,
        sign: f64,
        winding: i64,
    ) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("frequency omega must be positive, got {omega}")));
        }
        if !(energy >= 0.0) {
            return Err(Error::Domain(format!("energy must be nonnegative, got {energy}")));
        }
        let w2 = omega * omega;
        let consistent = match case {
            PendulumCase::DownEquilibrium => energy == 0.0,
            PendulumCase::Oscillating => energy > 0.0 && energy < w2,
            PendulumCase::UpEquilibrium | PendulumCase::Separatrix => {
                (energy - w2).abs() <= SEPARATRIX_RELATIVE_TOLERANCE * w2
            }
            PendulumCase::Circulating => energy > w2,
        };
        if !consistent {
            return Err(Error::Domain(format!(
                "energy {energy} inconsistent with case {case:?} for omega {omega}"
            )));
        }
        let k = match case {
            PendulumCase::Oscillating => Some(energy.sqrt() / omega),
            PendulumCase::Circulating => Some(omega / energy.sqrt()),
            _ => None,
        };
        let jacobi = k
            .map(|k| Modulus::new(k).and_then(JacobiEvaluator::new))
            .transpose()?;
        Ok(Self {
            case,
            omega,
            energy,
            k,
            t0,
            sign: if sign < 0.0 { -1.0 } else { 1.0 },
            winding,
            jacobi,
        })
    }

    /// K(k) of the solution's modulus, when it has one.
    pub fn quarter_period(&self) -> Option<f64> {
        self.jacobi.map(|j| j.quarter_period())
    }

    /// Time for the motion to repeat: a full swing for oscillation, an
    /// advance of θ by 2π for circulation; `None` otherwise.
    pub fn period(&self) -> Option<f64> {
        let kq = self.quarter_period()?;
        match self.case {
            PendulumCase::Oscillating => Some(4.0 * kq / self.omega),
            PendulumCase::Circulating => Some(2.0 * kq / self.energy.sqrt()),
            _ => None,
        }
    }

    pub fn theta(&self, t: f64) -> Result<f64> {
        solve_closed_form(self, t)
    }
}

/// Amplitude `am(u)` continued across quarter periods:
/// `am(u) = nπ + (−1)ⁿ arcsin(sn u)` with `n` the nearest multiple of `2K`.
fn amplitude(jacobi: &JacobiEvaluator, u: f64) -> Result<f64> {
    let e = jacobi.eval(u)?;
    let n = (u / (2.0 * jacobi.quarter_period())).round();
    // arcsin(sn) written as atan2(sn, |cn|), exact near sn = ±1.
    let principal = e.sn.atan2(e.cn.abs());
    let parity = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(n * PI + parity * principal)
}

/// θ(t) from the closed-form expression of the solution's case.
pub fn solve_closed_form(solution: &PendulumSolution, t: f64) -> Result<f64> {
    let base = 2.0 * PI * solution.winding as f64;
    let s = t - solution.t0;
    let sign = solution.sign;
    match solution.case {
        PendulumCase::DownEquilibrium => Ok(base),
        PendulumCase::UpEquilibrium => Ok(base + PI),
        PendulumCase::Oscillating => {
            let jacobi = solution.jacobi.as_ref().expect("oscillating case carries a modulus");
            let k = jacobi.modulus().value();
            let e = jacobi.eval(solution.omega * s)?;
            // 2 arcsin(k sn) with cos of the half angle equal to dn.
            Ok(base + sign * 2.0 * (k * e.sn).atan2(e.dn))
        }
        PendulumCase::Separatrix => {
            // 2 arcsin tanh(x) = 2 atan sinh(x).
            Ok(base + sign * 2.0 * (solution.omega * s).sinh().atan())
        }
        PendulumCase::Circulating => {
            let jacobi = solution.jacobi.as_ref().expect("circulating case carries a modulus");
            Ok(base + sign * 2.0 * amplitude(jacobi, solution.energy.sqrt() * s)?)
        }
    }
}

fn pendulum_problem(params: &PendulumParams, t_start: f64) -> OdeProblem<'static> {
    let w2 = params.omega * params.omega;
    OdeProblem::new(
        move |_, y, dy| {
            dy[0] = y[1];
            dy[1] = -w2 * y[0].sin();
        },
        t_start,
        vec![params.theta0, params.thetadot0],
    )
    .expect("finite pendulum state")
}

/// Numerical solution `(θ, θ̇)` on `[0, t_end]` (or `[t_end, 0]`).
///
/// The step control runs at `tolerance / (10·max(1, I))` so that the
/// absolute energy drift over long spans stays within `10·tolerance`.
pub fn solve_numeric(params: &PendulumParams, t_end: f64, tolerance: f64) -> Result<Trajectory> {
    if !(tolerance > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tolerance}")));
    }
    let scale = 10.0 * energy(params).value().max(1.0);
    integrate(&pendulum_problem(params, 0.0), t_end, tolerance / scale)
}

/// Zero crossings of `sin(θ/2)` (i.e. `θ ≡ 0 mod 2π`) along a trajectory,
/// returned as `(time, θ̇ sign)`.
fn crossings(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let times = traj.times();
    let g = |i: usize| (0.5 * traj.state(i)[0]).sin();
    let mut out = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        if g(i) == 0.0 {
            out.push((t, traj.state(i)[1].signum()));
        }
    }
    for i in 1..times.len() {
        let (a, b) = (g(i - 1), g(i));
        if a != 0.0 && b != 0.0 && a.signum() != b.signum() {
            let root = find_root_bracketed(
                |t| traj.evaluate(t).map_or(f64::NAN, |y| (0.5 * y[0]).sin()),
                times[i - 1],
                times[i],
                1e-15,
            )?;
            let thetadot = traj.evaluate(root).map_or(f64::NAN, |y| y[1]);
            out.push((root, thetadot.signum()));
        }
    }
    Ok(out)
}

/// Fit `(I, k, t₀, sign)` so that [`solve_closed_form`] reproduces the
/// motion starting from `params` at `t = 0`. `t₀` is the crossing of
/// `θ ≡ 0 (mod 2π)` nearest to `t = 0` on the numerical trajectory.
pub fn fit_solution(params: &PendulumParams) -> Result<PendulumSolution> {
    let case = classify(params);
    if case.is_equilibrium() {
        return Err(Error::Domain(format!(
            "{case:?} is an equilibrium; there is nothing to fit"
        )));
    }
    let omega = params.omega;
    let i = energy(params).value();
    let window = match case {
        PendulumCase::Oscillating => {
            let k = Modulus::new(i.sqrt() / omega)?;
            0.5 * 4.0 * JacobiEvaluator::new(k)?.quarter_period() / omega
        }
        PendulumCase::Circulating => {
            let k = Modulus::new(omega / i.sqrt())?;
            2.0 * JacobiEvaluator::new(k)?.quarter_period() / i.sqrt()
        }
        PendulumCase::Separatrix => {
            // θ = 2 atan sinh(ω(t − t₀)) reaches θ₀ (mod 2π) after at most this long.
            let reduced = params.theta0 - 2.0 * PI * (params.theta0 / (2.0 * PI)).round();
            (0.5 * reduced).tan().abs().asinh() / omega
        }
        _ => unreachable!("equilibria rejected above"),
    } * 1.05
        + 1e-3 / omega;

    let forward = solve_numeric(params, window, FIT_TOLERANCE)?;
    let backward = solve_numeric(params, -window, FIT_TOLERANCE)?;
    let mut candidates = crossings(&forward)?;
    candidates.extend(crossings(&backward)?);
    let (t0, sign) = candidates
        .into_iter()
        .filter(|(_, s)| *s != 0.0)
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
        .ok_or_else(|| Error::Fit(format!("no crossing of theta = 0 mod 2pi within +-{window}")))?;
    let traj = if t0 >= 0.0 { &forward } else { &backward };
    let theta_at = traj
        .evaluate(t0)
        .ok_or_else(|| Error::Fit("crossing outside integrated window".into()))?[0];
    let winding = (theta_at / (2.0 * PI)).round() as i64;
    // Exact energy keeps the separatrix inside its tolerance band.
    let energy_value = if case == PendulumCase::Separatrix { omega * omega } else { i };
    PendulumSolution::new(case, omega, energy_value, t0, sign, winding)
}

/// Outcome of checking the vanishing-integral lemma on `[0, ℓ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaIntReport {
    pub length: f64,
    /// `(∫₀^ℓ sin(θ/2) dt, ∫₀^ℓ cos(θ/2) dt)`.
    pub halfangle_integrals: (f64, f64),
    /// Both half-angle integrals vanish (within the hypothesis tolerance).
    pub hypothesis_holds: bool,
    /// `I > ω²`.
    pub energy_exceeds_barrier: bool,
    /// Distance from `ℓ√I` to the nearest multiple of `4K(k)`; only
    /// defined for circulating solutions.
    pub period_multiple_defect: Option<f64>,
    /// The nearest multiple itself.
    pub period_multiple: Option<i64>,
    /// `∫₀^ℓ sin θ dt`.
    pub sin_integral: f64,
}

impl LemmaIntReport {
    /// All three conclusions hold within `tolerance`: `I > ω²`, `ℓ√I` is a
    /// multiple of `4K`, and `∫ sin θ = 0`.
    pub fn conclusions_hold(&self, tolerance: f64) -> bool {
        self.energy_exceeds_barrier
            && self.period_multiple_defect.is_some_and(|d| d <= tolerance)
            && self.sin_integral.abs() <= tolerance
    }
}

/// Evaluate the half-angle integrals of a solution over `[0, ℓ]`, decide
/// whether they vanish, and report the lemma's three conclusions.
pub fn verify_lemma_int(solution: &PendulumSolution, length: f64) -> Result<LemmaIntReport> {
    verify_lemma_int_with(solution, length, LEMMA_HYPOTHESIS_TOLERANCE)
}

pub fn verify_lemma_int_with(
    solution: &PendulumSolution,
    length: f64,
    hypothesis_tolerance: f64,
) -> Result<LemmaIntReport> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Domain(format!("length must be positive, got {length}")));
    }
    let theta = |t: f64| solve_closed_form(solution, t);
    let mut failure = None;
    let mut integral = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        let value = quadrature(
            |t| match theta(t) {
                Ok(th) => f(th),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            length,
            QUADRATURE_TOLERANCE * length.max(1.0),
        )?;
        Ok(value)
    };
    let sin_half = integral(&|th| (0.5 * th).sin())?;
    let cos_half = integral(&|th| (0.5 * th).cos())?;
    let sin_full = integral(&|th| th.sin())?;
    if let Some(e) = failure {
        return Err(e);
    }

    let (period_multiple_defect, period_multiple) = match (solution.case, solution.quarter_period()) {
        (PendulumCase::Circulating, Some(kq)) => {
            let scaled = length * solution.energy.sqrt();
            let n = (scaled / (4.0 * kq)).round();
            (Some((scaled - 4.0 * kq * n).abs()), Some(n as i64))
        }
        _ => (None, None),
    };
    Ok(LemmaIntReport {
        length,
        halfangle_integrals: (sin_half, cos_half),
        hypothesis_holds: sin_half.abs() <= hypothesis_tolerance
            && cos_half.abs() <= hypothesis_tolerance,
        energy_exceeds_barrier: solution.energy > solution.omega * solution.omega,
        period_multiple_defect,
        period_multiple,
        sin_integral: sin_full,
    })
}
