//! Adaptive Dormand–Prince 5(4) integration with continuous (dense) output.
//!
//! The stepper advances with the fifth-order solution, estimates the local
//! error from the embedded fourth-order solution and exposes the classical
//! fourth-order continuous extension between accepted steps.

use crate::error::{Error, Result};

type RhsFn<'a> = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'a;
type ProjectionFn<'a> = dyn Fn(&mut [f64]) + Send + Sync + 'a;

/// An initial value problem `y' = f(t, y)`, `y(t0) = y0`.
pub struct OdeProblem<'a> {
    dimension: usize,
    rhs: Box<RhsFn<'a>>,
    projection: Option<Box<ProjectionFn<'a>>>,
    initial_time: f64,
    initial_state: Vec<f64>,
}

impl<'a> OdeProblem<'a> {
    /// `rhs(t, y, dy)` writes the derivative into `dy`.
    pub fn new<F>(rhs: F, initial_time: f64, initial_state: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'a,
    {
        if initial_state.is_empty() {
            return Err(Error::Domain("ODE dimension must be positive".into()));
        }
        if !initial_time.is_finite() || initial_state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("initial data must be finite".into()));
        }
        Ok(Self {
            dimension: initial_state.len(),
            rhs: Box::new(rhs),
            projection: None,
            initial_time,
            initial_state,
        })
    }

    /// Attach a map applied to the state after every accepted step, e.g. a
    /// renormalization back onto a constraint manifold.
    pub fn with_projection<P>(mut self, projection: P) -> Self
    where
        P: Fn(&mut [f64]) + Send + Sync + 'a,
    {
        self.projection = Some(Box::new(projection));
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn initial_time(&self) -> f64 {
        self.initial_time
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn eval_rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.rhs)(t, y, dy)
    }
}

/// Step-control knobs. `tolerance` is used both as absolute and relative
/// tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub tolerance: f64,
    /// Step floor as a fraction of `|t_end - t_start|`.
    pub min_step_fraction: f64,
    pub max_steps: usize,
    /// Upper bound on `|h|`; `None` means the whole interval.
    pub max_step: Option<f64>,
}

impl IntegratorOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            min_step_fraction: 1e-12,
            max_steps: 2_000_000,
            max_step: None,
        }
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Interpolation data for one accepted step.
#[derive(Debug, Clone)]
struct Segment {
    t_from: f64,
    h: f64,
    /// Five coefficient vectors of length `dimension`, stored back to back.
    coeffs: Vec<f64>,
}

/// Output of [`integrate`]: node values plus a continuous interpolant.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dimension: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    segments: Vec<Segment>,
    forward: bool,
    rhs_evaluations: usize,
}

impl Trajectory {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Node times, strictly increasing.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, index: usize) -> &[f64] {
        &self.states[index * self.dimension..(index + 1) * self.dimension]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.dimension)
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one node")
    }

    /// Order of the dense-output interpolant.
    pub fn interpolation_order(&self) -> usize {
        4
    }

    pub fn rhs_evaluations(&self) -> usize {
        self.rhs_evaluations
    }

    /// Dense evaluation. Stored node times return the stored state exactly.
    pub fn evaluate(&self, t: f64) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dimension];
        self.evaluate_into(t, &mut out).then_some(out)
    }

    /// Like [`evaluate`](Self::evaluate) but writes into `out`; returns
    /// `false` when `t` lies outside the covered interval.
    pub fn evaluate_into(&self, t: f64, out: &mut [f64]) -> bool {
        let (lo, hi) = (self.first_time(), self.last_time());
        if !(t >= lo && t <= hi) {
            return false;
        }
        // First node with time >= t.
        let idx = self.times.partition_point(|&s| s < t);
        if idx < self.times.len() && self.times[idx] == t {
            out.copy_from_slice(self.state(idx));
            return true;
        }
        // t lies strictly between nodes idx-1 and idx; segments are stored in
        // the same increasing order as the nodes.
        let seg = &self.segments[idx - 1];
        let theta = (t - seg.t_from) / seg.h;
        let theta1 = 1.0 - theta;
        let n = self.dimension;
        let c = &seg.coeffs;
        for i in 0..n {
            out[i] = c[i]
                + theta
                    * (c[n + i]
                        + theta1 * (c[2 * n + i] + theta * (c[3 * n + i] + theta1 * c[4 * n + i])));
        }
        true
    }

    /// State at the problem's initial time.
    pub fn initial_state(&self) -> &[f64] {
        if self.forward {
            self.state(0)
        } else {
            self.state(self.len() - 1)
        }
    }

    /// State at `t_end`, whichever direction was integrated.
    pub fn final_state(&self) -> &[f64] {
        if self.forward {
            self.state(self.len() - 1)
        } else {
            self.state(0)
        }
    }
}

/// Integrate `problem` from its initial time to `t_end` with the given
/// tolerance and default step control.
pub fn integrate(problem: &OdeProblem<'_>, t_end: f64, tolerance: f64) -> Result<Trajectory> {
    integrate_with(problem, t_end, &IntegratorOptions::with_tolerance(tolerance))
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], tol: f64) -> f64 {
    let n = err.len();
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let scale = tol + tol * a.abs().max(b.abs());
            (e / scale).powi(2)
        })
        .sum();
    (sum / n as f64).sqrt()
}

fn initial_step(
    problem: &OdeProblem<'_>,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    direction: f64,
    tol: f64,
    h_max: f64,
) -> f64 {
    let n = y0.len();
    let scale: Vec<f64> = y0.iter().map(|v| tol + tol * v.abs()).collect();
    let rms = |v: &[f64]| {
        (v.iter().zip(&scale).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(h_max);
    let y1: Vec<f64> = y0
        .iter()
        .zip(f0)
        .map(|(y, f)| y + direction * h0 * f)
        .collect();
    let mut f1 = vec![0.0; n];
    problem.eval_rhs(t0 + direction * h0, &y1, &mut f1);
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&df) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(h_max)
}

/// Integrate with explicit options. Both time directions are supported; the
/// returned trajectory always lists its nodes in increasing time.
pub fn integrate_with(
    problem: &OdeProblem<'_>,
    t_end: f64,
    options: &IntegratorOptions,
) -> Result<Trajectory> {
    let tol = options.tolerance;
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let t0 = problem.initial_time;
    if !t_end.is_finite() || t_end == t0 {
        return Err(Error::Domain(format!(
            "t_end must be finite and differ from the initial time {t0}"
        )));
    }
    let n = problem.dimension;
    let span = (t_end - t0).abs();
    let direction = (t_end - t0).signum();
    let h_floor = options.min_step_fraction * span;
    let h_max = options.max_step.unwrap_or(span).min(span);

    let mut t = t0;
    let mut y = problem.initial_state.clone();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];

    problem.eval_rhs(t, &y, &mut k1);
    let mut evaluations = 1;
    let mut h = initial_step(problem, t, &y, &k1, direction, tol, h_max);
    evaluations += 1;

    let mut times = vec![t];
    let mut states = y.clone();
    let mut segments: Vec<Segment> = Vec::new();
    let mut steps = 0usize;
    let mut last_rejected = false;

    loop {
        if steps >= options.max_steps {
            return Err(Error::StepSizeUnderflow {
                time: t,
                step: h,
                floor: h_floor,
            });
        }
        steps += 1;

        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        if h < h_floor && !last {
            return Err(Error::StepSizeUnderflow {
                time: t,
                step: h,
                floor: h_floor,
            });
        }
        let hs = direction * h;

        for i in 0..n {
            y_stage[i] = y[i] + hs * A21 * k1[i];
        }
        problem.eval_rhs(t + C2 * hs, &y_stage, &mut k2);
        for i in 0..n {
            y_stage[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        problem.eval_rhs(t + C3 * hs, &y_stage, &mut k3);
        for i in 0..n {
            y_stage[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        problem.eval_rhs(t + C4 * hs, &y_stage, &mut k4);
        for i in 0..n {
            y_stage[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        problem.eval_rhs(t + C5 * hs, &y_stage, &mut k5);
        for i in 0..n {
            y_stage[i] = y[i]
                + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_next = if last { t_end } else { t + hs };
        problem.eval_rhs(t + hs, &y_stage, &mut k6);
        for i in 0..n {
            y_new[i] = y[i]
                + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        problem.eval_rhs(t_next, &y_new, &mut k7);
        evaluations += 6;

        for i in 0..n {
            err[i] = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err_norm = error_norm(&err, &y, &y_new, tol);
        if !err_norm.is_finite() {
            h *= 0.2;
            last_rejected = true;
            continue;
        }

        if err_norm <= 1.0 {
            let mut coeffs = vec![0.0; 5 * n];
            for i in 0..n {
                let diff = y_new[i] - y[i];
                let bspl = hs * k1[i] - diff;
                coeffs[i] = y[i];
                coeffs[n + i] = diff;
                coeffs[2 * n + i] = bspl;
                coeffs[3 * n + i] = diff - hs * k7[i] - bspl;
                coeffs[4 * n + i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            if let Some(project) = &problem.projection {
                project(&mut y_new);
                problem.eval_rhs(t_next, &y_new, &mut k7);
                evaluations += 1;
            }
            segments.push(Segment {
                t_from: t,
                h: t_next - t,
                coeffs,
            });
            t = t_next;
            y.copy_from_slice(&y_new);
            std::mem::swap(&mut k1, &mut k7);
            times.push(t);
            states.extend_from_slice(&y);
            if last {
                break;
            }
            let mut factor = 0.9 * err_norm.max(1e-10).powf(-0.2);
            factor = factor.clamp(0.2, 10.0);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = (h * factor).min(h_max);
            last_rejected = false;
        } else {
            let factor = (0.9 * err_norm.powf(-0.2)).max(0.2);
            h *= factor;
            last_rejected = true;
        }
    }

    if direction < 0.0 {
        times.reverse();
        let mut reversed = Vec::with_capacity(states.len());
        for chunk in states.rchunks_exact(n) {
            reversed.extend_from_slice(chunk);
        }
        states = reversed;
        segments.reverse();
    }

    Ok(Trajectory {
        dimension: n,
        times,
        states,
        segments,
        forward: direction > 0.0,
        rhs_evaluations: evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn exp_problem() -> OdeProblem<'static> {
        OdeProblem::new(|_, y, dy| dy[0] = y[0], 0.0, vec![1.0]).unwrap()
    }

    fn oscillator() -> OdeProblem<'static> {
        OdeProblem::new(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            vec![0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn constant_solution_stays_constant() {
        let p = OdeProblem::new(|_, _, dy| dy[0] = 0.0, 0.0, vec![1.0]).unwrap();
        let traj = integrate(&p, 5.0, 1e-10).unwrap();
        for s in traj.states() {
            assert_eq!(s[0], 1.0);
        }
        for i in 0..=50 {
            let t = i as f64 * 0.1;
            assert_eq!(traj.evaluate(t).unwrap()[0], 1.0);
        }
    }

    #[test]
    fn exponential_growth_reaches_e() {
        let tol = 1e-10;
        let traj = integrate(&exp_problem(), 1.0, tol).unwrap();
        let end = traj.final_state()[0];
        assert!((end - E).abs() <= 10.0 * tol, "{}", end - E);
        assert_eq!(traj.last_time(), 1.0);
    }

    #[test]
    fn oscillator_returns_to_zero_at_pi() {
        let tol = 1e-10;
        let traj = integrate(&oscillator(), PI, tol).unwrap();
        assert!(traj.final_state()[0].abs() <= 10.0 * tol);
    }

    #[test]
    fn backward_integration_lists_increasing_times() {
        let traj = integrate(&exp_problem(), -2.0, 1e-10).unwrap();
        assert!(traj.times().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(traj.first_time(), -2.0);
        let start = traj.final_state()[0];
        assert!((start - (-2.0f64).exp()).abs() < 1e-9);
        let mid = traj.evaluate(-0.7).unwrap()[0];
        assert!((mid - (-0.7f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_at_nodes_is_exact() {
        let traj = integrate(&oscillator(), 7.0, 1e-9).unwrap();
        for (i, &t) in traj.times().iter().enumerate() {
            assert_eq!(traj.evaluate(t).unwrap(), traj.state(i).to_vec());
        }
    }

    #[test]
    fn dense_output_between_nodes_is_accurate() {
        let traj = integrate(&oscillator(), 10.0, 1e-12).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=997 {
            let t = i as f64 * 10.0 / 997.0;
            let y = traj.evaluate(t).unwrap();
            worst = worst.max((y[0] - t.sin()).abs()).max((y[1] - t.cos()).abs());
        }
        assert!(worst < 1e-10, "{worst}");
        assert!(traj.evaluate(10.5).is_none());
    }

    #[test]
    fn forward_then_backward_round_trip() {
        let tol = 1e-10;
        let fwd = integrate(&oscillator(), 6.0, tol).unwrap();
        let end = fwd.final_state().to_vec();
        let back_problem = OdeProblem::new(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            6.0,
            end,
        )
        .unwrap();
        let back = integrate(&back_problem, 0.0, tol).unwrap();
        let start = back.final_state();
        assert!(start[0].abs() <= 100.0 * tol);
        assert!((start[1] - 1.0).abs() <= 100.0 * tol);
    }

    #[test]
    fn blow_up_signals_underflow_with_time() {
        // y' = y^2, y(0) = 1 blows up at t = 1.
        let p = OdeProblem::new(|_, y, dy| dy[0] = y[0] * y[0], 0.0, vec![1.0]).unwrap();
        match integrate(&p, 2.0, 1e-8) {
            Err(Error::StepSizeUnderflow { time, .. }) => {
                assert!((time - 1.0).abs() < 1e-3, "{time}")
            }
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            integrate(&exp_problem(), 0.0, 1e-8),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            integrate(&exp_problem(), 1.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(OdeProblem::new(|_, _, _| {}, 0.0, vec![]).is_err());
    }

    #[test]
    fn projection_is_applied_after_each_step() {
        // Rotation preserves the unit circle; renormalize onto it.
        let p = OdeProblem::new(
            |_, y, dy| {
                dy[0] = -y[1];
                dy[1] = y[0];
            },
            0.0,
            vec![1.0, 0.0],
        )
        .unwrap()
        .with_projection(|y| {
            let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
            y[0] /= r;
            y[1] /= r;
        });
        let traj = integrate(&p, 50.0, 1e-6).unwrap();
        for s in traj.states() {
            assert!(((s[0] * s[0] + s[1] * s[1]).sqrt() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn halving_tolerance_does_not_increase_error() {
        let oracle_errors = |tol: f64| {
            let e1 = (integrate(&exp_problem(), 1.0, tol).unwrap().final_state()[0] - E).abs();
            let e2 = integrate(&oscillator(), PI, tol).unwrap().final_state()[0].abs();
            (e1, e2)
        };
        let mut tol = 1e-6;
        let mut prev = oracle_errors(tol);
        for _ in 0..8 {
            tol *= 0.5;
            let cur = oracle_errors(tol);
            assert!(cur.0 <= prev.0, "exp: {tol:e} {cur:?} {prev:?}");
            assert!(cur.1 <= prev.1, "sin: {tol:e} {cur:?} {prev:?}");
            prev = cur;
        }
    }
}
