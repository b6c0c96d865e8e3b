//! Jacobi elliptic functions defined through their ODE system
//!
//! ```text
//! x' = y z,   y' = -z x,   z' = -k² x y,   (x, y, z)(0) = (0, 1, 1)
//! ```
//!
//! so that `(sn, cn, dn)(t, k) = (x, y, z)(t)`. The production evaluator
//! integrates this system; [`landen`] provides an independent AGM-based
//! evaluator used for cross-checks.

pub mod landen;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{find_root_bracketed, integrate, quadrature, OdeProblem, Trajectory};

/// Integration tolerance for the defining system.
pub const ODE_TOLERANCE: f64 = 1e-13;

/// Largest allowed gap between the ODE and AGM quarter periods.
pub const QUARTER_PERIOD_CONSISTENCY: f64 = 1e-8;

/// Elliptic modulus, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if k > 0.0 && k < 1.0 {
            Ok(Self(k))
        } else {
            Err(Error::Domain(format!(
                "elliptic modulus k must lie in the open interval (0,1), got {k}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `k' = √(1 − k²)`.
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `(sn, cn, dn)` at argument `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticTriple {
    pub t: f64,
    pub k: Modulus,
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl EllipticTriple {
    /// `|sn² + cn² − 1|`.
    pub fn circle_residual(&self) -> f64 {
        (self.sn * self.sn + self.cn * self.cn - 1.0).abs()
    }

    /// `|k² sn² + dn² − 1|`.
    pub fn modulus_residual(&self) -> f64 {
        let k = self.k.value();
        (k * k * self.sn * self.sn + self.dn * self.dn - 1.0).abs()
    }
}

fn triple_problem(k: Modulus, t0: f64, state: [f64; 3]) -> OdeProblem<'static> {
    let k2 = k.value() * k.value();
    OdeProblem::new(
        move |_, y, dy| {
            dy[0] = y[1] * y[2];
            dy[1] = -y[2] * y[0];
            dy[2] = -k2 * y[0] * y[1];
        },
        t0,
        state.to_vec(),
    )
    .expect("finite three-dimensional initial data")
}

/// Integrate the defining system from `(0, 1, 1)` to `t` without any
/// argument reduction.
fn flow_from_origin(k: Modulus, t: f64) -> Result<[f64; 3]> {
    if t == 0.0 {
        return Ok([0.0, 1.0, 1.0]);
    }
    let traj = integrate(&triple_problem(k, 0.0, [0.0, 1.0, 1.0]), t, ODE_TOLERANCE)?;
    let s = traj.final_state();
    Ok([s[0], s[1], s[2]])
}

/// First positive zero of `cn` along the integrated system.
fn quarter_period_ode(k: Modulus) -> Result<f64> {
    const CHUNK: f64 = 2.0;
    let mut t0 = 0.0;
    let mut state = [0.0, 1.0, 1.0];
    for _ in 0..10_000 {
        let traj = integrate(&triple_problem(k, t0, state), t0 + CHUNK, ODE_TOLERANCE)?;
        let times = traj.times();
        if let Some(i) = (1..times.len()).find(|&i| traj.state(i)[1] <= 0.0) {
            let (a, b) = (times[i - 1], times[i]);
            if traj.state(i)[1] == 0.0 {
                return Ok(b);
            }
            let cn_at = |t: f64| traj.evaluate(t).map_or(f64::NAN, |y| y[1]);
            let mut root = find_root_bracketed(cn_at, a, b, 1e-15)?;
            // Newton polish with cn' = -sn·dn.
            for _ in 0..3 {
                let Some(y) = traj.evaluate(root) else { break };
                let slope = -y[0] * y[2];
                if slope == 0.0 {
                    break;
                }
                let next = root - y[1] / slope;
                if !(next >= a && next <= b) {
                    break;
                }
                root = next;
            }
            return Ok(root);
        }
        let s = traj.final_state();
        state = [s[0], s[1], s[2]];
        t0 += CHUNK;
    }
    Err(Error::Consistency(format!("cn(t, {k}) has no zero on a long interval")))
}

/// K(k): the first zero of `t ↦ cn(t, k)`, located on the ODE solution and
/// cross-checked against the AGM formula.
pub fn quarter_period(k: Modulus) -> Result<f64> {
    let from_ode = quarter_period_ode(k)?;
    let from_agm = landen::quarter_period_agm(k);
    if (from_ode - from_agm).abs() > QUARTER_PERIOD_CONSISTENCY {
        return Err(Error::Consistency(format!(
            "quarter period for k = {k}: ODE {from_ode} vs AGM {from_agm}"
        )));
    }
    Ok(from_ode)
}

/// Evaluator for a fixed modulus; computes K(k) once and reuses it for
/// argument reduction.
#[derive(Debug, Clone, Copy)]
pub struct JacobiEvaluator {
    k: Modulus,
    quarter_period: f64,
}

impl JacobiEvaluator {
    pub fn new(k: Modulus) -> Result<Self> {
        Ok(Self {
            k,
            quarter_period: quarter_period(k)?,
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.k
    }

    pub fn quarter_period(&self) -> f64 {
        self.quarter_period
    }

    /// `(sn, cn, dn)(t)`, with `t` first reduced into `[-2K, 2K]`.
    pub fn eval(&self, t: f64) -> Result<EllipticTriple> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("argument must be finite, got {t}")));
        }
        let period = 4.0 * self.quarter_period;
        let reduced = t - period * (t / period).round();
        let [sn, cn, dn] = flow_from_origin(self.k, reduced)?;
        Ok(EllipticTriple {
            t,
            k: self.k,
            sn,
            cn,
            dn,
        })
    }
}

/// `(sn, cn, dn)(t, k)` from the defining ODE.
pub fn jacobi(t: f64, k: Modulus) -> Result<EllipticTriple> {
    JacobiEvaluator::new(k)?.eval(t)
}

/// Unreduced solution of the defining system covering `[lo, hi]`, with
/// `lo <= 0 <= hi`.
struct RawFlow {
    backward: Option<Trajectory>,
    forward: Option<Trajectory>,
}

impl RawFlow {
    fn covering(k: Modulus, lo: f64, hi: f64) -> Result<Self> {
        let start = [0.0, 1.0, 1.0];
        let backward = if lo < 0.0 {
            Some(integrate(&triple_problem(k, 0.0, start), lo, ODE_TOLERANCE)?)
        } else {
            None
        };
        let forward = if hi > 0.0 {
            Some(integrate(&triple_problem(k, 0.0, start), hi, ODE_TOLERANCE)?)
        } else {
            None
        };
        Ok(Self { backward, forward })
    }

    fn at(&self, t: f64) -> [f64; 3] {
        let traj = if t < 0.0 { &self.backward } else { &self.forward };
        match traj.as_ref().and_then(|tr| tr.evaluate(t)) {
            Some(y) => [y[0], y[1], y[2]],
            None if t == 0.0 => [0.0, 1.0, 1.0],
            None => [f64::NAN; 3],
        }
    }
}

/// Largest deviation from 4K-periodicity of sn and cn and from
/// 2K-periodicity of dn over the sample times, measured on one unreduced
/// integration of the defining system.
pub fn check_periodicity(k: Modulus, t_samples: &[f64]) -> Result<f64> {
    if t_samples.is_empty() {
        return Ok(0.0);
    }
    let quarter = quarter_period(k)?;
    let lo = t_samples.iter().copied().fold(0.0, f64::min);
    let hi = t_samples.iter().copied().fold(0.0, f64::max) + 4.0 * quarter;
    let flow = RawFlow::covering(k, lo, hi)?;
    let mut worst: f64 = 0.0;
    for &t in t_samples {
        let base = flow.at(t);
        let full = flow.at(t + 4.0 * quarter);
        let half = flow.at(t + 2.0 * quarter);
        worst = worst
            .max((full[0] - base[0]).abs())
            .max((full[1] - base[1]).abs())
            .max((half[2] - base[2]).abs());
    }
    Ok(worst)
}

/// `|(sn')² − (1 − sn²)(1 − k² sn²)|` with `sn' = cn·dn`.
pub fn sn_ode_residual(t: f64, k: Modulus) -> Result<f64> {
    let e = jacobi(t, k)?;
    let kv = k.value();
    let derivative = e.cn * e.dn;
    Ok((derivative * derivative - (1.0 - e.sn * e.sn) * (1.0 - kv * kv * e.sn * e.sn)).abs())
}

/// `(∫ sn, ∫ cn, ∫ sn·cn)` over `[a, b]`, by adaptive quadrature over the
/// dense solution of the defining system.
pub fn symmetric_integrals(a: f64, b: f64, k: Modulus) -> Result<(f64, f64, f64)> {
    if !(a <= b) {
        return Err(Error::Domain(format!("need a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok((0.0, 0.0, 0.0));
    }
    let flow = RawFlow::covering(k, a.min(0.0), b.max(0.0))?;
    let tol = 1e-12 * (b - a).max(1.0);
    let int_sn = quadrature(|t| flow.at(t)[0], a, b, tol)?;
    let int_cn = quadrature(|t| flow.at(t)[1], a, b, tol)?;
    let int_sncn = quadrature(
        |t| {
            let y = flow.at(t);
            y[0] * y[1]
        },
        a,
        b,
        tol,
    )?;
    Ok((int_sn, int_cn, int_sncn))
}
