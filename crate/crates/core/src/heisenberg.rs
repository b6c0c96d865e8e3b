//! Geodesics of the Heisenberg group `ℝ³` with contact form
//! `α = dz − ½(x dy − y dx)` and horizontal frame
//! `X₁ = ∂x − (y/2)∂z`, `X₂ = ∂y + (x/2)∂z`.
//!
//! The normal geodesics with `θ(t) = v₀t + θ₀` have velocity
//! `cos θ X₁ + sin θ X₂`; their planar projections are circles of radius
//! `1/|v₀|` (lines when `v₀ = 0`).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{integrate_with, IntegratorOptions, OdeProblem};
use crate::srgeom::{energy_split, EnergyReport, HorizontalPath};

const GEODESIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HeisenbergPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HeisenbergPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn origin() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeisenbergGeodesicParams {
    pub v0: f64,
    pub theta0: f64,
    pub start: HeisenbergPoint,
    pub length: f64,
}

impl HeisenbergGeodesicParams {
    pub fn new(v0: f64, theta0: f64, start: HeisenbergPoint, length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Domain(format!("length must be positive, got {length}")));
        }
        let coords = [v0, theta0, start.x, start.y, start.z];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("geodesic parameters must be finite".into()));
        }
        Ok(Self {
            v0,
            theta0,
            start,
            length,
        })
    }

    pub fn angle(&self, t: f64) -> f64 {
        self.v0 * t + self.theta0
    }

    /// Number of uniform samples used for a path of this length and turning rate.
    fn sample_count(&self) -> usize {
        let n = (20_000.0 * self.length * self.v0.abs().max(1.0)).ceil() as usize + 1;
        n.clamp(257, 2_000_001)
    }
}

/// A sampled geodesic: base points and horizontal velocity on a uniform grid.
#[derive(Debug, Clone)]
pub struct HeisenbergGeodesic {
    pub params: HeisenbergGeodesicParams,
    pub points: Vec<HeisenbergPoint>,
    pub path: HorizontalPath,
}

impl HeisenbergGeodesic {
    pub fn endpoint(&self) -> HeisenbergPoint {
        *self.points.last().expect("geodesic has samples")
    }
}

/// `(x(t), y(t))` from the antiderivatives of `cos θ(t)` and `sin θ(t)`.
pub fn planar_projection(params: &HeisenbergGeodesicParams, t: f64) -> (f64, f64) {
    let HeisenbergGeodesicParams { v0, theta0, start, .. } = *params;
    if v0 == 0.0 {
        return (start.x + t * theta0.cos(), start.y + t * theta0.sin());
    }
    let phi = v0 * t + theta0;
    (
        start.x + (phi.sin() - theta0.sin()) / v0,
        start.y + (theta0.cos() - phi.cos()) / v0,
    )
}

/// Integrate the geodesic numerically and sample it uniformly on `[0, ℓ]`.
pub fn geodesic(params: &HeisenbergGeodesicParams) -> Result<HeisenbergGeodesic> {
    let p = *params;
    let problem = OdeProblem::new(
        move |t, s, ds| {
            let (c, sn) = (p.angle(t).cos(), p.angle(t).sin());
            ds[0] = c;
            ds[1] = sn;
            ds[2] = 0.5 * (s[0] * sn - s[1] * c);
        },
        0.0,
        vec![p.start.x, p.start.y, p.start.z],
    )?;
    // Cap the step so the dense output resolves each turn.
    let options = IntegratorOptions {
        max_step: (p.v0 != 0.0).then(|| 0.5 / p.v0.abs()),
        ..IntegratorOptions::with_tolerance(GEODESIC_TOLERANCE)
    };
    let traj = integrate_with(&problem, p.length, &options)?;

    let samples = p.sample_count();
    let mut points = Vec::with_capacity(samples);
    let mut state = [0.0; 3];
    let path = HorizontalPath::from_fn(p.length, samples, |t| {
        let inside = traj.evaluate_into(t, &mut state);
        debug_assert!(inside);
        points.push(HeisenbergPoint::new(state[0], state[1], state[2]));
        [p.angle(t).cos(), p.angle(t).sin()]
    })?;
    Ok(HeisenbergGeodesic {
        params: p,
        points,
        path,
    })
}

/// `max(|x(ℓ) − x(0)|, |y(ℓ) − y(0)|)`; vanishes exactly when `v₀ℓ ∈ 2πℤ \ {0}`.
pub fn vertical_endpoint_defect(params: &HeisenbergGeodesicParams) -> f64 {
    let (x, y) = planar_projection(params, params.length);
    (x - params.start.x).abs().max((y - params.start.y).abs())
}

/// Energy split of the geodesic's velocity against `(X₁, X₂)`.
pub fn balance_report(params: &HeisenbergGeodesicParams) -> Result<EnergyReport> {
    let path = HorizontalPath::from_fn(params.length, params.sample_count(), |t| {
        [params.angle(t).cos(), params.angle(t).sin()]
    })?;
    energy_split(&path)
}
