//! Frame-based subriemannian geometry on contact 3-manifolds.
//!
//! A frame `(X₀, X₁, X₂)` with `X₀` the Reeb field and `X₁, X₂` an
//! orthonormal frame of the contact plane is described by its structure
//! constants `[X_i, X_j] = Σ_k c_ij^k X_k`. Covectors are recorded through
//! their momenta `P_i = p(X_i)`, and the normal geodesic flow is the
//! Hamiltonian flow of `H = ½(P₁² + P₂²)` with brackets
//! `{P_i, P_j} = −Σ_k c_ij^k P_k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::trapezoid;

/// `(P₀, P₁, P₂)`: momenta of a covector against the frame.
pub type Momentum = [f64; 3];

/// Balance threshold used when none is given.
pub const DEFAULT_BALANCE_TOLERANCE: f64 = 1e-6;

/// Tolerance on `w₁² + w₂² = 1` for unit-speed paths.
pub const UNIT_SPEED_TOLERANCE: f64 = 1e-8;

/// Structure constants of a frame `(X₀ = Reeb, X₁, X₂)`, indexed `c[i][j][k]`.
/// Constants are position independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactFrame3 {
    c: [[[f64; 3]; 3]; 3],
}

impl ContactFrame3 {
    /// Validates antisymmetry in the first two indices and the contact
    /// condition `c[1][2][0] ≠ 0`.
    #[allow(clippy::needless_range_loop)]
    pub fn new(c: [[[f64; 3]; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if c[i][j][k] != -c[j][i][k] {
                        return Err(Error::Domain(format!(
                            "structure constants not antisymmetric at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        if c[1][2][0] == 0.0 || !c[1][2][0].is_finite() {
            return Err(Error::Domain(
                "contact condition fails: [X1, X2] has no X0 component".into(),
            ));
        }
        Ok(Self { c })
    }

    /// Build from the three brackets `[X₀,X₁]`, `[X₁,X₂]`, `[X₂,X₀]`, each
    /// given by its components along `(X₀, X₁, X₂)`.
    pub fn from_brackets(x01: [f64; 3], x12: [f64; 3], x20: [f64; 3]) -> Result<Self> {
        let mut c = [[[0.0; 3]; 3]; 3];
        for (i, j, v) in [(0, 1, x01), (1, 2, x12), (2, 0, x20)] {
            for k in 0..3 {
                c[i][j][k] = v[k];
                c[j][i][k] = -v[k];
            }
        }
        Self::new(c)
    }

    /// Heisenberg frame: `[X₁, X₂] = X₀`, `X₀` central.
    pub fn heisenberg() -> Self {
        Self::from_brackets([0.0; 3], [1.0, 0.0, 0.0], [0.0; 3]).expect("valid frame")
    }

    /// Frame `(X, Y, Z)` of a special contact Anosov flow:
    /// `[X,Y] = Y`, `[Y,Z] = X`, `[Z,X] = Z`.
    pub fn special_contact() -> Self {
        Self::from_brackets([0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
            .expect("valid frame")
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[i][j][k]
    }
}

/// A covector at a base point, in momentum coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumPoint<B> {
    pub base: B,
    pub momentum: Momentum,
}

/// `H = ½(P₁² + P₂²)`; independent of `P₀`.
pub fn hamiltonian(p: Momentum) -> f64 {
    0.5 * (p[1] * p[1] + p[2] * p[2])
}

fn check_index(i: usize) -> Result<()> {
    if i < 3 {
        Ok(())
    } else {
        Err(Error::Domain(format!("frame index must be 0, 1 or 2, got {i}")))
    }
}

/// `{P_i, P_j} = −Σ_k c_ij^k P_k`.
pub fn momentum_bracket(frame: &ContactFrame3, i: usize, j: usize, p: Momentum) -> Result<f64> {
    check_index(i)?;
    check_index(j)?;
    Ok(bracket(frame, i, j, p))
}

fn bracket(frame: &ContactFrame3, i: usize, j: usize, p: Momentum) -> f64 {
    -(0..3).map(|k| frame.c[i][j][k] * p[k]).sum::<f64>()
}

/// `{P_i, H} = {P_i, P₁}·P₁ + {P_i, P₂}·P₂`.
pub fn hamiltonian_bracket(frame: &ContactFrame3, i: usize, p: Momentum) -> Result<f64> {
    check_index(i)?;
    Ok(bracket(frame, i, 1, p) * p[1] + bracket(frame, i, 2, p) * p[2])
}

/// Right-hand side of the normal geodesic equation in momentum
/// coordinates: `Ṗ_i = {P_i, H}`.
pub fn geodesic_field(frame: &ContactFrame3, p: Momentum) -> Momentum {
    let mut out = [0.0; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = bracket(frame, i, 1, p) * p[1] + bracket(frame, i, 2, p) * p[2];
    }
    out
}

/// Samples of a horizontal path's velocity `γ̇ = w₁X₁ + w₂X₂` on `[t₀, t₀+ℓ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalPath {
    times: Vec<f64>,
    components: Vec<[f64; 2]>,
}

impl HorizontalPath {
    pub fn new(times: Vec<f64>, components: Vec<[f64; 2]>) -> Result<Self> {
        if times.len() != components.len() {
            return Err(Error::Domain(format!(
                "{} times but {} tangent samples",
                times.len(),
                components.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::Domain("a path needs at least two samples".into()));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Domain("sample times must be strictly increasing".into()));
        }
        Ok(Self { times, components })
    }

    /// Sample `t ↦ (w₁(t), w₂(t))` at `samples` equally spaced times on `[0, ℓ]`.
    pub fn from_fn<F>(length: f64, samples: usize, mut tangent: F) -> Result<Self>
    where
        F: FnMut(f64) -> [f64; 2],
    {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Domain(format!("path length must be positive, got {length}")));
        }
        let samples = samples.max(2);
        let times: Vec<f64> = (0..samples)
            .map(|i| {
                if i + 1 == samples {
                    length
                } else {
                    length * i as f64 / (samples - 1) as f64
                }
            })
            .collect();
        let components = times.iter().map(|&t| tangent(t)).collect();
        Self::new(times, components)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn components(&self) -> &[[f64; 2]] {
        &self.components
    }

    /// `ℓ`, the parameter length (equal to the length for unit speed).
    pub fn length(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Largest `|w₁² + w₂² − 1|` over the samples.
    pub fn speed_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|w| (w[0] * w[0] + w[1] * w[1] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// The same path traversed backwards (`t ↦ γ(ℓ − t)`), velocity negated.
    pub fn reversed(&self) -> Self {
        let t_end = self.times[self.times.len() - 1];
        let t_start = self.times[0];
        let times = self.times.iter().rev().map(|&t| t_start + (t_end - t)).collect();
        let components = self.components.iter().rev().map(|w| [-w[0], -w[1]]).collect();
        Self { times, components }
    }
}

/// Share of the kinetic energy carried by each summand of `E = ⟨X₁⟩ ⊕ ⟨X₂⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    /// `E1 − E2`.
    pub defect: f64,
    pub length: f64,
}

impl EnergyReport {
    pub fn is_balanced(&self, tolerance: f64) -> bool {
        self.defect.abs() <= tolerance
    }
}

/// `E_i = (1/ℓ) ∫ w_i² dt` by the trapezoid rule on the path's own samples.
pub fn energy_split(path: &HorizontalPath) -> Result<EnergyReport> {
    let defect = path.speed_defect();
    if defect > UNIT_SPEED_TOLERANCE {
        return Err(Error::Domain(format!(
            "path is not unit speed: |w|² deviates from 1 by {defect:e}"
        )));
    }
    let length = path.length();
    let w1sq: Vec<f64> = path.components.iter().map(|w| w[0] * w[0]).collect();
    let w2sq: Vec<f64> = path.components.iter().map(|w| w[1] * w[1]).collect();
    let e1 = trapezoid(&path.times, &w1sq) / length;
    let e2 = trapezoid(&path.times, &w2sq) / length;
    Ok(EnergyReport {
        e1,
        e2,
        defect: e1 - e2,
        length,
    })
}
