//! The end-to-end property suite behind `verify-all` and the acceptance
//! tests: eight criteria, each a list of measured checks plus a time budget.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::elliptic::landen::jacobi_landen;
use crate::elliptic::{quarter_period, JacobiEvaluator, Modulus};
use crate::error::Result;
use crate::heisenberg::{self, HeisenbergGeodesicParams, HeisenbergPoint};
use crate::numkit::{integrate, OdeProblem};
use crate::pendulum::{
    classify, energy, energy_of, fit_solution, solve_closed_form, solve_numeric, verify_lemma_int,
    PendulumCase, PendulumParams, PendulumSolution,
};
use crate::sl2flow::{
    balance_report, frame_realization, integrate_geodesic, length_derivative_check, lemma_chain,
    shoot, GroupPoint, ReducedState, ShootingConfig, ShootingResult,
};
use crate::srgeom::{geodesic_field, hamiltonian, momentum_bracket, ContactFrame3};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="`, `">"` or `">="`.
    pub relation: &'static str,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, "<=", bound, value <= bound)
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, ">", bound, value > bound)
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, ">=", bound, value >= bound)
    }

    /// A yes/no property recorded as 1 or 0 against the bound 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::make(name, if ok { 1.0 } else { 0.0 }, ">=", 1.0, ok)
    }

    fn make(name: impl Into<String>, value: f64, relation: &'static str, bound: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            relation,
            bound,
            passed: passed && !value.is_nan(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} = {:.3e} ({} {:.0e})",
            if self.passed { "ok" } else { "FAIL" },
            self.name,
            self.value,
            self.relation,
            self.bound
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed_seconds: f64,
    pub time_limit_seconds: f64,
    /// Set when the computation itself failed before the checks could run.
    pub error: Option<String>,
}

impl CriterionOutcome {
    pub fn within_time(&self) -> bool {
        self.elapsed_seconds <= self.time_limit_seconds
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.within_time() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// `criterion N: PASS|FAIL  title  (elapsed / limit)` on one line.
    pub fn summary_line(&self) -> String {
        format!(
            "criterion {}: {}  {}  ({:.2}s / {:.0}s)",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed_seconds,
            self.time_limit_seconds
        )
    }
}

fn timed(
    id: u8,
    title: &'static str,
    limit: f64,
    body: impl FnOnce() -> Result<Vec<Check>>,
) -> CriterionOutcome {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed().as_secs_f64();
    let (checks, error) = match result {
        Ok(checks) => (checks, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    CriterionOutcome {
        id,
        title,
        checks,
        elapsed_seconds: elapsed,
        time_limit_seconds: limit,
        error,
    }
}

fn moduli() -> impl Iterator<Item = Modulus> {
    (1..=9).map(|i| Modulus::new(0.1 * i as f64).expect("modulus in (0,1)"))
}

fn agm_oracle(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    a
}

/// Elliptic identities on a 50×9 grid and agreement with the descending
/// Landen evaluation.
pub fn criterion_1() -> CriterionOutcome {
    timed(1, "elliptic identities and ODE/AGM agreement", 5.0, || {
        let (mut circle, mut modulus, mut agreement) = (0.0f64, 0.0f64, 0.0f64);
        for k in moduli() {
            let jac = JacobiEvaluator::new(k)?;
            let span = 8.0 * jac.quarter_period();
            for i in 0..50 {
                let t = -span + 2.0 * span * i as f64 / 49.0;
                let e = jac.eval(t)?;
                circle = circle.max(e.circle_residual());
                modulus = modulus.max(e.modulus_residual());
                let (sn, cn, dn) = jacobi_landen(t, k);
                agreement = agreement
                    .max((e.sn - sn).abs())
                    .max((e.cn - cn).abs())
                    .max((e.dn - dn).abs());
            }
        }
        Ok(vec![
            Check::at_most("max |sn^2 + cn^2 - 1|", circle, 1e-10),
            Check::at_most("max |k^2 sn^2 + dn^2 - 1|", modulus, 1e-10),
            Check::at_most("max |ODE - AGM|", agreement, 1e-9),
        ])
    })
}

/// Quarter period against `π / (2·agm(1, k'))` and `cn(K) = 0`.
pub fn criterion_2() -> CriterionOutcome {
    timed(2, "quarter period", 1.0, || {
        let (mut period, mut cn_at_k) = (0.0f64, 0.0f64);
        for k in moduli() {
            let kq = quarter_period(k)?;
            let oracle = PI / (2.0 * agm_oracle(1.0, (1.0 - k.value().powi(2)).sqrt()));
            period = period.max((kq - oracle).abs());
            cn_at_k = cn_at_k.max(JacobiEvaluator::new(k)?.eval(kq)?.cn.abs());
        }
        Ok(vec![
            Check::at_most("max |K - pi/(2 agm(1,k'))|", period, 1e-10),
            Check::at_most("max |cn(K)|", cn_at_k, 1e-9),
        ])
    })
}

/// Integration tolerance for the long-span conservation checks. Drift
/// accumulates roughly linearly in the span, so this sits well below the
/// 1e-9 drift bound.
const DRIFT_TOLERANCE: f64 = 1e-12;

/// 20 pendulum draws: 7 oscillating, 6 separatrix, 7 circulating.
pub fn pendulum_draws(seed: u64) -> Vec<PendulumParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(20);
    for case in 0..20 {
        let omega = rng.gen_range(0.5..2.0);
        let theta0: f64 = rng.gen_range(-PI..PI);
        let direction = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let barrier = 2.0 * omega * (0.5 * theta0).cos();
        let thetadot0 = match case % 3 {
            // Below the barrier speed at this angle: oscillation.
            0 => direction * barrier.abs() * rng.gen_range(0.05..0.9),
            1 => direction * barrier.abs(),
            _ => direction * (barrier.abs() + omega * rng.gen_range(0.2..3.0)),
        };
        draws.push(PendulumParams::new(omega, theta0, thetadot0).expect("finite draw"));
    }
    draws
}

/// Closed form against numeric integration, plus energy drift.
pub fn criterion_3(seed: u64) -> CriterionOutcome {
    timed(3, "pendulum closed form vs numeric", 10.0, || {
        let draws = pendulum_draws(seed);
        let mut cases = [0usize; 5];
        let (mut sup, mut drift) = (0.0f64, 0.0f64);
        for params in &draws {
            let sol = fit_solution(params)?;
            cases[sol.case.number() as usize] += 1;
            let span = sol.period().unwrap_or(4.0 / params.omega);
            let traj = solve_numeric(params, span, 1e-12)?;
            for i in 0..=200 {
                let t = (span * i as f64 / 200.0).min(span);
                let numeric = traj.evaluate(t).expect("inside span")[0];
                sup = sup.max((solve_closed_form(&sol, t)? - numeric).abs());
            }
        }
        let mut drift_params = draws.clone();
        drift_params.push(PendulumParams::new(1.0, 1.0, 0.3)?);
        for params in &drift_params {
            let i0 = energy(params).value();
            let traj = solve_numeric(params, 50.0, DRIFT_TOLERANCE)?;
            for s in traj.states() {
                drift = drift.max((energy_of(params.omega, s[0], s[1]) - i0).abs());
            }
        }
        Ok(vec![
            Check::holds("draws cover cases 2, 3 and 4", cases[2] > 0 && cases[3] > 0 && cases[4] > 0),
            Check::at_most("sup |closed - numeric| over one period", sup, 1e-7),
            Check::at_most("max energy drift on [0, 50]", drift, 1e-9),
        ])
    })
}

/// The circulating witness and the oscillating counterexample.
pub fn criterion_4() -> CriterionOutcome {
    timed(4, "vanishing-integral lemma witness", 2.0, || {
        let witness = PendulumSolution::new(PendulumCase::Circulating, SQRT_2, 4.0, 0.0, 1.0, 0)?;
        let ell = 4.0 * witness.quarter_period().expect("modulus") / 2.0;
        let r = verify_lemma_int(&witness, ell)?;
        let (s, c) = r.halfangle_integrals;

        let counter = fit_solution(&PendulumParams::new(1.0, 0.0, 1.2)?)?;
        let k = counter.k.expect("oscillating modulus");
        let mut bound_margin = f64::INFINITY;
        let mut hypothesis_rejected = true;
        for ell in [0.5, 3.0, counter.period().expect("period")] {
            let rc = verify_lemma_int(&counter, ell)?;
            hypothesis_rejected &= !rc.hypothesis_holds;
            let lower = ell * (1.0 - k * k).sqrt() / 2.0;
            bound_margin = bound_margin.min(rc.halfangle_integrals.1.abs() - lower);
        }
        Ok(vec![
            Check::at_most("witness |int sin(theta/2)|", s.abs(), 1e-8),
            Check::at_most("witness |int cos(theta/2)|", c.abs(), 1e-8),
            Check::holds("witness I > omega^2", r.energy_exceeds_barrier),
            Check::at_most(
                "witness dist(l sqrt(I), 4K Z)",
                r.period_multiple_defect.unwrap_or(f64::INFINITY),
                1e-8,
            ),
            Check::at_most("witness |int sin(theta)|", r.sin_integral.abs(), 1e-8),
            Check::holds("oscillating case fails the hypothesis", hypothesis_rejected),
            Check::at_least("|int cos(theta/2)| - l sqrt(1-k^2)/2", bound_margin, 0.0),
        ])
    })
}

/// Heisenberg sweep: balanced exactly where the endpoint is vertical.
pub fn criterion_5() -> CriterionOutcome {
    timed(5, "Heisenberg balance sweep", 2.0, || {
        let sweep = [
            ("pi/2", PI / 2.0, false),
            ("pi", PI, false),
            ("2pi", 2.0 * PI, true),
            ("3", 3.0, false),
            ("3pi", 3.0 * PI, false),
            ("4pi", 4.0 * PI, true),
        ];
        let mut checks = Vec::new();
        for (label, v0, vertical_expected) in sweep {
            let p = HeisenbergGeodesicParams::new(v0, 0.0, HeisenbergPoint::origin(), 1.0)?;
            let defect = heisenberg::balance_report(&p)?.defect.abs();
            let vertical = heisenberg::vertical_endpoint_defect(&p);
            if vertical_expected {
                checks.push(Check::at_most(format!("|E1 - E2| at v0 l = {label}"), defect, 1e-8));
                checks.push(Check::at_most(format!("vertical defect at {label}"), vertical, 1e-8));
            } else {
                checks.push(Check::above(format!("|E1 - E2| at v0 l = {label}"), defect, 1e-2));
                checks.push(Check::above(format!("vertical defect at {label}"), vertical, 1e-2));
            }
        }
        Ok(checks)
    })
}

pub const SHOOTING_TAUS: [f64; 4] = [0.01, 0.02, 0.05, 0.1];

/// Shooting, balance, closure and the pendulum chain for each `τ`; also
/// returns the converged geodesics for [`criterion_7`].
pub fn criterion_6() -> (CriterionOutcome, Vec<ShootingResult>) {
    let mut results = Vec::new();
    let outcome = timed(6, "balance of shooting geodesics", 60.0, || {
        let config = ShootingConfig::default();
        let mut checks = Vec::new();
        for tau in SHOOTING_TAUS {
            let found = shoot(tau, &config)?.solutions;
            let (mut residual, mut defect, mut closure, mut period) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            let mut min_energy = f64::INFINITY;
            for r in &found {
                residual = residual.max(r.endpoint_residual);
                defect = defect.max(balance_report(r)?.defect.abs());
                let (c, s) = r.closure_integrals()?;
                closure = closure.max(c.abs()).max(s.abs());
                let chain = lemma_chain(r)?;
                min_energy = min_energy.min(r.initial_state().pendulum_energy());
                period = period.max(chain.period_multiple_defect.unwrap_or(f64::INFINITY));
            }
            checks.push(Check::at_least(format!("tau={tau}: solutions found"), found.len() as f64, 1.0));
            checks.push(Check::at_most(format!("tau={tau}: endpoint residual"), residual, 1e-8));
            checks.push(Check::at_most(format!("tau={tau}: |int cos 2theta|/l"), defect, 1e-6));
            checks.push(Check::at_most(format!("tau={tau}: closure integrals"), closure, 1e-6));
            checks.push(Check::above(format!("tau={tau}: reduced energy I"), min_energy, 2.0));
            checks.push(Check::at_most(format!("tau={tau}: dist(l sqrt(I), 4K Z)"), period, 1e-5));
            results.extend(found);
        }
        Ok(checks)
    });
    (outcome, results)
}

/// Central-difference length derivative against `2ℓ(𝓔_u − 𝓔_s)`.
pub fn criterion_7(results: &[ShootingResult]) -> CriterionOutcome {
    timed(7, "length derivative identity", 10.0, || {
        let mut mismatch = 0.0f64;
        let mut worst_ratio = f64::INFINITY;
        for r in results {
            let steps = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
            let mut m = [0.0; 4];
            for (slot, &h) in m.iter_mut().zip(&steps) {
                *slot = length_derivative_check(r, h)?.mismatch;
            }
            mismatch = mismatch.max(m[0]);
            for j in 0..3 {
                worst_ratio = worst_ratio.min(m[j] / m[j + 1]);
            }
        }
        Ok(vec![
            Check::at_least("geodesics checked", results.len() as f64, 1.0),
            Check::at_most("max |FD - 2l(Eu - Es)| at r = 1e-3", mismatch, 1e-4),
            // O(r²) means each halving divides the mismatch by about 4.
            Check::at_least("min mismatch ratio per halving", worst_ratio, 3.0),
        ])
    })
}

/// Frame brackets, determinant drift, `H` conservation, bracket antisymmetry.
pub fn criterion_8(seed: u64) -> CriterionOutcome {
    timed(8, "structural invariants", 5.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = frame_realization()?;
        let brackets = frame.bracket_residuals().into_iter().fold(0.0, f64::max);

        let mut det = 0.0f64;
        for _ in 0..4 {
            let start = ReducedState {
                g: GroupPoint::identity(),
                theta: rng.gen_range(0.0..2.0 * PI),
                px: rng.gen_range(-3.0..3.0),
            };
            det = det.max(integrate_geodesic(&start, 20.0, 1e-10)?.det_drift());
        }

        let mut h_drift = 0.0f64;
        let mut antisymmetric = true;
        for frame in [ContactFrame3::heisenberg(), ContactFrame3::special_contact()] {
            let p0 = [rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let problem = OdeProblem::new(
                move |_, y, dy| dy.copy_from_slice(&geodesic_field(&frame, [y[0], y[1], y[2]])),
                0.0,
                p0.to_vec(),
            )?;
            let traj = integrate(&problem, 20.0, DRIFT_TOLERANCE)?;
            for s in traj.states() {
                h_drift = h_drift.max((hamiltonian([s[0], s[1], s[2]]) - hamiltonian(p0)).abs());
            }
            for _ in 0..50 {
                let p = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
                for i in 0..3 {
                    for j in 0..3 {
                        antisymmetric &=
                            momentum_bracket(&frame, i, j, p)? == -momentum_bracket(&frame, j, i, p)?;
                    }
                }
            }
        }
        Ok(vec![
            Check::at_most("frame bracket residual", brackets, 1e-14),
            Check::at_most("det drift over length 20", det, 1e-9),
            Check::at_most("H drift over length 20", h_drift, 1e-9),
            Check::holds("momentum bracket antisymmetry is exact", antisymmetric),
        ])
    })
}

/// All eight criteria in order.
pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    let (c6, results) = criterion_6();
    let c7 = criterion_7(&results);
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(seed),
        criterion_4(),
        criterion_5(),
        c6,
        c7,
        criterion_8(seed),
    ]
}

/// Classification of the draws, used to show coverage.
pub fn draw_cases(seed: u64) -> Vec<PendulumCase> {
    pendulum_draws(seed).iter().map(classify).collect()
}
