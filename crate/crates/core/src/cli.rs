//! Command-line front end. Every subcommand renders its whole output into a
//! buffer first, so a failing run prints nothing but the error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::elliptic::{quarter_period, JacobiEvaluator, Modulus};
use crate::error::Error;
use crate::heisenberg::{self, HeisenbergGeodesicParams, HeisenbergPoint};
use crate::pendulum::{classify, energy, fit_solution, verify_lemma_int, PendulumParams};
use crate::sl2flow::{
    balance_report, length_derivative_check, lemma_chain, shoot, GroupPoint, ShootingConfig,
};
use crate::verify;

/// Environment variable naming a JSON file with [`RunConfig`] fields.
pub const RUNCONFIG_VAR: &str = "RUNCONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tolerance: f64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            format: Format::Csv,
            output: None,
            seed: 7,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Failure::usage(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "su-balance", version, about = "Subriemannian balance computations")]
struct Cli {
    /// Output format (overrides the config file).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Integration tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Jacobi sn, cn, dn at one argument.
    Elliptic(EllipticArgs),
    /// Classify and solve a pendulum; optionally test the vanishing-integral lemma.
    Pendulum(PendulumArgs),
    /// A Heisenberg geodesic with its energy split.
    Heisenberg(HeisenbergArgs),
    /// Shoot an su-geodesic from x to f_tau(x) on SL(2,R).
    Sl2(Sl2Args),
    /// Run the full property suite and print a pass/fail table.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Args)]
struct EllipticArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    t: f64,
    #[arg(long)]
    k: f64,
    /// Evaluate at t = K(k) instead of --t.
    #[arg(long)]
    at_quarter_period: bool,
}

#[derive(Debug, Args)]
struct PendulumArgs {
    #[arg(long)]
    omega: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    theta0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    thetadot0: f64,
    /// Interval length for the lemma report.
    #[arg(long)]
    length: Option<f64>,
}

#[derive(Debug, Args)]
struct HeisenbergArgs {
    #[arg(long, allow_hyphen_values = true)]
    v0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    theta0: f64,
    #[arg(long)]
    length: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    x0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    y0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    z0: f64,
    /// Number of path rows printed.
    #[arg(long, default_value_t = 101)]
    rows: usize,
}

#[derive(Debug, Args)]
struct Sl2Args {
    #[arg(long, allow_hyphen_values = true)]
    tau: f64,
    /// Include the length-derivative check.
    #[arg(long)]
    eqdiff: bool,
    #[arg(long, default_value_t = 1e-3)]
    r_step: f64,
    /// Base point as m11,m12,m21,m22 (determinant 1).
    #[arg(long, value_delimiter = ',', num_args = 4, allow_hyphen_values = true)]
    base: Option<Vec<f64>>,
    /// Also write the path as CSV (t, m11, m12, m21, m22, theta, P_X).
    #[arg(long)]
    path_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 401)]
    path_rows: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Append elapsed times to each line.
    #[arg(long)]
    timings: bool,
}

/// A failed run: exit code plus message.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn usage(message: String) -> Self {
        Self {
            code: 2,
            kind: "domain",
            message,
        }
    }

    fn io(e: std::io::Error) -> Self {
        Self {
            code: 1,
            kind: "io",
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Domain(_) => (2, "domain"),
            Error::Consistency(_) | Error::Accuracy { .. } | Error::Fit(_) => (1, "consistency"),
            Error::NonConvergence { .. }
            | Error::SearchFailure { .. }
            | Error::StepSizeUnderflow { .. } => (3, "non_convergence"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn csv_line(values: &[f64]) -> String {
    values.iter().map(|v| fmt_real(*v)).collect::<Vec<_>>().join(",")
}

fn load_config() -> Result<RunConfig, Failure> {
    match std::env::var_os(RUNCONFIG_VAR) {
        None => Ok(RunConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                Failure::usage(format!("cannot read {}: {e}", PathBuf::from(&path).display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::usage(format!("invalid run config: {e}")))
        }
    }
}

/// Parse arguments, run, and write to `stdout`/`stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json_requested = args
        .windows(2)
        .any(|w| w[0] == "--format" && w[1] == "json")
        || args.iter().any(|a| a == "--format=json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let failure = Failure {
                code: 2,
                kind: "usage",
                message: e.to_string().trim().to_string(),
            };
            return report_failure(&failure, json_requested, stdout, stderr);
        }
    };

    let config = load_config().and_then(|mut config| {
        if let Some(f) = cli.format {
            config.format = f;
        }
        if let Some(o) = &cli.output {
            config.output = Some(o.clone());
        }
        if let Some(t) = cli.tolerance {
            config.tolerance = t;
        }
        if let Some(s) = cli.seed {
            config.seed = s;
        }
        config.validate()?;
        Ok(config)
    });
    let config = match config {
        Ok(c) => c,
        Err(f) => return report_failure(&f, json_requested, stdout, stderr),
    };

    let rendered = match &cli.command {
        Command::Elliptic(a) => cmd_elliptic(a, &config),
        Command::Pendulum(a) => cmd_pendulum(a, &config),
        Command::Heisenberg(a) => cmd_heisenberg(a, &config),
        Command::Sl2(a) => cmd_sl2(a, &config),
        Command::VerifyAll(a) => cmd_verify_all(a, &config),
    };
    let (text, code) = match rendered {
        Ok(out) => out,
        Err(f) => return report_failure(&f, config.format == Format::Json, stdout, stderr),
    };
    let written = match &config.output {
        Some(path) => std::fs::write(path, &text),
        None => stdout.write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => code,
        Err(e) => report_failure(&Failure::io(e), config.format == Format::Json, stdout, stderr),
    }
}

fn report_failure(f: &Failure, json: bool, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    if json {
        let obj = json!({"error": {"kind": f.kind, "message": f.message, "exit_code": f.code}});
        let _ = writeln!(stdout, "{obj}");
    } else {
        let _ = writeln!(stderr, "error: {}", f.message);
    }
    f.code
}

type Rendered = Result<(String, i32), Failure>;

fn cmd_elliptic(a: &EllipticArgs, config: &RunConfig) -> Rendered {
    let k = Modulus::new(a.k)?;
    let t = if a.at_quarter_period { quarter_period(k)? } else { a.t };
    let e = JacobiEvaluator::new(k)?.eval(t)?;
    let (id1, id2) = (e.circle_residual(), e.modulus_residual());
    let text = match config.format {
        Format::Csv => format!(
            "t,k,sn,cn,dn,id1_residual,id2_residual\n{}\n",
            csv_line(&[t, a.k, e.sn, e.cn, e.dn, id1, id2])
        ),
        Format::Json => format!(
            "{}\n",
            json!({"t": t, "k": a.k, "sn": e.sn, "cn": e.cn, "dn": e.dn,
                   "id1_residual": id1, "id2_residual": id2})
        ),
    };
    Ok((text, 0))
}

fn cmd_pendulum(a: &PendulumArgs, _config: &RunConfig) -> Rendered {
    let params = PendulumParams::new(a.omega, a.theta0, a.thetadot0)?;
    let case = classify(&params);
    let i = energy(&params).value();
    let mut out = json!({
        "case": format!("{case:?}"),
        "case_number": case.number(),
        "I": i,
        "k": Value::Null,
        "t0": Value::Null,
    });
    if !case.is_equilibrium() {
        let sol = fit_solution(&params)?;
        out["k"] = json!(sol.k);
        out["t0"] = json!(sol.t0);
        out["sign"] = json!(sol.sign);
        out["winding"] = json!(sol.winding);
        out["period"] = json!(sol.period());
        if let Some(length) = a.length {
            out["lemma_int"] = serde_json::to_value(verify_lemma_int(&sol, length)?)
                .expect("report serializes");
        }
    } else if a.length.is_some() {
        return Err(Failure::usage(format!("{case:?} has no lemma report")));
    }
    Ok((format!("{}\n", out), 0))
}

fn cmd_heisenberg(a: &HeisenbergArgs, config: &RunConfig) -> Rendered {
    let params = HeisenbergGeodesicParams::new(
        a.v0,
        a.theta0,
        HeisenbergPoint::new(a.x0, a.y0, a.z0),
        a.length,
    )?;
    let geo = heisenberg::geodesic(&params)?;
    let report = heisenberg::balance_report(&params)?;
    let vertical = heisenberg::vertical_endpoint_defect(&params);
    let summary = json!({"E1": report.e1, "E2": report.e2, "defect": report.defect,
                         "vertical_defect": vertical});
    let n = geo.points.len();
    let rows = a.rows.clamp(2, n);
    let picks = (0..rows).map(|r| if r + 1 == rows { n - 1 } else { r * (n - 1) / (rows - 1) });
    let times = geo.path.times();
    let comps = geo.path.components();
    let text = match config.format {
        Format::Csv => {
            let mut s = String::from("t,x,y,z,w1,w2\n");
            for i in picks {
                let p = geo.points[i];
                let _ = writeln!(s, "{}", csv_line(&[times[i], p.x, p.y, p.z, comps[i][0], comps[i][1]]));
            }
            let _ = writeln!(s, "{summary}");
            s
        }
        Format::Json => {
            let samples: Vec<Value> = picks
                .map(|i| {
                    let p = geo.points[i];
                    json!({"t": times[i], "x": p.x, "y": p.y, "z": p.z,
                           "w1": comps[i][0], "w2": comps[i][1]})
                })
                .collect();
            format!("{}\n", json!({"samples": samples, "summary": summary}))
        }
    };
    Ok((text, 0))
}

fn cmd_sl2(a: &Sl2Args, config: &RunConfig) -> Rendered {
    let shooting = ShootingConfig {
        integration_tolerance: config.tolerance.min(1e-12),
        ..ShootingConfig::default()
    };
    if !(a.tau > 0.0 && a.tau <= shooting.tau_max) {
        return Err(Failure::usage(format!(
            "tau must lie in (0, {}], got {}",
            shooting.tau_max, a.tau
        )));
    }
    let base = match &a.base {
        Some(m) => GroupPoint::new(Matrix2::new(m[0], m[1], m[2], m[3]))?,
        None => GroupPoint::identity(),
    };
    let outcome = shoot(a.tau, &shooting)?;
    let r = outcome.first();
    let report = balance_report(r)?;
    let (closure_cos, closure_sin) = r.closure_integrals()?;
    let lemma = lemma_chain(r)?;
    let mut out = json!({
        "tau": a.tau,
        "theta0": r.theta0,
        "P_X0": r.px0,
        "length": r.length,
        "endpoint_residual": r.endpoint_residual,
        "E_s": report.e1,
        "E_u": report.e2,
        "defect": report.defect,
        "closure_integrals": [closure_cos, closure_sin],
        "solutions_found": outcome.solutions.len(),
        "shortest_length": outcome.shortest().length,
        "lemma_int": serde_json::to_value(lemma).expect("report serializes"),
        "base": base.entries(),
    });
    if a.eqdiff {
        let d = length_derivative_check(r, a.r_step)?;
        out["eqdiff_finite_difference"] = json!(d.finite_difference);
        out["eqdiff_formula"] = json!(d.formula);
        out["eqdiff_mismatch"] = json!(d.mismatch);
        out["eqdiff_first_order"] = json!(d.first_order);
    }
    if let Some(path) = &a.path_csv {
        let mut s = String::from("t,m11,m12,m21,m22,theta,P_X\n");
        let rows = a.path_rows.max(2);
        for j in 0..rows {
            let t = if j + 1 == rows { r.length } else { r.length * j as f64 / (rows - 1) as f64 };
            let st = r.geodesic.state_at(t).expect("inside the geodesic");
            // Left translation carries the identity-based geodesic to the base point.
            let m = base.matrix() * st.g.matrix();
            let _ = writeln!(
                s,
                "{}",
                csv_line(&[t, m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)], st.theta, st.px])
            );
        }
        std::fs::write(path, s).map_err(Failure::io)?;
    }
    let text = match config.format {
        Format::Json => format!("{out}\n"),
        Format::Csv => {
            let obj = out.as_object().expect("object");
            let mut keys = Vec::new();
            let mut values = Vec::new();
            for (k, v) in obj {
                if let Some(x) = v.as_f64() {
                    keys.push(k.clone());
                    values.push(x);
                }
            }
            format!("{}\n{}\n", keys.join(","), csv_line(&values))
        }
    };
    Ok((text, 0))
}

fn cmd_verify_all(a: &VerifyArgs, config: &RunConfig) -> Rendered {
    let outcomes = verify::run_all(config.seed);
    let all_passed = outcomes.iter().all(|o| o.passed());
    let text = match config.format {
        Format::Json => {
            let rows: Vec<Value> = outcomes
                .iter()
                .map(|o| {
                    let mut v = json!({"criterion": o.id, "title": o.title, "passed": o.passed(),
                                       "checks": o.checks, "error": o.error});
                    if a.timings {
                        v["elapsed_seconds"] = json!(o.elapsed_seconds);
                        v["time_limit_seconds"] = json!(o.time_limit_seconds);
                    }
                    v
                })
                .collect();
            format!("{}\n", json!({"passed": all_passed, "criteria": rows}))
        }
        Format::Csv => {
            let mut s = String::from("criterion,result,check,value,relation,bound\n");
            for o in &outcomes {
                let verdict = if o.passed() { "PASS" } else { "FAIL" };
                if let Some(e) = &o.error {
                    let _ = writeln!(s, "{},{},error: {},,,", o.id, verdict, e.replace(',', ";"));
                }
                for c in &o.checks {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{}",
                        o.id,
                        if c.passed { "ok" } else { "FAIL" },
                        c.name.replace(',', ";"),
                        fmt_real(c.value),
                        c.relation,
                        fmt_real(c.bound)
                    );
                }
                let timing = if a.timings {
                    format!(" ({:.2}s / {:.0}s)", o.elapsed_seconds, o.time_limit_seconds)
                } else {
                    String::new()
                };
                let _ = writeln!(s, "{},{},{}{},,,", o.id, verdict, o.title, timing);
            }
            s
        }
    };
    Ok((text, if all_passed { 0 } else { 1 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("su-balance").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn full_precision_formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn elliptic_origin() {
        let (code, out, _) = run_capture(&["elliptic", "--t", "0", "--k", "0.5", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!((v["sn"].as_f64(), v["cn"].as_f64(), v["dn"].as_f64()), (Some(0.0), Some(1.0), Some(1.0)));
    }

    #[test]
    fn elliptic_quarter_period() {
        let (code, out, _) =
            run_capture(&["elliptic", "--k", "0.5", "--at-quarter-period", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["cn"].as_f64().unwrap().abs() <= 1e-9);
    }

    #[test]
    fn elliptic_bad_modulus() {
        let (code, out, err) = run_capture(&["elliptic", "--t", "0", "--k", "1.5"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        assert!(err.contains("(0,1)"), "{err}");

        let (code, out, _) = run_capture(&["elliptic", "--k", "1.5", "--format", "json"]);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert!(v["error"]["message"].as_str().unwrap().contains("(0,1)"));
        assert_eq!(out.lines().count(), 1);
    }

    #[test]
    fn csv_row_has_full_precision() {
        let (code, out, _) = run_capture(&["elliptic", "--t", "0.3", "--k", "0.5"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("t,k,sn,cn,dn,id1_residual,id2_residual"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 7);
        assert_eq!(row[0], "2.9999999999999999e-1");
    }

    #[test]
    fn pendulum_commands() {
        let (code, out, _) = run_capture(&["pendulum", "--omega", "1", "--theta0", "0", "--thetadot0", "2"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["case"], "Separatrix");

        let (code, _, _) = run_capture(&["pendulum", "--omega", "0"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn pendulum_lemma_witness() {
        // θ̇₀ = 4 at θ₀ = 0 gives I = 4, so k = ω/√I = √2/2.
        let omega = std::f64::consts::SQRT_2;
        let k = Modulus::new(omega / 2.0).unwrap();
        let ell = (4.0 * quarter_period(k).unwrap() / 2.0).to_string();
        let omega = omega.to_string();
        let (code, out, _) = run_capture(&[
            "pendulum", "--omega", &omega, "--theta0", "0", "--thetadot0", "4", "--length", &ell,
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        let lemma = &v["lemma_int"];
        assert!(lemma["halfangle_integrals"][0].as_f64().unwrap().abs() <= 1e-8);
        assert!(lemma["halfangle_integrals"][1].as_f64().unwrap().abs() <= 1e-8);
        assert!(lemma["sin_integral"].as_f64().unwrap().abs() <= 1e-8);
        assert!(lemma["period_multiple_defect"].as_f64().unwrap() <= 1e-8);
    }

    fn heisenberg_summary(args: &[&str]) -> Value {
        let (code, out, _) = run_capture(args);
        assert_eq!(code, 0);
        assert!(out.starts_with("t,x,y,z,w1,w2\n"));
        serde_json::from_str(out.lines().last().unwrap()).unwrap()
    }

    #[test]
    fn heisenberg_commands() {
        let s = heisenberg_summary(&["heisenberg", "--v0", "6.283185307179586", "--length", "1"]);
        assert!(s["defect"].as_f64().unwrap().abs() <= 1e-8);
        assert!(s["vertical_defect"].as_f64().unwrap() <= 1e-8);

        let s = heisenberg_summary(&["heisenberg", "--v0", "0", "--theta0", "0", "--length", "1"]);
        assert_eq!(s["defect"].as_f64(), Some(1.0));

        let s = heisenberg_summary(&["heisenberg", "--v0", "3.1415926", "--length", "1"]);
        assert!(s["vertical_defect"].as_f64().unwrap() > 0.1);

        let (code, _, _) = run_capture(&["heisenberg", "--v0", "1", "--length", "-1"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn sl2_range_guard() {
        let (code, out, _) = run_capture(&["sl2", "--tau", "0.5", "--format", "json"]);
        assert_eq!(code, 2);
        assert!(serde_json::from_str::<Value>(out.trim()).unwrap()["error"].is_object());
    }

    #[test]
    fn sl2_balanced_and_deterministic() {
        let args = ["sl2", "--tau", "0.05", "--eqdiff", "--format", "json"];
        let (code, out, _) = run_capture(&args);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["defect"].as_f64().unwrap().abs() <= 1e-6);
        assert!(v["endpoint_residual"].as_f64().unwrap() <= 1e-8);
        let fd = v["eqdiff_finite_difference"].as_f64().unwrap();
        let formula = v["eqdiff_formula"].as_f64().unwrap();
        assert!((fd - formula).abs() <= 1e-4);
        assert_eq!(run_capture(&args).1, out);
    }

    #[test]
    fn run_config_from_environment_file() {
        let cfg: RunConfig = serde_json::from_str(r#"{"tolerance": 1e-9, "format": "json"}"#).unwrap();
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.seed, RunConfig::default().seed);
        assert!(serde_json::from_str::<RunConfig>(r#"{"tolerence": 1}"#).is_err());
        assert!(RunConfig { tolerance: 0.0, ..RunConfig::default() }.validate().is_err());
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(Failure::from(Error::Domain("x".into())).code, 2);
        assert_eq!(Failure::from(Error::Consistency("x".into())).code, 1);
        assert_eq!(Failure::from(Error::SearchFailure { best_residuals: vec![] }).code, 3);
    }
}
