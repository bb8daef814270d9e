//! Report schema and serialization.

use std::io;

use corner_gl::analysis::{DecayFit, SplittingReport, SweepReport};
use corner_gl::costfn::{BoundReport, PositivityReport};
use corner_gl::effective1d::EcorrReport;
use corner_gl::glsolver::CornerEnergyResult;
use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::Formatter;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{Command, ResolvedConfig};

/// Bumped whenever a field of [`Report`] changes meaning or is removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct Versions {
    pub corner_gl: String,
    pub corner_gl_cli: String,
}

impl Versions {
    pub fn current() -> Self {
        Versions { corner_gl: corner_gl::VERSION.into(), corner_gl_cli: env!("CARGO_PKG_VERSION").into() }
    }
}

/// Every numerical choice that affects the results.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct Provenance {
    pub d_ell: f64,
    pub gamma: f64,
    /// `upper`, `lower`, or `explicit` when `gamma` was given.
    pub gamma_choice: String,
    pub h: f64,
    pub n: usize,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub alpha_tol: f64,
    pub gl_tol: f64,
    pub gl_max_iter: usize,
    pub multistart_rel: f64,
    pub multistart_abs: f64,
    pub positivity_slack: f64,
    pub f0_floor_rel: f64,
}

impl Provenance {
    pub fn of(cfg: &ResolvedConfig) -> Self {
        Provenance {
            d_ell: cfg.d_ell,
            gamma: cfg.gamma,
            gamma_choice: match cfg.gamma_rule {
                Some(r) => serde_json::to_value(r).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                None => "explicit".into(),
            },
            h: cfg.h,
            n: cfg.n,
            tolerances: Tolerances {
                newton_tol: cfg.newton.tol,
                newton_max_iter: cfg.newton.max_iter,
                alpha_tol: cfg.newton.alpha_tol,
                gl_tol: cfg.solver.tol,
                gl_max_iter: cfg.solver.max_iter,
                multistart_rel: cfg.solver.multistart_rel,
                multistart_abs: cfg.solver.multistart_abs,
                positivity_slack: corner_gl::costfn::POSITIVITY_SLACK,
                f0_floor_rel: corner_gl::analysis::F0_FLOOR_REL,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct Solve1dOutput {
    pub alpha0: f64,
    pub e1d: f64,
    pub ecorr: Option<f64>,
    pub ecorr_check: Option<EcorrReport>,
    pub t_max: f64,
    pub f0_at_0: f64,
    pub degenerate: bool,
    pub mu_min: f64,
    /// `∫ (t+α₀) f₀²`.
    pub alpha_moment: f64,
    /// `|e1d + (1/2b)∫f₀⁴| / |e1d|`.
    pub energy_identity: f64,
    pub neumann: (f64, f64),
    pub newton_residual: f64,
    pub alpha_roots: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct CostOutput {
    pub alpha0: f64,
    pub e1d: f64,
    pub ell_bar: f64,
    pub representation_gap: f64,
    pub positivity: PositivityReport,
    pub f0_bound: BoundReport,
    /// `(d_ℓ, min K₀)` for `d_ℓ` scaled by 0.1, 1 and 10.
    pub d_ell_sensitivity: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct Solve2dOutput {
    pub corner: CornerEnergyResult,
    pub e_trial: f64,
    pub e_trial_discrete: f64,
    pub conjecture: f64,
    pub splitting: Option<SplittingReport>,
    pub splitting_error: Option<String>,
    pub decay: Option<DecayFit>,
    pub decay_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct TrialOutput {
    pub beta: f64,
    pub gamma: f64,
    /// Energy of the trial state by quadrature.
    pub e_trial: f64,
    /// Solver energy of the trial state interpolated on the mesh.
    pub e_trial_discrete: f64,
    /// `e_trial − 2L·E¹ᴰ₀(ℓ)`.
    pub e_trial_corner: f64,
    pub conjecture: f64,
    /// Largest phase mismatch across the bisectrix, modulo 2π.
    pub phase_mismatch: f64,
    /// `(γ, e_trial)` for the configured scan.
    pub gamma_scan: Vec<(f64, f64)>,
    pub n_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Solve1d(Solve1dOutput),
    Cost(CostOutput),
    Solve2d(Box<Solve2dOutput>),
    Trial(TrialOutput),
    Sweep(SweepReport),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Command,
    pub config_hash: String,
    pub versions: Versions,
    pub config: ResolvedConfig,
    pub provenance: Provenance,
    pub result: Output,
    /// Table files written next to the report.
    pub tables: Vec<String>,
}

/// Machine-readable failure record.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct ErrorRecord {
    pub schema_version: u32,
    /// `config`, `io`, or the library module that failed.
    pub module: String,
    pub kind: String,
    pub message: String,
    pub config_hash: Option<String>,
}

/// Prints every float in scientific notation with 17 significant digits.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Serializes with [`FixedDigits`]; non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// SHA-256 of the canonical JSON of the resolved configuration.
pub fn config_hash(cfg: &ResolvedConfig) -> String {
    let json = to_json(cfg).expect("configuration serializes");
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => rows.push((
            prefix.to_string(),
            n.as_f64().filter(|_| n.is_f64()).map_or_else(|| n.to_string(), |x| format!("{x:.16e}")),
        )),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The report as `key,value` rows with dotted keys.
pub fn to_csv(report: &Report) -> serde_json::Result<String> {
    let value = serde_json::to_value(report)?;
    let mut rows = Vec::new();
    flatten("", &value, &mut rows);
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&v)));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        let s = to_json(&vec![0.1, 1.0 / 3.0, -2.5e-300, f64::NAN]).unwrap();
        assert_eq!(s.trim(), "[1.0000000000000001e-1,3.3333333333333331e-1,-2.5000000000000000e-300,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[..3], [Some(0.1), Some(1.0 / 3.0), Some(-2.5e-300)]);
        assert_eq!(back[3], None);
    }

    #[test]
    fn csv_flattening() {
        let mut rows = Vec::new();
        flatten("", &serde_json::json!({"a": {"b": [1, 2.5]}, "c": "x,y", "d": null}), &mut rows);
        assert_eq!(rows[0], ("a.b.0".to_string(), "1".to_string()));
        assert_eq!(rows[1], ("a.b.1".to_string(), "2.5000000000000000e0".to_string()));
        assert_eq!(csv_field(&rows[2].1), "\"x,y\"");
        assert_eq!(rows[3].1, "");
    }
}
