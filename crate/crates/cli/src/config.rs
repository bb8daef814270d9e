//! Run configuration read from TOML.
//!
//! Every field has a default, so an empty file is a valid configuration.
//! The defaults are:
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `command` | none | pipeline to run; the subcommand on the command line overrides it |
//! | `b` | 1.5 | applied field, must lie in `(1, 1/Θ₀)` |
//! | `ell` | 10 for `solve1d`/`cost`, 6 otherwise | boundary-layer width `ℓ` |
//! | `n` | 2048 | 1D grid nodes |
//! | `L` | 8 | wedge side length |
//! | `beta` | π unless `delta` is given | opening angle |
//! | `delta`, `side` | none, `minus` | deficit form, `β = π ∓ δ` |
//! | `gamma` | from `gamma_rule` | transition half-width of the trial state |
//! | `gamma_rule` | `upper` | `upper`: `δ^{2/3}`, `lower`: `δ^{2/3}·log²δ` |
//! | `h` | 0.1 | mesh size |
//! | `d_ell` | `ℓ⁻⁴` | cost-function threshold |
//! | `seed` | 0 | seed of the perturbed starting state |
//! | `[newton]` | `tol = 1e-11`, `max_iter = 200`, `alpha_tol = 1e-12` | 1D solver |
//! | `[solver]` | `tol = 1e-8`, `max_iter = 50000`, `initial = "trial"`, `multistart = "auto"`, `multistart_rel = 0.5`, `multistart_abs = 5e-3`, `perturbation = 0.05` | 2D solver |
//! | `[sweep]` | `deltas = [0.1, 0.15, 0.2, 0.25]`, `sides = ["minus", "plus"]` | sweep rows |
//! | `[trial]` | `gammas = []` | extra `γ` values for a trial-energy scan |
//! | `[output]` | `checkpoint = true`, `vtk = false` | optional field and mesh files |

use std::f64::consts::PI;
use std::path::Path;

use corner_gl::costfn::default_d_ell;
use corner_gl::effective1d::{Solve1dOptions, THETA0};
use corner_gl::geometry::Side;
use corner_gl::glsolver::{default_gamma, lower_bound_gamma, GlOptions, InitialGuess, MultiStart};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("{field} = {value} outside {range}")]
    OutOfRange { field: &'static str, value: String, range: String },
    #[error("{0}")]
    Inconsistent(String),
    #[error("no command given")]
    MissingCommand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve1d,
    Cost,
    Solve2d,
    Trial,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve1d => "solve1d",
            Command::Cost => "cost",
            Command::Solve2d => "solve2d",
            Command::Trial => "trial",
            Command::Sweep => "sweep",
        }
    }

    fn is_1d(self) -> bool {
        matches!(self, Command::Solve1d | Command::Cost)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaRule {
    Upper,
    Lower,
}

impl GammaRule {
    pub fn gamma(self, delta: f64) -> f64 {
        match self {
            GammaRule::Upper => default_gamma(delta),
            GammaRule::Lower => lower_bound_gamma(delta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub alpha_tol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        let d = Solve1dOptions::default();
        NewtonConfig { tol: d.newton_tol, max_iter: d.max_newton, alpha_tol: d.alpha_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialGuess,
    pub multistart: MultiStart,
    pub multistart_rel: f64,
    pub multistart_abs: f64,
    pub perturbation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = GlOptions::default();
        SolverConfig {
            tol: d.tol,
            max_iter: d.max_iter,
            initial: d.initial,
            multistart: d.multistart,
            multistart_rel: d.multistart_rel,
            multistart_abs: d.multistart_abs,
            perturbation: d.perturbation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub deltas: Vec<f64>,
    pub sides: Vec<Side>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { deltas: vec![0.1, 0.15, 0.2, 0.25], sides: vec![Side::Minus, Side::Plus] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub checkpoint: bool,
    pub vtk: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { checkpoint: true, vtk: false }
    }
}

/// Configuration as written by the user; optional fields are filled in by [`RunConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub b: f64,
    pub ell: Option<f64>,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub side: Option<Side>,
    pub gamma: Option<f64>,
    pub gamma_rule: GammaRule,
    pub h: f64,
    pub d_ell: Option<f64>,
    pub seed: u64,
    pub newton: NewtonConfig,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub trial: TrialConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            b: 1.5,
            ell: None,
            n: 2048,
            l: 8.0,
            beta: None,
            delta: None,
            side: None,
            gamma: None,
            gamma_rule: GammaRule::Upper,
            h: 0.1,
            d_ell: None,
            seed: 0,
            newton: NewtonConfig::default(),
            solver: SolverConfig::default(),
            sweep: SweepConfig::default(),
            trial: TrialConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Fully specified configuration; this is what the config hash covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub command: Command,
    pub b: f64,
    pub ell: f64,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub beta: f64,
    /// Signed deficit `π − β`.
    pub deficit: f64,
    pub gamma: f64,
    pub gamma_rule: Option<GammaRule>,
    pub h: f64,
    pub d_ell: f64,
    pub seed: u64,
    pub newton: NewtonConfig,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub trial: TrialConfig,
    pub output: OutputConfig,
}

impl ResolvedConfig {
    pub fn solve1d_options(&self) -> Solve1dOptions {
        Solve1dOptions {
            newton_tol: self.newton.tol,
            max_newton: self.newton.max_iter,
            alpha_tol: self.newton.alpha_tol,
            ..Solve1dOptions::default()
        }
    }

    /// Solver options; `gamma` is left to each sweep row when the rule applies.
    pub fn gl_options(&self) -> GlOptions {
        let s = &self.solver;
        GlOptions {
            tol: s.tol,
            max_iter: s.max_iter,
            initial: s.initial,
            multistart: s.multistart,
            multistart_rel: s.multistart_rel,
            multistart_abs: s.multistart_abs,
            perturbation: s.perturbation,
            seed: self.seed,
            gamma: if self.command == Command::Sweep && self.gamma_rule.is_some() {
                None
            } else {
                Some(self.gamma)
            },
        }
    }
}

fn out_of_range(field: &'static str, value: impl ToString, range: impl Into<String>) -> ConfigError {
    ConfigError::OutOfRange { field, value: value.to_string(), range: range.into() }
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(out_of_range(field, v, "(0, ∞)"))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    /// Validates every range and fills in defaults that depend on the command.
    pub fn resolve(&self, command: Option<Command>) -> Result<ResolvedConfig, ConfigError> {
        let command = command.or(self.command).ok_or(ConfigError::MissingCommand)?;
        let b_max = 1.0 / THETA0;
        if !(self.b > 1.0 && self.b < b_max) {
            return Err(out_of_range("b", self.b, format!("(1, 1/Θ₀) = (1, {b_max:.6})")));
        }
        let ell = self.ell.unwrap_or(if command.is_1d() { 10.0 } else { 6.0 });
        if !(4.0..=64.0).contains(&ell) {
            return Err(out_of_range("ell", ell, "[4, 64]"));
        }
        if !(64..=1 << 20).contains(&self.n) {
            return Err(out_of_range("n", self.n, "[64, 1048576]"));
        }
        positive("L", self.l)?;
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(out_of_range("h", self.h, "(0, 1]"));
        }
        let d_ell = self.d_ell.unwrap_or_else(|| default_d_ell(ell));
        positive("d_ell", d_ell)?;
        positive("newton.tol", self.newton.tol)?;
        positive("newton.alpha_tol", self.newton.alpha_tol)?;
        positive("solver.tol", self.solver.tol)?;
        if self.newton.max_iter == 0 || self.solver.max_iter == 0 {
            return Err(ConfigError::Inconsistent("iteration limits must be positive".into()));
        }
        positive("solver.multistart_rel", self.solver.multistart_rel)?;
        if !(self.solver.multistart_abs >= 0.0) {
            return Err(out_of_range("solver.multistart_abs", self.solver.multistart_abs, "[0, ∞)"));
        }
        if !(0.0..1.0).contains(&self.solver.perturbation) {
            return Err(out_of_range("solver.perturbation", self.solver.perturbation, "[0, 1)"));
        }

        let beta = match (self.beta, self.delta) {
            (Some(_), Some(_)) => return Err(ConfigError::Inconsistent("give either beta or delta, not both".into())),
            (Some(beta), None) => {
                if self.side.is_some() {
                    return Err(ConfigError::Inconsistent("side only applies together with delta".into()));
                }
                if !(beta > 0.0 && beta < 2.0 * PI) {
                    return Err(out_of_range("beta", beta, "(0, 2π)"));
                }
                beta
            }
            (None, Some(delta)) => {
                if !(0.0..=0.4).contains(&delta) {
                    return Err(out_of_range("delta", delta, "[0, 0.4]"));
                }
                PI + self.side.unwrap_or(Side::Minus).sign() * delta
            }
            (None, None) => PI,
        };
        let deficit = PI - beta;
        let (gamma, gamma_rule) = match self.gamma {
            Some(g) if g >= 0.0 && g.is_finite() => (g, None),
            Some(g) => return Err(out_of_range("gamma", g, "[0, ∞)")),
            None => (self.gamma_rule.gamma(deficit.abs()), Some(self.gamma_rule)),
        };
        if let Some(&g) = self.trial.gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(out_of_range("trial.gammas", g, "[0, ∞)"));
        }
        if command == Command::Sweep {
            if let Some(&d) = self.sweep.deltas.iter().find(|d| !(0.0..=0.4).contains(*d)) {
                return Err(out_of_range("sweep.deltas", d, "[0, 0.4]"));
            }
            if self.sweep.sides.is_empty() && !self.sweep.deltas.is_empty() {
                return Err(ConfigError::Inconsistent("sweep.sides is empty".into()));
            }
        }
        Ok(ResolvedConfig {
            command,
            b: self.b,
            ell,
            n: self.n,
            l: self.l,
            beta,
            deficit,
            gamma,
            gamma_rule,
            h: self.h,
            d_ell,
            seed: self.seed,
            newton: self.newton.clone(),
            solver: self.solver.clone(),
            sweep: self.sweep.clone(),
            trial: self.trial.clone(),
            output: self.output.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_uses_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        let r = c.resolve(Some(Command::Solve1d)).unwrap();
        assert_eq!(r.ell, 10.0);
        assert_eq!(r.beta, PI);
        assert_eq!(r.gamma, 0.0);
        assert_eq!(c.resolve(Some(Command::Solve2d)).unwrap().ell, 6.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_toml("bb = 1.5"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn deficit_form() {
        let c = RunConfig::from_toml("delta = 0.2\nside = \"plus\"\ngamma_rule = \"lower\"").unwrap();
        let r = c.resolve(Some(Command::Trial)).unwrap();
        assert!((r.beta - PI - 0.2).abs() < 1e-15);
        assert!((r.gamma - lower_bound_gamma(0.2)).abs() < 1e-15);
        let both = RunConfig::from_toml("delta = 0.2\nbeta = 3.0").unwrap();
        assert!(matches!(both.resolve(Some(Command::Trial)), Err(ConfigError::Inconsistent(_))));
    }

    #[test]
    fn ranges() {
        let bad = |text: &str| RunConfig::from_toml(text).unwrap().resolve(Some(Command::Sweep)).unwrap_err();
        assert!(matches!(bad("b = 1.0"), ConfigError::OutOfRange { field: "b", .. }));
        assert!(matches!(bad("b = 1.7"), ConfigError::OutOfRange { field: "b", .. }));
        assert!(matches!(bad("h = 0"), ConfigError::OutOfRange { field: "h", .. }));
        assert!(matches!(bad("[sweep]\ndeltas = [0.5]"), ConfigError::OutOfRange { field: "sweep.deltas", .. }));
        assert!(matches!(bad("ell = 2"), ConfigError::OutOfRange { field: "ell", .. }));
        let missing = RunConfig::default().resolve(None).unwrap_err();
        assert!(matches!(missing, ConfigError::MissingCommand));
    }
}
