//! Batch front-end for the corner-gl pipeline.
//!
//! [`run`] resolves a [`RunConfig`], dispatches to one pipeline and writes a
//! report plus CSV tables into an output directory. Reports contain no
//! timestamps or timings, so identical configurations give identical files.

pub mod config;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use corner_gl::analysis::{
    agmon_fit_with, conjecture_sweep, gamma_sweep, splitting_diagnostic, trial_energy,
    trial_energy_discrete, trial_state, SweepSpec,
};
use corner_gl::costfn::{build_cost_function_with, d_ell_sensitivity, verify_f0_bound, verify_positivity};
use corner_gl::effective1d::{compute_ecorr, minimize_1d_with, Effective1DSolution, Grid1D};
use corner_gl::geometry::WedgeGeometry;
use corner_gl::glsolver::minimize_gl;
use corner_gl::mesh::generate_mesh;
use thiserror::Error;

pub use config::{Command, ConfigError, ResolvedConfig, RunConfig};
pub use report::{ErrorRecord, Output, Report, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{module}: {source}")]
    Pipeline {
        module: &'static str,
        #[source]
        source: corner_gl::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Exit status for the process: 2 for configuration errors, 3 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io { .. } => 3,
            RunError::Pipeline { .. } => 1,
        }
    }

    pub fn record(&self, config_hash: Option<String>) -> ErrorRecord {
        let (module, kind) = match self {
            RunError::Config(_) => ("config".to_string(), "ConfigError".to_string()),
            RunError::Io { .. } => ("io".to_string(), "IoError".to_string()),
            RunError::Pipeline { module, source } => (module.to_string(), source.kind().to_string()),
        };
        ErrorRecord { schema_version: SCHEMA_VERSION, module, kind, message: self.to_string(), config_hash }
    }
}

fn in_module<T>(module: &'static str, r: corner_gl::Result<T>) -> Result<T, RunError> {
    r.map_err(|source| RunError::Pipeline { module, source })
}

/// Computed report plus the tables that go next to it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    /// `(file name, contents)`.
    pub tables: Vec<(String, String)>,
}

fn solve_1d(cfg: &ResolvedConfig) -> Result<Effective1DSolution, RunError> {
    let grid = in_module("effective1d", Grid1D::new(cfg.ell, cfg.n))?;
    in_module("effective1d", minimize_1d_with(&grid, cfg.b, &cfg.solve1d_options()))
}

fn run_solve1d(cfg: &ResolvedConfig) -> Result<(Output, Vec<(String, String)>), RunError> {
    let sol = solve_1d(cfg)?;
    let ecorr_check = if sol.degenerate { None } else { Some(in_module("effective1d", compute_ecorr(&sol))?) };
    let quartic = sol.f0.quartic_integral();
    let energy_identity =
        if sol.e1d != 0.0 { (sol.e1d + quartic / (2.0 * cfg.b)).abs() / sol.e1d.abs() } else { 0.0 };
    let out = report::Solve1dOutput {
        alpha0: sol.alpha0,
        e1d: sol.e1d,
        ecorr: sol.ecorr,
        ecorr_check,
        t_max: sol.t_max,
        f0_at_0: sol.f0_at_0,
        degenerate: sol.degenerate,
        mu_min: sol.mu_min,
        alpha_moment: sol.alpha_moment,
        energy_identity,
        neumann: sol.f0.neumann_residuals(),
        newton_residual: sol.newton_residual,
        alpha_roots: sol.alpha_roots,
    };
    Ok((Output::Solve1d(out), vec![("profile.csv".into(), sol.profile_csv())]))
}

fn run_cost(cfg: &ResolvedConfig) -> Result<(Output, Vec<(String, String)>), RunError> {
    let sol = solve_1d(cfg)?;
    let data = in_module("costfn", build_cost_function_with(&sol, cfg.d_ell))?;
    let sensitivity =
        in_module("costfn", d_ell_sensitivity(&sol, &[0.1 * cfg.d_ell, cfg.d_ell, 10.0 * cfg.d_ell]))?;
    let out = report::CostOutput {
        alpha0: sol.alpha0,
        e1d: sol.e1d,
        ell_bar: data.ell_bar,
        representation_gap: data.representation_gap,
        positivity: verify_positivity(&data),
        f0_bound: verify_f0_bound(&data),
        d_ell_sensitivity: sensitivity,
    };
    Ok((Output::Cost(out), vec![("cost.csv".into(), data.csv())]))
}

fn geometry(cfg: &ResolvedConfig) -> Result<WedgeGeometry, RunError> {
    in_module("geometry", WedgeGeometry::new(cfg.beta, cfg.l, cfg.ell, cfg.gamma))
}

fn run_solve2d(cfg: &ResolvedConfig) -> Result<(Output, Vec<(String, String)>), RunError> {
    let sol = solve_1d(cfg)?;
    let geom = geometry(cfg)?;
    let mesh = in_module("geometry", generate_mesh(&geom, cfg.h))?;
    let trial = in_module("analysis", trial_state(&geom, &sol, cfg.gamma))?;
    let e_trial = in_module("analysis", trial_energy(&trial, &mesh, cfg.b))?;
    let e_trial_discrete = in_module("analysis", trial_energy_discrete(&trial, &mesh, cfg.b))?;
    let (field, corner) = in_module("glsolver", minimize_gl(&geom, &mesh, &sol, cfg.b, &cfg.gl_options()))?;
    let (splitting, splitting_error) = match splitting_diagnostic(&field, &geom, &mesh, &sol, cfg.b) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (decay, decay_error) = match agmon_fit_with(&field, &geom, &mesh, &sol, cfg.d_ell) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut tables = Vec::new();
    if cfg.output.checkpoint {
        tables.push(("field.csv".to_string(), field.checkpoint()));
    }
    if cfg.output.vtk {
        tables.push(("mesh.vtk".to_string(), mesh.to_vtk(Some(&field.values))));
    }
    let out = report::Solve2dOutput {
        corner,
        e_trial,
        e_trial_discrete,
        conjecture: -cfg.deficit * sol.ecorr.unwrap_or(f64::NAN),
        splitting,
        splitting_error,
        decay,
        decay_error,
    };
    Ok((Output::Solve2d(Box::new(out)), tables))
}

fn run_trial(cfg: &ResolvedConfig) -> Result<(Output, Vec<(String, String)>), RunError> {
    let sol = solve_1d(cfg)?;
    let geom = geometry(cfg)?;
    let mesh = in_module("geometry", generate_mesh(&geom, cfg.h))?;
    let trial = in_module("analysis", trial_state(&geom, &sol, cfg.gamma))?;
    let e_trial = in_module("analysis", trial_energy(&trial, &mesh, cfg.b))?;
    let e_trial_discrete = in_module("analysis", trial_energy_discrete(&trial, &mesh, cfg.b))?;
    let gamma_scan = in_module("analysis", gamma_sweep(&geom, &mesh, &sol, &cfg.trial.gammas))?;
    let mut scan_csv = String::from("gamma,e_trial\n");
    for (g, e) in &gamma_scan {
        scan_csv.push_str(&format!("{g:.16e},{e:.16e}\n"));
    }
    let out = report::TrialOutput {
        beta: cfg.beta,
        gamma: cfg.gamma,
        e_trial,
        e_trial_discrete,
        e_trial_corner: e_trial - 2.0 * cfg.l * sol.e1d,
        conjecture: -cfg.deficit * sol.ecorr.unwrap_or(f64::NAN),
        phase_mismatch: trial.phase_mismatch(64),
        gamma_scan,
        n_nodes: mesh.nodes.len(),
    };
    Ok((Output::Trial(out), vec![("gamma_scan.csv".into(), scan_csv)]))
}

fn fit_csv(report: &corner_gl::analysis::SweepReport) -> String {
    let mut s = String::from("sides,slope,reference,rel_error,points\n");
    for (name, fit) in [("both", &report.fit), ("minus", &report.fit_minus), ("plus", &report.fit_plus)] {
        if let Some(f) = fit {
            s.push_str(&format!(
                "{name},{:.16e},{:.16e},{:.16e},{}\n",
                f.slope, f.reference, f.rel_error, f.points
            ));
        }
    }
    s
}

fn run_sweep(cfg: &ResolvedConfig) -> Result<(Output, Vec<(String, String)>), RunError> {
    let sol = solve_1d(cfg)?;
    let spec = SweepSpec {
        b: cfg.b,
        deltas: cfg.sweep.deltas.clone(),
        sides: cfg.sweep.sides.clone(),
        l: cfg.l,
        ell: cfg.ell,
        h: cfg.h,
    };
    let report = in_module("analysis", conjecture_sweep(&spec, &sol, &cfg.gl_options()))?;
    let tables = vec![
        ("sweep.csv".to_string(), report.csv()),
        ("sweep_fit.csv".to_string(), fit_csv(&report)),
        ("sweep_plot.dat".to_string(), report.plot_data()),
    ];
    Ok((Output::Sweep(report), tables))
}

/// Runs the pipeline without touching the file system.
pub fn compute(cfg: &ResolvedConfig) -> Result<RunOutput, RunError> {
    log::info!("running {} (b = {}, ell = {}, beta = {})", cfg.command.name(), cfg.b, cfg.ell, cfg.beta);
    let (result, tables) = match cfg.command {
        Command::Solve1d => run_solve1d(cfg)?,
        Command::Cost => run_cost(cfg)?,
        Command::Solve2d => run_solve2d(cfg)?,
        Command::Trial => run_trial(cfg)?,
        Command::Sweep => run_sweep(cfg)?,
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: cfg.command,
        config_hash: report::config_hash(cfg),
        versions: report::Versions::current(),
        config: cfg.clone(),
        provenance: report::Provenance::of(cfg),
        result,
        tables: tables.iter().map(|(name, _)| name.clone()).collect(),
    };
    Ok(RunOutput { report, tables })
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, RunError> {
    fs::write(&path, contents).map_err(|source| RunError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Writes the report (`report.json` or `report.csv`) and the tables into `out`.
pub fn emit_report(output: &RunOutput, out: &Path, format: Format) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(out).map_err(|source| RunError::Io { path: out.to_path_buf(), source })?;
    let serialized = match format {
        Format::Json => ("report.json", report::to_json(&output.report)),
        Format::Csv => ("report.csv", report::to_csv(&output.report)),
    };
    let text = serialized.1.map_err(|e| RunError::Io { path: out.join(serialized.0), source: e.into() })?;
    let mut files = vec![write(out.join(serialized.0), &text)?];
    for (name, contents) in &output.tables {
        files.push(write(out.join(name), contents)?);
    }
    Ok(files)
}

/// Resolves, computes and writes. On failure an `error.json` record is
/// written to `out` (when possible) and the error is returned.
pub fn run(config: &RunConfig, command: Option<Command>, out: &Path, format: Format) -> Result<Vec<PathBuf>, RunError> {
    let mut hash = None;
    let result = config.resolve(command).map_err(RunError::from).and_then(|cfg| {
        hash = Some(report::config_hash(&cfg));
        let output = compute(&cfg)?;
        emit_report(&output, out, format)
    });
    match &result {
        Ok(_) => {
            let _ = fs::remove_file(out.join("error.json"));
        }
        Err(e) => write_error_record_with(e, hash, out),
    }
    result
}

/// Writes `error.json` into `out`, ignoring secondary failures.
pub fn write_error_record(e: &RunError, out: &Path) {
    write_error_record_with(e, None, out)
}

fn write_error_record_with(e: &RunError, hash: Option<String>, out: &Path) {
    if fs::create_dir_all(out).is_ok() {
        if let Ok(text) = report::to_json(&e.record(hash)) {
            let _ = fs::write(out.join("error.json"), text);
        }
    }
}
