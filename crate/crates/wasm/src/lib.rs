//! JavaScript bindings for a small browser demo.
//!
//! Every export takes plain numbers and returns a JSON string; failures are
//! returned as `{"error": "..."}` so the functions also run natively.

use std::f64::consts::PI;

use corner_gl::analysis::{trial_energy, trial_state};
use corner_gl::effective1d::{minimize_1d, Effective1DSolution, Grid1D};
use corner_gl::geometry::WedgeGeometry;
use corner_gl::glsolver::{default_gamma, minimize_gl, GlOptions, MultiStart};
use corner_gl::mesh::generate_mesh;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Coarser than the CLI default; the demo favours responsiveness.
const DEMO_NODES: usize = 513;

#[derive(Serialize)]
struct Profile {
    alpha0: f64,
    e1d: f64,
    ecorr: Option<f64>,
    t: Vec<f64>,
    f0: Vec<f64>,
}

#[derive(Serialize)]
struct Trial {
    beta: f64,
    gamma: f64,
    e_trial: f64,
    e_trial_corner: f64,
    conjecture: f64,
}

#[derive(Serialize)]
struct Wedge {
    beta: f64,
    e_gamma: f64,
    e_corner: f64,
    conjecture: f64,
    iterations: usize,
    converged: bool,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    modulus: Vec<f64>,
}

fn json<T: Serialize>(r: corner_gl::Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error(&e.to_string())),
        Err(e) => error(&e.to_string()),
    }
}

fn error(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

fn solve(b: f64, ell: f64) -> corner_gl::Result<Effective1DSolution> {
    minimize_1d(&Grid1D::new(ell, DEMO_NODES)?, b)
}

/// 1D profile `f₀` with `α₀`, `E¹ᴰ` and `E_corr`.
#[wasm_bindgen]
pub fn profile_1d(b: f64, ell: f64) -> String {
    json(solve(b, ell).map(|s| Profile {
        alpha0: s.alpha0,
        e1d: s.e1d,
        ecorr: s.ecorr,
        t: s.f0.grid.nodes(),
        f0: s.f0.values.clone(),
    }))
}

/// Trial-state corner energy at `β = π − deficit` with `γ = |deficit|^{2/3}`.
#[wasm_bindgen]
pub fn wedge_trial(b: f64, deficit: f64, h: f64) -> String {
    json((|| {
        let (l, ell) = (8.0, 6.0);
        let sol = solve(b, ell)?;
        let gamma = default_gamma(deficit.abs());
        let geom = WedgeGeometry::new(PI - deficit, l, ell, gamma)?;
        let mesh = generate_mesh(&geom, h)?;
        let e_trial = trial_energy(&trial_state(&geom, &sol, gamma)?, &mesh, b)?;
        Ok(Trial {
            beta: geom.beta,
            gamma,
            e_trial,
            e_trial_corner: e_trial - 2.0 * l * sol.e1d,
            conjecture: -deficit * sol.ecorr.unwrap_or(f64::NAN),
        })
    })())
}

/// Minimizes the wedge energy and returns the mesh with `|ψ|` for drawing.
#[wasm_bindgen]
pub fn minimize_wedge(b: f64, deficit: f64, h: f64) -> String {
    json((|| {
        let (l, ell) = (8.0, 6.0);
        let sol = solve(b, ell)?;
        let geom = WedgeGeometry::new(PI - deficit, l, ell, default_gamma(deficit.abs()))?;
        let mesh = generate_mesh(&geom, h)?;
        let opts = GlOptions { multistart: MultiStart::Never, tol: 1e-6, ..GlOptions::default() };
        let (field, r) = minimize_gl(&geom, &mesh, &sol, b, &opts)?;
        Ok(Wedge {
            beta: r.beta,
            e_gamma: r.e_gamma,
            e_corner: r.e_corner,
            conjecture: -deficit * sol.ecorr.unwrap_or(f64::NAN),
            iterations: r.iterations,
            converged: r.converged,
            nodes: mesh.nodes.clone(),
            triangles: mesh.triangles.clone(),
            modulus: field.values.iter().map(|z| z.norm()).collect(),
        })
    })())
}
