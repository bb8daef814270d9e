//! Corner-specific diagnostics: the glued trial state, the energy splitting,
//! Agmon decay fits and the sweep of corner energies over small deficits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costfn::{build_cost_function_with, default_d_ell};
use crate::effective1d::Effective1DSolution;
use crate::error::{Error, Result};
use crate::geometry::{Patch, PatchCoords, Point, PolarCoords, Side, WedgeGeometry};
use crate::glsolver::{default_gamma, gl_energy, minimize_gl, psi_star, ComplexField, GlOptions, GlProblem};
use crate::mesh::{generate_mesh, Mesh};

/// `f₀ e^{iΦ±}` away from the bisectrix, `f₀ e^{iΞ}` in the transition sectors
/// `ϑ_< ≤ ϑ ≤ ϑ_>`, where `Ξ` interpolates linearly in `ϑ` between the two
/// phases. The modulus is always `f₀` of the patch normal coordinate.
#[derive(Debug, Clone)]
pub struct TrialState {
    pub geom: WedgeGeometry,
    pub sol1d: Effective1DSolution,
    pub gamma: f64,
}

/// `Φ = −α₀s − st/2`.
pub fn patch_phase(alpha0: f64, pc: PatchCoords) -> f64 {
    -alpha0 * pc.s - 0.5 * pc.s * pc.t
}

impl TrialState {
    pub fn new(geom: WedgeGeometry, sol1d: Effective1DSolution, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma < geom.beta / 2.0) {
            return Err(Error::InvalidGeometry(format!("gamma = {gamma} outside [0, β/2)")));
        }
        let mut geom = geom;
        geom.gamma = gamma;
        geom.theta_lt = (geom.beta - gamma) / 2.0;
        geom.theta_gt = (geom.beta + gamma) / 2.0;
        Ok(TrialState { geom, sol1d, gamma })
    }

    /// `Ξ(ρ, ϑ)`.
    pub fn xi(&self, pol: PolarCoords) -> f64 {
        let g = &self.geom;
        let dg = g.deficit + self.gamma;
        let amp = self.sol1d.alpha0 * pol.rho * (0.5 * dg).sin() + 0.25 * pol.rho * pol.rho * dg.sin();
        if self.gamma == 0.0 {
            return 0.0;
        }
        amp * (2.0 * pol.theta - g.theta_lt - g.theta_gt) / self.gamma
    }

    fn in_transition(&self, pol: PolarCoords) -> bool {
        self.gamma > 0.0 && pol.theta >= self.geom.theta_lt && pol.theta <= self.geom.theta_gt
    }

    /// Phase of the trial state.
    pub fn phase(&self, p: Point) -> Result<f64> {
        let (pc, pol) = self.geom.map_coordinates(p)?;
        Ok(if self.in_transition(pol) { self.xi(pol) } else { patch_phase(self.sol1d.alpha0, pc) })
    }

    pub fn eval(&self, p: Point) -> Result<Complex64> {
        let (pc, pol) = self.geom.map_coordinates(p)?;
        let phase = if self.in_transition(pol) { self.xi(pol) } else { patch_phase(self.sol1d.alpha0, pc) };
        Ok(Complex64::from_polar(self.sol1d.f0.eval(pc.t), phase))
    }

    /// Largest `|Ξ − Φ±|` over `samples` points on each of the rays `ϑ_<` and `ϑ_>`.
    pub fn phase_mismatch(&self, samples: usize) -> f64 {
        let g = &self.geom;
        let a = self.sol1d.alpha0;
        let mut worst = 0.0f64;
        for (theta, patch) in [(g.theta_lt, Patch::Plus), (g.theta_gt, Patch::Minus)] {
            // Keep the samples inside the layer t ≤ ℓ of the patch.
            let phi = match patch {
                Patch::Plus => theta,
                Patch::Minus => theta + g.deficit,
            };
            let rho_max = (g.ell / phi.sin().abs().max(1e-12)).min(g.l);
            for k in 0..=samples {
                let pol = PolarCoords { rho: rho_max * k as f64 / samples as f64, theta };
                let pc = g.polar_to_patch(patch, pol);
                worst = worst.max((self.xi(pol) - patch_phase(a, pc)).abs());
            }
        }
        worst
    }
}

pub fn trial_state(geom: &WedgeGeometry, sol1d: &Effective1DSolution, gamma: f64) -> Result<TrialState> {
    TrialState::new(geom.clone(), sol1d.clone(), gamma)
}

/// Nodal values of the trial state with the Dirichlet data imposed.
pub fn trial_field(trial: &TrialState, mesh: &Mesh, problem: &GlProblem) -> Result<ComplexField> {
    let values = mesh.nodes.iter().map(|&p| trial.eval(p)).collect::<Result<Vec<_>>>()?;
    let mut field = ComplexField { values };
    problem.impose(&mut field);
    Ok(field)
}

/// `G[ψ_trial; Γ]` by element quadrature of the exact trial state.
///
/// Triangles cut by the rays `ϑ_<`, `ϑ_>` are subdivided so that the kink of
/// the phase is resolved.
pub fn trial_energy(trial: &TrialState, mesh: &Mesh, b: f64) -> Result<f64> {
    let mut total = 0.0;
    for tri in &mesh.triangles {
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let depth = if trial.straddles(&p) { 4 } else { 0 };
        total += trial.integrate_triangle(p, depth, b)?;
    }
    Ok(total)
}

/// Discrete (solver) energy of the nodal interpolant of the trial state.
pub fn trial_energy_discrete(trial: &TrialState, mesh: &Mesh, b: f64) -> Result<f64> {
    let problem = GlProblem::new(mesh, b).with_boundary_data(mesh, &trial.sol1d);
    Ok(gl_energy(&problem, &trial_field(trial, mesh, &problem)?).total)
}

impl TrialState {
    /// Pointwise `|(∇ + iF)ψ|² − (1/2b)(2|ψ|² − |ψ|⁴)`.
    fn density(&self, q: Point, b: f64) -> Result<f64> {
        let (pc, pol) = self.geom.map_coordinates(q)?;
        let (f, df) = self.sol1d.f0.eval_with_derivative(pc.t);
        let a = self.sol1d.alpha0;
        let current2 = if self.in_transition(pol) {
            let c = self.geom.deficit + self.gamma;
            let rho = pol.rho;
            let amp = a * rho * (0.5 * c).sin() + 0.25 * rho * rho * c.sin();
            let damp = a * (0.5 * c).sin() + 0.5 * rho * c.sin();
            let w = (2.0 * pol.theta - self.geom.theta_lt - self.geom.theta_gt) / self.gamma;
            // Polar components of ∇Ξ + F, with F·ê_ϑ = ρ/2.
            let radial = damp * w;
            let angular = if rho > 0.0 { 2.0 * amp / (self.gamma * rho) + 0.5 * rho } else { 2.0 * a * (0.5 * c).sin() / self.gamma };
            radial * radial + angular * angular
        } else {
            (pc.t + a).powi(2)
        };
        let f2 = f * f;
        Ok(df * df + f2 * current2 - (2.0 * f2 - f2 * f2) / (2.0 * b))
    }

    fn straddles(&self, p: &[Point; 3]) -> bool {
        if self.gamma == 0.0 {
            return false;
        }
        let th: Vec<f64> = p.iter().map(|q| self.geom.polar(*q).theta).collect();
        let lo = th.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = th.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let at_vertex = p.iter().any(|q| q[0] == 0.0 && q[1] == 0.0);
        at_vertex || [self.geom.theta_lt, self.geom.theta_gt].iter().any(|&r| lo <= r && r <= hi)
    }

    fn integrate_triangle(&self, p: [Point; 3], depth: u32, b: f64) -> Result<f64> {
        if depth > 0 {
            let mid = |x: Point, y: Point| [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])];
            let (m01, m12, m20) = (mid(p[0], p[1]), mid(p[1], p[2]), mid(p[2], p[0]));
            return Ok(self.integrate_triangle([p[0], m01, m20], depth - 1, b)?
                + self.integrate_triangle([m01, p[1], m12], depth - 1, b)?
                + self.integrate_triangle([m20, m12, p[2]], depth - 1, b)?
                + self.integrate_triangle([m01, m12, m20], depth - 1, b)?);
        }
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0])).abs();
        let mut s = 0.0;
        for (bary, w) in TRI_RULE {
            let q = [
                bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
                bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
            ];
            s += w * self.density(q, b)?;
        }
        Ok(s * area)
    }
}

/// Trial energies over a list of transition half-widths, as `(γ, energy)` pairs.
pub fn gamma_sweep(geom: &WedgeGeometry, mesh: &Mesh, sol1d: &Effective1DSolution, gammas: &[f64]) -> Result<Vec<(f64, f64)>> {
    gammas
        .iter()
        .map(|&g| Ok((g, trial_energy(&trial_state(geom, sol1d, g)?, mesh, sol1d.b)?)))
        .collect()
}

// Degree-5 seven-point rule on the reference triangle (barycentric, weight).
const TRI_RULE: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const W1: f64 = 0.132_394_152_788_506;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W2: f64 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Both sides of the splitting identity for a field on the mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    /// Discrete `G[ψ; Γ]` as minimized by the solver.
    pub e_gl: f64,
    /// `G` evaluated by quadrature on `u± f₀ e^{iΦ±}` with `u±` interpolated linearly.
    pub e_gl_lifted: f64,
    /// `−(1/2b)∫_Γ f₀⁴(t)`.
    pub f0_quartic_term: f64,
    /// `E₀[u₊; Γ⁺] + E₀[u₋; Γ⁻]`.
    pub e0_u: f64,
    pub e0_gradient: f64,
    pub e0_current: f64,
    /// `(1/2b)∫ f₀⁴(1 − |u|²)²`, nonnegative by construction.
    pub e0_quartic_penalty: f64,
    /// `Σ± ∫_bis f₀|u±|² n̂±·∇f₀`: the two bisectrix terms have the same sign and add up.
    pub bisectrix_term: f64,
    /// `|e_gl_lifted − (f0_quartic_term + e0_u)| / |e_gl_lifted|`.
    pub identity_residual: f64,
    /// Same, with the bisectrix term included on the right.
    pub corrected_residual: f64,
    /// `|e_gl − (f0_quartic_term + e0_u + bisectrix_term)| / |e_gl|`: the discretization gap of the solver energy.
    pub discrete_residual: f64,
    /// `(π − β) ∫ t(t+α₀)(t+2α₀) f₀²`, the lower bound expected for `E₀[u]`.
    pub e0_lower_bound: f64,
    pub masked_nodes: usize,
    pub masked_area: f64,
    /// `max ||u₊| − |u₋||` over the bisectrix nodes.
    pub bisectrix_modulus_gap: f64,
    /// `u±` at every node, from the node's own patch. Not serialized.
    #[serde(skip)]
    pub u: Vec<Complex64>,
    /// `(t, ∫ j_s[u] ds / L)` on the row of nodes at each `t` of the plus patch.
    pub js_profile: Vec<(f64, f64)>,
}

/// Underflow floor for dividing by `f₀`.
pub const F0_FLOOR_REL: f64 = 1e-12;

/// Splits a field as `ψ = u± f₀ e^{iΦ±}` and evaluates both sides of the identity.
pub fn splitting_diagnostic(
    field: &ComplexField,
    geom: &WedgeGeometry,
    mesh: &Mesh,
    sol1d: &Effective1DSolution,
    b: f64,
) -> Result<SplittingReport> {
    let a = sol1d.alpha0;
    let f0 = &sol1d.f0;
    let floor = F0_FLOOR_REL * sol1d.f0_at_0;
    let problem = GlProblem::new(mesh, b);
    let e_gl = gl_energy(&problem, field).total;
    let n = mesh.nodes.len();

    let split = |i: usize, patch: Patch| -> Option<Complex64> {
        let pc = geom.to_patch(patch, mesh.nodes[i]);
        let f = f0.eval(pc.t);
        (f >= floor).then(|| field.values[i] / Complex64::from_polar(f, patch_phase(a, pc)))
    };
    let u_own: Vec<Option<Complex64>> = (0..n).map(|i| split(i, mesh.coords[i].patch)).collect();
    let masked_nodes = u_own.iter().filter(|u| u.is_none()).count();
    if masked_nodes * 5 > n {
        return Err(Error::UnderflowRegionTooLarge { masked: masked_nodes, total: n });
    }

    let (sd, cd) = geom.deficit.sin_cos();
    let inv_b = 1.0 / b;
    let (mut quartic, mut grad_t, mut curr_t, mut pen_t, mut masked_area) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut lifted = 0.0;
    let mut js_rows = vec![0.0; mesh.nt + 1];
    for tri in &mesh.triangles {
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let area = mesh.triangle_area(tri);
        let centroid = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        let patch = geom.patch_of(centroid);
        // The −(1/2b)∫f₀⁴ term covers the whole domain, masked or not.
        for (bary, w) in TRI_RULE {
            let q = [
                bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
                bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
            ];
            let f = f0.eval(geom.to_patch(patch, q).t);
            quartic += w * area * f.powi(4);
        }
        let u: Option<Vec<Complex64>> = tri.iter().map(|&i| split(i, patch)).collect();
        let Some(u) = u else {
            masked_area += area;
            continue;
        };
        // P1 gradient of u in Cartesian coordinates.
        let det = 2.0 * area;
        let gx = (u[0] * (p[1][1] - p[2][1]) + u[1] * (p[2][1] - p[0][1]) + u[2] * (p[0][1] - p[1][1])) / det;
        let gy = (u[0] * (p[2][0] - p[1][0]) + u[1] * (p[0][0] - p[2][0]) + u[2] * (p[1][0] - p[0][0])) / det;
        let grad2 = gx.norm_sqr() + gy.norm_sqr();
        let e_s = match patch {
            Patch::Plus => [1.0, 0.0],
            Patch::Minus => [cd, -sd],
        };
        let e_t = match patch {
            Patch::Plus => [0.0, 1.0],
            Patch::Minus => [sd, cd],
        };
        let du_s = gx * e_s[0] + gy * e_s[1];
        let du_t = gx * e_t[0] + gy * e_t[1];
        for (bary, w) in TRI_RULE {
            let q = [
                bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
                bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
            ];
            let t = geom.to_patch(patch, q).t;
            let (f, df) = f0.eval_with_derivative(t);
            let f2 = f * f;
            let uq = u[0] * bary[0] + u[1] * bary[1] + u[2] * bary[2];
            // G at u f₀ e^{iΦ}: the gauge change turns ∇ + iF into ∇ − i(t+α₀)ê_s.
            let ks = (du_s - Complex64::i() * (t + a) * uq) * f;
            let kt = du_t * f + uq * df;
            let r2 = uq.norm_sqr() * f2;
            lifted += w * area * (ks.norm_sqr() + kt.norm_sqr() - 0.5 * inv_b * (2.0 * r2 - r2 * r2));
            let js = (uq.conj() * du_s).im;
            let m = 1.0 - uq.norm_sqr();
            let wa = w * area;
            grad_t += wa * f2 * grad2;
            curr_t += wa * f2 * (-2.0 * (t + a) * js);
            pen_t += wa * 0.5 * inv_b * f2 * f2 * m * m;
            if patch == Patch::Plus {
                let k = ((t / geom.ell) * mesh.nt as f64).round() as usize;
                js_rows[k.min(mesh.nt)] += wa * js;
            }
        }
    }
    let f0_quartic_term = -0.5 * inv_b * quartic;
    let e0_u = grad_t + curr_t + pen_t;

    // Bisectrix terms: on both sides n̂±·ê_t± = sin(d/2) and dσ = dt / cos(d/2).
    let bis = mesh.bisectrix_nodes();
    let mut bisectrix_term = 0.0;
    let mut gap = 0.0f64;
    let mods: Vec<[f64; 2]> = bis
        .iter()
        .map(|&i| {
            let up = split(i, Patch::Plus).map_or(0.0, |z| z.norm_sqr());
            let um = split(i, Patch::Minus).map_or(0.0, |z| z.norm_sqr());
            gap = gap.max((up.sqrt() - um.sqrt()).abs());
            [up, um]
        })
        .collect();
    let tan_half = (geom.deficit / 2.0).tan();
    for k in 0..bis.len() - 1 {
        let (t0, t1) = (mesh.coords[bis[k]].t, mesh.coords[bis[k + 1]].t);
        for (x, w) in gauss3() {
            let t = t0 + x * (t1 - t0);
            let (f, df) = f0.eval_with_derivative(t);
            let u2 = (1.0 - x) * (mods[k][0] + mods[k][1]) + x * (mods[k + 1][0] + mods[k + 1][1]);
            bisectrix_term += tan_half * w * (t1 - t0) * f * df * u2;
        }
    }

    let rhs = f0_quartic_term + e0_u;
    let scale = lifted.abs().max(1e-300);
    let e0_lower_bound = geom.deficit * sol1d.f0.integrate(|t| t * (t + a) * (t + 2.0 * a), 2);
    let u: Vec<Complex64> = u_own.iter().map(|z| z.unwrap_or(Complex64::new(f64::NAN, f64::NAN))).collect();
    let row_len = geom.l;
    let js_profile = (0..=mesh.nt)
        .map(|k| (k as f64 * geom.ell / mesh.nt as f64, js_rows[k] * mesh.nt as f64 / (geom.ell * row_len)))
        .collect();
    Ok(SplittingReport {
        e_gl,
        f0_quartic_term,
        e0_u,
        e0_gradient: grad_t,
        e0_current: curr_t,
        e0_quartic_penalty: pen_t,
        bisectrix_term,
        e_gl_lifted: lifted,
        identity_residual: (lifted - rhs).abs() / scale,
        corrected_residual: (lifted - rhs - bisectrix_term).abs() / scale,
        discrete_residual: (e_gl - rhs - bisectrix_term).abs() / e_gl.abs().max(1e-300),
        e0_lower_bound,
        masked_nodes,
        masked_area,
        bisectrix_modulus_gap: gap,
        u,
        js_profile,
    })
}

fn gauss3() -> [(f64, f64); 3] {
    let r = (0.6f64).sqrt();
    [(0.5 * (1.0 - r), 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 * (1.0 + r), 5.0 / 18.0)]
}

/// Least-squares fit `log|ψ| ≈ log A − c·dist(·, ∂Γ_out)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c_fit: f64,
    pub prefactor: f64,
    /// Root-mean-square residual in log units.
    pub residual: f64,
    pub points: usize,
    pub window: (f64, f64),
    /// `max|ψ|` over nodes at distance ≥ 5 from the outer boundary, relative to the overall maximum.
    pub far_ratio: f64,
}

/// Distance from the outer boundary beyond which the field must be small.
pub const AGMON_FAR: f64 = 5.0;

/// Fits the decay of `|ψ|` away from the outer boundary.
///
/// Uses nodes with `t ∈ [t₀ + 1, ℓ̄]` (`t₀` the maximum of `f₀`, `ℓ̄` from the
/// cost function) whose `f₀` is above the underflow floor, and excludes nodes
/// within `ℓ` of the tangential boundary segments.
pub fn agmon_fit(field: &ComplexField, geom: &WedgeGeometry, mesh: &Mesh, sol1d: &Effective1DSolution) -> Result<DecayFit> {
    agmon_fit_with(field, geom, mesh, sol1d, default_d_ell(sol1d.ell))
}

/// [`agmon_fit`] with the window end `ℓ̄` taken from the cost function built with `d_ell`.
pub fn agmon_fit_with(
    field: &ComplexField,
    geom: &WedgeGeometry,
    mesh: &Mesh,
    sol1d: &Effective1DSolution,
    d_ell: f64,
) -> Result<DecayFit> {
    let cost = build_cost_function_with(sol1d, d_ell)?;
    let lo = sol1d.t_max + 1.0;
    let hi = cost.ell_bar;
    let floor = F0_FLOOR_REL * sol1d.f0_at_0;
    let max_all = field.max_modulus();
    let mut far = 0.0f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, p) in mesh.nodes.iter().enumerate() {
        let dist = geom.dist_to_outer(*p);
        let m = field.values[i].norm();
        if dist >= AGMON_FAR {
            far = far.max(m);
        }
        let pc = mesh.coords[i];
        let interior = pc.s.abs() <= geom.l - geom.ell;
        if interior && pc.t >= lo && pc.t <= hi && sol1d.f0.eval(pc.t) >= floor && m > 0.0 {
            xs.push(dist);
            ys.push(m.ln());
        }
    }
    let far_ratio = if max_all > 0.0 { far / max_all } else { 0.0 };
    if xs.len() < 3 {
        return Err(Error::InsufficientRange(format!("{} nodes in the window [{lo:.3}, {hi:.3}]", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-12 * n {
        return Err(Error::InsufficientRange("no spread in distance".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit { c_fit: -slope, prefactor: intercept.exp(), residual, points: xs.len(), window: (lo, hi), far_ratio })
}

/// Sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub b: f64,
    pub deltas: Vec<f64>,
    pub sides: Vec<Side>,
    #[serde(rename = "L")]
    pub l: f64,
    pub ell: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub side: Side,
    pub beta: f64,
    pub delta: f64,
    pub e_gamma: f64,
    pub e_corner: f64,
    /// Trial energy with `γ = δ^{2/3}`, by quadrature of the exact trial state.
    pub e_trial: f64,
    /// Solver energy of the interpolated trial state, an upper bound for `e_gamma`.
    pub e_trial_discrete: f64,
    /// `e_trial − 2L·E¹ᴰ₀(ℓ)`.
    pub e_trial_corner: f64,
    /// `−(π − β) E_corr`.
    pub conjecture: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub multiplicity: usize,
    /// Error message when the row failed.
    pub error: Option<String>,
}

/// Through-origin fit of `e_corner` against `π − β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// `−E_corr`.
    pub reference: f64,
    pub rel_error: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub b: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub ell: f64,
    pub h: f64,
    pub ecorr_reference: f64,
    pub e1d: f64,
    /// Sorted by `β`.
    pub rows: Vec<SweepRow>,
    pub fit: Option<SlopeFit>,
    pub fit_minus: Option<SlopeFit>,
    pub fit_plus: Option<SlopeFit>,
    /// `e_corner(π−δ) < 0 < e_corner(π+δ)` on every row.
    pub signs_consistent: bool,
    /// `(δ, side, e_corner + (π−β)E_corr, δ^{4/3}|log δ|)` for the nonzero deltas.
    pub remainders: Vec<(f64, Side, f64, f64)>,
}

/// Least-squares slope through the origin; needs at least four points.
pub fn fit_through_origin(points: &[(f64, f64)], reference: f64) -> Option<SlopeFit> {
    if points.len() < 4 {
        return None;
    }
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = points.iter().map(|(x, y)| x * y).sum::<f64>() / sxx;
    Some(SlopeFit { slope, reference, rel_error: ((slope - reference) / reference).abs(), points: points.len() })
}

fn sweep_row(spec: &SweepSpec, sol1d: &Effective1DSolution, delta: f64, side: Side, opts: &GlOptions) -> SweepRow {
    let beta = PI + side.sign() * delta;
    let ecorr = sol1d.ecorr.unwrap_or(f64::NAN);
    let mut row = SweepRow {
        side,
        beta,
        delta,
        e_gamma: f64::NAN,
        e_corner: f64::NAN,
        e_trial: f64::NAN,
        e_trial_discrete: f64::NAN,
        e_trial_corner: f64::NAN,
        conjecture: -(PI - beta) * ecorr,
        grad_norm: f64::NAN,
        iterations: 0,
        converged: false,
        multiplicity: 0,
        error: None,
    };
    let run = || -> Result<(f64, f64, crate::glsolver::CornerEnergyResult)> {
        let gamma = opts.gamma.unwrap_or_else(|| default_gamma(delta));
        let geom = WedgeGeometry::from_deficit(delta, side, spec.l, spec.ell, gamma)?;
        let mesh = generate_mesh(&geom, spec.h)?;
        let trial = trial_state(&geom, sol1d, gamma)?;
        let e_trial = trial_energy(&trial, &mesh, spec.b)?;
        let e_trial_discrete = trial_energy_discrete(&trial, &mesh, spec.b)?;
        let (_, res) = minimize_gl(&geom, &mesh, sol1d, spec.b, opts)?;
        Ok((e_trial, e_trial_discrete, res))
    };
    match run() {
        Ok((e_trial, e_trial_discrete, res)) => {
            row.e_trial_discrete = e_trial_discrete;
            row.e_gamma = res.e_gamma;
            row.e_corner = res.e_corner;
            row.e_trial = e_trial;
            row.e_trial_corner = e_trial - res.strip_reference;
            row.grad_norm = res.grad_norm;
            row.iterations = res.iterations;
            row.converged = res.converged;
            row.multiplicity = res.multiplicity;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Minimizes on every `(δ, side)` and fits the corner energy against `π − β`.
///
/// Rows run in parallel on the current rayon pool; each row is itself
/// sequential, so the report does not depend on the number of workers.
pub fn conjecture_sweep(spec: &SweepSpec, sol1d: &Effective1DSolution, opts: &GlOptions) -> Result<SweepReport> {
    if let Some(&d) = spec.deltas.iter().find(|&&d| !(0.0..=0.4).contains(&d)) {
        return Err(Error::InvalidParams(format!("delta = {d} outside [0, 0.4]")));
    }
    let ecorr = sol1d.ecorr.ok_or(Error::DegenerateMinimizer { b: sol1d.b })?;
    let mut jobs: Vec<(f64, Side)> = Vec::new();
    for &side in &spec.sides {
        for &d in &spec.deltas {
            if !jobs.iter().any(|&(d2, s2)| d2 == d && (s2 == side || d == 0.0)) {
                jobs.push((d, side));
            }
        }
    }
    let mut rows: Vec<SweepRow> = jobs.par_iter().map(|&(d, side)| sweep_row(spec, sol1d, d, side, opts)).collect();
    rows.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    let ok = |r: &&SweepRow| r.error.is_none();
    let pts = |side: Option<Side>| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(ok)
            .filter(|r| side.is_none_or(|s| r.side == s && r.delta > 0.0))
            .map(|r| (PI - r.beta, r.e_corner))
            .collect()
    };
    let fit = fit_through_origin(&pts(None), -ecorr);
    let fit_minus = fit_through_origin(&pts(Some(Side::Minus)), -ecorr);
    let fit_plus = fit_through_origin(&pts(Some(Side::Plus)), -ecorr);
    let signs_consistent = rows.iter().filter(ok).filter(|r| r.delta > 0.0).all(|r| match r.side {
        Side::Minus => r.e_corner < 0.0,
        Side::Plus => r.e_corner > 0.0,
    });
    let remainders = rows
        .iter()
        .filter(ok)
        .filter(|r| r.delta > 0.0)
        .map(|r| (r.delta, r.side, r.e_corner + (PI - r.beta) * ecorr, r.delta.powf(4.0 / 3.0) * r.delta.ln().abs()))
        .collect();
    Ok(SweepReport {
        b: spec.b,
        l: spec.l,
        ell: spec.ell,
        h: spec.h,
        ecorr_reference: ecorr,
        e1d: sol1d.e1d,
        rows,
        fit,
        fit_minus,
        fit_plus,
        signs_consistent,
        remainders,
    })
}

impl SweepReport {
    /// One row per `β`.
    pub fn csv(&self) -> String {
        let mut s = String::from(
            "side,beta,delta,e_gamma,e_corner,e_trial,e_trial_discrete,e_trial_corner,conjecture,grad_norm,iterations,converged\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.6e},{},{}\n",
                match r.side {
                    Side::Minus => "minus",
                    Side::Plus => "plus",
                },
                r.beta,
                r.delta,
                r.e_gamma,
                r.e_corner,
                r.e_trial,
                r.e_trial_discrete,
                r.e_trial_corner,
                r.conjecture,
                r.grad_norm,
                r.iterations,
                r.converged
            ));
        }
        s
    }

    /// Two columns `π − β, e_corner` for plotting.
    pub fn plot_data(&self) -> String {
        let mut s = String::from("# pi-beta e_corner\n");
        for r in &self.rows {
            s.push_str(&format!("{:.16e} {:.16e}\n", PI - r.beta, r.e_corner));
        }
        s
    }
}

/// `ψ⋆` in each node's own patch.
pub fn star_extension(mesh: &Mesh, sol1d: &Effective1DSolution) -> ComplexField {
    ComplexField { values: mesh.coords.iter().map(|&pc| psi_star(pc, sol1d)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective1d::{minimize_1d, Grid1D};

    fn sol(ell: f64) -> Effective1DSolution {
        minimize_1d(&Grid1D::new(ell, 1024).unwrap(), 1.5).unwrap()
    }

    #[test]
    fn trial_phase_is_continuous() {
        let s = sol(6.0);
        for beta in [PI - 0.2, PI + 0.2, PI] {
            let g = WedgeGeometry::new(beta, 8.0, 6.0, 0.0).unwrap();
            let t = trial_state(&g, &s, 0.3).unwrap();
            assert!(t.phase_mismatch(200) <= 1e-10, "β = {beta}");
        }
    }

    #[test]
    fn star_extension_splits_to_one_on_a_strip() {
        let s = sol(6.0);
        let g = WedgeGeometry::new(PI, 8.0, 6.0, 0.0).unwrap();
        let m = generate_mesh(&g, 0.25).unwrap();
        let f = star_extension(&m, &s);
        let r = splitting_diagnostic(&f, &g, &m, &s, 1.5).unwrap();
        assert!(r.u.iter().all(|u| (u - 1.0).norm() < 1e-12));
        assert!(r.e0_u.abs() < 1e-12);
        assert_eq!(r.bisectrix_term, 0.0);
        assert!(r.identity_residual < 1e-6, "{}", r.identity_residual);
        assert!(r.discrete_residual < 1e-1, "{}", r.discrete_residual);
    }

    #[test]
    fn through_origin_fit() {
        let pts = [(0.1, -0.2), (0.2, -0.4), (-0.1, 0.2), (0.3, -0.6)];
        let f = fit_through_origin(&pts, -2.0).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-14 && f.rel_error < 1e-14);
        assert!(fit_through_origin(&pts[..3], -2.0).is_none());
    }
}
