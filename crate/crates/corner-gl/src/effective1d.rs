//! Finite-interval 1D effective model.
//!
//! The functional
//!
//! ```text
//! F_α[f] = ∫₀^ℓ f'² + (t+α)² f² − (1/2b)(2f² − f⁴) dt
//! ```
//!
//! is discretized with C¹ cubic Hermite elements on a uniform grid: every
//! node carries the value `f` and the slope `f'`. All integrals use
//! five-point Gauss-Legendre quadrature per element, so kinetic and
//! quadratic terms are exact and the quartic term is accurate to O(h¹⁰).
//! The Neumann conditions are natural and are not imposed.
//!
//! For fixed `α` the discrete minimizer is found by Newton's method on the
//! energy, seeded by the ground state of the linearized operator. The phase
//! `α₀` is the root of `g(α) = ∫(t+α)f_α²`, which by the Feynman-Hellmann
//! argument is half the derivative of the reduced energy.

use serde::{Deserialize, Serialize};

use crate::banded::SymBand;
use crate::error::{Error, Result};
use crate::roots::{brent, golden_min};

/// De Gennes constant Θ₀: ground-state energy of the half-plane magnetic Laplacian.
pub const THETA0: f64 = 0.590_106_125;

/// Nontrivial branch threshold on the energy.
pub const NONTRIVIAL_ENERGY: f64 = -1e-10;

/// Interval length used for half-line quantities.
pub const HALF_LINE_ELL: f64 = 16.0;

const GAUSS_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Uniform grid on `[0, ell]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub ell: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(ell: f64, n: usize) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::InvalidParams(format!("ell must be positive, got {ell}")));
        }
        if n < 64 {
            return Err(Error::InvalidParams(format!("grid needs at least 64 nodes, got {n}")));
        }
        Ok(Grid1D { ell, n })
    }

    pub fn h(&self) -> f64 {
        self.ell / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.ell
        } else {
            i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// Hermite basis on the reference element, pre-evaluated at the Gauss points.
struct Basis {
    /// Value basis `[H0, H1, H2, H3]`, slope shapes not yet scaled by `h`.
    val: [[f64; 4]; 5],
    /// d/dξ of the same.
    der: [[f64; 4]; 5],
    xi: [f64; 5],
    w: [f64; 5],
}

impl Basis {
    fn new() -> Self {
        let mut b = Basis { val: [[0.0; 4]; 5], der: [[0.0; 4]; 5], xi: [0.0; 5], w: [0.0; 5] };
        for q in 0..5 {
            let x = 0.5 * (1.0 + GAUSS_X[q]);
            b.xi[q] = x;
            b.w[q] = 0.5 * GAUSS_W[q];
            b.val[q] = hermite(x);
            b.der[q] = hermite_d(x);
        }
        b
    }
}

fn hermite(x: f64) -> [f64; 4] {
    let x2 = x * x;
    let x3 = x2 * x;
    [1.0 - 3.0 * x2 + 2.0 * x3, x - 2.0 * x2 + x3, 3.0 * x2 - 2.0 * x3, x3 - x2]
}

fn hermite_d(x: f64) -> [f64; 4] {
    let x2 = x * x;
    [-6.0 * x + 6.0 * x2, 1.0 - 4.0 * x + 3.0 * x2, 6.0 * x - 6.0 * x2, 3.0 * x2 - 2.0 * x]
}

thread_local! {
    static BASIS: Basis = Basis::new();
}

/// Calls `visit(t, f, f', φ, φ', weight)` at every quadrature point, where
/// `φ`/`φ'` are the four element basis functions and `weight` includes `h`.
fn for_each_qp(
    grid: &Grid1D,
    x: &[f64],
    mut visit: impl FnMut(usize, f64, f64, f64, &[f64; 4], &[f64; 4], f64),
) {
    let h = grid.h();
    BASIS.with(|bs| {
        for e in 0..grid.n - 1 {
            let t0 = e as f64 * h;
            let dofs = [x[2 * e], x[2 * e + 1], x[2 * e + 2], x[2 * e + 3]];
            for q in 0..5 {
                let v = bs.val[q];
                let d = bs.der[q];
                let phi = [v[0], h * v[1], v[2], h * v[3]];
                let dphi = [d[0] / h, d[1], d[2] / h, d[3]];
                let f = dofs[0] * phi[0] + dofs[1] * phi[1] + dofs[2] * phi[2] + dofs[3] * phi[3];
                let fp = dofs[0] * dphi[0] + dofs[1] * dphi[1] + dofs[2] * dphi[2] + dofs[3] * dphi[3];
                visit(e, t0 + bs.xi[q] * h, f, fp, &phi, &dphi, bs.w[q] * h);
            }
        }
    });
}

/// Nodal representation of a C¹ piecewise-cubic profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile1D {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl Profile1D {
    pub fn zeros(grid: Grid1D) -> Self {
        Profile1D { grid, values: vec![0.0; grid.n], slopes: vec![0.0; grid.n] }
    }

    /// Builds a profile from nodal samples, estimating slopes by fourth-order differences.
    pub fn from_samples(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidParams(format!(
                "expected {} samples, got {}",
                grid.n,
                values.len()
            )));
        }
        let slopes = fd_slopes(&values, grid.h());
        Ok(Profile1D { grid, values, slopes })
    }

    /// Builds a profile by sampling a function and its derivative.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let (values, slopes) = grid.nodes().into_iter().map(f).unzip();
        Profile1D { grid, values, slopes }
    }

    fn dofs(&self) -> Vec<f64> {
        let mut x = vec![0.0; 2 * self.grid.n];
        for i in 0..self.grid.n {
            x[2 * i] = self.values[i];
            x[2 * i + 1] = self.slopes[i];
        }
        x
    }

    fn from_dofs(grid: Grid1D, x: &[f64]) -> Self {
        Profile1D {
            grid,
            values: x.iter().step_by(2).copied().collect(),
            slopes: x.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    /// Value and derivative at `t`, clamped to the interval.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let h = self.grid.h();
        let t = t.clamp(0.0, self.grid.ell);
        let e = ((t / h).floor() as usize).min(self.grid.n - 2);
        let x = (t - e as f64 * h) / h;
        let v = hermite(x);
        let d = hermite_d(x);
        let (f0, s0, f1, s1) = (self.values[e], self.slopes[e], self.values[e + 1], self.slopes[e + 1]);
        let f = f0 * v[0] + h * s0 * v[1] + f1 * v[2] + h * s1 * v[3];
        let fp = (f0 * d[0] + f1 * d[2]) / h + s0 * d[1] + s1 * d[3];
        (f, fp)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivative(t).0
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().chain(&self.slopes).all(|v| *v == 0.0)
    }

    /// `∫ w(t) f(t)^p dt` by element quadrature.
    pub fn integrate(&self, weight: impl Fn(f64) -> f64, p: i32) -> f64 {
        let mut s = 0.0;
        for_each_qp(&self.grid, &self.dofs(), |_, t, f, _, _, _, w| s += w * weight(t) * f.powi(p));
        s
    }

    /// `∫ f⁴`.
    pub fn quartic_integral(&self) -> f64 {
        self.integrate(|_| 1.0, 4)
    }

    /// `g(α) = ∫ (t+α) f²`, the phase-optimality integral.
    pub fn alpha_moment(&self, alpha: f64) -> f64 {
        self.integrate(|t| t + alpha, 2)
    }

    /// `(f'(0), f'(ℓ))`.
    pub fn neumann_residuals(&self) -> (f64, f64) {
        (self.slopes[0], self.slopes[self.grid.n - 1])
    }

    /// Location of the maximum, refined inside the adjacent elements.
    pub fn argmax(&self) -> f64 {
        let (imax, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let h = self.grid.h();
        let mut best = (self.grid.node(imax), self.values[imax]);
        let lo = imax.saturating_sub(1);
        let hi = (imax + 1).min(self.grid.n - 1);
        for e in lo..hi {
            // f'(ξ) on the element is a quadratic a ξ² + b ξ + c.
            let (f0, s0, f1, s1) = (self.values[e], h * self.slopes[e], self.values[e + 1], h * self.slopes[e + 1]);
            let a = 6.0 * f0 + 3.0 * s0 - 6.0 * f1 + 3.0 * s1;
            let b = -6.0 * f0 - 4.0 * s0 + 6.0 * f1 - 2.0 * s1;
            let c = s0;
            let mut roots = Vec::new();
            if a.abs() < 1e-300 {
                if b != 0.0 {
                    roots.push(-c / b);
                }
            } else {
                let disc = b * b - 4.0 * a * c;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    let q = -0.5 * (b + sq.copysign(b));
                    roots.push(q / a);
                    if q != 0.0 {
                        roots.push(c / q);
                    }
                }
            }
            for r in roots {
                if (0.0..=1.0).contains(&r) {
                    let t = (e as f64 + r) * h;
                    let v = self.eval(t);
                    if v > best.1 {
                        best = (t, v);
                    }
                }
            }
        }
        best.0
    }
}

fn fd_slopes(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h)
            } else if i < 2 {
                let s = |k: usize| v[i + k];
                match i {
                    0 => (-25.0 * s(0) + 48.0 * s(1) - 36.0 * s(2) + 16.0 * s(3) - 3.0 * s(4)) / (12.0 * h),
                    _ => (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h),
                }
            } else if i + 1 == n {
                (25.0 * v[i] - 48.0 * v[i - 1] + 36.0 * v[i - 2] - 16.0 * v[i - 3] + 3.0 * v[i - 4]) / (12.0 * h)
            } else {
                (3.0 * v[i + 1] + 10.0 * v[i] - 18.0 * v[i - 1] + 6.0 * v[i - 2] - v[i - 3]) / (12.0 * h)
            }
        })
        .collect()
}

/// Value of the discrete functional `F_α[f]`.
pub fn energy_1d(f: &Profile1D, alpha: f64, b: f64) -> f64 {
    let mut e = 0.0;
    for_each_qp(&f.grid, &f.dofs(), |_, t, v, vp, _, _, w| {
        let v2 = v * v;
        e += w * (vp * vp + (t + alpha).powi(2) * v2 - (2.0 * v2 - v2 * v2) / (2.0 * b));
    });
    e
}

/// Energy, gradient and (optionally) Hessian in the Hermite degrees of freedom.
fn assemble(grid: &Grid1D, x: &[f64], alpha: f64, b: f64, hess: bool) -> (f64, Vec<f64>, Option<SymBand>) {
    let mut e = 0.0;
    let mut g = vec![0.0; x.len()];
    let mut hm = if hess { Some(SymBand::zeros(x.len(), 3)) } else { None };
    for_each_qp(grid, x, |el, t, f, fp, phi, dphi, w| {
        let v = (t + alpha).powi(2);
        let f2 = f * f;
        e += w * (fp * fp + v * f2 - (2.0 * f2 - f2 * f2) / (2.0 * b));
        let cf = 2.0 * (v * f - f / b + f2 * f / b);
        for a in 0..4 {
            g[2 * el + a] += w * (2.0 * fp * dphi[a] + cf * phi[a]);
        }
        if let Some(hm) = hm.as_mut() {
            let cm = 2.0 * (v - 1.0 / b + 3.0 * f2 / b);
            for a in 0..4 {
                for c in 0..=a {
                    hm.add(2 * el + a, 2 * el + c, w * (2.0 * dphi[a] * dphi[c] + cm * phi[a] * phi[c]));
                }
            }
        }
    });
    (e, g, hm)
}

/// Stiffness-plus-potential and mass matrices of the linearized operator.
fn linear_operator(grid: &Grid1D, alpha: f64) -> (SymBand, SymBand) {
    let dim = 2 * grid.n;
    let mut a = SymBand::zeros(dim, 3);
    let mut m = SymBand::zeros(dim, 3);
    let zero = vec![0.0; dim];
    for_each_qp(grid, &zero, |el, t, _, _, phi, dphi, w| {
        let v = (t + alpha).powi(2);
        for i in 0..4 {
            for j in 0..=i {
                a.add(2 * el + i, 2 * el + j, w * (dphi[i] * dphi[j] + v * phi[i] * phi[j]));
                m.add(2 * el + i, 2 * el + j, w * phi[i] * phi[j]);
            }
        }
    });
    (a, m)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lowest eigenpair of `−d²/dt² + (t+α)²` with Neumann conditions, mass-normalized and positive.
fn ground_state(grid: &Grid1D, alpha: f64) -> Result<(f64, Vec<f64>)> {
    let (a, m) = linear_operator(grid, alpha);
    let mut x: Vec<f64> = (0..grid.n)
        .flat_map(|i| {
            let t = grid.node(i) + alpha;
            let g = (-0.5 * t * t).exp() + 1e-3;
            [g, -t * (g - 1e-3)]
        })
        .collect();
    let mut sigma = -0.5;
    let mut lambda = f64::INFINITY;
    let mut shifted = a.clone();
    let mut chol = None;
    for it in 0..100 {
        if chol.is_none() {
            for (s, (av, mv)) in shifted.band.iter_mut().zip(a.band.iter().zip(&m.band)) {
                *s = av - sigma * mv;
            }
            chol = shifted.cholesky();
            if chol.is_none() {
                sigma -= 0.5;
                continue;
            }
        }
        let y = chol.as_ref().unwrap().solve(&m.mul(&x));
        let my = m.mul(&y);
        let norm = dot(&y, &my).sqrt();
        x = y.iter().map(|v| v / norm).collect();
        let new_lambda = dot(&x, &a.mul(&x));
        let change = (new_lambda - lambda).abs();
        lambda = new_lambda;
        if change <= 1e-13 * lambda.abs().max(1.0) && it >= 3 {
            log::trace!("ground_state alpha={alpha} its={it} lambda={lambda}");
            break;
        }
        if it == 5 && lambda - 0.05 > sigma {
            sigma = lambda - 0.05;
            chol = None;
        }
    }
    let imax = (0..grid.n).max_by(|&i, &j| x[2 * i].abs().total_cmp(&x[2 * j].abs())).unwrap();
    if x[2 * imax] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok((lambda, x))
}

/// Lowest eigenvalue `μ(α)` of the linearized operator on the grid.
pub fn linear_threshold(grid: &Grid1D, alpha: f64) -> Result<f64> {
    Ok(ground_state(grid, alpha)?.0)
}

/// Tolerances for the 1D solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solve1dOptions {
    /// Scaled Euler-Lagrange residual at which Newton stops.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Absolute tolerance on `∫(t+α)f²`.
    pub alpha_tol: f64,
    /// Search interval for the phase.
    pub alpha_bracket: (f64, f64),
    /// Spacing of the scan used to count roots of `g`.
    pub alpha_scan_step: f64,
}

impl Default for Solve1dOptions {
    fn default() -> Self {
        Solve1dOptions {
            newton_tol: 1e-11,
            max_newton: 200,
            alpha_tol: 1e-12,
            alpha_bracket: (-3.0, 0.0),
            alpha_scan_step: 0.05,
        }
    }
}

/// Converged profile with its solver diagnostics.
#[derive(Debug, Clone)]
struct Solved {
    profile: Profile1D,
    energy: f64,
    residual: f64,
    iterations: usize,
}

/// Strong-form estimate of the Euler-Lagrange residual from the weak gradient.
fn scaled_residual(g: &[f64], h: f64) -> f64 {
    g.chunks(2).map(|c| (c[0].abs() / h).max(c[1].abs() / (h * h))).fold(0.0, f64::max)
}

fn newton(grid: &Grid1D, alpha: f64, b: f64, mut x: Vec<f64>, opts: &Solve1dOptions) -> Result<Solved> {
    let h = grid.h();
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_newton {
        let (e, g, hm) = assemble(grid, &x, alpha, b, true);
        residual = scaled_residual(&g, h);
        if residual <= opts.newton_tol {
            return Ok(Solved { profile: Profile1D::from_dofs(*grid, &x), energy: e, residual, iterations: it });
        }
        let hm = hm.unwrap();
        let scale = hm.max_diag();
        let mut shift = 0.0;
        let chol = loop {
            let mut hs = hm.clone();
            if shift > 0.0 {
                for i in 0..hs.n {
                    hs.add(i, i, shift);
                }
            }
            if let Some(c) = hs.cholesky() {
                break c;
            }
            shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
            if shift > 1e6 * scale {
                return Err(Error::NonConvergence { what: "1D Newton (Hessian)", iterations: it, residual });
            }
        };
        let d: Vec<f64> = chol.solve(&g).into_iter().map(|v| -v).collect();
        let slope = dot(&g, &d);
        // Newton decrement below energy rounding: the residual is at its floor.
        if -slope <= 1e-20 * e.abs() && residual <= 1e3 * opts.newton_tol {
            return Ok(Solved { profile: Profile1D::from_dofs(*grid, &x), energy: e, residual, iterations: it });
        }
        log::trace!("newton it={it} residual={residual:e} decrement={:e}", -slope);
        if -slope <= 1e-12 * e.abs() {
            // Energy differences are below rounding here; trust the full step.
            x.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
            continue;
        }
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (et, _, _) = assemble(grid, &trial, alpha, b, false);
            if et <= e + 1e-4 * step * slope + 1e-14 * e.abs() {
                x = trial;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                return Err(Error::NonConvergence { what: "1D Newton (line search)", iterations: it, residual });
            }
        }
    }
    Err(Error::NonConvergence { what: "1D Newton", iterations: opts.max_newton, residual })
}

/// Energy-minimizing profile for a fixed phase `alpha`.
///
/// Returns the zero profile when the linearized operator has no eigenvalue
/// below `1/b`, since the functional is then nonnegative. Otherwise Newton
/// starts from `guess` (if given) or from the optimally scaled linear
/// ground state.
pub fn solve_profile(alpha: f64, b: f64, grid: &Grid1D, guess: Option<&Profile1D>) -> Result<Profile1D> {
    Ok(solve_profile_inner(alpha, b, grid, guess, &Solve1dOptions::default())?.profile)
}

fn check_params(b: f64, grid: &Grid1D) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidParams(format!("b must be positive, got {b}")));
    }
    if b <= 1.0 {
        log::warn!("b = {b} is at or below 1; the surface regime requires 1 < b < 1/Θ₀");
    }
    if grid.ell < 4.0 {
        return Err(Error::InvalidParams(format!("ell must be at least 4, got {}", grid.ell)));
    }
    Ok(())
}

fn solve_profile_inner(
    alpha: f64,
    b: f64,
    grid: &Grid1D,
    guess: Option<&Profile1D>,
    opts: &Solve1dOptions,
) -> Result<Solved> {
    check_params(b, grid)?;
    if let Some(g) = guess.filter(|g| g.grid == *grid && !g.is_zero()) {
        // A negative energy certifies the nontrivial branch without the eigenvalue solve.
        if let Ok(sol) = newton(grid, alpha, b, g.dofs(), opts) {
            if sol.energy < 0.0 {
                return Ok(sol);
            }
        }
    }
    let (mu, phi) = ground_state(grid, alpha)?;
    if mu >= 1.0 / b {
        return Ok(Solved { profile: Profile1D::zeros(*grid), energy: 0.0, residual: 0.0, iterations: 0 });
    }
    let p = Profile1D::from_dofs(*grid, &phi);
    let c = ((1.0 / b - mu) * b / p.quartic_integral()).sqrt();
    newton(grid, alpha, b, phi.iter().map(|v| v * c).collect(), opts)
}

/// Result of [`compute_ecorr`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcorrReport {
    /// `∫ t {f'² + f²(−α(t+α) − 1/b + f²/2b)}`.
    pub integral: f64,
    /// `f(0)²/3 − α E`, equal to the integral by the multiplier identities.
    pub closed_form: f64,
    /// `(1/3) f(0)² α − E`; kept for comparison, it does not match the integral.
    pub alt_closed_form: f64,
    /// `|integral − closed_form| / |integral|`.
    pub rel_discrepancy: f64,
    pub alt_rel_discrepancy: f64,
}

/// Optimal pair `(α₀, f₀)` on `[0, ℓ]` with derived scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effective1DSolution {
    pub b: f64,
    pub ell: f64,
    pub alpha0: f64,
    pub f0: Profile1D,
    pub e1d: f64,
    pub ecorr: Option<f64>,
    pub t_max: f64,
    pub f0_at_0: f64,
    /// Set when the minimizer is the zero profile (energy ≥ −1e−10).
    pub degenerate: bool,
    /// Minimum over α of the lowest linear eigenvalue; the branch exists iff it is below 1/b.
    pub mu_min: f64,
    /// `∫(t+α₀)f₀²` at the returned phase.
    pub alpha_moment: f64,
    pub newton_residual: f64,
    /// Sign changes of `g(α)` found by a scan of the bracket.
    pub alpha_roots: usize,
}

impl Effective1DSolution {
    pub fn n(&self) -> usize {
        self.f0.grid.n
    }

    /// Writes `t, f₀, f₀'` rows.
    pub fn profile_csv(&self) -> String {
        let mut s = String::from("t,f0,f0_prime\n");
        for i in 0..self.n() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                self.f0.grid.node(i),
                self.f0.values[i],
                self.f0.slopes[i]
            ));
        }
        s
    }

    pub fn export(&self) -> Solution1DExport {
        Solution1DExport {
            b: self.b,
            ell: self.ell,
            n: self.n(),
            alpha0: self.alpha0,
            e1d: self.e1d,
            ecorr: self.ecorr,
            t_max: self.t_max,
            f0_at_0: self.f0_at_0,
            degenerate: self.degenerate,
            f0: self.f0.values.clone(),
        }
    }
}

/// JSON shape of an exported 1D solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution1DExport {
    pub b: f64,
    pub ell: f64,
    pub n: usize,
    pub alpha0: f64,
    pub e1d: f64,
    pub ecorr: Option<f64>,
    pub t_max: f64,
    pub f0_at_0: f64,
    pub degenerate: bool,
    pub f0: Vec<f64>,
}

/// Minimizes the 1D functional jointly over `f` and `α` on `grid`.
pub fn minimize_1d(grid: &Grid1D, b: f64) -> Result<Effective1DSolution> {
    minimize_1d_with(grid, b, &Solve1dOptions::default())
}

pub fn minimize_1d_with(grid: &Grid1D, b: f64, opts: &Solve1dOptions) -> Result<Effective1DSolution> {
    check_params(b, grid)?;
    let (lo, hi) = opts.alpha_bracket;
    let (alpha_c, mu_min) = golden_min(|a| linear_threshold(grid, a), lo, hi, 1e-5)?;
    let degenerate_solution = |alpha: f64| Effective1DSolution {
        b,
        ell: grid.ell,
        alpha0: alpha,
        f0: Profile1D::zeros(*grid),
        e1d: 0.0,
        ecorr: None,
        t_max: 0.0,
        f0_at_0: 0.0,
        degenerate: true,
        mu_min,
        alpha_moment: 0.0,
        newton_residual: 0.0,
        alpha_roots: 0,
    };
    if mu_min >= 1.0 / b {
        return Ok(degenerate_solution(alpha_c));
    }

    let first = solve_profile_inner(alpha_c, b, grid, None, opts)?;
    let g_c = first.profile.alpha_moment(alpha_c);
    let mut last = first.profile.clone();

    // Walk away from the linear optimum until g changes sign, staying on the nontrivial branch.
    let dir = if g_c < 0.0 { 1.0 } else { -1.0 };
    let (mut a, mut ga) = (alpha_c, g_c);
    let mut step = 0.02;
    let (bb, gb) = loop {
        let trial = a + dir * step;
        let s = solve_profile_inner(trial, b, grid, Some(&last), opts)?;
        if s.profile.is_zero() {
            step *= 0.5;
            if step < 1e-13 {
                return Err(Error::NonConvergence { what: "phase bracketing", iterations: 0, residual: ga });
            }
            continue;
        }
        let gt = s.profile.alpha_moment(trial);
        last = s.profile;
        if gt.signum() != ga.signum() || gt == 0.0 {
            break (trial, gt);
        }
        a = trial;
        ga = gt;
        step = (2.0 * step).min(0.5);
    };

    let (alpha0, _) = brent(
        |al| -> Result<f64> {
            let s = solve_profile_inner(al, b, grid, Some(&last), opts)?;
            if s.profile.is_zero() {
                return Err(Error::DegenerateMinimizer { b });
            }
            let g = s.profile.alpha_moment(al);
            last = s.profile;
            Ok(g)
        },
        a,
        bb,
        ga,
        gb,
        1e-15,
        opts.alpha_tol,
        200,
    )?;
    let fin = solve_profile_inner(alpha0, b, grid, Some(&last), opts)?;
    let f0 = fin.profile;
    let e1d = energy_1d(&f0, alpha0, b);
    let alpha_roots = count_alpha_roots(grid, b, opts)?.max(1);
    if alpha_roots > 1 {
        log::warn!("g(α) changes sign {alpha_roots} times at b = {b}, ell = {}", grid.ell);
    }
    let mut sol = Effective1DSolution {
        b,
        ell: grid.ell,
        alpha0,
        t_max: f0.argmax(),
        f0_at_0: f0.values[0],
        alpha_moment: f0.alpha_moment(alpha0),
        f0,
        e1d,
        ecorr: None,
        degenerate: e1d >= NONTRIVIAL_ENERGY,
        mu_min,
        newton_residual: fin.residual,
        alpha_roots,
    };
    if !sol.degenerate {
        sol.ecorr = Some(compute_ecorr(&sol)?.integral);
    }
    log::debug!(
        "minimize_1d b={b} ell={} alpha0={alpha0:.12} e1d={e1d:.12e} newton_iters={}",
        grid.ell,
        fin.iterations
    );
    Ok(sol)
}

fn count_alpha_roots(grid: &Grid1D, b: f64, opts: &Solve1dOptions) -> Result<usize> {
    let (lo, hi) = opts.alpha_bracket;
    let steps = ((hi - lo) / opts.alpha_scan_step).round() as usize;
    let mut prev: Option<f64> = None;
    let mut guess: Option<Profile1D> = None;
    let mut count = 0;
    for k in 0..=steps {
        let alpha = lo + k as f64 * (hi - lo) / steps as f64;
        if linear_threshold(grid, alpha)? >= 1.0 / b {
            prev = None;
            continue;
        }
        let s = solve_profile_inner(alpha, b, grid, guess.as_ref(), opts)?;
        if s.profile.is_zero() || s.energy >= NONTRIVIAL_ENERGY {
            prev = None;
            continue;
        }
        let g = s.profile.alpha_moment(alpha);
        if let Some(p) = prev {
            if p.signum() != g.signum() {
                count += 1;
            }
        }
        prev = Some(g);
        guess = Some(s.profile);
    }
    Ok(count)
}

/// Curvature coefficient `E_corr` in integral and closed forms.
pub fn compute_ecorr(sol: &Effective1DSolution) -> Result<EcorrReport> {
    if sol.degenerate || sol.f0.is_zero() {
        return Err(Error::DegenerateMinimizer { b: sol.b });
    }
    let (a, b) = (sol.alpha0, sol.b);
    let mut integral = 0.0;
    for_each_qp(&sol.f0.grid, &sol.f0.dofs(), |_, t, f, fp, _, _, w| {
        let f2 = f * f;
        integral += w * t * (fp * fp + f2 * (-a * (t + a) - 1.0 / b + f2 / (2.0 * b)));
    });
    let f00 = sol.f0.values[0];
    let closed_form = f00 * f00 / 3.0 - a * sol.e1d;
    let alt_closed_form = f00 * f00 * a / 3.0 - sol.e1d;
    Ok(EcorrReport {
        integral,
        closed_form,
        alt_closed_form,
        rel_discrepancy: (integral - closed_form).abs() / integral.abs(),
        alt_rel_discrepancy: (integral - alt_closed_form).abs() / integral.abs(),
    })
}

/// Half-line quantities, approximated on `[0, 16]` with the grid spacing of `n` nodes per 10 units.
pub fn half_line(b: f64, n_per_10: usize) -> Result<Effective1DSolution> {
    let n = ((n_per_10 - 1) as f64 * HALF_LINE_ELL / 10.0).round() as usize + 1;
    minimize_1d(&Grid1D::new(HALF_LINE_ELL, n)?, b)
}

/// Coupling `b` in `[lo, hi]` where `e1d` crosses `−level`, by bisection.
pub fn energy_threshold(ell: f64, n: usize, level: f64, lo: f64, hi: f64, btol: f64) -> Result<f64> {
    let grid = Grid1D::new(ell, n)?;
    let below = |b: f64| -> Result<bool> { Ok(minimize_1d(&grid, b)?.e1d < -level) };
    let (mut lo, mut hi) = (lo, hi);
    if !below(lo)? || below(hi)? {
        return Err(Error::InvalidParams(format!("[{lo}, {hi}] does not bracket e1d = −{level}")));
    }
    while hi - lo > btol {
        let mid = 0.5 * (lo + hi);
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(ell: f64, n: usize) -> Grid1D {
        Grid1D::new(ell, n).unwrap()
    }

    #[test]
    fn constant_profile_energy_is_exact() {
        let g = grid(1.0, 64);
        let f = Profile1D::from_fn(g, |_| (1.0, 0.0));
        assert!((energy_1d(&f, 0.0, 1.0) - (1.0 / 3.0 - 0.5)).abs() < 1e-14);
        assert_eq!(energy_1d(&Profile1D::zeros(g), -0.7, 1.5), 0.0);
    }

    #[test]
    fn hermite_interpolation_reproduces_cubics() {
        let g = grid(4.0, 64);
        let p = Profile1D::from_fn(g, |t| (t * t * t - t, 3.0 * t * t - 1.0));
        for &t in &[0.013, 1.77, 3.999] {
            let (f, fp) = p.eval_with_derivative(t);
            assert!((f - (t * t * t - t)).abs() < 1e-12);
            assert!((fp - (3.0 * t * t - 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn gradient_matches_energy_differences() {
        let g = grid(5.0, 64);
        let p = Profile1D::from_fn(g, |t| ((-0.5 * (t - 0.7).powi(2)).exp(), -(t - 0.7) * (-0.5 * (t - 0.7).powi(2)).exp()));
        let x = p.dofs();
        let (_, grad, _) = assemble(&g, &x, -0.6, 1.4, false);
        for &k in &[0usize, 7, 30, 127] {
            let eps = 1e-6;
            let mut xp = x.clone();
            xp[k] += eps;
            let mut xm = x.clone();
            xm[k] -= eps;
            let fd = (assemble(&g, &xp, -0.6, 1.4, false).0 - assemble(&g, &xm, -0.6, 1.4, false).0) / (2.0 * eps);
            assert!((fd - grad[k]).abs() < 1e-8 * (1.0 + grad[k].abs()), "k={k} fd={fd} g={}", grad[k]);
        }
    }

    #[test]
    fn zero_profile_when_linear_threshold_above_one_over_b() {
        // μ(0) = 1 on a long interval, above 1/b = 2/3.
        let g = grid(10.0, 512);
        let p = solve_profile(0.0, 1.5, &g, None).unwrap();
        assert!(p.is_zero());
        assert!((linear_threshold(&g, 0.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn nontrivial_profile_at_small_b() {
        // 1/b = 2 exceeds μ(0) = 1, so the zero profile is not the minimizer.
        let g = grid(10.0, 512);
        let p = solve_profile(0.0, 0.5, &g, None).unwrap();
        assert!(energy_1d(&p, 0.0, 0.5) < -0.1);
    }

    #[test]
    fn linear_threshold_minimum_near_theta0() {
        let g = grid(12.0, 1024);
        let (a, mu) = golden_min(|a| linear_threshold(&g, a), -3.0, 0.0, 1e-8).unwrap();
        assert!((mu - THETA0).abs() < 1e-7, "mu = {mu}");
        assert!((a + THETA0.sqrt()).abs() < 1e-4, "alpha = {a}");
    }

    #[test]
    fn minimizer_identities_b15() {
        let sol = minimize_1d(&grid(10.0, 2048), 1.5).unwrap();
        assert!(!sol.degenerate);
        assert!(sol.alpha0 < 0.0);
        assert!(sol.alpha_moment.abs() < 1e-10);
        let q = -sol.f0.quartic_integral() / (2.0 * 1.5);
        assert!((sol.e1d - q).abs() < 1e-10 * sol.e1d.abs());
        let (n0, nl) = sol.f0.neumann_residuals();
        assert!(n0.abs() < 1e-6 && nl.abs() < 1e-6, "{n0} {nl}");
        // f₀(0)² = 2(1 − b α₀²) from the first integral of the profile equation.
        assert!((sol.f0_at_0.powi(2) - 2.0 * (1.0 - 1.5 * sol.alpha0.powi(2))).abs() < 1e-8);
        let r = compute_ecorr(&sol).unwrap();
        assert!(r.rel_discrepancy < 1e-6, "{r:?}");
        assert!(r.integral > 0.0);
    }

    #[test]
    fn degenerate_above_threshold() {
        let sol = minimize_1d(&grid(10.0, 1024), 1.72).unwrap();
        assert!(sol.degenerate);
        assert!(sol.e1d.abs() < 1e-6);
        assert!(compute_ecorr(&sol).is_err());
    }

    #[test]
    fn slopes_from_samples_are_fourth_order() {
        let g = grid(4.0, 129);
        let p = Profile1D::from_samples(g, g.nodes().iter().map(|t| t.sin()).collect()).unwrap();
        for (i, s) in p.slopes.iter().enumerate() {
            assert!((s - g.node(i).cos()).abs() < 1e-6);
        }
    }
}
