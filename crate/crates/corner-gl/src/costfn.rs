//! Potential `F₀` and cost function `K₀` built from a 1D minimizer.
//!
//! `F₀(t) = 2∫₀ᵗ (η+α₀) f₀²(η) dη`, which equals `−2∫ₜ^ℓ (η+α₀) f₀²` because
//! the phase-optimality integral vanishes. `K₀ = (1 − d_ℓ) f₀² + F₀`.

use serde::{Deserialize, Serialize};

use crate::effective1d::Effective1DSolution;
use crate::error::{Error, Result};

/// Sampled potential and cost function on the 1D grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostFunctionData {
    pub b: f64,
    pub ell: f64,
    pub alpha0: f64,
    pub t: Vec<f64>,
    pub f0: Vec<f64>,
    /// Forward cumulative representation of `F₀` (exactly 0 at `t = 0`).
    pub f_forward: Vec<f64>,
    /// Backward cumulative representation (exactly 0 at `t = ℓ`).
    pub f_backward: Vec<f64>,
    /// `F₀`: forward representation up to the maximum of `f₀`, backward beyond.
    #[serde(rename = "F0")]
    pub big_f0: Vec<f64>,
    #[serde(rename = "K0")]
    pub k0: Vec<f64>,
    pub d_ell: f64,
    pub ell_bar: f64,
    /// `max |forward − backward|` over the nodes.
    pub representation_gap: f64,
}

/// `d_ℓ = ℓ⁻⁴`.
pub fn default_d_ell(ell: f64) -> f64 {
    ell.powi(-4)
}

/// Builds `F₀`, `K₀` and `ℓ̄` with `d_ℓ = ℓ⁻⁴`.
pub fn build_cost_function(sol: &Effective1DSolution) -> Result<CostFunctionData> {
    build_cost_function_with(sol, default_d_ell(sol.ell))
}

pub fn build_cost_function_with(sol: &Effective1DSolution, d_ell: f64) -> Result<CostFunctionData> {
    if sol.degenerate || sol.f0.is_zero() {
        return Err(Error::DegenerateMinimizer { b: sol.b });
    }
    let grid = sol.f0.grid;
    let n = grid.n;
    let a = sol.alpha0;
    let t = grid.nodes();
    // Exact per-element integrals of the Hermite interpolant by 5-point Gauss quadrature.
    let h = grid.h();
    let element: Vec<f64> = (0..n - 1)
        .map(|e| {
            let t0 = t[e];
            gauss5(|x| {
                let tt = t0 + x * h;
                let f = sol.f0.eval(tt);
                2.0 * (tt + a) * f * f
            }) * h
        })
        .collect();
    let mut f_forward = vec![0.0; n];
    for e in 0..n - 1 {
        f_forward[e + 1] = f_forward[e] + element[e];
    }
    let mut f_backward = vec![0.0; n];
    for e in (0..n - 1).rev() {
        f_backward[e] = f_backward[e + 1] - element[e];
    }
    let t_split = sol.t_max;
    let big_f0: Vec<f64> = (0..n).map(|i| if t[i] <= t_split { f_forward[i] } else { f_backward[i] }).collect();
    let f0 = sol.f0.values.clone();
    let k0: Vec<f64> = (0..n).map(|i| (1.0 - d_ell) * f0[i] * f0[i] + big_f0[i]).collect();
    let representation_gap = f_forward.iter().zip(&f_backward).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let ell_bar = ell_bar(&t, &f0, sol.ell);
    Ok(CostFunctionData {
        b: sol.b,
        ell: sol.ell,
        alpha0: a,
        t,
        f0,
        f_forward,
        f_backward,
        big_f0,
        k0,
        d_ell,
        ell_bar,
        representation_gap,
    })
}

fn gauss5(f: impl Fn(f64) -> f64) -> f64 {
    const X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    const W: [f64; 5] = [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];
    X.iter().zip(W).map(|(x, w)| 0.5 * w * f(0.5 * (1.0 + x))).sum()
}

/// `sup{t : f(t) ≥ ℓ³ f(ℓ)}`, scanning from the right.
fn ell_bar(t: &[f64], f: &[f64], ell: f64) -> f64 {
    let n = t.len();
    let level = ell.powi(3) * f[n - 1];
    for i in (0..n).rev() {
        if f[i] >= level {
            return t[i];
        }
    }
    t[0]
}

impl CostFunctionData {
    /// Index range of the nodes in `I_ℓ̄ = [0, ℓ̄]`.
    fn interval_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.t.len()).filter(move |&i| self.t[i] <= self.ell_bar)
    }

    /// Rows `t, F₀, K₀`.
    pub fn csv(&self) -> String {
        let mut s = String::from("t,F0,K0\n");
        for i in 0..self.t.len() {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", self.t[i], self.big_f0[i], self.k0[i]));
        }
        s
    }
}

/// Outcome of [`verify_positivity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_k0: f64,
    pub argmin: f64,
    pub argmin_index: usize,
    pub ell_bar: f64,
    pub d_ell: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Slack for quadrature error in the positivity check.
pub const POSITIVITY_SLACK: f64 = -1e-10;

/// Minimum of `K₀` over the nodes of `I_ℓ̄`.
pub fn verify_positivity(data: &CostFunctionData) -> PositivityReport {
    let (idx, min) = data
        .interval_nodes()
        .map(|i| (i, data.k0[i]))
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    PositivityReport {
        min_k0: min,
        argmin: data.t[idx],
        argmin_index: idx,
        ell_bar: data.ell_bar,
        d_ell: data.d_ell,
        threshold: POSITIVITY_SLACK,
        pass: min >= POSITIVITY_SLACK,
    }
}

/// Outcome of [`verify_f0_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `|F₀| ≤ f₀²` at every node of `I_ℓ̄`.
    pub holds_on_interval: bool,
    /// `max |F₀|/f₀²` over `I_ℓ̄`.
    pub max_ratio_interval: f64,
    pub violations: Vec<usize>,
    /// Smallest `C` with `|F₀| ≤ C ℓ f₀²` on the complement of `I_ℓ̄` (0 if empty).
    pub c_complement: f64,
}

pub fn verify_f0_bound(data: &CostFunctionData) -> BoundReport {
    let mut violations = Vec::new();
    let mut max_ratio = 0.0f64;
    let mut c = 0.0f64;
    for i in 0..data.t.len() {
        let f2 = data.f0[i] * data.f0[i];
        let big = data.big_f0[i].abs();
        if data.t[i] <= data.ell_bar {
            if big > f2 {
                violations.push(i);
            }
            if f2 > 0.0 {
                max_ratio = max_ratio.max(big / f2);
            }
        } else if f2 > 0.0 {
            c = c.max(big / (data.ell * f2));
        } else if big > 0.0 {
            c = f64::INFINITY;
        }
    }
    BoundReport { holds_on_interval: violations.is_empty(), max_ratio_interval: max_ratio, violations, c_complement: c }
}

/// Minimum of `K₀` on `I_ℓ̄` for several `d_ℓ`, as `(d_ℓ, min K₀)` pairs.
pub fn d_ell_sensitivity(sol: &Effective1DSolution, d_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    d_values
        .iter()
        .map(|&d| Ok((d, verify_positivity(&build_cost_function_with(sol, d)?).min_k0)))
        .collect()
}
