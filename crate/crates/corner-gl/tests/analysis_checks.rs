//! Trial state, splitting identity, decay fits and the deficit sweep.

use std::f64::consts::PI;

use corner_gl::analysis::{
    agmon_fit, conjecture_sweep, gamma_sweep, splitting_diagnostic, star_extension, trial_energy, trial_state,
    SweepSpec,
};
use corner_gl::effective1d::{minimize_1d, Effective1DSolution, Grid1D};
use corner_gl::geometry::{Patch, PolarCoords, Side, WedgeGeometry};
use corner_gl::glsolver::{minimize_gl, ComplexField, GlOptions, MultiStart};
use corner_gl::mesh::generate_mesh;
use corner_gl::Error;
use num_complex::Complex64;

fn sol() -> Effective1DSolution {
    minimize_1d(&Grid1D::new(6.0, 1024).unwrap(), 1.5).unwrap()
}

fn opts() -> GlOptions {
    GlOptions { multistart: MultiStart::Never, ..GlOptions::default() }
}

#[test]
fn trial_state_glues_continuously() {
    let s = sol();
    for (beta, gamma) in [(PI - 0.2, 0.342), (PI + 0.25, 0.4), (PI, 0.3), (PI - 0.1, 0.05)] {
        let g = WedgeGeometry::new(beta, 8.0, 6.0, 0.0).unwrap();
        let t = trial_state(&g, &s, gamma).unwrap();
        assert!(t.phase_mismatch(500) <= 1e-10);
        // Modulus depends only on the patch normal coordinate, continuous across the bisectrix.
        let bis = g.bisectrix();
        for r in [0.5, 2.0, 4.0, 6.0] {
            let p = [r * bis[0], r * bis[1]];
            let tp = g.to_patch(Patch::Plus, p).t;
            let tm = g.to_patch(Patch::Minus, p).t;
            assert!((s.f0.eval(tp) - s.f0.eval(tm)).abs() <= 1e-12);
            assert!((t.eval(p).unwrap().norm() - s.f0.eval(tp)).abs() <= 1e-12);
        }
        // Total phase variation across the transition sector is O(δ + γ).
        let delta = (PI - beta).abs();
        for rho in [1.0, 3.0] {
            let jump = t.xi(PolarCoords { rho, theta: t.geom.theta_gt }) - t.xi(PolarCoords { rho, theta: t.geom.theta_lt });
            assert!(jump.abs() <= (delta + gamma) * rho * (s.alpha0.abs() + rho / 2.0) + 1e-12);
        }
    }
    assert!(matches!(
        trial_state(&WedgeGeometry::new(PI, 8.0, 6.0, 0.0).unwrap(), &s, 2.0),
        Err(Error::InvalidGeometry(_))
    ));
}

#[test]
fn flat_transition_phase_matches_the_strip_current() {
    let s = sol();
    let g = WedgeGeometry::new(PI, 8.0, 6.0, 0.0).unwrap();
    for gamma in [0.2, 0.1, 0.05] {
        let t = trial_state(&g, &s, gamma).unwrap();
        for rho in [1.0, 2.5, 4.0] {
            let e = 1e-6;
            let th = PI / 2.0;
            let d = (t.xi(PolarCoords { rho, theta: th + e }) - t.xi(PolarCoords { rho, theta: th - e })) / (2.0 * e * rho);
            // (2/γ)(α₀ sin(γ/2) + (ρ/4) sin γ) = α₀ + ρ/2 − γ²(α₀/24 + ρ/12) + O(γ⁴).
            let bound = gamma * gamma * (s.alpha0.abs() / 24.0 + rho / 12.0) * 1.01;
            assert!((d - (rho / 2.0 + s.alpha0)).abs() <= bound, "γ {gamma} ρ {rho}: {d}");
        }
    }
}

#[test]
fn trial_energy_on_the_strip_and_near_flat_angles() {
    let s = sol();
    let ecorr = s.ecorr.unwrap();
    let g = WedgeGeometry::new(PI, 8.0, 6.0, 0.0).unwrap();
    let m = generate_mesh(&g, 0.1).unwrap();
    let e = trial_energy(&trial_state(&g, &s, 0.0).unwrap(), &m, 1.5).unwrap();
    assert!((e - 16.0 * s.e1d).abs() < 1e-9);

    let g = WedgeGeometry::new(PI - 0.2, 8.0, 6.0, 0.0).unwrap();
    let gamma = 0.2f64.powf(2.0 / 3.0);
    let m = generate_mesh(&g, 0.1).unwrap();
    let corner = trial_energy(&trial_state(&g, &s, gamma).unwrap(), &m, 1.5).unwrap() - 16.0 * s.e1d;
    assert!((corner + 0.2 * ecorr).abs() <= 0.3 * 0.2 * ecorr, "{corner}");
    // Quadrature of the exact trial state does not depend on the mesh.
    let fine = generate_mesh(&g, 0.05).unwrap();
    let corner_fine = trial_energy(&trial_state(&g, &s, gamma).unwrap(), &fine, 1.5).unwrap() - 16.0 * s.e1d;
    assert!((corner - corner_fine).abs() < 1e-5);
}

#[test]
fn gamma_sweep_bounds_the_minimizer() {
    let s = sol();
    let delta = 0.2f64;
    let g = WedgeGeometry::new(PI - delta, 8.0, 6.0, delta.powf(2.0 / 3.0)).unwrap();
    let m = generate_mesh(&g, 0.1).unwrap();
    let gammas: Vec<f64> = (1..=16).map(|k| 0.05 * k as f64).collect();
    let sweep = gamma_sweep(&g, &m, &s, &gammas).unwrap();
    let (best, _) = sweep.iter().copied().fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    // Empirical optimum 0.6, within a constant factor of δ^{2/3} ≈ 0.34.
    assert!((best - 0.6).abs() < 0.051, "optimum at {best}");
    let (_, r) = minimize_gl(&g, &m, &s, 1.5, &opts()).unwrap();
    assert!(sweep.iter().all(|&(_, e)| r.e_gamma <= e));
}

#[test]
fn splitting_of_a_minimizer() {
    let s = sol();
    let delta = 0.2;
    let g = WedgeGeometry::new(PI - delta, 8.0, 6.0, 0.2f64.powf(2.0 / 3.0)).unwrap();
    let mut discrete = Vec::new();
    for h in [0.1, 0.05] {
        let m = generate_mesh(&g, h).unwrap();
        let (psi, _) = minimize_gl(&g, &m, &s, 1.5, &opts()).unwrap();
        let r = splitting_diagnostic(&psi, &g, &m, &s, 1.5).unwrap();
        assert_eq!(r.masked_nodes, 0);
        assert!(r.bisectrix_modulus_gap <= 1e-10);
        assert!(r.e0_quartic_penalty >= 0.0);
        assert!(r.e0_u >= r.e0_lower_bound - 1e-3, "{} vs {}", r.e0_u, r.e0_lower_bound);
        // With the bisectrix terms the identity holds to quadrature accuracy.
        assert!(r.corrected_residual <= 1e-5, "{}", r.corrected_residual);
        // Without them it is off by about tan(δ/2) f₀(0)² / |G|.
        let expected = (delta / 2.0).tan() * s.f0_at_0.powi(2);
        // |u| exceeds 1 near the vertex, which enlarges the term somewhat.
        assert!(r.bisectrix_term < 0.0 && (r.bisectrix_term + expected).abs() <= 0.3 * expected, "{} vs {expected}", r.bisectrix_term);
        assert!(r.identity_residual > 0.1);
        discrete.push(r.discrete_residual);
    }
    let order = (discrete[0] / discrete[1]).log2();
    assert!((1.8..=2.2).contains(&order), "{discrete:?}");
}

#[test]
fn decay_fits() {
    let s = sol();
    let g = WedgeGeometry::new(PI - 0.2, 8.0, 6.0, 0.2f64.powf(2.0 / 3.0)).unwrap();
    let m = generate_mesh(&g, 0.1).unwrap();
    let (psi, _) = minimize_gl(&g, &m, &s, 1.5, &opts()).unwrap();
    let fit = agmon_fit(&psi, &g, &m, &s).unwrap();
    assert!(fit.c_fit > 0.0);
    assert!(fit.far_ratio <= 1e-2);
    // The decay is Gaussian rather than exponential, so a line leaves a residual of about half a log unit.
    assert!(fit.residual < 0.7, "{}", fit.residual);

    let star = agmon_fit(&star_extension(&m, &s), &g, &m, &s).unwrap();
    assert!(star.c_fit > 0.0);
    let slope = |t: f64| {
        let e = 1e-4;
        -(s.f0.eval(t + e).ln() - s.f0.eval(t - e).ln()) / (2.0 * e)
    };
    assert!(slope(2.0) < slope(3.0) && slope(3.0) < slope(4.0));

    let flat = ComplexField { values: vec![Complex64::new(0.5, 0.0); m.nodes.len()] };
    match agmon_fit(&flat, &g, &m, &s) {
        Ok(f) => assert!(f.c_fit.abs() < 1e-12),
        Err(e) => assert!(matches!(e, Error::InsufficientRange(_))),
    }
}

#[test]
fn coarse_sweep() {
    let s = sol();
    let ecorr = s.ecorr.unwrap();
    let spec = SweepSpec {
        b: 1.5,
        deltas: vec![0.0, 0.1, 0.15, 0.2, 0.25],
        sides: vec![Side::Minus, Side::Plus],
        l: 8.0,
        ell: 6.0,
        h: 0.1,
    };
    let r = conjecture_sweep(&spec, &s, &GlOptions::default()).unwrap();
    assert_eq!(r.rows.len(), 9);
    assert!(r.rows.windows(2).all(|w| w[0].beta < w[1].beta));
    assert!(r.rows.iter().all(|row| row.error.is_none() && row.converged));
    assert!(r.signs_consistent);
    for f in [r.fit_minus.as_ref().unwrap(), r.fit_plus.as_ref().unwrap()] {
        assert!(f.rel_error <= 0.25, "{f:?}");
    }
    let flat = r.rows.iter().find(|row| row.delta == 0.0).unwrap();
    assert!(flat.e_corner.abs() <= 1e-2);
    for d in [0.1, 0.15, 0.2, 0.25] {
        let get = |side| r.rows.iter().find(|row| row.delta == d && row.side == side).unwrap().e_corner;
        let (m, p) = (get(Side::Minus), get(Side::Plus));
        assert!((m + p).abs() <= 0.3 * m.abs() + 1e-2);
    }
    assert!(r.rows.iter().all(|row| row.e_gamma <= row.e_trial_discrete));
    assert_eq!(r.csv().lines().count(), 10);
    assert!((r.ecorr_reference - ecorr).abs() == 0.0);
    assert_eq!(r.remainders.len(), 8);

    let bad = SweepSpec { deltas: vec![0.5], ..spec };
    assert!(conjecture_sweep(&bad, &s, &GlOptions::default()).is_err());
}
