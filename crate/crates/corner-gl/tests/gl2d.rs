//! 2D functional, gradient and minimizer checks.

use std::f64::consts::PI;

use corner_gl::analysis::star_extension;
use corner_gl::effective1d::{minimize_1d, Effective1DSolution, Grid1D};
use corner_gl::geometry::{Side, WedgeGeometry};
use corner_gl::glsolver::{
    boundary_data, gl_energy, gl_gradient, link_phase, magnetic_potential, minimize_gl, psi_star, ComplexField,
    GlOptions, GlProblem, MultiStart,
};
use corner_gl::mesh::generate_mesh;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sol(ell: f64) -> Effective1DSolution {
    minimize_1d(&Grid1D::new(ell, 1024).unwrap(), 1.5).unwrap()
}

fn opts() -> GlOptions {
    GlOptions { multistart: MultiStart::Never, ..GlOptions::default() }
}

#[test]
fn potential_has_unit_curl() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let e = 1e-3;
    for _ in 0..20 {
        let p = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let dy_ax = (magnetic_potential([p[0], p[1] + e])[0] - magnetic_potential([p[0], p[1] - e])[0]) / (2.0 * e);
        let dx_ay = (magnetic_potential([p[0] + e, p[1]])[1] - magnetic_potential([p[0] - e, p[1]])[1]) / (2.0 * e);
        assert!((dx_ay - dy_ax - 1.0).abs() < 1e-10);
        // Radial component vanishes.
        let a = magnetic_potential(p);
        assert!((a[0] * p[0] + a[1] * p[1]).abs() < 1e-12);
    }
    assert_eq!(magnetic_potential([1.0, 0.0]), [0.0, 0.5]);
    // The link phase is the line integral of F along the segment.
    let (p, q) = ([0.3, -1.2], [1.7, 0.4]);
    let mid = magnetic_potential([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]);
    assert!((link_phase(p, q) - (mid[0] * (q[0] - p[0]) + mid[1] * (q[1] - p[1]))).abs() < 1e-14);
}

#[test]
fn boundary_data_values() {
    let s = sol(10.0);
    let g = WedgeGeometry::new(PI - 0.2, 12.0, 10.0, 0.0).unwrap();
    let at_b = boundary_data(&g, &s, g.b).unwrap();
    let expected = Complex64::from_polar(s.f0_at_0, -s.alpha0 * 12.0);
    assert!((at_b - expected).norm() < 1e-12);
    for p in [g.d, g.e, [0.5 * (g.d[0] + g.e[0]), 10.0], g.c] {
        assert!(boundary_data(&g, &s, p).unwrap().norm() <= 1e-10);
    }
    assert!(boundary_data(&g, &s, [0.0, -1.0]).is_err());
    // At D both patch formulas apply; the plus convention is used and the mismatch is weighted by f₀(ℓ).
    assert!(g.map_coordinates(g.d).is_ok());
    let plus = psi_star(g.to_patch(corner_gl::geometry::Patch::Plus, g.d), &s);
    let minus = psi_star(g.to_patch(corner_gl::geometry::Patch::Minus, g.d), &s);
    assert!((plus - minus).norm() <= 2.0 * s.f0.eval(10.0));
}

fn random_field(n: usize, rng: &mut ChaCha8Rng) -> ComplexField {
    ComplexField { values: (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect() }
}

#[test]
fn gradient_matches_central_differences() {
    let s = sol(6.0);
    let g = WedgeGeometry::new(PI - 0.2, 8.0, 6.0, 0.2).unwrap();
    let m = generate_mesh(&g, 0.5).unwrap();
    let p = GlProblem::new(&m, 1.5).with_boundary_data(&m, &s);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut psi = random_field(m.nodes.len(), &mut rng);
    p.impose(&mut psi);
    let grad = gl_gradient(&p, &psi);
    for _ in 0..20 {
        let mut dir = random_field(m.nodes.len(), &mut rng);
        for (d, &fixed) in dir.values.iter_mut().zip(&p.dirichlet) {
            if fixed {
                *d = Complex64::new(0.0, 0.0);
            }
        }
        let eps = 1e-5;
        let shifted = |sign: f64| ComplexField {
            values: psi.values.iter().zip(&dir.values).map(|(z, d)| z + d * (sign * eps)).collect(),
        };
        let fd = (gl_energy(&p, &shifted(1.0)).total - gl_energy(&p, &shifted(-1.0)).total) / (2.0 * eps);
        let an: f64 = grad.values.iter().zip(&dir.values).map(|(g, d)| g.re * d.re + g.im * d.im).sum();
        assert!((fd - an).abs() <= 1e-6 * an.abs(), "{fd} vs {an}");
    }
}

#[test]
fn global_phase_leaves_the_energy_unchanged() {
    let s = sol(6.0);
    let g = WedgeGeometry::new(PI + 0.2, 8.0, 6.0, 0.2).unwrap();
    let m = generate_mesh(&g, 0.25).unwrap();
    let mut p = GlProblem::new(&m, 1.5).with_boundary_data(&m, &s);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut psi = random_field(m.nodes.len(), &mut rng);
    p.impose(&mut psi);
    let e0 = gl_energy(&p, &psi).total;
    let rot = Complex64::from_polar(1.0, 1.234);
    for z in p.boundary.iter_mut() {
        *z *= rot;
    }
    let mut rotated = ComplexField { values: psi.values.iter().map(|z| z * rot).collect() };
    p.impose(&mut rotated);
    assert!((gl_energy(&p, &rotated).total - e0).abs() <= 1e-12 * e0.abs());
}

#[test]
fn strip_energy_of_star_extension_converges_at_second_order() {
    let s = sol(6.0);
    let g = WedgeGeometry::new(PI, 8.0, 6.0, 0.0).unwrap();
    let exact = 16.0 * s.e1d;
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let m = generate_mesh(&g, h).unwrap();
            gl_energy(&GlProblem::new(&m, 1.5), &star_extension(&m, &s)).total - exact
        })
        .collect();
    assert!(errs[2].abs() < 5e-4, "{errs:?}");
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}, errors {errs:?}");
    }
}

#[test]
fn flat_angle_has_no_corner_energy() {
    let s = sol(6.0);
    let g = WedgeGeometry::new(PI, 8.0, 6.0, 0.0).unwrap();
    let mut prev = f64::INFINITY;
    for h in [0.2, 0.1] {
        let m = generate_mesh(&g, h).unwrap();
        let (psi, r) = minimize_gl(&g, &m, &s, 1.5, &opts()).unwrap();
        assert!(r.converged && r.grad_norm <= 1e-8 * (r.n_free as f64).sqrt());
        assert!(r.e_corner.abs() <= 5e-2);
        assert!(r.e_corner.abs() < prev / 3.0);
        prev = r.e_corner.abs();
        assert!(r.e_gamma <= r.e_initial);
        assert!(psi.max_modulus() <= 1.0 + 5.0 * h);
        let p = GlProblem::new(&m, 1.5).with_boundary_data(&m, &s);
        for i in 0..m.nodes.len() {
            if p.dirichlet[i] {
                assert_eq!(psi.values[i], p.boundary[i]);
            }
        }
        assert!((r.kinetic + r.potential - r.e_gamma).abs() < 1e-14);
    }
}

#[test]
fn acute_corner_energy_is_close_to_the_prediction() {
    let s = sol(6.0);
    let ecorr = s.ecorr.unwrap();
    for side in [Side::Minus, Side::Plus] {
        let g = WedgeGeometry::from_deficit(0.2, side, 8.0, 6.0, 0.2f64.powf(2.0 / 3.0)).unwrap();
        let m = generate_mesh(&g, 0.1).unwrap();
        let (_, r) = minimize_gl(&g, &m, &s, 1.5, &opts()).unwrap();
        let predicted = -g.deficit * ecorr;
        assert!(r.e_corner.signum() == predicted.signum());
        assert!((r.e_corner - predicted).abs() <= 0.25 * predicted.abs(), "{side:?}: {} vs {predicted}", r.e_corner);
    }
}

#[test]
fn multistart_reports_every_descent() {
    let s = sol(6.0);
    let g = WedgeGeometry::new(PI - 0.2, 8.0, 6.0, 0.2f64.powf(2.0 / 3.0)).unwrap();
    let m = generate_mesh(&g, 0.2).unwrap();
    let o = GlOptions { multistart: MultiStart::Always, ..GlOptions::default() };
    let (_, r) = minimize_gl(&g, &m, &s, 1.5, &o).unwrap();
    assert_eq!(r.starts.len(), 3);
    let best = r.starts.iter().map(|d| d.e_gamma).fold(f64::INFINITY, f64::min);
    assert_eq!(r.e_gamma, best);
    assert!(r.multiplicity >= 1);
    assert!(r.starts.iter().all(|d| d.e_gamma <= d.e_initial));
}

#[test]
fn mismatched_inputs_are_rejected() {
    let s = sol(6.0);
    let g = WedgeGeometry::new(PI, 8.0, 5.0, 0.0).unwrap();
    let m = generate_mesh(&g, 0.5).unwrap();
    assert!(minimize_gl(&g, &m, &s, 1.5, &opts()).is_err());
    let g = WedgeGeometry::new(PI, 8.0, 6.0, 0.0).unwrap();
    let m = generate_mesh(&g, 0.5).unwrap();
    assert!(minimize_gl(&g, &m, &s, 1.3, &opts()).is_err());
}

#[test]
fn checkpoint_lists_every_node() {
    let f = ComplexField { values: vec![Complex64::new(1.0, -0.5); 3] };
    let c = f.checkpoint();
    assert_eq!(c.lines().count(), 4);
    assert!(c.starts_with("id,re,im\n0,1.0000000000000000e0,-5.0000000000000000e-1"));
}
