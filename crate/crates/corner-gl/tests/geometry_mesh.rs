//! Wedge geometry and mesh checks against independent constructions.

use std::f64::consts::PI;

use corner_gl::geometry::{seg_dist, Patch, Point, Side, WedgeGeometry};
use corner_gl::mesh::{generate_mesh, EdgeTag, MIN_ANGLE_DEG};
use corner_gl::Error;

fn close(p: Point, q: Point, tol: f64) -> bool {
    (p[0] - q[0]).hypot(p[1] - q[1]) <= tol
}

/// Intersection of the lines `p + s u` and `q + t v`.
fn intersect(p: Point, u: Point, q: Point, v: Point) -> Point {
    let det = u[0] * (-v[1]) - u[1] * (-v[0]);
    let rhs = [q[0] - p[0], q[1] - p[1]];
    let s = (rhs[0] * (-v[1]) - rhs[1] * (-v[0])) / det;
    [p[0] + s * u[0], p[1] + s * u[1]]
}

#[test]
fn inner_corner_is_the_intersection_of_the_offset_lines() {
    for (beta, ell) in [(PI - 0.2, 6.0), (PI + 0.2, 6.0), (PI - 0.4, 3.0), (2.5, 2.0), (4.0, 3.0)] {
        let g = WedgeGeometry::new(beta, 8.0, ell, 0.0).unwrap();
        // Offset of VB: y = ℓ. Offset of VA: the line VA shifted by ℓ along its inward normal.
        let dir_a = [beta.cos(), beta.sin()];
        let normal_a = [beta.sin(), -beta.cos()];
        let d = intersect([0.0, ell], [1.0, 0.0], [ell * normal_a[0], ell * normal_a[1]], dir_a);
        assert!(close(g.d, d, 1e-12), "β = {beta}: {:?} vs {d:?}", g.d);
        let half = (PI - beta) / 2.0;
        assert!((d[0].hypot(d[1]) - ell / half.cos()).abs() < 1e-12);
        // C is the foot of A on the offset of VA.
        assert!(close(g.c, [g.a[0] + ell * normal_a[0], g.a[1] + ell * normal_a[1]], 1e-12));
    }
    let g = WedgeGeometry::from_deficit(0.2, Side::Minus, 8.0, 6.0, 0.0).unwrap();
    assert!((g.d[0].hypot(g.d[1]) - 6.0 / 0.1f64.cos()).abs() < 1e-12);
}

#[test]
fn patch_maps_are_isometries_and_agree_on_the_bisectrix() {
    let g = WedgeGeometry::new(PI - 0.3, 8.0, 5.0, 0.2).unwrap();
    let pts: [Point; 4] = [[1.0, 2.0], [-3.0, 4.5], [0.3, 0.1], [5.0, 1.0]];
    for patch in [Patch::Plus, Patch::Minus] {
        for p in pts {
            for q in pts {
                let (a, b) = (g.to_patch(patch, p), g.to_patch(patch, q));
                let d_patch = (a.s - b.s).hypot(a.t - b.t);
                assert!((d_patch - (p[0] - q[0]).hypot(p[1] - q[1])).abs() < 1e-12);
            }
        }
    }
    let bis = g.bisectrix();
    for r in [0.5, 2.0, 5.0] {
        let p = [r * bis[0], r * bis[1]];
        let (plus, minus) = (g.to_patch(Patch::Plus, p), g.to_patch(Patch::Minus, p));
        assert!((plus.t - minus.t).abs() < 1e-12);
        assert!((plus.s + minus.s).abs() < 1e-12, "mirror symmetry of s across the bisectrix");
    }
}

#[test]
fn polar_angles_and_membership() {
    let g = WedgeGeometry::new(PI + 0.3, 8.0, 4.0, 0.2).unwrap();
    assert!((g.theta_lt - (g.beta - 0.2) / 2.0).abs() < 1e-15);
    assert!((g.theta_gt - (g.beta + 0.2) / 2.0).abs() < 1e-15);
    assert!(matches!(g.map_coordinates([0.0, -1.0]), Err(Error::OutsideDomain { .. })));
    assert!(matches!(g.map_coordinates([3.0, 4.5]), Err(Error::OutsideDomain { .. })));
    let (pc, pol) = g.map_coordinates(g.b).unwrap();
    assert_eq!(pc.patch, Patch::Plus);
    assert!((pc.s - 8.0).abs() < 1e-12 && pc.t.abs() < 1e-12 && pol.theta == 0.0);
    let (pc, pol) = g.map_coordinates(g.a).unwrap();
    assert_eq!(pc.patch, Patch::Minus);
    assert!((pc.s + 8.0).abs() < 1e-12 && pc.t.abs() < 1e-12);
    assert!((pol.theta - g.beta).abs() < 1e-12);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(WedgeGeometry::new(0.0, 8.0, 4.0, 0.0).is_err());
    assert!(WedgeGeometry::new(PI, -1.0, 4.0, 0.0).is_err());
    assert!(WedgeGeometry::new(PI, 8.0, 4.0, 2.0).is_err());
    // Beyond ℓ = tan(β/2)·L the inner corner D would pass E.
    let beta = 1.0;
    let ell = (beta / 2.0f64).tan() * 8.0;
    assert!(WedgeGeometry::new(beta, 8.0, 1.001 * ell, 0.0).is_err());
    assert!(WedgeGeometry::new(beta, 8.0, 0.99 * ell, 0.0).is_ok());
}

/// Tags every boundary edge by the polygon side it lies on, independently of the mesh generator.
fn classify(g: &WedgeGeometry, p: Point, q: Point) -> Option<EdgeTag> {
    let on = |a: Point, b: Point| seg_dist(p, a, b) < 1e-9 && seg_dist(q, a, b) < 1e-9;
    if on(g.v, g.b) || on(g.v, g.a) {
        Some(EdgeTag::Out)
    } else if on(g.c, g.d) || on(g.d, g.e) {
        Some(EdgeTag::In)
    } else if on(g.a, g.c) || on(g.e, g.b) {
        Some(EdgeTag::Bd)
    } else {
        None
    }
}

#[test]
fn edge_tags_match_an_independent_classification() {
    for beta in [PI, PI - 0.25, PI + 0.25] {
        let g = WedgeGeometry::new(beta, 4.0, 3.0, 0.1).unwrap();
        let m = generate_mesh(&g, 0.2).unwrap();
        let mut count = std::collections::HashMap::new();
        for t in &m.triangles {
            for k in 0..3 {
                let (a, b) = (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]));
                *count.entry((a, b)).or_insert(0) += 1;
            }
        }
        let boundary: Vec<(usize, usize)> = count.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
        let tagged: std::collections::HashMap<(usize, usize), EdgeTag> = m
            .tagged_edges
            .iter()
            .filter(|e| e.2 != EdgeTag::Bis)
            .map(|&(a, b, t)| ((a.min(b), a.max(b)), t))
            .collect();
        assert_eq!(boundary.len(), tagged.len());
        for (a, b) in boundary {
            let expected = classify(&g, m.nodes[a], m.nodes[b]).expect("boundary edge on the polygon");
            assert_eq!(tagged[&(a, b)], expected);
        }
        let bis = g.bisectrix();
        for &(a, b, t) in &m.tagged_edges {
            if t == EdgeTag::Bis {
                for p in [m.nodes[a], m.nodes[b]] {
                    assert!((bis[0] * p[1] - bis[1] * p[0]).abs() < 1e-12);
                }
                assert_eq!(count[&(a.min(b), a.max(b))], 2, "bisectrix edges are interior");
            }
        }
    }
}

#[test]
fn mesh_covers_the_polygon_with_valid_triangles() {
    for beta in [PI - 0.4, PI - 0.1, PI, PI + 0.1, PI + 0.4] {
        let g = WedgeGeometry::new(beta, 8.0, 6.0, 0.1).unwrap();
        let m = generate_mesh(&g, 0.25).unwrap();
        assert!((m.area() - g.area()).abs() < 1e-10 * g.area());
        assert!(m.min_angle_deg() >= MIN_ANGLE_DEG);
        assert!(m.triangles.iter().all(|t| m.triangle_area(t) > 0.0));
        for (p, pc) in m.nodes.iter().zip(&m.coords) {
            assert!(close(g.from_patch(*pc), *p, 1e-12));
            assert!(g.map_coordinates(*p).is_ok());
        }
    }
}

#[test]
fn mesh_exports() {
    let g = WedgeGeometry::new(PI - 0.2, 4.0, 2.0, 0.1).unwrap();
    let m = generate_mesh(&g, 0.25).unwrap();
    let vtk = m.to_vtk(None);
    assert!(vtk.starts_with("# vtk DataFile"));
    assert!(vtk.contains(&format!("POINTS {} double", m.nodes.len())));
    let txt = m.to_text();
    let n_lines = txt.lines().count();
    assert_eq!(n_lines, 1 + 3 + m.nodes.len() + m.triangles.len() + m.tagged_edges.len());
}
