//! Structured triangulation of the wedge.
//!
//! Each patch is a mapped grid of `Nt` rows in `t` and `Ns` columns in `s`;
//! the two grids share their column along the bisectrix. Node `(k, j)` with
//! `k ∈ 0..=Nt` and `j ∈ 0..=2Ns` has index `k (2Ns + 1) + j`; columns
//! `j < Ns` are in the minus patch, `j ≥ Ns` in the plus patch.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Patch, PatchCoords, Point, WedgeGeometry};

/// Classification of mesh edges on the polygon boundary and the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeTag {
    /// `VA ∪ VB`.
    Out,
    /// `CD ∪ DE`.
    In,
    /// `AC ∪ EB`.
    Bd,
    /// Interior edges on the bisectrix.
    Bis,
}

impl EdgeTag {
    pub fn name(self) -> &'static str {
        match self {
            EdgeTag::Out => "out",
            EdgeTag::In => "in",
            EdgeTag::Bd => "bd",
            EdgeTag::Bis => "bis",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub tagged_edges: Vec<(usize, usize, EdgeTag)>,
    /// Patch coordinates of every node; bisectrix nodes use the plus patch.
    pub coords: Vec<PatchCoords>,
    pub h: f64,
    pub nt: usize,
    pub ns: usize,
}

fn min_angle(p: [Point; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let a = p[k];
            let b = p[(k + 1) % 3];
            let c = p[(k + 2) % 3];
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Minimum allowed interior angle.
pub const MIN_ANGLE_DEG: f64 = 20.0;

/// Meshes the wedge with target edge length `h ≤ ℓ/8`.
pub fn generate_mesh(geom: &WedgeGeometry, h: f64) -> Result<Mesh> {
    if !(h > 0.0) || h > geom.ell / 8.0 + 1e-12 {
        return Err(Error::MeshFailure(format!("h = {h} must lie in (0, ℓ/8 = {}]", geom.ell / 8.0)));
    }
    let nt = (geom.ell / h - 1e-9).ceil() as usize;
    let ns = (geom.l / h - 1e-9).ceil() as usize;
    let cols = 2 * ns + 1;
    let tan_half = (geom.deficit / 2.0).tan();
    let mut nodes = Vec::with_capacity((nt + 1) * cols);
    let mut coords = Vec::with_capacity((nt + 1) * cols);
    for k in 0..=nt {
        let t = if k == nt { geom.ell } else { k as f64 * geom.ell / nt as f64 };
        let s_bis = t * tan_half;
        for j in 0..cols {
            let pc = if j < ns {
                let u = j as f64 / ns as f64;
                PatchCoords { patch: Patch::Minus, s: -geom.l + u * (geom.l - s_bis), t }
            } else {
                let u = (j - ns) as f64 / ns as f64;
                let s = if j == cols - 1 { geom.l } else { s_bis + u * (geom.l - s_bis) };
                PatchCoords { patch: Patch::Plus, s, t }
            };
            nodes.push(geom.from_patch(pc));
            coords.push(pc);
        }
    }
    let id = |k: usize, j: usize| k * cols + j;
    let mut triangles = Vec::with_capacity(2 * nt * (cols - 1));
    let min_allowed = MIN_ANGLE_DEG.to_radians();
    for k in 0..nt {
        for j in 0..cols - 1 {
            let (p00, p01, p10, p11) = (id(k, j), id(k, j + 1), id(k + 1, j), id(k + 1, j + 1));
            let main = [[p00, p01, p11], [p00, p11, p10]];
            let anti = [[p00, p01, p10], [p01, p11, p10]];
            let quality = |tris: &[[usize; 3]; 2]| {
                tris.iter().map(|t| min_angle([nodes[t[0]], nodes[t[1]], nodes[t[2]]])).fold(f64::INFINITY, f64::min)
            };
            let (qm, qa) = (quality(&main), quality(&anti));
            // Mirror-symmetric default across the bisectrix when both splits are equally good.
            let prefer_main = if (qm - qa).abs() > 1e-9 { qm > qa } else { j >= ns };
            let chosen = if prefer_main { main } else { anti };
            for mut tri in chosen {
                let [a, b, c] = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
                let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                if area2 <= 0.0 {
                    tri.swap(1, 2);
                }
                if min_angle([a, b, c]) < min_allowed {
                    return Err(Error::MeshFailure(format!(
                        "triangle near ({:.3}, {:.3}) has an angle below {MIN_ANGLE_DEG}°",
                        a[0], a[1]
                    )));
                }
                triangles.push(tri);
            }
        }
    }
    let mut tagged_edges = Vec::new();
    for j in 0..cols - 1 {
        tagged_edges.push((id(0, j), id(0, j + 1), EdgeTag::Out));
        tagged_edges.push((id(nt, j), id(nt, j + 1), EdgeTag::In));
    }
    for k in 0..nt {
        tagged_edges.push((id(k, 0), id(k + 1, 0), EdgeTag::Bd));
        tagged_edges.push((id(k, cols - 1), id(k + 1, cols - 1), EdgeTag::Bd));
        tagged_edges.push((id(k, ns), id(k + 1, ns), EdgeTag::Bis));
    }
    Ok(Mesh { nodes, triangles, tagged_edges, coords, h, nt, ns })
}

impl Mesh {
    pub fn cols(&self) -> usize {
        2 * self.ns + 1
    }

    pub fn index(&self, k: usize, j: usize) -> usize {
        k * self.cols() + j
    }

    pub fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        let [a, b, c] = [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]];
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| self.triangle_area(t)).sum()
    }

    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| min_angle([self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]))
            .fold(f64::INFINITY, f64::min)
            .to_degrees()
    }

    /// Nodes carrying Dirichlet data: those on `in` or `bd` edges.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        for &(a, b, tag) in &self.tagged_edges {
            if matches!(tag, EdgeTag::In | EdgeTag::Bd) {
                mask[a] = true;
                mask[b] = true;
            }
        }
        mask
    }

    /// Indices of the bisectrix column, from the vertex to `D`.
    pub fn bisectrix_nodes(&self) -> Vec<usize> {
        (0..=self.nt).map(|k| self.index(k, self.ns)).collect()
    }

    /// Plain-text export: node, triangle and tagged-edge tables.
    ///
    /// ```text
    /// # corner-gl mesh v1
    /// nodes <N>
    /// <id> <x> <y>
    /// triangles <M>
    /// <id> <a> <b> <c>
    /// edges <K>
    /// <a> <b> <tag>
    /// ```
    pub fn to_text(&self) -> String {
        let mut s = String::from("# corner-gl mesh v1\n");
        writeln!(s, "nodes {}", self.nodes.len()).unwrap();
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(s, "{i} {:.16e} {:.16e}", p[0], p[1]).unwrap();
        }
        writeln!(s, "triangles {}", self.triangles.len()).unwrap();
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(s, "{i} {} {} {}", t[0], t[1], t[2]).unwrap();
        }
        writeln!(s, "edges {}", self.tagged_edges.len()).unwrap();
        for (a, b, tag) in &self.tagged_edges {
            writeln!(s, "{a} {b} {}", tag.name()).unwrap();
        }
        s
    }

    /// Legacy VTK unstructured grid, optionally with `|ψ|` and `arg ψ` as point data.
    pub fn to_vtk(&self, field: Option<&[Complex64]>) -> String {
        let mut s = String::from("# vtk DataFile Version 3.0\ncorner-gl wedge mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
        writeln!(s, "POINTS {} double", self.nodes.len()).unwrap();
        for p in &self.nodes {
            writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]).unwrap();
        }
        writeln!(s, "CELLS {} {}", self.triangles.len(), 4 * self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
        }
        writeln!(s, "CELL_TYPES {}", self.triangles.len()).unwrap();
        for _ in &self.triangles {
            s.push_str("5\n");
        }
        if let Some(psi) = field {
            writeln!(s, "POINT_DATA {}", self.nodes.len()).unwrap();
            s.push_str("SCALARS modulus double 1\nLOOKUP_TABLE default\n");
            for z in psi {
                writeln!(s, "{:.16e}", z.norm()).unwrap();
            }
            s.push_str("SCALARS phase double 1\nLOOKUP_TABLE default\n");
            for z in psi {
                writeln!(s, "{:.16e}", z.arg()).unwrap();
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn strip_node_count() {
        let g = WedgeGeometry::new(PI, 8.0, 4.0, 0.0).unwrap();
        let m = generate_mesh(&g, 0.5).unwrap();
        assert_eq!(m.nodes.len(), (2 * 16 + 1) * (8 + 1));
        assert!((m.area() - 64.0).abs() < 1e-10 * 64.0);
    }

    #[test]
    fn wedge_mesh_quality_and_area() {
        for beta in [PI - 0.25, PI + 0.25] {
            let g = WedgeGeometry::new(beta, 8.0, 6.0, 0.1).unwrap();
            let m = generate_mesh(&g, 0.25).unwrap();
            assert!(m.min_angle_deg() >= MIN_ANGLE_DEG);
            assert!((m.area() - g.area()).abs() < 1e-10 * g.area());
            assert!(m.triangles.iter().all(|t| m.triangle_area(t) > 0.0));
        }
    }

    #[test]
    fn rejects_coarse_h() {
        let g = WedgeGeometry::new(PI, 8.0, 4.0, 0.0).unwrap();
        assert!(matches!(generate_mesh(&g, 1.0), Err(Error::MeshFailure(_))));
    }

    #[test]
    fn text_export_has_all_tables() {
        let g = WedgeGeometry::new(PI - 0.2, 4.0, 2.0, 0.1).unwrap();
        let m = generate_mesh(&g, 0.25).unwrap();
        let txt = m.to_text();
        assert!(txt.contains(&format!("nodes {}", m.nodes.len())));
        assert!(txt.contains(&format!("triangles {}", m.triangles.len())));
        assert!(txt.contains(" bis\n"));
    }
}
