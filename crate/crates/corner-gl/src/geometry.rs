//! The wedge `Γ_β(L, ℓ)` and its coordinate systems.
//!
//! The first outer side runs from the vertex `V = 0` to `B = (L, 0)`; the
//! second from `V` to `A = L(cos β, sin β)`. The layer of width `ℓ` along both
//! sides is cut by the inner offset lines, which meet at `D` on the
//! bisectrix, and by the segments `AC` and `EB` normal to the sides.
//!
//! With the signed deficit `d = π − β`, the plus patch (next to `VB`) uses
//! `s = x, t = y` and the minus patch (next to `VA`) uses the rotated frame
//! `s = x cos d − y sin d, t = x sin d + y cos d`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Which side of the flat angle the wedge lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Acute side, `β = π − δ`.
    Minus,
    /// Obtuse side, `β = π + δ`.
    Plus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

/// Tubular patch containing a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Patch {
    Plus,
    Minus,
}

/// Tangential and normal coordinates in a patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchCoords {
    pub patch: Patch,
    pub s: f64,
    pub t: f64,
}

/// Polar coordinates with the angle measured from the first outer side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarCoords {
    pub rho: f64,
    pub theta: f64,
}

/// Wedge polygon with its angles and vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeGeometry {
    pub beta: f64,
    /// Signed deficit `π − β`.
    pub deficit: f64,
    pub l: f64,
    pub ell: f64,
    pub gamma: f64,
    pub v: Point,
    pub b: Point,
    pub e: Point,
    pub d: Point,
    pub c: Point,
    pub a: Point,
    pub theta_bis: f64,
    pub theta_lt: f64,
    pub theta_gt: f64,
}

const TOL: f64 = 1e-9;

impl WedgeGeometry {
    /// Builds the wedge with opening angle `beta`.
    ///
    /// `gamma = 0` is allowed and means the transition sectors are empty.
    pub fn new(beta: f64, l: f64, ell: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0 * PI) {
            return Err(Error::InvalidGeometry(format!("opening angle {beta} outside (0, 2π)")));
        }
        if !(l > 0.0 && ell > 0.0) || !l.is_finite() || !ell.is_finite() {
            return Err(Error::InvalidGeometry(format!("side length {l} and width {ell} must be positive")));
        }
        if !(gamma >= 0.0 && gamma < beta / 2.0) {
            return Err(Error::InvalidGeometry(format!("gamma = {gamma} outside [0, β/2)")));
        }
        let d = PI - beta;
        // The inner corner D sits at s = ℓ tan(d/2) on the plus side; it must stay before E.
        let dx = ell * (d / 2.0).tan();
        if beta < PI && dx >= l {
            return Err(Error::InvalidGeometry(format!(
                "ℓ = {ell} exceeds tan(β/2)·L = {}",
                (beta / 2.0).tan() * l
            )));
        }
        let a = [l * beta.cos(), l * beta.sin()];
        let c = [a[0] + ell * d.sin(), a[1] + ell * d.cos()];
        Ok(WedgeGeometry {
            beta,
            deficit: d,
            l,
            ell,
            gamma,
            v: [0.0, 0.0],
            b: [l, 0.0],
            e: [l, ell],
            d: [dx, ell],
            c,
            a,
            theta_bis: beta / 2.0,
            theta_lt: (beta - gamma) / 2.0,
            theta_gt: (beta + gamma) / 2.0,
        })
    }

    /// `β = π − δ` for [`Side::Minus`], `π + δ` for [`Side::Plus`].
    pub fn from_deficit(delta: f64, side: Side, l: f64, ell: f64, gamma: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::InvalidGeometry(format!("delta = {delta} must be nonnegative")));
        }
        Self::new(PI + side.sign() * delta, l, ell, gamma)
    }

    pub fn delta(&self) -> f64 {
        self.deficit.abs()
    }

    /// Polygon vertices in counterclockwise order `V, B, E, D, C, A`.
    pub fn polygon(&self) -> [Point; 6] {
        [self.v, self.b, self.e, self.d, self.c, self.a]
    }

    /// Shoelace area of the polygon.
    pub fn area(&self) -> f64 {
        let p = self.polygon();
        0.5 * (0..6).map(|i| cross(p[i], p[(i + 1) % 6])).sum::<f64>()
    }

    /// `2Lℓ − ℓ² tan(d/2)` from the offset construction.
    pub fn area_formula(&self) -> f64 {
        2.0 * self.l * self.ell - self.ell * self.ell * (self.deficit / 2.0).tan()
    }

    /// Unit vector along the bisectrix.
    pub fn bisectrix(&self) -> Point {
        [self.theta_bis.cos(), self.theta_bis.sin()]
    }

    /// Patch coordinates of a Cartesian point in the given patch frame.
    pub fn to_patch(&self, patch: Patch, p: Point) -> PatchCoords {
        let (x, y) = (p[0], p[1]);
        match patch {
            Patch::Plus => PatchCoords { patch, s: x, t: y },
            Patch::Minus => {
                let (sd, cd) = self.deficit.sin_cos();
                PatchCoords { patch, s: x * cd - y * sd, t: x * sd + y * cd }
            }
        }
    }

    /// Inverse of [`to_patch`](Self::to_patch).
    pub fn from_patch(&self, pc: PatchCoords) -> Point {
        match pc.patch {
            Patch::Plus => [pc.s, pc.t],
            Patch::Minus => {
                let (sd, cd) = self.deficit.sin_cos();
                [pc.s * cd + pc.t * sd, -pc.s * sd + pc.t * cd]
            }
        }
    }

    /// Patch by side of the bisectrix; points on it belong to the plus patch.
    pub fn patch_of(&self, p: Point) -> Patch {
        if cross(self.bisectrix(), p) <= 0.0 {
            Patch::Plus
        } else {
            Patch::Minus
        }
    }

    /// Polar coordinates, `ϑ ∈ [0, 2π)` measured from the side `VB`.
    pub fn polar(&self, p: Point) -> PolarCoords {
        let rho = p[0].hypot(p[1]);
        let mut theta = p[1].atan2(p[0]);
        if theta < -TOL {
            theta += 2.0 * PI;
        } else if theta < 0.0 {
            theta = 0.0;
        }
        PolarCoords { rho, theta }
    }

    /// Tubular coordinates from polar ones.
    pub fn polar_to_patch(&self, patch: Patch, pc: PolarCoords) -> PatchCoords {
        let phi = match patch {
            Patch::Plus => pc.theta,
            Patch::Minus => pc.theta + self.deficit,
        };
        PatchCoords { patch, s: pc.rho * phi.cos(), t: pc.rho * phi.sin() }
    }

    /// Both coordinate systems at a point of the closed polygon.
    pub fn map_coordinates(&self, p: Point) -> Result<(PatchCoords, PolarCoords)> {
        let patch = self.patch_of(p);
        let pc = self.to_patch(patch, p);
        let scale = self.l.max(self.ell);
        let tol = TOL * scale;
        let inside_t = pc.t >= -tol && pc.t <= self.ell + tol;
        let inside_s = match patch {
            Patch::Plus => pc.s <= self.l + tol,
            Patch::Minus => pc.s >= -self.l - tol,
        };
        if !(inside_t && inside_s) {
            return Err(Error::OutsideDomain { x: p[0], y: p[1] });
        }
        Ok((pc, self.polar(p)))
    }

    /// Distance from `p` to the outer boundary `VA ∪ VB`.
    pub fn dist_to_outer(&self, p: Point) -> f64 {
        seg_dist(p, self.v, self.b).min(seg_dist(p, self.v, self.a))
    }
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let u = if len2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p[0] - a[0] - u * dx).hypot(p[1] - a[1] - u * dy)
}
