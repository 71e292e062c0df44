//! Unified LOS/NLOS path-length model.
//!
//! Anchors sit outside the building (y < 0), targets inside (y > 0), and the
//! signal bends around a horizontal window edge on the wall plane Y = 0. The
//! diffraction point on the edge follows from stationarity of the total path
//! length (Fermat), which gives a closed form; with window half-height Δ = 0
//! both edges collapse onto the target's floor plane and the path length
//! reduces to a single expression that equals the Euclidean distance whenever
//! anchor and target share a floor plane.

use crate::error::{Error, Result};
use crate::scene::Vec3;

/// A horizontal window edge, offset ±Δ from the target floor plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Upper,
    Lower,
}

impl Edge {
    /// Sign of the edge offset: +1 for the upper edge, -1 for the lower.
    pub fn sign(self) -> f64 {
        match self {
            Edge::Upper => 1.0,
            Edge::Lower => -1.0,
        }
    }
}

/// Geometry of one anchor→edge→target path at Δ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    /// Diffraction point on the wall plane Y = 0.
    pub diffraction_point: Vec3,
    /// Anchor → diffraction point distance, meters.
    pub d1_m: f64,
    /// Target → diffraction point distance, meters.
    pub d2_m: f64,
    /// Total path length, meters.
    pub path_length_m: f64,
}

/// Anchor strictly outside (y < 0), target strictly inside (y > 0).
fn check_sides(anchor: &Vec3, target: &Vec3) -> Result<()> {
    if !(anchor.y < 0.0 && target.y > 0.0) {
        return Err(Error::Geometry(format!(
            "anchor (y = {}) must be outside the wall plane Y=0 and target (y = {}) inside",
            anchor.y, target.y
        )));
    }
    Ok(())
}

/// Perpendicular distances from target and anchor to the edge line.
fn edge_perpendiculars(anchor: &Vec3, target: &Vec3, edge: Edge, half_height: f64) -> (f64, f64) {
    let r_target = (target.y * target.y + half_height * half_height).sqrt();
    let dz = target.z + edge.sign() * half_height - anchor.z;
    let r_anchor = (anchor.y * anchor.y + dz * dz).sqrt();
    (r_target, r_anchor)
}

/// X-coordinate of the diffraction point on the given edge: the stationary
/// point of the total path length over the edge line,
/// x = (r·x_k + r_perp·x_n) / (r + r_perp), which always lies between the
/// anchor and target x-coordinates.
pub fn diffraction_point_x(anchor: &Vec3, target: &Vec3, edge: Edge, half_height: f64) -> Result<f64> {
    check_sides(anchor, target)?;
    let (r_target, r_anchor) = edge_perpendiculars(anchor, target, edge, half_height);
    Ok((r_target * anchor.x + r_anchor * target.x) / (r_target + r_anchor))
}

/// Diffraction path length over one edge:
/// sqrt((x_k - x_n)^2 + (r_perp + r)^2) with the perpendiculars above.
pub fn path_length_edge(anchor: &Vec3, target: &Vec3, edge: Edge, half_height: f64) -> Result<f64> {
    check_sides(anchor, target)?;
    let (r_target, r_anchor) = edge_perpendiculars(anchor, target, edge, half_height);
    let dx = anchor.x - target.x;
    Ok((dx * dx + (r_anchor + r_target) * (r_anchor + r_target)).sqrt())
}

/// First-arriving path over the two window edges: the shorter of the upper
/// and lower edge diffraction paths.
pub fn path_length_first_arrival(anchor: &Vec3, target: &Vec3, half_height: f64) -> Result<f64> {
    let up = path_length_edge(anchor, target, Edge::Upper, half_height)?;
    let lo = path_length_edge(anchor, target, Edge::Lower, half_height)?;
    Ok(up.min(lo))
}

/// Simplified path model at Δ = 0:
/// p = sqrt((x_k - x_n)^2 + (sqrt(y_k^2 + (z_k - z_n)^2) + y_n)^2).
/// Equals the direct Euclidean distance when z_k = z_n.
pub fn path_length_simplified(anchor: &Vec3, target: &Vec3) -> Result<f64> {
    check_sides(anchor, target)?;
    Ok(simplified_unchecked(anchor, target))
}

pub(crate) fn simplified_unchecked(anchor: &Vec3, target: &Vec3) -> f64 {
    let dx = anchor.x - target.x;
    let dz = anchor.z - target.z;
    let detour = (anchor.y * anchor.y + dz * dz).sqrt() + target.y;
    (dx * dx + detour * detour).sqrt()
}

/// Distances from anchor and target to the Δ = 0 diffraction point.
pub fn fresnel_distances(anchor: &Vec3, target: &Vec3) -> Result<(f64, f64)> {
    let g = path_geometry(anchor, target)?;
    Ok((g.d1_m, g.d2_m))
}

/// Full Δ = 0 path geometry: diffraction point, split distances, and length.
pub fn path_geometry(anchor: &Vec3, target: &Vec3) -> Result<PathGeometry> {
    let x = diffraction_point_x(anchor, target, Edge::Upper, 0.0)?;
    let q = Vec3::new(x, 0.0, target.z);
    let d1 = anchor.distance_to(&q);
    let d2 = target.distance_to(&q);
    Ok(PathGeometry {
        diffraction_point: q,
        d1_m: d1,
        d2_m: d2,
        path_length_m: path_length_simplified(anchor, target)?,
    })
}
