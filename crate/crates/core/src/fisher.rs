//! 2D localization Fisher core.
//!
//! Each anchor contributes a rank-one term λ·g·gᵀ where g is the unit
//! information vector of the (possibly diffracted) path. Writing
//! g = (cos ψ, sin ψ), the K-anchor FIM collapses to four scalars
//!
//!   S = Σλ, u = Σλ·cos 2ψ, v = Σλ·sin 2ψ, r = sqrt(u² + v²)
//!
//! with FIM = ½·[[S+u, v], [v, S−u]] and eigenvalues (S ± r)/2. The A/D/E
//! objectives and the PEB/CER/MAD metrics are scalar functions of (S, r).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;
use crate::scene::Vec3;
use crate::CHI2_2DOF_95;

/// Relative tolerance below which r ~ S is treated as a singular FIM.
pub const SINGULARITY_REL_TOL: f64 = 1e-12;

/// One anchor's contribution: ranging weight and information angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoComponent {
    /// Ranging information weight, 1/m².
    pub lambda: f64,
    /// Information angle ψ ∈ (0, π), radians.
    pub psi: f64,
}

/// Aggregates (S, u, v, r) of a set of components, all in 1/m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoSummary {
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl InfoSummary {
    /// Eigenvalues of the 2D FIM: ((S - r)/2, (S + r)/2).
    pub fn eigenvalues(&self) -> (f64, f64) {
        ((self.s - self.r) / 2.0, (self.s + self.r) / 2.0)
    }

    /// True when the FIM is singular under the crate's tolerance policy.
    pub fn is_singular(&self) -> bool {
        self.r >= self.s - SINGULARITY_REL_TOL * self.s
    }
}

/// Symmetric 2×2 Fisher information matrix, entries 1/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fim2x2(pub [[f64; 2]; 2]);

impl Fim2x2 {
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = self.0;
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }
}

/// A/D/E objective values: trace, determinant, and largest eigenvalue of the
/// CRLB matrix (m², m⁴, m²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTriple {
    pub phi_a: f64,
    pub phi_d: f64,
    pub phi_e: f64,
}

/// Scalar accuracy metrics in meters: position error bound, 95% equal-area
/// confidence circle radius, and worst-direction standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    pub peb_m: f64,
    pub cer_m: f64,
    pub mad_m: f64,
}

/// Information angle ψ = atan2(sqrt(y_k² + (z_k - z_n)²) + y_n, x_n - x_k),
/// always in (0, π) since the numerator is strictly positive.
pub fn info_angle(anchor: &Vec3, target: &Vec3) -> Result<f64> {
    // Reuse the geometry precondition checks.
    geometry::path_length_simplified(anchor, target)?;
    let dz = anchor.z - target.z;
    let num = (anchor.y * anchor.y + dz * dz).sqrt() + target.y;
    Ok(num.atan2(target.x - anchor.x))
}

/// Unit information vector g = [(x_n - x_k)/p, (sqrt(y_k² + (z_k-z_n)²) + y_n)/p]
/// with p the simplified path length; equals (cos ψ, sin ψ).
pub fn info_vector(anchor: &Vec3, target: &Vec3) -> Result<[f64; 2]> {
    let p = geometry::path_length_simplified(anchor, target)?;
    let dz = anchor.z - target.z;
    let num = (anchor.y * anchor.y + dz * dz).sqrt() + target.y;
    Ok([(target.x - anchor.x) / p, num / p])
}

/// Aggregate the selected components into (S, u, v, r).
pub fn summarize(components: &[InfoComponent], selection: &[usize]) -> Result<InfoSummary> {
    if selection.is_empty() {
        return Err(Error::validation("selection", "must be nonempty"));
    }
    let mut acc = SummaryAccumulator::new();
    for &i in selection {
        let c = components.get(i).ok_or_else(|| {
            Error::validation("selection", format!("index {i} out of range {}", components.len()))
        })?;
        acc.add(c.lambda, c.psi);
    }
    Ok(acc.finish())
}

/// Aggregate every component.
pub fn summarize_all(components: &[InfoComponent]) -> Result<InfoSummary> {
    let idx: Vec<usize> = (0..components.len()).collect();
    summarize(components, &idx)
}

/// Running (S, u, v) accumulator shared by the summarizers and the solver's
/// incremental evaluation loops.
#[derive(Debug, Clone, Copy, Default)]
pub struct SummaryAccumulator {
    pub s: f64,
    pub u: f64,
    pub v: f64,
}

impl SummaryAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, lambda: f64, psi: f64) {
        self.s += lambda;
        self.u += lambda * (2.0 * psi).cos();
        self.v += lambda * (2.0 * psi).sin();
    }

    pub fn remove(&mut self, lambda: f64, psi: f64) {
        self.s -= lambda;
        self.u -= lambda * (2.0 * psi).cos();
        self.v -= lambda * (2.0 * psi).sin();
    }

    pub fn finish(&self) -> InfoSummary {
        InfoSummary {
            s: self.s,
            u: self.u,
            v: self.v,
            r: self.u.hypot(self.v),
        }
    }
}

/// Compact 2D FIM ½·[[S+u, v], [v, S-u]].
pub fn fim_2d(summary: &InfoSummary) -> Fim2x2 {
    Fim2x2([
        [(summary.s + summary.u) / 2.0, summary.v / 2.0],
        [summary.v / 2.0, (summary.s - summary.u) / 2.0],
    ])
}

/// FIM as the weighted sum of information-vector outer products Σ λ·g·gᵀ.
/// Algebraically identical to `fim_2d(summarize(..))`; kept as the second
/// route for cross-checking.
pub fn fim_from_jacobian(anchors: &[Vec3], target: &Vec3, lambdas: &[f64]) -> Result<Fim2x2> {
    if anchors.is_empty() {
        return Err(Error::validation("anchors", "must be nonempty"));
    }
    if anchors.len() != lambdas.len() {
        return Err(Error::validation(
            "lambdas",
            format!("length {} != anchor count {}", lambdas.len(), anchors.len()),
        ));
    }
    let mut m = [[0.0f64; 2]; 2];
    for (a, &lam) in anchors.iter().zip(lambdas) {
        let g = info_vector(a, target)?;
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += lam * g[i] * g[j];
            }
        }
    }
    Ok(Fim2x2(m))
}

/// A/D/E objectives
///   Φ_A = 4S/(S² - r²), Φ_D = 4/(S² - r²), Φ_E = 2/(S - r).
pub fn objectives(summary: &InfoSummary) -> Result<ObjectiveTriple> {
    if summary.is_singular() {
        return Err(Error::SingularFim { r: summary.r, s: summary.s });
    }
    let gap2 = summary.s * summary.s - summary.r * summary.r;
    Ok(ObjectiveTriple {
        phi_a: 4.0 * summary.s / gap2,
        phi_d: 4.0 / gap2,
        phi_e: 2.0 / (summary.s - summary.r),
    })
}

/// PEB = sqrt(Φ_A), CER = sqrt(5.991·sqrt(Φ_D)), MAD = sqrt(Φ_E).
pub fn metrics(summary: &InfoSummary) -> Result<MetricTriple> {
    let phi = objectives(summary)?;
    Ok(MetricTriple {
        peb_m: phi.phi_a.sqrt(),
        cer_m: (CHI2_2DOF_95 * phi.phi_d.sqrt()).sqrt(),
        mad_m: phi.phi_e.sqrt(),
    })
}
