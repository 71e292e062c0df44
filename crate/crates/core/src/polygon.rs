//! Single-target optimality as polygon closure.
//!
//! A target's FIM is isotropic (r = 0) exactly when the weighted phasors
//! λ_k·e^{j2ψ_k} close a polygon in the complex plane. Closure is possible
//! iff no weight exceeds the sum of the others (generalized polygon
//! inequality); when it is, all three A/D/E objectives attain their lower
//! bounds 4/S, 4/S², 2/S simultaneously.
//!
//! The constructive closure used here is exact and non-iterative: the
//! largest weight forms one side of a triangle on its own and the remaining
//! weights are split greedily into two groups whose sums form the other two
//! sides; the three side directions come from the triangle's vertex
//! coordinates. Closure solutions are not unique — this picks one canonical
//! branch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::ObjectiveTriple;
use crate::scene::Vec3;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Result of a closure construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureResult {
    /// Phasor angles θ_k = 2ψ_k in [0, 2π), aligned with the input weights.
    /// Empty when infeasible.
    pub angles: Vec<f64>,
    /// ‖Σ λ_k e^{jθ_k}‖ for the returned angles; for infeasible inputs, the
    /// smallest residual any angles could achieve (max weight minus the rest).
    pub residual: f64,
    pub feasible: bool,
}

impl ClosureResult {
    /// Information angles ψ_k = θ_k / 2 ∈ [0, π). ψ = 0 is a boundary value
    /// that no physical anchor attains exactly.
    pub fn psi(&self) -> Vec<f64> {
        self.angles.iter().map(|t| t / 2.0).collect()
    }

    /// True when some induced ψ sits on the open-interval boundary ψ = 0.
    pub fn has_boundary_psi(&self) -> bool {
        self.angles.iter().any(|&t| t == 0.0)
    }
}

fn check_weights(lambdas: &[f64]) -> Result<()> {
    if lambdas.len() < 2 {
        return Err(Error::TooFewWeights { need: 2, got: lambdas.len() });
    }
    for (i, &l) in lambdas.iter().enumerate() {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::validation(
                format!("weights[{i}]"),
                format!("{l} must be finite and > 0"),
            ));
        }
    }
    Ok(())
}

/// Closure feasibility: max λ ≤ Σ(others), equivalently 2·max ≤ Σ.
pub fn closure_feasible(lambdas: &[f64]) -> Result<bool> {
    check_weights(lambdas)?;
    let sum: f64 = lambdas.iter().sum();
    let max = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(2.0 * max <= sum)
}

/// Construct phasor angles that close the polygon. On infeasible inputs
/// returns `feasible: false` with the unavoidable residual instead of an
/// error.
pub fn closure_angles(lambdas: &[f64]) -> Result<ClosureResult> {
    check_weights(lambdas)?;
    let sum: f64 = lambdas.iter().sum();
    let max = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if 2.0 * max > sum {
        return Ok(ClosureResult {
            angles: Vec::new(),
            residual: 2.0 * max - sum,
            feasible: false,
        });
    }

    // Sort indices by descending weight (ties by index) so the grouping is
    // deterministic.
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| {
        lambdas[b]
            .partial_cmp(&lambdas[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    // Group 0: the largest weight alone. Remaining weights go greedily to
    // the lighter of groups 1 and 2, keeping |b - c| no larger than the
    // largest remaining weight, hence no larger than side a.
    let mut group = vec![0usize; lambdas.len()];
    let mut side = [0.0f64; 3];
    side[0] = lambdas[order[0]];
    for &i in &order[1..] {
        let g = if side[1] <= side[2] { 1 } else { 2 };
        group[i] = g;
        side[g] += lambdas[i];
    }
    let (a, b, c) = (side[0], side[1], side[2]);

    // Triangle with side lengths (a, b, c): walk origin -> (a, 0) -> apex ->
    // origin; the side directions are the three phasor directions.
    let apex_x = if a > 0.0 { (a * a + c * c - b * b) / (2.0 * a) } else { 0.0 };
    let apex_y = (c * c - apex_x * apex_x).max(0.0).sqrt();
    let dirs = [
        0.0f64,
        (apex_y - 0.0).atan2(apex_x - a),
        (0.0 - apex_y).atan2(0.0 - apex_x),
    ];

    let angles: Vec<f64> = group.iter().map(|&g| dirs[g].rem_euclid(TAU)).collect();
    let residual = residual_norm(lambdas, &angles);
    Ok(ClosureResult { angles, residual, feasible: true })
}

/// ‖Σ λ_k e^{jθ_k}‖.
pub fn residual_norm(lambdas: &[f64], angles: &[f64]) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (&l, &t) in lambdas.iter().zip(angles) {
        re += l * t.cos();
        im += l * t.sin();
    }
    re.hypot(im)
}

/// Optimal objective values for a single target when closure is feasible:
/// Φ_A* = 4/S, Φ_D* = 4/S², Φ_E* = 2/S with S = Σλ.
pub fn single_target_optimum(lambdas: &[f64]) -> Result<ObjectiveTriple> {
    if !closure_feasible(lambdas)? {
        let sum: f64 = lambdas.iter().sum();
        let max = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::ClosureInfeasible { max, rest: sum - max });
    }
    let s: f64 = lambdas.iter().sum();
    Ok(ObjectiveTriple { phi_a: 4.0 / s, phi_d: 4.0 / (s * s), phi_e: 2.0 / s })
}

/// Invert the information angle on the target's floor plane: an anchor at
/// z_k = z_n and the given y_k < 0 whose ψ equals the request,
/// x_k = x_n - (|y_k| + y_n)/tan(ψ) with x_k = x_n at ψ = π/2. One canonical
/// branch of a transcendental inversion with many solutions.
pub fn anchor_for_angle(target: &Vec3, psi: f64, y_k: f64) -> Result<Vec3> {
    if !(psi > 0.0 && psi < std::f64::consts::PI) {
        return Err(Error::validation("psi", format!("{psi} outside (0, π)")));
    }
    if !(y_k < 0.0) {
        return Err(Error::validation("y_k", format!("{y_k} must be < 0 (outside the wall)")));
    }
    let numerator = y_k.abs() + target.y;
    let x_k = if (psi - std::f64::consts::FRAC_PI_2).abs() < 1e-15 {
        target.x
    } else {
        target.x - numerator / psi.tan()
    };
    Ok(Vec3::new(x_k, y_k, target.z))
}
