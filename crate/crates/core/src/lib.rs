//! Fisher-information-optimal anchor placement for TOA localization in
//! outdoor-to-indoor scenes where propagation is mixed LOS/NLOS and the
//! NLOS links are dominated by window-edge diffraction.
//!
//! The pipeline, bottom to top:
//!
//! - [`scene`] — scenario configuration, fixed indoor targets, candidate
//!   anchor grids with Cranley–Patterson randomization.
//! - [`geometry`] — unified LOS/NLOS path-length model (edge diffraction
//!   point, two-edge path, simplified path).
//! - [`channel`] — power-domain link budget: FSPL, knife-edge diffraction
//!   excess loss, received SNR, and the ranging information weight λ.
//! - [`delayfim`] — multipath delay Fisher information and the path-overlap
//!   information-loss study that justifies treating the first path alone.
//! - [`fisher`] — 2D localization Fisher core: information vectors/angles,
//!   (S, u, v, r) aggregates, A/D/E objectives, PEB/CER/MAD metrics.
//! - [`polygon`] — single-target optimality via polygon closure in the
//!   complex plane, with constructive closure angles.
//! - [`dictionary`] — precomputed (λ, ψ) tables for all candidate/target
//!   pairs, with binary and CSV serialization.
//! - [`solver`] — exact min–max E-opt and D-opt anchor selection by
//!   branch-and-bound with certified bounds, plus exhaustive and
//!   random-minimax baselines.
//! - [`harness`] — deterministic Monte Carlo evaluation with worst-target
//!   metric extraction and boxplot aggregation.

pub mod channel;
pub mod delayfim;
pub mod dictionary;
pub mod error;
pub mod fisher;
pub mod geometry;
pub mod harness;
pub mod polygon;
pub mod scene;
pub mod solver;

pub use error::{Error, Result};
pub use scene::{AnchorRegion, BuildingGeometry, Scene, SystemParams, Vec3};

/// Speed of light in m/s (engineering value used throughout the RF chain).
pub const SPEED_OF_LIGHT_M_S: f64 = 3.0e8;

/// Boltzmann constant in J/K.
pub const BOLTZMANN_J_K: f64 = 1.380649e-23;

/// 95% quantile of the chi-squared distribution with 2 degrees of freedom.
/// Fixed (not configurable) so confidence-ellipse metrics stay comparable.
pub const CHI2_2DOF_95: f64 = 5.991;
