//! Scenario configuration: RF system parameters, building geometry, the
//! anchor feasible region, target placement, and candidate-anchor grid
//! generation with Cranley–Patterson randomization.
//!
//! Conventions: the building front wall is the plane Y = 0, the building
//! interior is y > 0, and anchors live outside at y < 0. Distances are in
//! meters, frequencies in Hz.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::KedMode;
use crate::error::{Error, Result};

/// A point or displacement in 3D space, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Euclidean distance to another point.
    pub fn distance_to(&self, other: &Vec3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// RF system parameters (the link-budget side of the scenario).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Signal bandwidth B, Hz.
    pub bandwidth_hz: f64,
    /// Transmit power P_t, dBm.
    pub tx_power_dbm: f64,
    /// Transmit antenna gain G_t, dBi.
    pub tx_gain_dbi: f64,
    /// Receive antenna gain G_r, dBi.
    pub rx_gain_dbi: f64,
    /// Carrier frequency f_c, Hz.
    pub carrier_hz: f64,
    /// Receiver noise figure, dB.
    pub noise_figure_db: f64,
    /// System noise temperature, Kelvin.
    #[serde(default = "default_noise_temp")]
    pub noise_temp_k: f64,
}

fn default_noise_temp() -> f64 {
    290.0
}

impl Default for SystemParams {
    /// Reference parameters: 200 MHz bandwidth at a 10 GHz carrier,
    /// 30 dBm transmit power, 10 dBi gains, 5 dB noise figure, 290 K.
    fn default() -> Self {
        Self {
            bandwidth_hz: 200e6,
            tx_power_dbm: 30.0,
            tx_gain_dbi: 10.0,
            rx_gain_dbi: 10.0,
            carrier_hz: 10e9,
            noise_figure_db: 5.0,
            noise_temp_k: 290.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::validation("system.bandwidth_hz", "must be > 0"));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > self.bandwidth_hz) {
            return Err(Error::validation(
                "system.carrier_hz",
                "must exceed bandwidth_hz",
            ));
        }
        if !(self.noise_temp_k.is_finite() && self.noise_temp_k > 0.0) {
            return Err(Error::validation("system.noise_temp_k", "must be > 0"));
        }
        for (name, v) in [
            ("system.tx_power_dbm", self.tx_power_dbm),
            ("system.tx_gain_dbi", self.tx_gain_dbi),
            ("system.rx_gain_dbi", self.rx_gain_dbi),
            ("system.noise_figure_db", self.noise_figure_db),
        ] {
            if !v.is_finite() {
                return Err(Error::validation(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Building geometry. The footprint spans x ∈ [-L, L], y ∈ [0, 2L] with the
/// front wall on Y = 0; floors stack upward from z = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingGeometry {
    /// Building half-length L, meters.
    pub half_length_m: f64,
    /// Number of floors.
    pub num_floors: u32,
    /// Height of one floor, meters.
    pub floor_height_m: f64,
    /// Window half-height Δ, meters. Zero collapses both window edges onto
    /// the target floor plane.
    #[serde(default)]
    pub window_half_height_m: f64,
}

impl Default for BuildingGeometry {
    fn default() -> Self {
        Self {
            half_length_m: 15.0,
            num_floors: 10,
            floor_height_m: 3.0,
            window_half_height_m: 0.0,
        }
    }
}

impl BuildingGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_length_m.is_finite() && self.half_length_m > 0.0) {
            return Err(Error::validation("building.half_length_m", "must be > 0"));
        }
        if self.num_floors < 1 {
            return Err(Error::validation("building.num_floors", "must be >= 1"));
        }
        if !(self.floor_height_m.is_finite() && self.floor_height_m > 0.0) {
            return Err(Error::validation("building.floor_height_m", "must be > 0"));
        }
        if !(self.window_half_height_m.is_finite() && self.window_half_height_m >= 0.0) {
            return Err(Error::validation(
                "building.window_half_height_m",
                "must be >= 0",
            ));
        }
        Ok(())
    }

    /// Mid-floor height of floor `f` (1-based).
    pub fn floor_center_z(&self, floor: u32) -> f64 {
        (floor as f64 - 1.0) * self.floor_height_m + self.floor_height_m / 2.0
    }
}

/// Axis-aligned box of feasible anchor positions with grid spacing d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorRegion {
    pub lo: Vec3,
    pub hi: Vec3,
    /// Grid spacing d, meters.
    pub spacing_m: f64,
}

impl AnchorRegion {
    pub fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::validation("region", "lo/hi must be finite"));
        }
        let edges = [
            self.hi.x - self.lo.x,
            self.hi.y - self.lo.y,
            self.hi.z - self.lo.z,
        ];
        if edges.iter().any(|&e| e <= 0.0) {
            return Err(Error::validation(
                "region.lo/hi",
                "lo must be strictly below hi on every axis",
            ));
        }
        let min_edge = edges.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(self.spacing_m.is_finite() && self.spacing_m > 0.0) {
            return Err(Error::validation("region.spacing_m", "must be > 0"));
        }
        if self.spacing_m > min_edge {
            return Err(Error::validation(
                "region.spacing_m",
                format!("spacing {} exceeds smallest box edge {}", self.spacing_m, min_edge),
            ));
        }
        Ok(())
    }

    /// The region with a different grid spacing (used by the sweep harness).
    pub fn with_spacing(&self, spacing_m: f64) -> Self {
        Self { spacing_m, ..*self }
    }
}

/// A validated scenario: system parameters, building, anchor region, and
/// fixed indoor targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub system: SystemParams,
    pub building: BuildingGeometry,
    pub region: AnchorRegion,
    pub targets: Vec<Vec3>,
    /// Diffraction-loss mode on the LOS boundary.
    #[serde(default)]
    pub ked_mode: KedMode,
}

/// On-disk scene schema. `targets` wins over `target_floors`; with neither,
/// the default placement rule runs over every floor.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneConfig {
    system: SystemParams,
    building: BuildingGeometry,
    region: AnchorRegion,
    #[serde(default)]
    targets: Option<Vec<Vec3>>,
    #[serde(default)]
    target_floors: Option<Vec<u32>>,
    #[serde(default)]
    ked_mode: KedMode,
}

/// Parse and validate a scenario from its JSON config text.
pub fn load_scene(config_text: &str) -> Result<Scene> {
    let cfg: SceneConfig =
        serde_json::from_str(config_text).map_err(|e| Error::Parse(e.to_string()))?;
    let targets = match (cfg.targets, cfg.target_floors) {
        (Some(t), _) => t,
        (None, Some(floors)) => default_targets(&cfg.building, &floors)?,
        (None, None) => {
            let all: Vec<u32> = (1..=cfg.building.num_floors).collect();
            default_targets(&cfg.building, &all)?
        }
    };
    let scene = Scene {
        system: cfg.system,
        building: cfg.building,
        region: cfg.region,
        targets,
        ked_mode: cfg.ked_mode,
    };
    scene.validate()?;
    Ok(scene)
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.building.validate()?;
        self.region.validate()?;
        if self.targets.is_empty() {
            return Err(Error::validation("targets", "must be nonempty"));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::validation(format!("targets[{i}]"), "must be finite"));
            }
            if t.y <= 0.0 {
                return Err(Error::validation(
                    format!("targets[{i}].y"),
                    format!("{} is not inside the building (front wall at Y=0)", t.y),
                ));
            }
            if !self.on_floor_plane(t.z) {
                return Err(Error::validation(
                    format!("targets[{i}].z"),
                    format!("{} is not on a floor plane", t.z),
                ));
            }
        }
        Ok(())
    }

    fn on_floor_plane(&self, z: f64) -> bool {
        (1..=self.building.num_floors)
            .any(|f| (z - self.building.floor_center_z(f)).abs() <= 1e-6)
    }

    /// SHA-256 over the canonical JSON serialization; identifies the scene a
    /// dictionary was built from.
    pub fn content_hash(&self) -> [u8; 32] {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("scene serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        h.finalize().into()
    }
}

/// Default target placement: per floor, four targets at the quadrant centers
/// of the floor plate, x ∈ {-L/2, +L/2} and y ∈ {L/2, 3L/2}, at mid-floor
/// height. Order is floor-major, then x, then y.
pub fn default_targets(building: &BuildingGeometry, floors: &[u32]) -> Result<Vec<Vec3>> {
    building.validate()?;
    if floors.is_empty() {
        return Err(Error::validation("target_floors", "must be nonempty"));
    }
    let l = building.half_length_m;
    let mut out = Vec::with_capacity(floors.len() * 4);
    for &f in floors {
        if f < 1 || f > building.num_floors {
            return Err(Error::validation(
                "target_floors",
                format!("floor {f} outside [1, {}]", building.num_floors),
            ));
        }
        let z = building.floor_center_z(f);
        for x in [-l / 2.0, l / 2.0] {
            for y in [l / 2.0, 3.0 * l / 2.0] {
                out.push(Vec3::new(x, y, z));
            }
        }
    }
    Ok(out)
}

/// Number of grid points per axis: floor(extent / d) + 1, with a small
/// tolerance against floating-point shortfall on exact multiples.
fn axis_count(lo: f64, hi: f64, d: f64) -> usize {
    ((hi - lo) / d + 1e-9).floor() as usize + 1
}

/// Generate the candidate-anchor grid: a uniform lattice with spacing d
/// anchored at `lo`, translated by `shift`, with out-of-box coordinates
/// wrapped back into [lo, hi] by modular wrapping of the box extent.
/// The candidate count is invariant under the shift. Ordering is x-major,
/// then y, then z.
pub fn generate_anchor_grid(region: &AnchorRegion, shift: Vec3) -> Vec<Vec3> {
    let d = region.spacing_m;
    let (lo, hi) = (region.lo, region.hi);
    let wrap = |v: f64, lo: f64, hi: f64| -> f64 {
        let extent = hi - lo;
        let w = lo + (v - lo).rem_euclid(extent);
        // rem_euclid can land exactly on `hi` through rounding; fold it back.
        if w >= hi {
            w - extent
        } else {
            w
        }
    };
    let nx = axis_count(lo.x, hi.x, d);
    let ny = axis_count(lo.y, hi.y, d);
    let nz = axis_count(lo.z, hi.z, d);
    let mut out = Vec::with_capacity(nx * ny * nz);
    for ix in 0..nx {
        let x = wrap(lo.x + ix as f64 * d + shift.x, lo.x, hi.x);
        for iy in 0..ny {
            let y = wrap(lo.y + iy as f64 * d + shift.y, lo.y, hi.y);
            for iz in 0..nz {
                let z = wrap(lo.z + iz as f64 * d + shift.z, lo.z, hi.z);
                out.push(Vec3::new(x, y, z));
            }
        }
    }
    out
}

/// Draw a Cranley–Patterson shift: components i.i.d. uniform on [-d/2, d/2],
/// deterministic for a fixed seed.
pub fn draw_shift(rng_seed: u64, d: f64) -> Vec3 {
    assert!(d > 0.0, "spacing must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let dist = Uniform::new_inclusive(-d / 2.0, d / 2.0);
    let x = dist.sample(&mut rng);
    let y = dist.sample(&mut rng);
    let z = dist.sample(&mut rng);
    Vec3::new(x, y, z)
}
