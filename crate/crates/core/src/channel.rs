//! Power-domain link model: free-space path loss, knife-edge diffraction
//! excess loss, received SNR, and the ranging information weight λ.
//!
//! The SNR ledger in dB is
//! `P_t(dBW) + G_t + G_r - FSPL(R, f_c) - L_d(ν) - [10·log10(K·T·B) + NF]`
//! with R the Euclidean anchor–target distance (the chord, not the
//! diffraction detour) and L_d the knife-edge excess loss. λ converts the
//! linear SNR into an inverse ranging variance: λ = 2π²B²·SNR / (3c²).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;
use crate::scene::{SystemParams, Vec3};
use crate::{BOLTZMANN_J_K, SPEED_OF_LIGHT_M_S};

/// How the diffraction loss behaves on the LOS boundary plane z_k = z_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KedMode {
    /// Loss is exactly zero on the LOS plane (|z_k - z_n| below 1 mm) and
    /// knife-edge elsewhere.
    #[default]
    Paper,
    /// Knife-edge loss everywhere, including ν = 0 where it is ~6.03 dB.
    Continuous,
}

/// LOS tolerance on the floor-plane offset, meters.
pub const LOS_EPSILON_M: f64 = 1e-3;

/// One anchor–target link budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub fspl_db: f64,
    pub ked_loss_db: f64,
    /// 10·log10(K·T·B) + NF, dBW.
    pub noise_floor_db: f64,
    pub snr_db: f64,
    pub snr_linear: f64,
    /// Fresnel–Kirchhoff clearance parameter.
    pub nu: f64,
    /// |z_k - z_n|, meters.
    pub intrusion_m: f64,
}

/// Ranging information weight: the inverse variance of one range
/// measurement, 1/m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangingWeight {
    pub lambda: f64,
}

/// Free-space path loss 20·log10(4πRf_c/c), dB.
pub fn fspl_db(r_m: f64, carrier_hz: f64) -> Result<f64> {
    if !(r_m > 0.0) {
        return Err(Error::NonPositive { name: "r_m", value: r_m });
    }
    if !(carrier_hz > 0.0) {
        return Err(Error::NonPositive { name: "carrier_hz", value: carrier_hz });
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * r_m * carrier_hz / SPEED_OF_LIGHT_M_S).log10())
}

/// Knife-edge diffraction excess loss
/// L_d(ν) = 6.9 + 20·log10(sqrt((ν-0.1)² + 1) + ν - 0.1), dB.
pub fn ked_excess_loss_db(nu: f64) -> f64 {
    let t = nu - 0.1;
    6.9 + 20.0 * ((t * t + 1.0).sqrt() + t).log10()
}

/// Fresnel–Kirchhoff clearance parameter
/// ν = h·sqrt(2 f_c (d1 + d2) / (c·d1·d2)) with intrusion h = |z_k - z_n|
/// and (d1, d2) the distances to the Δ = 0 diffraction point. Both sides of
/// the target floor incur the same clearance.
pub fn fresnel_nu(anchor: &Vec3, target: &Vec3, carrier_hz: f64) -> Result<f64> {
    let (d1, d2) = geometry::fresnel_distances(anchor, target)?;
    let h = (anchor.z - target.z).abs();
    Ok(h * (2.0 * carrier_hz * (d1 + d2) / (SPEED_OF_LIGHT_M_S * d1 * d2)).sqrt())
}

/// Received SNR and full link budget for one anchor–target pair.
pub fn snr_db(sys: &SystemParams, anchor: &Vec3, target: &Vec3, mode: KedMode) -> Result<LinkBudget> {
    let nu = fresnel_nu(anchor, target, sys.carrier_hz)?;
    let intrusion = (anchor.z - target.z).abs();
    let chord = anchor.distance_to(target);
    let fspl = fspl_db(chord, sys.carrier_hz)?;
    let ked = match mode {
        KedMode::Paper if intrusion <= LOS_EPSILON_M => 0.0,
        _ => ked_excess_loss_db(nu),
    };
    let noise_floor =
        10.0 * (BOLTZMANN_J_K * sys.noise_temp_k * sys.bandwidth_hz).log10() + sys.noise_figure_db;
    let tx_dbw = sys.tx_power_dbm - 30.0;
    let snr = tx_dbw + sys.tx_gain_dbi + sys.rx_gain_dbi - fspl - ked - noise_floor;
    Ok(LinkBudget {
        fspl_db: fspl,
        ked_loss_db: ked,
        noise_floor_db: noise_floor,
        snr_db: snr,
        snr_linear: 10f64.powf(snr / 10.0),
        nu,
        intrusion_m: intrusion,
    })
}

/// Ranging information weight λ = 2π²B²·SNR / (3c²), 1/m².
pub fn ranging_weight(snr_linear: f64, bandwidth_hz: f64) -> Result<RangingWeight> {
    if !(snr_linear > 0.0) {
        return Err(Error::NonPositive { name: "snr_linear", value: snr_linear });
    }
    if !(bandwidth_hz > 0.0) {
        return Err(Error::NonPositive { name: "bandwidth_hz", value: bandwidth_hz });
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let c2 = SPEED_OF_LIGHT_M_S * SPEED_OF_LIGHT_M_S;
    Ok(RangingWeight {
        lambda: 2.0 * pi2 * bandwidth_hz * bandwidth_hz * snr_linear / (3.0 * c2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fspl_zero_at_unit_log_argument() {
        let fc = 10e9;
        let r0 = SPEED_OF_LIGHT_M_S / (4.0 * std::f64::consts::PI * fc);
        assert!(fspl_db(r0, fc).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fspl_one_meter_ten_ghz() {
        // 20*log10(4π·1e10 / 3e8), frozen from an arbitrary-precision run.
        let got = fspl_db(1.0, 10e9).unwrap();
        assert!((got - 52.441772186048676).abs() < 1e-10, "{got}");
    }

    #[test]
    fn fspl_doubling_law() {
        let a = fspl_db(13.0, 10e9).unwrap();
        let b = fspl_db(26.0, 10e9).unwrap();
        assert!((b - a - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!((b - a - 6.020599913279624).abs() < 1e-10);
    }

    #[test]
    fn fspl_rejects_nonpositive_inputs() {
        assert!(fspl_db(0.0, 1e9).is_err());
        assert!(fspl_db(1.0, -1.0).is_err());
    }

    #[test]
    fn ked_loss_reference_points() {
        assert_eq!(ked_excess_loss_db(0.1), 6.9, "log term vanishes exactly at ν = 0.1");
        // 6.9 + 20·log10(sqrt(1.01) - 0.1), frozen from an arbitrary-precision run.
        let got = ked_excess_loss_db(0.0);
        assert!((got - 6.032852208563606).abs() < 1e-12, "{got}");
    }

    #[test]
    fn ked_loss_monotone_on_sampled_grid() {
        let mut last = f64::NEG_INFINITY;
        for i in 0..=5000 {
            let nu = i as f64 * 0.01; // [0, 50]
            let l = ked_excess_loss_db(nu);
            assert!(l > last, "loss must be strictly increasing at ν = {nu}");
            assert!(l >= 0.0);
            last = l;
        }
    }

    #[test]
    fn fresnel_nu_hand_example() {
        // anchor (0,-4,6), target (0,3,0), f_c = 10 GHz:
        // h=6, d1=sqrt(52), d2=3; frozen from an arbitrary-precision run.
        let nu = fresnel_nu(&Vec3::new(0.0, -4.0, 6.0), &Vec3::new(0.0, 3.0, 0.0), 10e9).unwrap();
        assert!((nu - 33.657393210632601).abs() < 1e-9, "{nu}");
    }

    #[test]
    fn fresnel_nu_zero_on_the_los_plane_and_sqrt_fc_scaling() {
        let a = Vec3::new(2.0, -9.0, 4.5);
        let t = Vec3::new(-1.0, 6.0, 4.5);
        assert_eq!(fresnel_nu(&a, &t, 10e9).unwrap(), 0.0);

        let a = Vec3::new(2.0, -9.0, 7.5);
        let nu1 = fresnel_nu(&a, &t, 10e9).unwrap();
        let nu4 = fresnel_nu(&a, &t, 40e9).unwrap();
        assert!((nu4 / nu1 - 2.0).abs() < 1e-12, "ν scales as sqrt(f_c)");
    }

    #[test]
    fn snr_ledger_reference_link() {
        // Reference parameters, LOS link at R = 27.5 m. The dB ledger is
        // recomputed here term by term as an independent check.
        let sys = SystemParams::default();
        let anchor = Vec3::new(0.0, -20.0, 1.5);
        let target = Vec3::new(0.0, 7.5, 1.5);
        let lb = snr_db(&sys, &anchor, &target, KedMode::Paper).unwrap();

        assert_eq!(lb.ked_loss_db, 0.0, "same-floor link is LOS");
        assert!((lb.fspl_db - 81.228426062653929).abs() < 1e-9);
        let ktb = 10.0 * (1.380649e-23_f64 * 290.0 * 2e8).log10();
        assert!((ktb - -120.964887237588292).abs() < 1e-9);
        let expect = 0.0 + 10.0 + 10.0 - lb.fspl_db - 0.0 - (ktb + 5.0);
        assert!((lb.snr_db - expect).abs() < 1e-12);
        assert!((lb.snr_db - 54.736461174934363).abs() < 1e-9, "{}", lb.snr_db);
        assert!((lb.snr_linear - 10f64.powf(lb.snr_db / 10.0)).abs() < 1e-9);
    }

    #[test]
    fn snr_drops_when_anchor_leaves_the_floor_plane() {
        let sys = SystemParams::default();
        let target = Vec3::new(0.0, 7.5, 1.5);
        let los = snr_db(&sys, &Vec3::new(0.0, -20.0, 1.5), &target, KedMode::Paper).unwrap();
        let nlos = snr_db(&sys, &Vec3::new(0.0, -20.0, 10.5), &target, KedMode::Paper).unwrap();
        assert!(nlos.snr_db < los.snr_db, "KED loss and extra FSPL must both bite");
        assert!(nlos.ked_loss_db > 0.0);
    }

    #[test]
    fn snr_monotone_along_a_los_ray() {
        let sys = SystemParams::default();
        let target = Vec3::new(0.0, 7.5, 1.5);
        let mut last = f64::INFINITY;
        for i in 1..=10 {
            let anchor = Vec3::new(0.0, -3.0 * i as f64, 1.5);
            let lb = snr_db(&sys, &anchor, &target, KedMode::Paper).unwrap();
            assert!(lb.snr_db < last);
            last = lb.snr_db;
        }
    }

    #[test]
    fn ked_modes_differ_only_on_the_los_plane() {
        let sys = SystemParams::default();
        let target = Vec3::new(0.0, 7.5, 1.5);
        let anchor = Vec3::new(3.0, -20.0, 1.5);
        let paper = snr_db(&sys, &anchor, &target, KedMode::Paper).unwrap();
        let cont = snr_db(&sys, &anchor, &target, KedMode::Continuous).unwrap();
        assert_eq!(paper.ked_loss_db, 0.0);
        assert!((cont.ked_loss_db - ked_excess_loss_db(0.0)).abs() < 1e-12);

        let anchor = Vec3::new(3.0, -20.0, 4.5);
        let paper = snr_db(&sys, &anchor, &target, KedMode::Paper).unwrap();
        let cont = snr_db(&sys, &anchor, &target, KedMode::Continuous).unwrap();
        assert_eq!(paper, cont, "off the plane the modes agree");
    }

    #[test]
    fn ranging_weight_reference_value() {
        // λ(0 dB, 200 MHz) = 8π²/27 exactly.
        let lam = ranging_weight(1.0, 200e6).unwrap().lambda;
        let expect = 8.0 * std::f64::consts::PI.powi(2) / 27.0;
        assert!(((lam - expect) / expect).abs() < 1e-15, "{lam} vs {expect}");
    }

    #[test]
    fn ranging_weight_scaling_laws() {
        let base = ranging_weight(2.0, 100e6).unwrap().lambda;
        let snr_double = ranging_weight(4.0, 100e6).unwrap().lambda;
        let bw_double = ranging_weight(2.0, 200e6).unwrap().lambda;
        assert!((snr_double / base - 2.0).abs() < 1e-12, "linear in SNR");
        assert!((bw_double / base - 4.0).abs() < 1e-12, "quadratic in B");
    }

    #[test]
    fn ranging_weight_rejects_nonpositive() {
        assert!(ranging_weight(0.0, 1e8).is_err());
        assert!(ranging_weight(1.0, 0.0).is_err());
    }
}
