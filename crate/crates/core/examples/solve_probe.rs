//! Quick timing probe for the selection solver on the reference scene.
//! Run: cargo run --release -p anchoropt-core --example solve_probe [d] [k]

use anchoropt_core::harness::{run_trial, Algo};
use anchoropt_core::scene::{self, AnchorRegion, BuildingGeometry, Scene, SystemParams, Vec3};
use anchoropt_core::solver::BnbConfig;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let d: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let k: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let trials: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(5);

    let building = BuildingGeometry::default();
    let scene = Scene {
        system: SystemParams::default(),
        building,
        region: AnchorRegion {
            lo: Vec3::new(-15.0, -30.0, 0.0),
            hi: Vec3::new(15.0, -15.0, 15.0),
            spacing_m: d,
        },
        targets: scene::default_targets(&building, &[1, 2, 3]).unwrap(),
        ked_mode: Default::default(),
    };
    let bnb = BnbConfig { eps_gap: 1e-3, ..Default::default() };

    for algo in [Algo::EOpt, Algo::DOpt, Algo::RandE] {
        for seed in 0..trials {
            let t0 = std::time::Instant::now();
            let rec = run_trial(&scene, d, k, algo, seed, &bnb, 10_000, 1_000_000, seed as u32);
            println!(
                "{:6} seed={seed} status={} raw={:.6} gap={:?} nodes={} ms={} (wall {} ms) mad={:?} cer={:?}",
                rec.algo,
                rec.status,
                rec.raw_value,
                rec.gap.map(|g| (g * 1e6).round() / 1e6),
                rec.nodes,
                rec.runtime_ms,
                t0.elapsed().as_millis(),
                rec.mad_m.map(|v| (v * 1e4).round() / 1e4),
                rec.cer_m.map(|v| (v * 1e4).round() / 1e4),
            );
        }
    }
}
