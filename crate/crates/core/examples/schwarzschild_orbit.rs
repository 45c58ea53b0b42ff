// Circular and eccentric equatorial orbits in Schwarzschild, integrated from
// the spray alone, with drift of L and of the conserved momenta.

use finsler_lab::catalog::{build_model, presets};
use finsler_lab::geodesics::{
    geodesic_invariants, integrate_geodesic, schwarzschild_circular_orbit, DriftReport, IntegratorConfig,
};

pub fn run_example() -> (f64, DriftReport) {
    let (mass, r) = (1.0, 8.0);
    let model = build_model(&presets::schwarzschild(mass)).expect("preset");
    let start = schwarzschild_circular_orbit(mass, r);
    let traj = integrate_geodesic(&model, start, &IntegratorConfig::rk4(0.5, 2000)).expect("stays outside r = 2M");
    let end = traj.last();
    let omega = (end.x[3] - start.x[3]) / (end.x[0] - start.x[0]);
    println!(
        "circular r = {r}: Ω = {omega:.12}  (M/r³)^½ = {:.12}  r drift {:.2e}",
        (mass / r.powi(3)).sqrt(),
        (end.x[1] - r).abs()
    );

    let mut eccentric = start;
    eccentric.v[3] *= 1.1;
    let l = model.lagrangian_value(&eccentric.x, &eccentric.v).unwrap();
    eccentric.v = eccentric.v.map(|c| c / l.sqrt());
    let traj = integrate_geodesic(&model, eccentric, &IntegratorConfig::rk45(1e-10, 2000.0)).expect("bound orbit");
    let drift = geodesic_invariants(&traj, &model).expect("invariants");
    let (r_min, r_max) = traj
        .states
        .iter()
        .fold((f64::MAX, 0.0f64), |(lo, hi), s| (lo.min(s.x[1]), hi.max(s.x[1])));
    println!(
        "eccentric: r ∈ [{r_min:.4}, {r_max:.4}]  {} adaptive steps  |ΔL| ≤ {:.2e}",
        drift.steps, drift.max_l_drift
    );
    for m in &drift.momenta {
        println!("  p_{} = {:+.10}  drift {:.2e}", m.coordinate, m.initial, m.max_drift);
    }
    (omega, drift)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
