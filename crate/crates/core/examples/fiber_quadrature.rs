// Integrates over the observer shell with the invariant measure: Minkowski cap
// volumes against the closed form, and the same integral on a Randers fiber in
// two different charts.

use finsler_lab::catalog::{build_model, presets};
use finsler_lab::quadrature::{integrate_observer_fiber, minkowski_cap_volume, DirectionMap, QuadConfig};

pub fn run_example() -> Vec<(String, f64, f64)> {
    let mut out = Vec::new();
    let minkowski = build_model(&presets::minkowski()).expect("preset");
    for chi0 in [0.5, 1.0, 2.0] {
        let cfg = QuadConfig {
            chi_max: chi0,
            orders: [24, 12, 12],
            chart: DirectionMap::Rapidity,
        };
        let (vol, err) = integrate_observer_fiber(&minkowski, &[0.0; 4], &cfg, |_, _| Ok(1.0)).expect("quadrature");
        let exact = minkowski_cap_volume(chi0);
        println!("χ₀ = {chi0}: {vol:.14e}  exact {exact:.14e}  (estimate {err:.1e})");
        out.push((format!("cap {chi0}"), vol, exact));
    }

    let randers = build_model(&presets::randers(0.3)).expect("preset");
    let x = [0.0; 4];
    let weight = |_: &[f64; 4], v: &[f64; 4]| {
        let l = randers.lagrangian_value(&x, v)?;
        Ok(v[0] * v[0] / l)
    };
    let mut results = Vec::new();
    for chart in [DirectionMap::Rapidity, DirectionMap::Velocity] {
        let cfg = QuadConfig {
            chi_max: 1.0,
            orders: [32, 16, 16],
            chart,
        };
        let (value, _) = integrate_observer_fiber(&randers, &x, &cfg, weight).expect("quadrature");
        println!("randers ∫ (ẋ⁰)²/L dΣ in {chart:?} chart: {value:.14e}");
        results.push(value);
    }
    out.push(("randers charts".into(), results[0], results[1]));
    out
}

#[allow(dead_code)]
fn main() {
    run_example();
}
