// A kinetic gas: pointwise Θ and its balance law, the observer-averaged
// energy-momentum density, and a collisionless gas on Schwarzschild.

use finsler_lab::catalog::{build_model, presets, ChartPoint};
use finsler_lab::dynamics::{
    averaged_conservation_check, em_density, em_scalar_and_theta, liouville_residual, schwarzschild_orbital_gas,
    theta_divergence_and_balance, EmDensity, KineticGas,
};
use finsler_lab::quadrature::QuadConfig;

pub fn run_example() -> (EmDensity, f64, f64) {
    let minkowski = build_model(&presets::minkowski()).expect("preset");
    let gas = KineticGas::rest_bump(1.0, 1.0, 1.0);
    let pt = ChartPoint::new([0.0; 4], [1.0, 0.2, 0.0, 0.1]);
    let theta = em_scalar_and_theta(&minkowski, &gas, &pt).expect("Θ");
    println!("𝔗 = {:.12}  tr Θ = {:.12}", theta.t_frak, theta.trace());

    let quad = QuadConfig {
        chi_max: 1.0,
        orders: [32, 12, 12],
        ..QuadConfig::default()
    };
    let density = em_density(&minkowski, &gas, &[0.0; 4], &quad).expect("𝒯");
    for (row, err) in density.density.iter().zip(&density.error_estimates) {
        println!("𝒯  {row:+.8?}  ± {:.1e}", err.iter().cloned().fold(0.0, f64::max));
    }

    // not collisionless on this background (∇𝔗 ≠ 0), yet the balance law holds
    let curved = build_model(&presets::randers_schwarzschild(1.0, 0.2)).expect("preset");
    let bal = theta_divergence_and_balance(&curved, &gas, &ChartPoint::new([0.0, 6.0, 1.2, 0.0], [1.0, 0.05, 0.0, 0.02]))
        .expect("balance");
    println!("randers-schwarzschild: ∇𝔗 = {:+.6e}  balance residual {:.2e}", bal.nabla_t, bal.residual);

    let mass = 1.0;
    let schwarzschild = build_model(&presets::schwarzschild(mass)).expect("preset");
    let orbital = schwarzschild_orbital_gas(1.0, (0.95, 0.1), (0.0, 4.0));
    let x = [0.0, 8.0, std::f64::consts::FRAC_PI_2, 0.0];
    let liouville = liouville_residual(&schwarzschild, &orbital, &ChartPoint::new(x, [1.1, 0.1, 0.0, 0.03])).expect("∇φ");
    let cons = averaged_conservation_check(&schwarzschild, &orbital, &x, &QuadConfig::default()).expect("∫ div Θ");
    let worst = cons.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    println!("orbital gas: ∇φ = {liouville:+.2e}  max |∫ Θʲᵢ|ⱼ dΣ| = {worst:.2e}");
    (density, liouville, worst)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
