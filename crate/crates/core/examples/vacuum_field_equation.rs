// The vacuum field-equation scalar E on a few spacetimes. Schwarzschild solves
// it, a Randers deformation of Schwarzschild by dt does not, and de Sitter in
// conformal time has E = 3H².

use finsler_lab::catalog::{build_model, presets, ChartPoint};
use finsler_lab::dynamics::vacuum_scalar_e;
use finsler_lab::jets::TruncationOrder;

pub fn run_example() -> Vec<(String, f64)> {
    let hubble = 0.5;
    let cases = [
        (presets::schwarzschild(1.0), ChartPoint::new([0.0, 6.0, 1.2, 0.4], [1.0, 0.1, 0.02, 0.03])),
        (presets::randers_schwarzschild(1.0, 0.2), ChartPoint::new([0.0, 6.0, 1.2, 0.4], [1.0, 0.1, 0.02, 0.03])),
        (presets::de_sitter_conformal(hubble), ChartPoint::new([-1.0, 0.2, 0.0, 0.1], [1.0, 0.3, 0.1, 0.0])),
        (presets::bogoslovsky(0.2), ChartPoint::new([0.0; 4], [1.0, 0.3, 0.1, 0.0])),
    ];
    let mut out = Vec::new();
    for (desc, pt) in cases {
        let model = build_model(&desc).expect("preset");
        let e = vacuum_scalar_e(&model, &pt, TruncationOrder::default()).expect("E");
        println!("{:<26} E = {e:+.6e}", model.name);
        out.push((model.name, e));
    }
    println!("3H² = {}", 3.0 * hubble * hubble);
    out
}

#[allow(dead_code)]
fn main() {
    run_example();
}
