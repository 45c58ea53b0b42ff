// The geometry bundle at one point of a position-dependent Randers model:
// metric, Finsler function, spray, curvature scalar R₀ and the vacuum scalar E.

use finsler_lab::catalog::{build_model, presets, ChartPoint};
use finsler_lab::dynamics::vacuum_scalar_jet;
use finsler_lab::geometry::GeometryBundle;
use finsler_lab::jets::TruncationOrder;

pub struct BundleSummary {
    pub l: f64,
    pub f: f64,
    pub g: [[f64; 4]; 4],
    pub spray: [f64; 4],
    pub cartan_trace: [f64; 4],
    pub r0: f64,
    pub e: f64,
}

pub fn run_example() -> BundleSummary {
    let model = build_model(&presets::randers_magnetic()).expect("preset");
    let pt = ChartPoint::new([0.0, 0.5, 0.2, 0.0], [1.0, 0.1, 0.2, 0.0]);
    let b = GeometryBundle::new(&model, &pt, TruncationOrder::default()).expect("admissible point");

    let g = std::array::from_fn(|i| std::array::from_fn(|j| b.g[i][j].value()));
    let spray = b.spray().expect("spray").g.clone().map(|j| j.value());
    let cartan_trace = b.cartan().expect("cartan").trace.clone().map(|j| j.value());
    let r0 = b.curvature().expect("curvature").r0.value();
    let e = vacuum_scalar_jet(&b).expect("E").value();

    println!("L = {:.12}  F = {:.12}  ε = {}", b.l.value(), b.f.value(), b.epsilon);
    for row in &g {
        println!("g  {row:+.6?}");
    }
    println!("Gⁱ = {spray:+.6?}");
    println!("Cᵢ = {cartan_trace:+.6?}");
    println!("R₀ = {r0:+.12e}   E = {e:+.12e}");
    BundleSummary {
        l: b.l.value(),
        f: b.f.value(),
        g,
        spray,
        cartan_trace,
        r0,
        e,
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
