// Probes convexity of the timelike cone: random pairs of timelike directions
// and the segment between them.

use finsler_lab::catalog::{build_model, presets};
use finsler_lab::causal::{convexity_probe_seeded, observer_frame, ConeProbe};

pub fn run_example() -> Vec<ConeProbe> {
    let mut out = Vec::new();
    for desc in [presets::randers(0.3), presets::bogoslovsky(0.2), presets::quartic_root()] {
        let model = build_model(&desc).expect("preset");
        let x = [0.0, 0.3, -0.2, 0.1];
        let frame = observer_frame(&model, &x).expect("observer frame");
        let probe = convexity_probe_seeded(&model, &x, 200, 11).expect("probe");
        println!(
            "{:<14} observer {:+.4?}  {} pairs, {} violations",
            model.name,
            frame[0],
            probe.samples,
            probe.failures.len()
        );
        out.push(probe);
    }
    out
}

#[allow(dead_code)]
fn main() {
    run_example();
}
