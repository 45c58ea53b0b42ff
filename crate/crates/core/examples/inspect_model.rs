// Loads model descriptors (built-in presets and a JSON file) and reports the
// causal classification of a few directions.

use finsler_lab::catalog::{build_model, presets, ChartPoint, ModelDescriptor};
use finsler_lab::causal::{admissibility_report, AdmissibilityReport};

pub fn run_example() -> Vec<(String, AdmissibilityReport)> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/randers-magnetic.json");
    let from_file = ModelDescriptor::load(std::path::Path::new(path)).expect("bundled descriptor");
    let descriptors = [presets::minkowski(), presets::bogoslovsky(0.2), presets::quartic_root(), from_file];
    let x = [0.0, 0.5, 0.2, 0.0];
    let directions = [[1.0, 0.0, 0.0, 0.0], [1.0, 0.6, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [0.2, 1.0, 0.0, 0.0]];

    let mut out = Vec::new();
    for desc in descriptors {
        let model = build_model(&desc).expect("valid descriptor");
        for v in directions {
            let rep = admissibility_report(&model, &ChartPoint::new(x, v));
            println!(
                "{:<18} v = {:?}  L = {:>11}  det g = {:+.4e}  signature {:?}  {:?}",
                model.name,
                v,
                rep.l_value.map_or("undefined".into(), |l| format!("{l:+.4e}")), rep.det_g, rep.signature, rep.region
            );
            out.push((model.name.clone(), rep));
        }
    }
    out
}

#[allow(dead_code)]
fn main() {
    run_example();
}
