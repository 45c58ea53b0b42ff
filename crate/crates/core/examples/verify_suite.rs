// Runs the default verification suite over every catalog model kind and
// prints one line per check.

use finsler_lab::catalog::{build_model, presets};
use finsler_lab::verify::{default_suite, CheckReport, SuiteConfig};

pub fn run_example() -> Vec<CheckReport> {
    let samples = std::env::var("FINSLER_LAB_SAMPLES")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    let cfg = SuiteConfig {
        samples,
        fd_samples: samples.min(50),
        seed: 42,
    };
    let mut all = Vec::new();
    let mut kinds = presets::all_kinds();
    kinds.extend(presets::curved_kinds().into_iter().filter(|d| d.name != Some("quartic-root".into())));
    for desc in kinds {
        let model = build_model(&desc).expect("catalog presets are valid");
        let start = std::time::Instant::now();
        let reports = default_suite(&model, &cfg).expect("suite runs");
        for r in &reports {
            println!(
                "{:<20} {:<28} {:>10.3e} / {:.0e}  {}",
                r.model,
                r.name,
                r.max_abs_residual,
                r.tolerance,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        println!("{:<20} {:.2?}", model.name, start.elapsed());
        all.extend(reports);
    }
    all
}

#[allow(dead_code)]
fn main() {
    let reports = run_example();
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!("{} checks, {failed} failed", reports.len());
}
