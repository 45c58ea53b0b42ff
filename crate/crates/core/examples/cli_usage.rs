// Drives the command-line front end in process, the same way the
// `finsler-lab` binary does, and parses the CSV it writes.

use finsler_lab::cli::run_command;
use finsler_lab::report::CsvTable;

pub fn run_example() -> (i32, CsvTable) {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let args = [
        "finsler-lab".to_string(),
        "fieldeq".into(),
        "--model".into(),
        format!("{data}/schwarzschild.json"),
        "--points".into(),
        format!("{data}/schwarzschild-grid.json"),
    ];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_command(args, &mut out, &mut err);
    let text = String::from_utf8(out).expect("UTF-8 output");
    print!("{text}");
    eprint!("{}", String::from_utf8_lossy(&err));
    let table = CsvTable::parse(&text).expect("well-formed CSV");
    println!("exit {code}, {} rows of schema {}", table.rows.len(), table.schema);
    (code, table)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
