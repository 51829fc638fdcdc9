//! Running an experiment from a TOML description and writing the table, the
//! same path `werm run --config` takes.
//!
//! cargo run --example sweep_config

use imbalance_werm::sweep::{run as run_sweep, write_table, Format, SweepConfig};

const CONFIG: &str = r#"
mode = "rho_sweep"
s = 2.0
pi_plus = 0.2
delta = 0.2
grid = "1:13:7"
"#;

pub fn run() {
    let config = SweepConfig::from_toml_str(CONFIG).expect("valid config");
    let table = run_sweep(&config).expect("solvable");
    let mut out = Vec::new();
    write_table(&config, &table, Format::Csv, &mut out).expect("in-memory write");
    let text = String::from_utf8(out).expect("utf-8");
    print!("{text}");
    // 7 grid rows, the rho_tilde row and the prior-ratio row, under a CSV header
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 7 + 2);
}

#[allow(dead_code)]
fn main() {
    run();
}
