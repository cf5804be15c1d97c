//! The file-based pipeline end to end, as the `dereverb` binary drives it:
//! simulate -> degrade -> invert -> evaluate, with every stage exchanging
//! WAV sets and manifests on disk.
//!
//! ```bash
//! cargo run --release --example file_pipeline [WORK_DIR]
//! ```

use std::path::PathBuf;

use dereverb::cli::{cmd_degrade, cmd_evaluate, cmd_invert, cmd_simulate, REPORT_CSV};
use dereverb::scenario::ScenarioConfig;

fn main() -> dereverb::Result<()> {
    let work: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/example-out/file_pipeline".into())
        .into();

    let config = ScenarioConfig::from_toml_str(
        r#"
sources = [[0.26, 0.30, -0.15]]
receivers = [[-0.57, 0.58, 0.31]]

[room]
dims = [1.84, 1.79, 1.83]
absorptivity = 0.0407
sample_rate = 8000.0
ir_length = 4096

[inversion]
beta = 1e-2
modeling_delay = 0.25
window_tau = 0.06

[eval]
t_min = 0.008

[degradation]
enabled = true
wall_highpass_hz = 150.0
air_db_per_10khz_per_34m = 12.0
abar_offset = 0.03
"#,
    )?;

    let sim = work.join("sim");
    let proxy = work.join("proxy");
    let filters = work.join("filters");
    let report = work.join("report");

    println!("simulate -> {}", sim.display());
    cmd_simulate(&config, &sim)?;
    println!("degrade  -> {} (synthetic proxy plant + mse.csv)", proxy.display());
    cmd_degrade(&sim.join("manifest.toml"), &[], &proxy)?;
    println!("invert   -> {} (windowed model)", filters.display());
    cmd_invert(&sim.join("manifest.toml"), &[], &filters)?;
    println!("evaluate -> {}", report.display());
    cmd_evaluate(&proxy.join("manifest.toml"), &filters.join("manifest.toml"), &report)?;

    println!();
    println!("{}", std::fs::read_to_string(report.join(REPORT_CSV))?);
    Ok(())
}
