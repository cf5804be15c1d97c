//! Parameter sweeps over the full pipeline: the plant stays fixed while
//! the window time constant (or beta, or the modeled absorptivity) varies,
//! one dereverberation-ratio row per value. The same engine backs the
//! `dereverb sweep` subcommand, which writes the rows as CSV.
//!
//! ```bash
//! cargo run --release --example parameter_sweep
//! ```

use dereverb::cli::{run_sweep, SweepParameter};
use dereverb::scenario::ScenarioConfig;

fn main() -> dereverb::Result<()> {
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
modeling_delay = 0.5

[eval]
t_min = 0.008

[degradation]
enabled = true
wall_highpass_hz = 150.0
air_db_per_10khz_per_34m = 12.0
abar_offset = 0.03
"#,
    )?;

    println!("tau sweep (fixed degraded plant):");
    let taus = [0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.64];
    for (value, reports) in run_sweep(&config, SweepParameter::Tau, &taus)? {
        for rep in &reports {
            println!(
                "  tau {value:>5}: DR(inf) {:+6.2} dB, DR(100 ms) {:+6.2} dB",
                rep.dr_total_db, rep.dr_early_db
            );
        }
    }

    println!("beta sweep:");
    for (value, reports) in run_sweep(&config, SweepParameter::Beta, &[1e-4, 1e-2, 1.0])? {
        for rep in &reports {
            println!("  beta {value:>6.0e}: DR(inf) {:+6.2} dB", rep.dr_total_db);
        }
    }
    Ok(())
}
