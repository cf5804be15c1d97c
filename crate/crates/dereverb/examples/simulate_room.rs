//! Simulate the 2 m plywood cube at desk scale and write the 2x2 impulse
//! response set as WAV files plus a manifest.
//!
//! ```bash
//! cargo run --release --example simulate_room [OUT_DIR]
//! ```

use std::path::PathBuf;

use dereverb::cli::cmd_simulate;
use dereverb::image_source::{simulate, DelayMode};
use dereverb::scenario::ScenarioConfig;

fn main() -> dereverb::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/example-out/simulate_room".into())
        .into();

    let config = ScenarioConfig::from_toml_str(
        r#"
sources = [[0.26, 0.30, -0.15], [-0.26, -0.30, -0.15]]
receivers = [[-0.57, 0.58, 0.31], [-0.39, 0.58, 0.31]]

[room]
dims = [1.84, 1.79, 1.83]
absorptivity = 0.0407
sample_rate = 16000.0
ir_length = 16384
"#,
    )?;

    let room = config.room_model()?;
    println!(
        "room {:?} m, reflection {:.4} (absorptivity {:.4}), fs {} Hz, {} samples ({:.2} s)",
        room.dims,
        room.reflection,
        room.absorptivity(),
        room.sample_rate,
        room.ir_length,
        room.duration()
    );

    let src = config.source_points()?[0];
    let rcv = config.receiver_points()?[0];
    let ir = simulate(&room, &src, &rcv, DelayMode::NearestSample)?;
    let first = ir.samples.iter().position(|&s| s != 0.0).unwrap();
    println!(
        "direct path: {:.3} m, arrives at sample {} ({:.2} ms), energy {:.1}",
        src.distance_to(&rcv),
        first,
        1000.0 * first as f64 / room.sample_rate,
        ir.energy()
    );

    cmd_simulate(&config, &out)?;
    println!("wrote ir_s{{i}}_r{{j}}.wav and manifest.toml under {}", out.display());
    Ok(())
}
