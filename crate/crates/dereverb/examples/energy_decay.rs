//! Reverberation-time analysis: backward-integrated energy decay of a
//! simulated response, a line fit for T60, and the absorptivity Sabine's
//! formula assigns to that decay.
//!
//! ```bash
//! cargo run --release --example energy_decay
//! ```

use dereverb::evaluation::{
    reflection_from_absorptivity, rt60_from_schroeder, sabine_absorptivity, schroeder_curve,
};
use dereverb::image_source::{simulate, DelayMode};
use dereverb::room::{Point3, RoomModel};

fn main() -> dereverb::Result<()> {
    let fs = 16000.0;
    let dims = [1.84, 1.79, 1.83];
    let abar = 0.0407;
    let room = RoomModel::new(dims, reflection_from_absorptivity(abar)?, 346.58, fs, 16384)?;
    let src = Point3::new(0.26, 0.30, -0.15)?;
    let rcv = Point3::new(-0.57, 0.58, 0.31)?;
    let g = simulate(&room, &src, &rcv, DelayMode::NearestSample)?;

    let curve = schroeder_curve(&g)?;
    println!("energy decay (dB re total):");
    for n in (0..curve.len()).step_by(curve.len() / 10) {
        println!("  t = {:>5.2} s   {:>7.2} dB", n as f64 / fs, curve[n]);
    }

    match rt60_from_schroeder(&curve, fs) {
        Some(t60) => {
            println!();
            println!("T60 from the -5..-35 dB fit: {t60:.3} s");
            let implied = sabine_absorptivity(dims, t60);
            println!("Sabine absorptivity implied by that decay: {implied:.4}");
            println!("modeled absorptivity was {abar:.4} (reflection {:.4})", room.reflection);
        }
        None => println!("decay never spans the -5..-35 dB fit range"),
    }
    Ok(())
}
