//! 2x2 matrix inversion: two sources, two control points, one inverse
//! filter matrix that hits a unit impulse at both points at once while
//! cancelling the crosstalk paths.
//!
//! ```bash
//! cargo run --release --example matrix_inversion
//! ```

use dereverb::evaluation::EvalConfig;
use dereverb::image_source::simulate_matrix;
use dereverb::inversion::InversionConfig;
use dereverb::pipeline::{build_filters, evaluate_filters};
use dereverb::room::{Point3, RoomModel};

fn main() -> dereverb::Result<()> {
    let fs = 8000.0;
    let room = RoomModel::new([1.84, 1.79, 1.83], 0.8, 346.58, fs, 4096)?;
    let sources = [Point3::new(0.26, 0.30, -0.15)?, Point3::new(-0.26, -0.30, -0.15)?];
    let receivers = [Point3::new(-0.57, 0.58, 0.31)?, Point3::new(-0.39, 0.58, 0.31)?];

    let plant = simulate_matrix(&room, &sources, &receivers)?;
    println!(
        "plant: {} sources -> {} control points, {} samples each",
        plant.source_count(),
        plant.receiver_count(),
        plant.response_len()
    );

    let cfg = InversionConfig {
        beta: 1e-2,
        modeling_delay: 0.25,
        fft_length: 16384,
        window_tau: None,
    };
    let filters = build_filters(&plant, &cfg)?;
    for i in 0..filters.source_count() {
        for j in 0..filters.receiver_count() {
            println!(
                "filter s{i}<-r{j}: energy {:.3e}, wraparound {:.2e}",
                filters.filter(i, j).energy(),
                filters.wraparound_energy_ratio(i, j)
            );
        }
    }

    let eval = EvalConfig::new(cfg.modeling_delay);
    for rep in evaluate_filters(&plant, &filters, &eval)? {
        println!(
            "control point {}: DR(inf) {:+.2} dB, DR(100 ms) {:+.2} dB, SNR {:.1} dB",
            rep.control_point, rep.dr_total_db, rep.dr_early_db, rep.snr_db
        );
    }
    Ok(())
}
