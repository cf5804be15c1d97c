//! Inverting a model that is only accurate early: the plant is the
//! synthetic degradation proxy, whose late reflections drift away from the
//! clean simulation the filters are built from. Exponentially windowing
//! the model before inversion keeps only the part that can be trusted.
//!
//! ```bash
//! cargo run --release --example windowing_effect
//! ```

use dereverb::degrade::{simulate_degraded, DegradationModel};
use dereverb::evaluation::{local_mse, EvalConfig};
use dereverb::image_source::{simulate, DelayMode};
use dereverb::inversion::InversionConfig;
use dereverb::pipeline::{build_filters, evaluate_filters};
use dereverb::room::{Point3, RoomModel};
use dereverb::signal::TransferMatrix;

fn main() -> dereverb::Result<()> {
    let fs = 8000.0;
    let room = RoomModel::new(
        [1.84, 1.79, 1.83],
        (1.0f64 - 0.0407).sqrt(),
        346.58,
        fs,
        8192,
    )?;
    let src = Point3::new(0.26, 0.30, -0.15)?;
    let rcv = Point3::new(-0.57, 0.58, 0.31)?;

    let clean = simulate(&room, &src, &rcv, DelayMode::NearestSample)?;
    let degradation = DegradationModel {
        enabled: true,
        wall_highpass_hz: 150.0,
        air_db_per_10khz_per_34m: 12.0,
        abar_offset: 0.03,
    };
    let proxy = simulate_degraded(&room, &src, &rcv, &degradation)?;

    // The proxy drifts away from the clean response over time.
    let mse = local_mse(&proxy, &clean, (0.05 * fs) as usize)?;
    println!("local error vs time (50 ms bins, 2.0 = uncorrelated):");
    for (k, e) in mse.iter().step_by(4) {
        println!("  t = {:>5.2} s   e_ms = {e:.2}", *k as f64 / fs);
    }

    let model = TransferMatrix::scalar(clean);
    let plant = TransferMatrix::scalar(proxy);
    let eval = EvalConfig {
        t_min: 0.008,
        ..EvalConfig::new(0.5)
    };
    println!();
    println!("window     DR(inf)     DR(100 ms)");
    for tau in [None, Some(0.01), Some(0.06), Some(0.32)] {
        let cfg = InversionConfig {
            beta: 1e-2,
            modeling_delay: 0.5,
            fft_length: 32768,
            window_tau: tau,
        };
        let filters = build_filters(&model, &cfg)?;
        let rep = &evaluate_filters(&plant, &filters, &eval)?[0];
        let label = tau.map_or("none".to_string(), |t| format!("{t} s"));
        println!("{label:<9}  {:+7.2} dB  {:+7.2} dB", rep.dr_total_db, rep.dr_early_db);
    }
    Ok(())
}
