//! Synthetic plant degradation, a stand-in for physically measured
//! responses.
//!
//! A clean image source simulation treats every reflection as
//! frequency-flat, which is exactly where simulated and measured responses
//! drift apart over time. This module re-runs the image engine and filters
//! every arrival individually: each wall bounce applies one causal
//! first-order high-pass (magnitude loss and real phase dispersion),
//! propagation applies a distance-proportional high-frequency roll-off,
//! and the modeled absorptivity can be offset. The output diverges from
//! the clean simulation more and more with time, which is the behavior the
//! inverse-filter pipeline has to survive.
//!
//! Everything here is synthetic test plumbing; outputs are labeled as such
//! in the manifests.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_source::{self, DelayMode};
use crate::room::{validate_geometry, Point3, RoomModel};
use crate::signal::{ImpulseResponse, TransferMatrix};

/// Degradation strengths. `wall_highpass_hz` is the corner of the
/// per-reflection high-pass; `air_db_per_10khz_per_34m` is the attenuation
/// at 10 kHz after 34.3 m of travel, scaled as frequency squared;
/// `abar_offset` shifts the absorptivity the proxy walls actually have.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DegradationModel {
    pub enabled: bool,
    pub wall_highpass_hz: f64,
    pub air_db_per_10khz_per_34m: f64,
    pub abar_offset: f64,
}

impl Default for DegradationModel {
    fn default() -> Self {
        Self {
            enabled: false,
            wall_highpass_hz: 100.0,
            air_db_per_10khz_per_34m: 8.0,
            abar_offset: 0.01,
        }
    }
}

impl DegradationModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.wall_highpass_hz >= 0.0
            && self.air_db_per_10khz_per_34m >= 0.0
            && self.abar_offset >= 0.0
            && self.wall_highpass_hz.is_finite()
            && self.air_db_per_10khz_per_34m.is_finite()
            && self.abar_offset.is_finite();
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "degradation parameters must be non-negative, got {self:?}"
            )));
        }
        Ok(())
    }
}

const AIR_REFERENCE_METERS: f64 = 34.3;
const AIR_REFERENCE_HZ: f64 = 10_000.0;
const DESIGN_GRID: usize = 1024;
// Reflection orders binned per lattice walk; bounds peak memory.
const ORDER_CHUNK: usize = 64;

/// Proxy "measured" response: the image engine re-run with per-arrival
/// filtering. With the model disabled this is bit-identical to
/// [`image_source::simulate`] in the default delay mode.
pub fn simulate_degraded(
    room: &RoomModel,
    source: &Point3,
    receiver: &Point3,
    model: &DegradationModel,
) -> Result<ImpulseResponse> {
    if !model.enabled {
        return image_source::simulate(room, source, receiver, DelayMode::NearestSample);
    }
    model.validate()?;
    validate_geometry(room, &[*source, *receiver])?;
    if source == receiver {
        return Err(Error::CoincidentSourceReceiver);
    }

    let abar = (room.absorptivity() + model.abar_offset).clamp(0.0, 1.0);
    let proxy_room = RoomModel::new(
        room.dims,
        (1.0 - abar).sqrt(),
        room.speed_of_sound,
        room.sample_rate,
        room.ir_length,
    )?;

    let n = proxy_room.ir_length;
    let fs = proxy_room.sample_rate;
    let c = proxy_room.speed_of_sound;
    let d_max = c * proxy_room.duration();
    let buckets = d_max.ceil() as usize + 2;
    // Per axis, an arrival within d_max has index |l| <= d_max / L + 1.
    let max_order: usize = proxy_room
        .dims
        .iter()
        .map(|l| (d_max / l).ceil() as usize + 1)
        .sum();

    let mut air_cache: Vec<Option<Box<[f64]>>> = vec![None; buckets];
    let wall = WallHighpass::new(model.wall_highpass_hz, fs);

    // sum_k wall^k(R_k) evaluated as a Horner nest from the highest order
    // down: acc <- R_k + wall(acc). R_k is the air-filtered sub-response of
    // all order-k arrivals, accumulated order-independently.
    let mut acc = vec![0.0; n];
    let mut chunk_hi = max_order + 1;
    while chunk_hi > 0 {
        let chunk_lo = chunk_hi.saturating_sub(ORDER_CHUNK);
        let mut bins: Vec<image_source::BinAccumulator> = (chunk_lo..chunk_hi)
            .map(|_| image_source::BinAccumulator::new(n))
            .collect();
        image_source::for_each_arrival(&proxy_room, source, receiver, |d, order, amp| {
            let order = order as usize;
            if order < chunk_lo || order >= chunk_hi {
                return;
            }
            let pos = fs * (d / c);
            let start = pos.round();
            if start >= n as f64 {
                return;
            }
            let start = start as usize;
            let bucket = d.round().max(0.0) as usize;
            let kernel = air_cache[bucket]
                .get_or_insert_with(|| air_kernel(fs, bucket as f64, model).into());
            let sink = &mut bins[order - chunk_lo];
            let stop = kernel.len().min(n - start);
            for (i, &w) in kernel[..stop].iter().enumerate() {
                sink.add(start + i, amp * w);
            }
        });
        for k in (chunk_lo..chunk_hi).rev() {
            if k + 1 < max_order + 1 {
                wall.filter_in_place(&mut acc);
            }
            let r_k = bins.pop().expect("one accumulator per order").finish();
            for (a, v) in acc.iter_mut().zip(r_k) {
                *a += v;
            }
        }
        chunk_hi = chunk_lo;
    }
    ImpulseResponse::new(acc, fs)
}

/// Degraded counterpart of [`image_source::simulate_matrix`].
pub fn degrade_matrix(
    room: &RoomModel,
    sources: &[Point3],
    receivers: &[Point3],
    model: &DegradationModel,
) -> Result<TransferMatrix> {
    if sources.is_empty() || receivers.is_empty() {
        return Err(Error::DimensionMismatch(
            "need at least one source and one receiver".into(),
        ));
    }
    let rows: Vec<Vec<ImpulseResponse>> = receivers
        .par_iter()
        .map(|rcv| {
            sources
                .par_iter()
                .map(|src| simulate_degraded(room, src, rcv, model))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    TransferMatrix::new(rows)
}

/// One wall bounce: bilinear-transformed first-order high-pass.
pub(crate) struct WallHighpass {
    gain: f64,
    pole: f64,
}

impl WallHighpass {
    pub(crate) fn new(corner_hz: f64, fs: f64) -> Self {
        if corner_hz <= 0.0 {
            // Identity.
            return Self { gain: 1.0, pole: 0.0 };
        }
        let w = (std::f64::consts::PI * corner_hz / fs).tan();
        Self {
            gain: 1.0 / (1.0 + w),
            pole: (1.0 - w) / (1.0 + w),
        }
    }

    pub(crate) fn filter_in_place(&self, x: &mut [f64]) {
        if self.gain == 1.0 && self.pole == 0.0 {
            return;
        }
        let mut prev_in = 0.0;
        let mut prev_out = 0.0;
        for v in x.iter_mut() {
            let input = *v;
            let out = self.gain * (input - prev_in) + self.pole * prev_out;
            prev_in = input;
            prev_out = out;
            *v = out;
        }
    }
}

/// Air roll-off target in linear magnitude at frequency `f` after
/// `distance` meters.
pub(crate) fn air_magnitude(f: f64, distance: f64, model: &DegradationModel) -> f64 {
    let att_db = model.air_db_per_10khz_per_34m
        * (f / AIR_REFERENCE_HZ).powi(2)
        * (distance / AIR_REFERENCE_METERS);
    10f64.powf(-att_db / 20.0)
}

// Causal minimum-phase FIR realizing the air magnitude, via the real
// cepstrum. Air dispersion is gentle, so a short kernel suffices; the
// direct arrival keeps its timing because the kernel starts at tap 0.
pub(crate) fn air_kernel(fs: f64, distance: f64, model: &DegradationModel) -> Vec<f64> {
    use rustfft::num_complex::Complex64;
    use rustfft::FftPlanner;
    let grid = DESIGN_GRID;
    let floor = 1e-6;

    let mut log_mag = vec![Complex64::new(0.0, 0.0); grid];
    for b in 0..=grid / 2 {
        let f = b as f64 * fs / grid as f64;
        let v = Complex64::new(air_magnitude(f, distance, model).max(floor).ln(), 0.0);
        log_mag[b] = v;
        if b != 0 && b != grid - b {
            log_mag[grid - b] = v;
        }
    }

    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(grid).process(&mut log_mag);
    let scale = 1.0 / grid as f64;
    // Fold the cepstrum onto causal quefrencies.
    let mut folded = vec![Complex64::new(0.0, 0.0); grid];
    folded[0] = log_mag[0] * scale;
    folded[grid / 2] = log_mag[grid / 2] * scale;
    for q in 1..grid / 2 {
        folded[q] = 2.0 * log_mag[q] * scale;
    }
    planner.plan_fft_forward(grid).process(&mut folded);
    let mut spectrum: Vec<Complex64> = folded.iter().map(|c| c.exp()).collect();
    planner.plan_fft_inverse(grid).process(&mut spectrum);

    let taps = ((fs * 0.004).round() as usize).clamp(16, 256);
    spectrum[..taps.min(grid)]
        .iter()
        .map(|c| c.re * scale)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::local_mse;

    fn plywood_cube(n: usize, fs: f64) -> RoomModel {
        RoomModel::new([1.84, 1.79, 1.83], 0.97945, 346.58, fs, n).unwrap()
    }

    fn endpoints() -> (Point3, Point3) {
        (
            Point3::new(0.26, 0.30, -0.15).unwrap(),
            Point3::new(-0.57, 0.58, 0.31).unwrap(),
        )
    }

    #[test]
    fn disabled_model_is_bit_identical_to_the_clean_simulation() {
        let room = plywood_cube(1024, 8000.0);
        let (s, r) = endpoints();
        let model = DegradationModel { enabled: false, ..Default::default() };
        let clean = image_source::simulate(&room, &s, &r, DelayMode::NearestSample).unwrap();
        let proxy = simulate_degraded(&room, &s, &r, &model).unwrap();
        assert_eq!(clean.samples, proxy.samples);
    }

    #[test]
    fn mse_against_the_clean_simulation_grows_with_time() {
        let room = plywood_cube(8192, 8000.0);
        let (s, r) = endpoints();
        let model = DegradationModel { enabled: true, ..Default::default() };
        let clean = image_source::simulate(&room, &s, &r, DelayMode::NearestSample).unwrap();
        let proxy = simulate_degraded(&room, &s, &r, &model).unwrap();
        // 20 ms intervals; the error rises from near agreement toward the
        // full-decorrelation value of 2.
        let curve = local_mse(&proxy, &clean, 160).unwrap();
        assert!(curve.len() > 40);
        assert!(curve[0].1 < 1.2, "early mismatch {:.3}", curve[0].1);
        for w in curve[..4].windows(2) {
            assert!(w[1].1 > w[0].1, "expected strict early growth: {curve:?}");
        }
        let last = curve[curve.len() - 1].1;
        assert!(
            last > 1.5 && last > curve[0].1 + 0.5,
            "expected saturation near 2, got {last:.3}"
        );
    }

    #[test]
    fn direct_path_is_nearly_unchanged() {
        // Order-0 arrivals see only air: under half a dB below 10 kHz for
        // a 1 m path at the full 44.1 kHz rate.
        let model = DegradationModel { enabled: true, ..Default::default() };
        let fs = 44100.0;
        let kernel = air_kernel(fs, 1.0, &model);
        let n = 4096;
        let spec = crate::fft::forward_padded(&kernel, n);
        for (b, v) in spec.iter().enumerate().take(n / 2) {
            let f = b as f64 * fs / n as f64;
            if f > 10_000.0 {
                break;
            }
            let gain_db = 20.0 * v.norm().log10();
            assert!(gain_db.abs() < 0.5, "gain {gain_db:.3} dB at {f:.0} Hz");
        }
    }

    #[test]
    fn air_kernels_are_causal_with_the_peak_up_front() {
        let model = DegradationModel { enabled: true, ..Default::default() };
        let kernel = air_kernel(8000.0, 1.0, &model);
        let peak = kernel
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, 0);
    }

    #[test]
    fn accumulated_wall_bounces_lose_low_frequencies() {
        let fs = 8000.0;
        let wall = WallHighpass::new(100.0, fs);
        let mut x = vec![0.0; 4096];
        x[0] = 1.0;
        for _ in 0..80 {
            wall.filter_in_place(&mut x);
        }
        let spec = crate::fft::forward_padded(&x, 4096);
        let bin = |f: f64| (f / fs * 4096.0).round() as usize;
        let lo = spec[bin(200.0)].norm();
        let hi = spec[bin(3000.0)].norm();
        assert!(lo < 0.01 * hi, "low band {lo:.2e}, high band {hi:.2e}");
    }

    #[test]
    fn negative_parameters_are_rejected() {
        let room = plywood_cube(256, 8000.0);
        let (s, r) = endpoints();
        let model = DegradationModel {
            enabled: true,
            wall_highpass_hz: -1.0,
            ..Default::default()
        };
        assert!(simulate_degraded(&room, &s, &r, &model).is_err());
    }
}
