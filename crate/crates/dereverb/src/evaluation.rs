//! Dereverberation and simulation-fidelity metrics: local mean-squared
//! error, residual energies, dereverberation ratios, remainder
//! reverberation times, Schroeder decay curves, and Sabine's formula.
//!
//! Discrete integrals are plain Riemann sums with dt = 1/fs. Every ratio
//! metric cancels the dt factor, so only the reported energies carry it.

use crate::error::{Error, Result};
use crate::signal::ImpulseResponse;

/// Evaluation parameters.
///
/// `t_min` excludes a small neighborhood of the target impulse (and of
/// t = 0 on the reference response); the default of 2.5 ms clears the
/// rounded direct arrival and the main lobe of any fractional-delay
/// kernel. `modeling_delay` must match the delay the filters actually
/// applied.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub t_min: f64,
    pub early_window: f64,
    pub modeling_delay: f64,
    pub mse_interval: f64,
}

impl EvalConfig {
    pub fn new(modeling_delay: f64) -> Self {
        Self {
            t_min: 0.0025,
            early_window: 0.1,
            modeling_delay,
            mse_interval: 0.02,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.early_window) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < t_min < early_window, got {} and {}",
                self.t_min, self.early_window
            )));
        }
        if self.modeling_delay.is_nan() || self.modeling_delay < 0.0 {
            return Err(Error::InvalidConfig("modeling delay must be >= 0".into()));
        }
        Ok(())
    }
}

/// Upper integration limit of the residual metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Infinite,
    Seconds(f64),
}

/// Remainder reverberation time; `SignalEnd` flags that the requested level
/// was never reached inside the signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReverbTime {
    Reached(f64),
    SignalEnd(f64),
}

impl ReverbTime {
    pub fn seconds(&self) -> f64 {
        match *self {
            ReverbTime::Reached(s) | ReverbTime::SignalEnd(s) => s,
        }
    }

    pub fn reached(&self) -> bool {
        matches!(self, ReverbTime::Reached(_))
    }
}

/// Per-control-point evaluation results.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub control_point: usize,
    /// DR(infinity) in dB; `f64::INFINITY` flags an exactly zero residual.
    pub dr_total_db: f64,
    /// DR(T) over the early window, in dB.
    pub dr_early_db: f64,
    pub residual_energy_total: f64,
    pub residual_energy_early: f64,
    /// Energy at the target sample against everything else, in dB.
    pub snr_db: f64,
    pub t10_measured: ReverbTime,
    pub t20_measured: ReverbTime,
    pub t60_measured: ReverbTime,
    pub t10_dereverberated: ReverbTime,
    pub t20_dereverberated: ReverbTime,
    pub t60_dereverberated: ReverbTime,
    /// Local MSE curve when a simulation/measurement pair was compared;
    /// empty otherwise.
    pub mse_curve: Vec<(usize, f64)>,
}

/// Interval-normalized mean-squared error between two responses (one value
/// per full non-overlapping interval). Each interval is normalized by its
/// own RMS on both signals, so per-interval scale differences cancel.
pub fn local_mse(
    sim: &ImpulseResponse,
    meas: &ImpulseResponse,
    interval: usize,
) -> Result<Vec<(usize, f64)>> {
    if sim.sample_rate != meas.sample_rate {
        return Err(Error::RateMismatch(sim.sample_rate, meas.sample_rate));
    }
    if sim.len() != meas.len() {
        return Err(Error::DimensionMismatch(format!(
            "signal lengths {} and {} differ",
            sim.len(),
            meas.len()
        )));
    }
    if interval < 2 {
        return Err(Error::InvalidConfig("mse interval must be at least 2 samples".into()));
    }
    let mut out = Vec::new();
    let mut k = 0;
    while k + interval <= sim.len() {
        let a = &sim.samples[k..k + interval];
        let b = &meas.samples[k..k + interval];
        let rms = |w: &[f64]| (w.iter().map(|v| v * v).sum::<f64>() / interval as f64).sqrt();
        let ra = rms(a);
        let rb = rms(b);
        if ra == 0.0 || rb == 0.0 {
            return Err(Error::ZeroRmsInterval(k));
        }
        let e = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x / ra - y / rb;
                d * d
            })
            .sum::<f64>()
            / interval as f64;
        out.push((k, e));
        k += interval;
    }
    Ok(out)
}

/// Residual energy of the equalized output outside the target neighborhood:
/// the Riemann sum of x_hat^2 over t_min < |t - D| (< T for a finite
/// horizon), with dt = 1/fs.
pub fn residual_energy(x_hat: &ImpulseResponse, cfg: &EvalConfig, horizon: Horizon) -> f64 {
    let fs = x_hat.sample_rate;
    let mut acc = 0.0;
    for (n, &v) in x_hat.samples.iter().enumerate() {
        let off = (n as f64 / fs - cfg.modeling_delay).abs();
        if off <= cfg.t_min {
            continue;
        }
        if let Horizon::Seconds(t) = horizon
            && off >= t
        {
            continue;
        }
        acc += v * v;
    }
    acc / fs
}

/// Dereverberation ratio in dB: the reference response energy over
/// [t_min, horizon] against the residual energy of `x_hat` around the
/// modeling delay. Returns `f64::INFINITY` when the residual is exactly
/// zero.
pub fn dereverberation_ratio(
    g_meas: &ImpulseResponse,
    x_hat: &ImpulseResponse,
    cfg: &EvalConfig,
    horizon: Horizon,
) -> Result<f64> {
    if g_meas.sample_rate != x_hat.sample_rate {
        return Err(Error::RateMismatch(g_meas.sample_rate, x_hat.sample_rate));
    }
    cfg.validate()?;
    let fs = g_meas.sample_rate;
    let d_index = cfg.modeling_delay * fs;
    if d_index >= x_hat.len() as f64 {
        return Err(Error::EmptyIntegrationRegion(format!(
            "output of {} samples does not reach the modeling delay", x_hat.len()
        )));
    }

    let mut reference = 0.0;
    for (n, &v) in g_meas.samples.iter().enumerate() {
        let t = n as f64 / fs;
        if t <= cfg.t_min {
            continue;
        }
        if let Horizon::Seconds(h) = horizon
            && t >= h
        {
            continue;
        }
        reference += v * v;
    }
    if reference == 0.0 {
        return Err(Error::EmptyIntegrationRegion(
            "reference response has no energy past t_min".into(),
        ));
    }
    let residual = residual_energy(x_hat, cfg, horizon) * fs;
    if residual == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (reference / residual).log10())
}

/// Backward-integrated energy decay in dB, normalized to start at 0 dB.
/// Non-increasing by construction; exact-zero tails map to -infinity.
pub fn schroeder_curve(g: &ImpulseResponse) -> Result<Vec<f64>> {
    let mut tail = vec![0.0; g.len()];
    let mut acc = 0.0;
    for n in (0..g.len()).rev() {
        acc += g.samples[n] * g.samples[n];
        tail[n] = acc;
    }
    let total = tail[0];
    if total == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(tail.into_iter().map(|s| 10.0 * (s / total).log10()).collect())
}

/// Reverberation time from a Schroeder curve: least-squares line through
/// the -5 dB .. -35 dB span, extrapolated to 60 dB of decay. `None` when
/// the curve never spans that range or decays the wrong way.
pub fn rt60_from_schroeder(curve: &[f64], sample_rate: f64) -> Option<f64> {
    let n5 = curve.iter().position(|&v| v <= -5.0)?;
    let n35 = curve.iter().position(|&v| v <= -35.0)?;
    if n35 <= n5 {
        return None;
    }
    let pts: Vec<(f64, f64)> = (n5..=n35)
        .filter(|&n| curve[n].is_finite())
        .map(|n| (n as f64 / sample_rate, curve[n]))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let count = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / count;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (t, y) in &pts {
        cov += (t - mean_t) * (y - mean_y);
        var += (t - mean_t) * (t - mean_t);
    }
    if var == 0.0 {
        return None;
    }
    let slope = cov / var;
    if slope >= 0.0 {
        return None;
    }
    Some(-60.0 / slope)
}

/// Remainder reverberation time T_L: the earliest time such that the total
/// energy of the measured response exceeds the remaining energy of `x_hat`
/// past T_L by at least `level_db`.
pub fn remainder_reverberation_time(
    g_meas: &ImpulseResponse,
    x_hat: &ImpulseResponse,
    level_db: f64,
) -> Result<ReverbTime> {
    if level_db.is_nan() || level_db <= 0.0 {
        return Err(Error::NonpositiveLevel(level_db));
    }
    if g_meas.sample_rate != x_hat.sample_rate {
        return Err(Error::RateMismatch(g_meas.sample_rate, x_hat.sample_rate));
    }
    let reference = g_meas.energy();
    if reference == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let fs = x_hat.sample_rate;
    let mut tail = vec![0.0; x_hat.len()];
    let mut acc = 0.0;
    for n in (0..x_hat.len()).rev() {
        acc += x_hat.samples[n] * x_hat.samples[n];
        tail[n] = acc;
    }
    let threshold = 10f64.powf(level_db / 10.0);
    for (n, &remaining) in tail.iter().enumerate() {
        if remaining == 0.0 || reference / remaining >= threshold {
            return Ok(ReverbTime::Reached(n as f64 / fs));
        }
    }
    Ok(ReverbTime::SignalEnd(x_hat.len() as f64 / fs))
}

/// Sabine's formula: a = 0.161 V / (S T60).
pub fn sabine_absorptivity(dims: [f64; 3], t60: f64) -> f64 {
    assert!(dims.iter().all(|d| *d > 0.0) && t60 > 0.0);
    let volume = dims[0] * dims[1] * dims[2];
    let surface = 2.0 * (dims[0] * dims[1] + dims[1] * dims[2] + dims[0] * dims[2]);
    0.161 * volume / (surface * t60)
}

/// Wall reflectivity from average absorptivity: r = sqrt(1 - a).
pub fn reflection_from_absorptivity(abar: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&abar) {
        return Err(Error::OutOfRange(abar));
    }
    Ok((1.0 - abar).sqrt())
}

/// Energy of the single target sample against everything else, in dB.
/// `f64::INFINITY` when everything else is exactly zero.
pub fn target_snr_db(x_hat: &ImpulseResponse, target: usize) -> f64 {
    let signal = x_hat.samples.get(target).map_or(0.0, |v| v * v);
    let rest: f64 = x_hat
        .samples
        .iter()
        .enumerate()
        .filter(|(n, _)| *n != target)
        .map(|(_, v)| v * v)
        .sum();
    if rest == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (signal / rest).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ir(samples: Vec<f64>, fs: f64) -> ImpulseResponse {
        ImpulseResponse::new(samples, fs).unwrap()
    }

    #[test]
    fn identical_signals_have_zero_mse() {
        let a = ir((0..64).map(|i| (i as f64).sin() + 0.1).collect(), 1000.0);
        let curve = local_mse(&a, &a, 16).unwrap();
        assert_eq!(curve.len(), 4);
        for (_, e) in curve {
            assert!(e < 1e-28);
        }
    }

    #[test]
    fn mse_is_scale_invariant() {
        let a = ir((0..64).map(|i| (i as f64 * 0.3).sin() + 0.2).collect(), 1000.0);
        let b = ir(a.samples.iter().map(|v| 2.0 * v).collect(), 1000.0);
        for (_, e) in local_mse(&a, &b, 16).unwrap() {
            assert!(e < 1e-28);
        }
    }

    #[test]
    fn independent_noise_approaches_mse_of_two() {
        // Deterministic pseudo-noise; E[(a - b)^2] = 2 for independent
        // unit-variance signals after per-interval normalization.
        let n = 1 << 14;
        let lcg = |seed: u64| {
            let mut s = seed;
            std::iter::from_fn(move || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                Some(((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5)
            })
        };
        let a = ir(lcg(1).take(n).collect(), 1000.0);
        let b = ir(lcg(99).take(n).collect(), 1000.0);
        let curve = local_mse(&a, &b, n).unwrap();
        assert_eq!(curve.len(), 1);
        assert_relative_eq!(curve[0].1, 2.0, max_relative = 0.05);
    }

    #[test]
    fn silent_interval_is_an_error() {
        let mut samples = vec![1.0; 64];
        for s in samples[16..32].iter_mut() {
            *s = 0.0;
        }
        let a = ir(samples, 1000.0);
        let b = ir(vec![1.0; 64], 1000.0);
        assert!(matches!(local_mse(&a, &b, 16), Err(Error::ZeroRmsInterval(16))));
    }

    #[test]
    fn perfect_impulse_gives_infinite_dr() {
        let fs = 1000.0;
        let cfg = EvalConfig::new(0.1);
        let g = ir((0..512).map(|i| 0.99f64.powi(i)).collect(), fs);
        let x_hat = ImpulseResponse::dirac(512, 100, fs).unwrap();
        let dr = dereverberation_ratio(&g, &x_hat, &cfg, Horizon::Infinite).unwrap();
        assert!(dr.is_infinite() && dr > 0.0);
    }

    #[test]
    fn self_comparison_is_zero_db() {
        let fs = 1000.0;
        let cfg = EvalConfig { modeling_delay: 0.0, ..EvalConfig::new(0.0) };
        let g = ir((0..256).map(|i| 0.98f64.powi(i) * ((i * 7) as f64).sin()).collect(), fs);
        let dr = dereverberation_ratio(&g, &g, &cfg, Horizon::Infinite).unwrap();
        assert_eq!(dr, 0.0);
    }

    #[test]
    fn dr_shifts_by_minus_twenty_log_alpha_when_output_scales() {
        let fs = 1000.0;
        let cfg = EvalConfig::new(0.05);
        let g = ir((0..256).map(|i| 0.97f64.powi(i)).collect(), fs);
        let x = ir((0..256).map(|i| 0.9f64.powi(i) * 0.2).collect(), fs);
        let x4 = ir(x.samples.iter().map(|v| 4.0 * v).collect(), fs);
        let d0 = dereverberation_ratio(&g, &x, &cfg, Horizon::Infinite).unwrap();
        let d4 = dereverberation_ratio(&g, &x4, &cfg, Horizon::Infinite).unwrap();
        assert_relative_eq!(d4 - d0, -20.0 * 4.0f64.log10(), epsilon = 1e-9);
        // Common scaling of both signals cancels.
        let g4 = ir(g.samples.iter().map(|v| 4.0 * v).collect(), fs);
        let both = dereverberation_ratio(&g4, &x4, &cfg, Horizon::Infinite).unwrap();
        assert_relative_eq!(both, d0, epsilon = 1e-9);
    }

    #[test]
    fn schroeder_of_a_delta_drops_to_minus_infinity() {
        let d = ImpulseResponse::dirac(8, 0, 1000.0).unwrap();
        let curve = schroeder_curve(&d).unwrap();
        assert_eq!(curve[0], 0.0);
        assert!(curve[1..].iter().all(|v| v.is_infinite() && *v < 0.0));
    }

    #[test]
    fn schroeder_is_non_increasing_and_starts_at_zero() {
        let g = ir((0..512).map(|i| 0.99f64.powi(i) * ((i * 13 % 7) as f64 - 3.0)).collect(), 1000.0);
        let curve = schroeder_curve(&g).unwrap();
        assert_eq!(curve[0], 0.0);
        for w in curve.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn exponential_decay_has_closed_form_t60() {
        // g[n] = e^(-n / (tau fs)) decays 20 / (tau fs ln 10) dB per sample
        // in energy, so T60 = 6.9078 tau.
        let fs = 1000.0;
        let tau = 0.05;
        let g = ir((0..4096).map(|n| (-(n as f64) / (tau * fs)).exp()).collect(), fs);
        let curve = schroeder_curve(&g).unwrap();
        let t60 = rt60_from_schroeder(&curve, fs).unwrap();
        assert_relative_eq!(t60, 6.9078 * tau, max_relative = 0.01);
    }

    #[test]
    fn remainder_time_collapses_to_schroeder_crossing() {
        let fs = 1000.0;
        let g = ir((0..2048).map(|n| (-(n as f64) / 40.0).exp() * ((n % 5) as f64 - 2.0)).collect(), fs);
        let curve = schroeder_curve(&g).unwrap();
        let crossing = curve.iter().position(|&v| v <= -10.0).unwrap();
        match remainder_reverberation_time(&g, &g, 10.0).unwrap() {
            ReverbTime::Reached(t) => assert_relative_eq!(t, crossing as f64 / fs, epsilon = 1e-12),
            other => panic!("expected Reached, got {other:?}"),
        }
    }

    #[test]
    fn zero_tail_returns_the_cutoff_time() {
        let fs = 1000.0;
        let mut samples = vec![0.0; 256];
        for (n, s) in samples.iter_mut().enumerate().take(50) {
            *s = 1.0 - n as f64 / 50.0;
        }
        let x = ir(samples, fs);
        let g = ir(vec![1.0; 256], fs);
        match remainder_reverberation_time(&g, &x, 200.0).unwrap() {
            ReverbTime::Reached(t) => assert_relative_eq!(t, 50.0 / fs, epsilon = 1e-6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unreachable_level_flags_signal_end() {
        let fs = 1000.0;
        let g = ir(vec![1.0], fs);
        let x = ir(vec![10.0; 64], fs);
        match remainder_reverberation_time(&g, &x, 60.0).unwrap() {
            ReverbTime::SignalEnd(t) => assert_relative_eq!(t, 64.0 / fs, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn remainder_time_grows_with_level() {
        let fs = 1000.0;
        let g = ir((0..4096).map(|n| (-(n as f64) / 300.0).exp()).collect(), fs);
        let t10 = remainder_reverberation_time(&g, &g, 10.0).unwrap().seconds();
        let t20 = remainder_reverberation_time(&g, &g, 20.0).unwrap().seconds();
        let t60 = remainder_reverberation_time(&g, &g, 60.0).unwrap().seconds();
        assert!(t10 <= t20 && t20 <= t60);
    }

    #[test]
    fn sabine_formula_collapses_on_the_unit_cube() {
        assert_relative_eq!(sabine_absorptivity([1.0; 3], 0.161 / 6.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(sabine_absorptivity([1.0; 3], 0.161), 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn sabine_on_the_plywood_cube_documents_the_formula_value() {
        // Direct evaluation with the cube's dimensions and T60 = 1.32 s
        // gives about 0.037, not the 0.0407 the simulation defaults to.
        let a = sabine_absorptivity([1.84, 1.79, 1.83], 1.32);
        assert_relative_eq!(a, 0.037, max_relative = 0.01);
    }

    #[test]
    fn sabine_scales_linearly_with_homothety() {
        let base = sabine_absorptivity([1.2, 0.9, 2.1], 0.7);
        let scaled = sabine_absorptivity([2.4, 1.8, 4.2], 0.7);
        assert_relative_eq!(scaled, 2.0 * base, epsilon = 1e-12);
    }

    #[test]
    fn reflectivity_from_absorptivity_endpoints() {
        assert_eq!(reflection_from_absorptivity(0.0).unwrap(), 1.0);
        assert_eq!(reflection_from_absorptivity(1.0).unwrap(), 0.0);
        assert_relative_eq!(
            reflection_from_absorptivity(0.0407).unwrap(),
            0.97944,
            epsilon = 1e-5
        );
        assert!(matches!(
            reflection_from_absorptivity(1.5),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn target_snr_of_a_pure_delta_is_infinite() {
        let x = ImpulseResponse::dirac(32, 7, 1000.0).unwrap();
        assert!(target_snr_db(&x, 7).is_infinite());
        let mut noisy = x.clone();
        noisy.samples[20] = 0.001;
        let snr = target_snr_db(&noisy, 7);
        assert_relative_eq!(snr, 60.0, epsilon = 1e-9);
    }
}
