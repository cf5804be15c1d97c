//! Stable, causal approximate inverse filters.
//!
//! A sampled M x L transfer matrix G(w) is inverted bin by bin with the
//! regularized pseudo-inverse H = (G^H G + beta*I)^-1 G^H, shifted by a
//! modeling delay D through the phase ramp e^(-jwD), and inverse-
//! transformed to real causal sequences. The exact stable inverse of a
//! non-minimum-phase response is noncausal; the delay buys time for the
//! noncausal tail, and whatever part still wraps around the FFT buffer ends
//! up at the tail of the filter and is reported per entry as
//! `wraparound_energy_ratio`.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::{ImpulseResponse, TransferMatrix};

/// Parameters of the regularized inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    /// Regularization constant added to each eigenvalue of G^H G.
    pub beta: f64,
    /// Modeling delay in seconds; rounded to whole samples when applied.
    pub modeling_delay: f64,
    /// FFT length; must be at least the model response length.
    pub fft_length: usize,
    /// Exponential window time constant in seconds, if windowing is wanted
    /// before inversion.
    pub window_tau: Option<f64>,
}

impl InversionConfig {
    /// Defaults for a model of `len` samples: beta = 1e-2, D = 500 ms, no
    /// window, and an FFT twice the next power of two above `len` to leave
    /// headroom for the acausal tail.
    pub fn for_response_len(len: usize) -> Self {
        Self {
            beta: 1e-2,
            modeling_delay: 0.5,
            fft_length: default_fft_length(len),
            window_tau: None,
        }
    }
}

pub fn default_fft_length(len: usize) -> usize {
    2 * len.next_power_of_two()
}

/// L x M grid of causal inverse filters, plus the per-entry wraparound
/// diagnostic (energy in the last 5% of samples over total energy).
#[derive(Debug, Clone)]
pub struct InverseFilterSet {
    filters: Vec<ImpulseResponse>,
    wraparound: Vec<f64>,
    sources: usize,
    receivers: usize,
    pub config: InversionConfig,
    /// The modeling delay actually applied, in whole samples.
    pub delay_samples: usize,
}

impl InverseFilterSet {
    /// Rebuilds a set from stored filters, e.g. after reading them back
    /// from disk; `rows[source][receiver]`. Wraparound diagnostics are
    /// recomputed from the samples.
    pub fn from_parts(
        rows: Vec<Vec<ImpulseResponse>>,
        config: InversionConfig,
        delay_samples: usize,
    ) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::DimensionMismatch("filter set cannot be empty".into()));
        }
        let sources = rows.len();
        let receivers = rows[0].len();
        let len = rows[0][0].len();
        let rate = rows[0][0].sample_rate;
        let mut filters = Vec::with_capacity(sources * receivers);
        let mut wraparound = Vec::with_capacity(sources * receivers);
        let tail_len = (len / 20).max(1);
        for row in rows {
            if row.len() != receivers {
                return Err(Error::DimensionMismatch("ragged filter grid".into()));
            }
            for f in row {
                if f.len() != len {
                    return Err(Error::DimensionMismatch("filter lengths differ".into()));
                }
                if f.sample_rate != rate {
                    return Err(Error::RateMismatch(rate, f.sample_rate));
                }
                let total: f64 = f.samples.iter().map(|s| s * s).sum();
                let tail: f64 = f.samples[len - tail_len..].iter().map(|s| s * s).sum();
                wraparound.push(if total > 0.0 { tail / total } else { 0.0 });
                filters.push(f);
            }
        }
        Ok(Self {
            filters,
            wraparound,
            sources,
            receivers,
            config,
            delay_samples,
        })
    }

    /// Filter feeding source (speaker) `source` from the desired signal at
    /// control point `receiver`.
    pub fn filter(&self, source: usize, receiver: usize) -> &ImpulseResponse {
        assert!(source < self.sources && receiver < self.receivers);
        &self.filters[source * self.receivers + receiver]
    }

    pub fn wraparound_energy_ratio(&self, source: usize, receiver: usize) -> f64 {
        assert!(source < self.sources && receiver < self.receivers);
        self.wraparound[source * self.receivers + receiver]
    }

    pub fn source_count(&self) -> usize {
        self.sources
    }

    pub fn receiver_count(&self) -> usize {
        self.receivers
    }

    pub fn filter_len(&self) -> usize {
        self.filters[0].len()
    }

    pub fn sample_rate(&self) -> f64 {
        self.filters[0].sample_rate
    }

    pub fn delay_seconds(&self) -> f64 {
        self.delay_samples as f64 / self.sample_rate()
    }
}

/// Tapers a response with e^(-t / tau). `tau = infinity` is the identity
/// window; nonpositive or NaN tau is rejected.
pub fn exp_window(g: &ImpulseResponse, tau: f64) -> Result<ImpulseResponse> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::NonpositiveTau(tau));
    }
    let fs = g.sample_rate;
    let samples = g
        .samples
        .iter()
        .enumerate()
        .map(|(n, &s)| s * (-(n as f64) / (fs * tau)).exp())
        .collect();
    ImpulseResponse::new(samples, fs)
}

/// Builds the inverse filter set for `model` per the configuration.
///
/// Any M x L shape is accepted; the per-bin solve is the L x L system
/// (G^H G + beta*I) H = G^H. `SingularBin` can only occur with beta = 0.
pub fn invert(model: &TransferMatrix, config: &InversionConfig) -> Result<InverseFilterSet> {
    if config.beta.is_nan() || config.beta < 0.0 {
        return Err(Error::BetaNegative(config.beta));
    }
    let nfft = config.fft_length;
    if nfft < model.response_len() {
        return Err(Error::InvalidConfig(format!(
            "fft_length {nfft} shorter than model response {}",
            model.response_len()
        )));
    }
    let fs = model.sample_rate();
    if !(config.modeling_delay.is_finite() && config.modeling_delay >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "modeling delay must be non-negative, got {}",
            config.modeling_delay
        )));
    }
    let delay_samples = (config.modeling_delay * fs).round() as usize;
    if delay_samples >= nfft {
        return Err(Error::InvalidConfig(format!(
            "modeling delay of {delay_samples} samples does not fit the FFT length {nfft}"
        )));
    }

    let m = model.receiver_count();
    let l = model.source_count();
    let spectra: Vec<Vec<Complex64>> = (0..m * l)
        .map(|idx| fft::forward_padded(&model.entry(idx / l, idx % l).samples, nfft))
        .collect();

    let mut out = vec![vec![Complex64::new(0.0, 0.0); nfft]; l * m];
    let mut g_bin = vec![Complex64::new(0.0, 0.0); m * l];
    let mut h_bin = vec![Complex64::new(0.0, 0.0); l * m];
    let half = nfft / 2;
    for bin in 0..=half {
        for (idx, spec) in spectra.iter().enumerate() {
            g_bin[idx] = spec[bin];
        }
        regularized_pseudo_inverse(&g_bin, m, l, config.beta, bin, &mut h_bin)?;
        let angle = -2.0 * std::f64::consts::PI * (bin * delay_samples) as f64 / nfft as f64;
        let phase = Complex64::from_polar(1.0, angle);
        let mirror = (nfft - bin) % nfft;
        for (idx, &h) in h_bin.iter().enumerate() {
            let v = h * phase;
            out[idx][bin] = v;
            if mirror != bin {
                out[idx][mirror] = v.conj();
            }
        }
    }

    let mut filters = Vec::with_capacity(l * m);
    let mut wraparound = Vec::with_capacity(l * m);
    let tail_len = (nfft / 20).max(1);
    for spec in out {
        let samples = fft::inverse_real(spec);
        let total: f64 = samples.iter().map(|s| s * s).sum();
        let tail: f64 = samples[nfft - tail_len..].iter().map(|s| s * s).sum();
        wraparound.push(if total > 0.0 { tail / total } else { 0.0 });
        filters.push(ImpulseResponse::new(samples, fs)?);
    }

    Ok(InverseFilterSet {
        filters,
        wraparound,
        sources: l,
        receivers: m,
        config: config.clone(),
        delay_samples,
    })
}

// Solves (G^H G + beta I) H = G^H for one bin; `g` is M x L row-major,
// `h` receives L x M row-major.
fn regularized_pseudo_inverse(
    g: &[Complex64],
    m: usize,
    l: usize,
    beta: f64,
    bin: usize,
    h: &mut [Complex64],
) -> Result<()> {
    if l == 1 {
        let denom: f64 = g.iter().map(|v| v.norm_sqr()).sum::<f64>() + beta;
        if denom == 0.0 {
            return Err(Error::SingularBin(bin));
        }
        for (out, v) in h.iter_mut().zip(g) {
            *out = v.conj() / denom;
        }
        return Ok(());
    }

    // Augmented [A | B] with A = G^H G + beta I (L x L), B = G^H (L x M).
    let cols = l + m;
    let mut aug = vec![Complex64::new(0.0, 0.0); l * cols];
    for p in 0..l {
        for q in 0..l {
            let mut a = Complex64::new(0.0, 0.0);
            for j in 0..m {
                a += g[j * l + p].conj() * g[j * l + q];
            }
            if p == q {
                a += beta;
            }
            aug[p * cols + q] = a;
        }
        for j in 0..m {
            aug[p * cols + l + j] = g[j * l + p].conj();
        }
    }

    // Gaussian elimination with partial pivoting.
    for col in 0..l {
        let (pivot_row, pivot_mag) = (col..l)
            .map(|r| (r, aug[r * cols + col].norm_sqr()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if pivot_mag == 0.0 {
            return Err(Error::SingularBin(bin));
        }
        if pivot_row != col {
            for k in 0..cols {
                aug.swap(col * cols + k, pivot_row * cols + k);
            }
        }
        let pivot = aug[col * cols + col];
        for k in col..cols {
            aug[col * cols + k] /= pivot;
        }
        for r in 0..l {
            if r == col {
                continue;
            }
            let factor = aug[r * cols + col];
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..cols {
                let v = aug[col * cols + k];
                aug[r * cols + k] -= factor * v;
            }
        }
    }

    for p in 0..l {
        for j in 0..m {
            h[p * m + j] = aug[p * cols + l + j];
        }
    }
    Ok(())
}

/// Filters the desired control-point signals through the inverse filters
/// and the plant: x_hat_k = sum_j sum_i g_kj * h_ji * x_i, all by linear
/// convolution. Output length is plant + filter + input length - 2.
pub fn apply(
    filters: &InverseFilterSet,
    plant: &TransferMatrix,
    input: &[ImpulseResponse],
) -> Result<Vec<ImpulseResponse>> {
    let l = filters.source_count();
    if plant.source_count() != l {
        return Err(Error::DimensionMismatch(format!(
            "plant drives {} sources but the filter set feeds {l}",
            plant.source_count()
        )));
    }
    if input.len() != filters.receiver_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} input signals for {} control points",
            input.len(),
            filters.receiver_count()
        )));
    }
    let fs = filters.sample_rate();
    if plant.sample_rate() != fs {
        return Err(Error::RateMismatch(fs, plant.sample_rate()));
    }
    let in_len = input[0].len();
    for x in input {
        if x.sample_rate != fs {
            return Err(Error::RateMismatch(fs, x.sample_rate));
        }
        if x.len() != in_len {
            return Err(Error::DimensionMismatch(
                "input signals must share one length".into(),
            ));
        }
    }

    // Source feeds v_i = sum_j h_ij * x_j.
    let feed_len = filters.filter_len() + in_len - 1;
    let mut feeds = vec![vec![0.0; feed_len]; l];
    for (i, feed) in feeds.iter_mut().enumerate() {
        for (j, x) in input.iter().enumerate() {
            accumulate_convolution(feed, &filters.filter(i, j).samples, &x.samples);
        }
    }

    // Control-point outputs x_hat_k = sum_i g_ki * v_i.
    let out_len = plant.response_len() + feed_len - 1;
    let mut outputs = Vec::with_capacity(plant.receiver_count());
    for k in 0..plant.receiver_count() {
        let mut acc = vec![0.0; out_len];
        for (i, feed) in feeds.iter().enumerate() {
            accumulate_convolution(&mut acc, &plant.entry(k, i).samples, feed);
        }
        outputs.push(ImpulseResponse::new(acc, fs)?);
    }
    Ok(outputs)
}

fn accumulate_convolution(acc: &mut [f64], a: &[f64], b: &[f64]) {
    let conv = fft::linear_convolve(a, b);
    for (dst, v) in acc.iter_mut().zip(conv) {
        *dst += v;
    }
}

/// Least-squares FIR inverse by explicit normal equations over the
/// convolution matrix: min_h || g * h - delta(. - delay) ||^2. Scalar only,
/// filter lengths up to 512; the normal equations carry a 1e-12 ridge.
///
/// This is the slow time-domain route and exists as an independent check
/// on the spectral inversion.
pub fn time_domain_ls_inverse_oracle(
    g: &ImpulseResponse,
    filter_len: usize,
    delay: usize,
) -> ImpulseResponse {
    assert!((1..=512).contains(&filter_len), "oracle supports 1..=512 taps");
    let x = &g.samples;
    let n = x.len();

    // (C^T C)[p][q] depends only on p - q: the autocorrelation of g.
    let mut autocorr = vec![0.0; filter_len];
    for (t, r) in autocorr.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..n.saturating_sub(t) {
            acc += x[i] * x[i + t];
        }
        *r = acc;
    }

    // C^T delta(. - delay) picks row `delay` of C: g[delay - p].
    let mut rhs = vec![0.0; filter_len];
    for (p, v) in rhs.iter_mut().enumerate() {
        if delay >= p && delay - p < n {
            *v = x[delay - p];
        }
    }

    let mut a = vec![0.0; filter_len * filter_len];
    for p in 0..filter_len {
        for q in 0..filter_len {
            a[p * filter_len + q] = autocorr[p.abs_diff(q)];
        }
        a[p * filter_len + p] += 1e-12;
    }

    let h = cholesky_solve(&mut a, filter_len, &rhs);
    ImpulseResponse::new(h, g.sample_rate).expect("oracle output is finite")
}

// In-place Cholesky factorization and solve for a dense SPD system.
fn cholesky_solve(a: &mut [f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                a[i * n + j] = sum.max(f64::MIN_POSITIVE).sqrt();
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = rhs[i];
        for k in 0..i {
            sum -= a[i * n + k] * y[k];
        }
        y[i] = sum / a[i * n + i];
    }
    let mut h = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= a[k * n + i] * h[k];
        }
        h[i] = sum / a[i * n + i];
    }
    h
}
