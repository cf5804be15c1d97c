//! Sampled signal containers shared by the simulator, the inverse-filter
//! builder, and the evaluation metrics.

use crate::error::{Error, Result};

/// A uniformly sampled, finite-length real signal.
///
/// The sample rate travels with the samples so that rate mismatches are
/// caught at the operation boundary instead of corrupting results.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl ImpulseResponse {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSignal("signal must have at least one sample".into()));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(format!("sample {i} is not finite")));
        }
        Ok(Self { samples, sample_rate })
    }

    /// A unit impulse at sample `at` in a buffer of `len` samples.
    pub fn dirac(len: usize, at: usize, sample_rate: f64) -> Result<Self> {
        if at >= len {
            return Err(Error::InvalidSignal(format!(
                "impulse position {at} outside buffer of length {len}"
            )));
        }
        let mut samples = vec![0.0; len];
        samples[at] = 1.0;
        Self::new(samples, sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Sum of squared samples (no dt factor).
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }
}

/// M x L grid of impulse responses from L sources to M receivers.
///
/// Indexing is always (receiver j, source i). All entries share one sample
/// rate and one length.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    entries: Vec<ImpulseResponse>,
    receivers: usize,
    sources: usize,
}

impl TransferMatrix {
    /// Builds from rows ordered by receiver; `rows[j][i]` is the response
    /// from source i to receiver j.
    pub fn new(rows: Vec<Vec<ImpulseResponse>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::DimensionMismatch(
                "transfer matrix needs at least one receiver and one source".into(),
            ));
        }
        let sources = rows[0].len();
        let receivers = rows.len();
        let mut entries = Vec::with_capacity(receivers * sources);
        for row in &rows {
            if row.len() != sources {
                return Err(Error::DimensionMismatch(format!(
                    "ragged matrix: expected {sources} sources per receiver, got {}",
                    row.len()
                )));
            }
        }
        let rate = rows[0][0].sample_rate;
        let len = rows[0][0].len();
        for row in rows {
            for ir in row {
                if ir.sample_rate != rate {
                    return Err(Error::RateMismatch(rate, ir.sample_rate));
                }
                if ir.len() != len {
                    return Err(Error::DimensionMismatch(format!(
                        "entry length {} differs from {len}",
                        ir.len()
                    )));
                }
                entries.push(ir);
            }
        }
        Ok(Self { entries, receivers, sources })
    }

    pub fn from_fn(
        receivers: usize,
        sources: usize,
        mut f: impl FnMut(usize, usize) -> Result<ImpulseResponse>,
    ) -> Result<Self> {
        let mut rows = Vec::with_capacity(receivers);
        for j in 0..receivers {
            let mut row = Vec::with_capacity(sources);
            for i in 0..sources {
                row.push(f(j, i)?);
            }
            rows.push(row);
        }
        Self::new(rows)
    }

    /// 1 x 1 matrix wrapping a single response.
    pub fn scalar(ir: ImpulseResponse) -> Self {
        Self { entries: vec![ir], receivers: 1, sources: 1 }
    }

    pub fn entry(&self, receiver: usize, source: usize) -> &ImpulseResponse {
        assert!(receiver < self.receivers && source < self.sources);
        &self.entries[receiver * self.sources + source]
    }

    pub fn receiver_count(&self) -> usize {
        self.receivers
    }

    pub fn source_count(&self) -> usize {
        self.sources
    }

    pub fn response_len(&self) -> usize {
        self.entries[0].len()
    }

    pub fn sample_rate(&self) -> f64 {
        self.entries[0].sample_rate
    }

    /// Applies `f` to every entry, keeping the grid shape.
    pub fn map(&self, mut f: impl FnMut(&ImpulseResponse) -> Result<ImpulseResponse>) -> Result<Self> {
        Self::from_fn(self.receivers, self.sources, |j, i| f(self.entry(j, i)))
    }
}
