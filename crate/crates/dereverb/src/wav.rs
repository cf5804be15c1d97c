//! Mono 32-bit IEEE-float WAV I/O.
//!
//! Impulse responses and filters interchange as float WAV so audio tooling
//! can open them directly and the file round-trip does not quantize beyond
//! f32.

use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::ImpulseResponse;

pub fn write_mono_f32(path: &Path, samples: &[f64], sample_rate: u32) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in samples {
        writer.write_sample(s as f32)?;
    }
    writer.finalize()?;
    Ok(())
}

pub fn read_mono_f32(path: &Path) -> Result<ImpulseResponse> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1
        || spec.bits_per_sample != 32
        || spec.sample_format != hound::SampleFormat::Float
    {
        return Err(Error::InvalidConfig(format!(
            "{} is not mono 32-bit float wav (channels {}, bits {}, format {:?})",
            path.display(),
            spec.channels,
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    let samples: std::result::Result<Vec<f32>, _> = reader.samples::<f32>().collect();
    let samples = samples?;
    ImpulseResponse::new(
        samples.into_iter().map(f64::from).collect(),
        f64::from(spec.sample_rate),
    )
}
