//! Scenario configuration (TOML) and the run manifest written next to
//! generated WAV files.
//!
//! Downstream commands read geometry and rates from the manifest, never
//! from filenames; the manifest also labels synthetic degraded sets so
//! proxy numbers cannot masquerade as measured data.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::degrade::DegradationModel;
use crate::error::{Error, Result};
use crate::evaluation::EvalConfig;
use crate::inversion::{default_fft_length, InversionConfig};
use crate::room::{Point3, RoomModel};

fn default_speed_of_sound() -> f64 {
    346.58
}

fn default_sample_rate() -> f64 {
    44100.0
}

fn default_ir_length() -> usize {
    65536
}

/// Room geometry and simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSection {
    pub dims: [f64; 3],
    /// Average Sabine absorptivity; exactly one of `absorptivity` and
    /// `reflection` must be given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorptivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflection: Option<f64>,
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound: f64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    #[serde(default = "default_ir_length")]
    pub ir_length: usize,
}

impl RoomSection {
    pub fn reflection_coefficient(&self) -> Result<f64> {
        match (self.absorptivity, self.reflection) {
            (Some(a), None) => crate::evaluation::reflection_from_absorptivity(a),
            (None, Some(r)) => {
                if (0.0..=1.0).contains(&r) {
                    Ok(r)
                } else {
                    Err(Error::InvalidConfig(format!(
                        "reflection must lie in [0, 1], got {r}"
                    )))
                }
            }
            (None, None) => Err(Error::InvalidConfig(
                "room needs either absorptivity or reflection".into(),
            )),
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "give only one of absorptivity and reflection".into(),
            )),
        }
    }

    pub fn to_model(&self) -> Result<RoomModel> {
        RoomModel::new(
            self.dims,
            self.reflection_coefficient()?,
            self.speed_of_sound,
            self.sample_rate,
            self.ir_length,
        )
    }
}

/// Inversion parameters as configured; `fft_length` defaults to twice the
/// next power of two above the response length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionSection {
    pub beta: f64,
    pub modeling_delay: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fft_length: Option<usize>,
}

impl Default for InversionSection {
    fn default() -> Self {
        Self {
            beta: 1e-2,
            modeling_delay: 0.5,
            window_tau: None,
            fft_length: None,
        }
    }
}

impl InversionSection {
    pub fn to_config(&self, response_len: usize) -> InversionConfig {
        InversionConfig {
            beta: self.beta,
            modeling_delay: self.modeling_delay,
            fft_length: self.fft_length.unwrap_or_else(|| default_fft_length(response_len)),
            window_tau: self.window_tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub t_min: f64,
    pub early_window: f64,
    pub mse_interval: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            t_min: 0.0025,
            early_window: 0.1,
            mse_interval: 0.02,
        }
    }
}

impl EvalSection {
    pub fn to_config(&self, modeling_delay: f64) -> EvalConfig {
        EvalConfig {
            t_min: self.t_min,
            early_window: self.early_window,
            modeling_delay,
            mse_interval: self.mse_interval,
        }
    }
}

/// Full scenario: geometry, inversion, evaluation, and degradation
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub room: RoomSection,
    pub sources: Vec<[f64; 3]>,
    pub receivers: Vec<[f64; 3]>,
    #[serde(default)]
    pub inversion: InversionSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub degradation: DegradationModel,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Parses with `key.path=value` overrides applied on top of the file.
    pub fn from_path_with_overrides(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value = apply_overrides(&text, overrides)?;
        value.try_into().map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))
    }

    pub fn room_model(&self) -> Result<RoomModel> {
        self.room.to_model()
    }

    pub fn source_points(&self) -> Result<Vec<Point3>> {
        self.sources.iter().map(|&c| Point3::try_from(c)).collect()
    }

    pub fn receiver_points(&self) -> Result<Vec<Point3>> {
        self.receivers.iter().map(|&c| Point3::try_from(c)).collect()
    }

    pub fn inversion_config(&self) -> InversionConfig {
        self.inversion.to_config(self.room.ir_length)
    }
}

/// Sets dotted-path keys in a TOML document, e.g. `inversion.beta=0.05`.
/// Values parse as TOML scalars where possible and fall back to strings.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<toml::Value> {
    let mut value: toml::Value =
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    for item in overrides {
        let (path, raw) = item.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("override '{item}' is not KEY=VALUE"))
        })?;
        let parsed: toml::Value = raw
            .parse::<toml::Value>()
            .unwrap_or_else(|_| toml::Value::String(raw.to_string()));
        let parts: Vec<&str> = path.split('.').collect();
        let (leaf, dirs) = parts.split_last().expect("split_once gave a nonempty path");
        let not_a_table =
            || Error::InvalidConfig(format!("'{path}' does not address a table"));
        let mut table = value.as_table_mut().ok_or_else(not_a_table)?;
        for part in dirs {
            table = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(Default::default()))
                .as_table_mut()
                .ok_or_else(not_a_table)?;
        }
        table.insert(leaf.to_string(), parsed);
    }
    Ok(value)
}

/// What a manifest describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestKind {
    Plant,
    Filters,
}

/// One WAV file of a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source: usize,
    pub receiver: usize,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wraparound_energy_ratio: Option<f64>,
}

/// Inversion parameters as actually applied (delay rounded to samples).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionRecord {
    pub beta: f64,
    pub modeling_delay_seconds: f64,
    pub delay_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_tau: Option<f64>,
    pub fft_length: usize,
}

/// Geometry echo written beside every WAV set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRoom {
    pub dims: [f64; 3],
    pub reflection: f64,
    pub absorptivity: f64,
    pub speed_of_sound: f64,
    pub sample_rate: f64,
    pub ir_length: usize,
}

impl ManifestRoom {
    pub fn from_model(room: &RoomModel) -> Self {
        Self {
            dims: room.dims,
            reflection: room.reflection,
            absorptivity: room.absorptivity(),
            speed_of_sound: room.speed_of_sound,
            sample_rate: room.sample_rate,
            ir_length: room.ir_length,
        }
    }

    pub fn to_model(&self) -> Result<RoomModel> {
        RoomModel::new(
            self.dims,
            self.reflection,
            self.speed_of_sound,
            self.sample_rate,
            self.ir_length,
        )
    }
}

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Structured record of a generated WAV set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: ManifestKind,
    /// True when the set came from the synthetic degradation proxy, not a
    /// clean simulation.
    pub degraded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub room: ManifestRoom,
    pub sources: Vec<[f64; 3]>,
    pub receivers: Vec<[f64; 3]>,
    pub entries: Vec<ManifestEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion: Option<InversionRecord>,
    /// Scenario defaults carried along for downstream commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion_defaults: Option<InversionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degradation: Option<DegradationModel>,
}

impl Manifest {
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("manifest serialization: {e}")))?;
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, text)?;
        Ok(path)
    }

    /// Loads a manifest; `path` may be the file itself or its directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&file)?;
        let manifest: Manifest =
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let dir = file
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((manifest, dir))
    }

    /// Loads with `--set` overrides patched into the manifest tables.
    pub fn load_with_overrides(path: &Path, overrides: &[String]) -> Result<(Self, PathBuf)> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&file)?;
        let value = apply_overrides(&text, overrides)?;
        let manifest: Manifest = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
        let dir = file
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((manifest, dir))
    }

    pub fn entry_file(&self, source: usize, receiver: usize) -> Result<&str> {
        self.entries
            .iter()
            .find(|e| e.source == source && e.receiver == receiver)
            .map(|e| e.file.as_str())
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "manifest has no entry for source {source}, receiver {receiver}"
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
sources = [[0.26, 0.30, -0.15]]
receivers = [[-0.57, 0.58, 0.31]]

[room]
dims = [1.84, 1.79, 1.83]
absorptivity = 0.0407
sample_rate = 8000.0
ir_length = 4096
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.room.speed_of_sound, 346.58);
        assert_eq!(cfg.inversion.beta, 1e-2);
        assert_eq!(cfg.inversion.modeling_delay, 0.5);
        assert_eq!(cfg.eval.t_min, 0.0025);
        assert!(!cfg.degradation.enabled);
        let room = cfg.room_model().unwrap();
        assert!((room.reflection - 0.97945).abs() < 1e-4);
        let inv = cfg.inversion_config();
        assert_eq!(inv.fft_length, 8192);
    }

    #[test]
    fn overrides_rewrite_nested_keys() {
        let v = apply_overrides(
            MINIMAL,
            &[
                "inversion.beta=0.05".to_string(),
                "room.ir_length=1024".to_string(),
                "degradation.enabled=true".to_string(),
            ],
        )
        .unwrap();
        let cfg: ScenarioConfig = v.try_into().unwrap();
        assert_eq!(cfg.inversion.beta, 0.05);
        assert_eq!(cfg.room.ir_length, 1024);
        assert!(cfg.degradation.enabled);
    }

    #[test]
    fn malformed_override_is_an_error() {
        assert!(apply_overrides(MINIMAL, &["nonsense".to_string()]).is_err());
    }

    #[test]
    fn both_reflectivity_forms_are_exclusive() {
        let text = MINIMAL.replace("absorptivity = 0.0407", "absorptivity = 0.04\nreflection = 0.9");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert!(cfg.room_model().is_err());
        let neither = MINIMAL.replace("absorptivity = 0.0407", "");
        let cfg = ScenarioConfig::from_toml_str(&neither).unwrap();
        assert!(cfg.room_model().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[inversion]\nbogus = 1\n");
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn manifest_round_trips_through_toml() {
        let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        let room = cfg.room_model().unwrap();
        let manifest = Manifest {
            kind: ManifestKind::Plant,
            degraded: false,
            note: None,
            room: ManifestRoom::from_model(&room),
            sources: cfg.sources.clone(),
            receivers: cfg.receivers.clone(),
            entries: vec![ManifestEntry {
                source: 0,
                receiver: 0,
                file: "ir_s0_r0.wav".into(),
                wraparound_energy_ratio: None,
            }],
            inversion: None,
            inversion_defaults: Some(cfg.inversion.clone()),
            eval: Some(cfg.eval.clone()),
            degradation: Some(cfg.degradation.clone()),
        };
        let dir = tempfile::tempdir().unwrap();
        manifest.save(dir.path()).unwrap();
        let (back, at) = Manifest::load(dir.path()).unwrap();
        assert_eq!(back, manifest);
        assert_eq!(at, dir.path());
        assert_eq!(back.entry_file(0, 0).unwrap(), "ir_s0_r0.wav");
        assert!(back.entry_file(1, 0).is_err());
    }
}
