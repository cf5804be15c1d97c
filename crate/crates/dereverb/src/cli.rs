//! File-based pipeline commands behind the `dereverb` binary.
//!
//! Each command reads geometry from a config or manifest, writes WAV sets
//! plus a manifest, and reports metrics as CSV with frozen column sets
//! (documented in the README and relied on by regression tests).

use std::fmt::Write as _;
use std::path::Path;

use crate::degrade::{degrade_matrix, DegradationModel};
use crate::error::{Error, Result};
use crate::evaluation::{local_mse, EvalReport, ReverbTime};
use crate::image_source::simulate_matrix;
use crate::inversion::{apply, InverseFilterSet, InversionConfig};
use crate::pipeline::{build_filters, evaluate_filters};
use crate::room::validate_geometry;
use crate::scenario::{
    EvalSection, InversionRecord, InversionSection, Manifest, ManifestEntry, ManifestKind,
    ManifestRoom, ScenarioConfig,
};
use crate::signal::{ImpulseResponse, TransferMatrix};
use crate::wav;

/// Process exit codes: one per failure family so scripts can branch.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;
pub const EXIT_DIMENSION: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_OTHER: i32 = 1;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::InvalidRoom(_)
        | Error::InvalidSignal(_)
        | Error::BetaNegative(_)
        | Error::NonpositiveTau(_)
        | Error::NonpositiveLevel(_)
        | Error::OutOfRange(_) => EXIT_CONFIG,
        Error::PointOutsideRoom { .. } | Error::CoincidentSourceReceiver => EXIT_GEOMETRY,
        Error::DimensionMismatch(_) | Error::RateMismatch(..) => EXIT_DIMENSION,
        Error::Io(_) | Error::Wav(_) => EXIT_IO,
        _ => EXIT_OTHER,
    }
}

/// Swept inversion parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Tau,
    Beta,
    Abar,
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(Self::Tau),
            "beta" => Ok(Self::Beta),
            "abar" => Ok(Self::Abar),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep parameter '{other}' (expected tau, beta, or abar)"
            ))),
        }
    }
}

pub const REPORT_CSV: &str = "report.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const MSE_CSV: &str = "mse.csv";

pub const REPORT_HEADER: &str = "control_point,dr_total_db,dr_early_db,snr_db,residual_total,residual_early,t10_measured_s,t20_measured_s,t60_measured_s,t10_dereverberated_s,t20_dereverberated_s,t60_dereverberated_s";
pub const SWEEP_HEADER: &str = "parameter,value,control_point,dr_total_db,dr_early_db";
pub const MSE_HEADER: &str = "source,receiver,interval_start_sample,interval_start_s,e_ms";

fn ir_file_name(source: usize, receiver: usize) -> String {
    format!("ir_s{source}_r{receiver}.wav")
}

fn filter_file_name(source: usize, receiver: usize) -> String {
    format!("h_s{source}_r{receiver}.wav")
}

fn write_matrix(
    matrix: &TransferMatrix,
    dir: &Path,
    name: impl Fn(usize, usize) -> String,
) -> Result<Vec<ManifestEntry>> {
    let fs = matrix.sample_rate().round() as u32;
    let mut entries = Vec::new();
    for j in 0..matrix.receiver_count() {
        for i in 0..matrix.source_count() {
            let file = name(i, j);
            wav::write_mono_f32(&dir.join(&file), &matrix.entry(j, i).samples, fs)?;
            entries.push(ManifestEntry {
                source: i,
                receiver: j,
                file,
                wraparound_energy_ratio: None,
            });
        }
    }
    Ok(entries)
}

fn read_matrix(manifest: &Manifest, dir: &Path) -> Result<TransferMatrix> {
    TransferMatrix::from_fn(manifest.receivers.len(), manifest.sources.len(), |j, i| {
        let file = manifest.entry_file(i, j)?;
        wav::read_mono_f32(&dir.join(file))
    })
}

/// Simulates the configured scenario and writes one WAV per
/// (source, receiver) pair plus `manifest.toml`.
pub fn cmd_simulate(config: &ScenarioConfig, out: &Path) -> Result<()> {
    let room = config.room_model()?;
    let sources = config.source_points()?;
    let receivers = config.receiver_points()?;
    validate_geometry(&room, &sources)?;
    validate_geometry(&room, &receivers)?;
    let matrix = simulate_matrix(&room, &sources, &receivers)?;

    std::fs::create_dir_all(out)?;
    let entries = write_matrix(&matrix, out, ir_file_name)?;
    let manifest = Manifest {
        kind: ManifestKind::Plant,
        degraded: false,
        note: None,
        room: ManifestRoom::from_model(&room),
        sources: config.sources.clone(),
        receivers: config.receivers.clone(),
        entries,
        inversion: None,
        inversion_defaults: Some(config.inversion.clone()),
        eval: Some(config.eval.clone()),
        degradation: Some(config.degradation.clone()),
    };
    manifest.save(out)?;
    Ok(())
}

/// Re-runs the image engine with per-arrival degradation filtering and
/// writes the proxy "measured" set plus the local-MSE curve against the
/// clean set named by the manifest.
pub fn cmd_degrade(manifest_path: &Path, overrides: &[String], out: &Path) -> Result<()> {
    let (manifest, dir) = Manifest::load_with_overrides(manifest_path, overrides)?;
    if manifest.kind != ManifestKind::Plant {
        return Err(Error::InvalidConfig("degrade expects a plant manifest".into()));
    }
    let model = manifest.degradation.clone().unwrap_or_else(|| DegradationModel {
        enabled: true,
        ..Default::default()
    });
    let room = manifest.room.to_model()?;
    let sources: Vec<_> = manifest
        .sources
        .iter()
        .map(|&c| crate::room::Point3::try_from(c))
        .collect::<Result<_>>()?;
    let receivers: Vec<_> = manifest
        .receivers
        .iter()
        .map(|&c| crate::room::Point3::try_from(c))
        .collect::<Result<_>>()?;
    let degraded = degrade_matrix(&room, &sources, &receivers, &model)?;

    std::fs::create_dir_all(out)?;
    let entries = write_matrix(&degraded, out, ir_file_name)?;
    let out_manifest = Manifest {
        kind: ManifestKind::Plant,
        degraded: model.enabled,
        note: model.enabled.then(|| {
            "synthetic degradation proxy; not measured data".to_string()
        }),
        entries,
        inversion: None,
        ..manifest.clone()
    };
    out_manifest.save(out)?;

    // Local MSE of proxy vs clean, one curve per matrix entry.
    let clean = read_matrix(&manifest, &dir)?;
    let interval_s = manifest.eval.clone().unwrap_or_default().mse_interval;
    let interval = ((interval_s * room.sample_rate).round() as usize).max(2);
    let mut csv = String::from(MSE_HEADER);
    csv.push('\n');
    for j in 0..clean.receiver_count() {
        for i in 0..clean.source_count() {
            let curve = local_mse(degraded.entry(j, i), clean.entry(j, i), interval)?;
            for (k, e) in curve {
                writeln!(
                    csv,
                    "{i},{j},{k},{:.6},{e:.8}",
                    k as f64 / room.sample_rate
                )
                .expect("string write");
            }
        }
    }
    std::fs::write(out.join(MSE_CSV), csv)?;
    Ok(())
}

/// Builds inverse filters for the set named by the manifest and writes
/// them as WAVs plus a filters manifest with wraparound diagnostics.
pub fn cmd_invert(manifest_path: &Path, overrides: &[String], out: &Path) -> Result<()> {
    let (manifest, dir) = Manifest::load_with_overrides(manifest_path, overrides)?;
    let model = read_matrix(&manifest, &dir)?;
    let section = manifest.inversion_defaults.clone().unwrap_or_default();
    let cfg = section.to_config(model.response_len());
    let filters = build_filters(&model, &cfg)?;

    std::fs::create_dir_all(out)?;
    let fs = filters.sample_rate().round() as u32;
    let mut entries = Vec::new();
    for i in 0..filters.source_count() {
        for j in 0..filters.receiver_count() {
            let file = filter_file_name(i, j);
            wav::write_mono_f32(&out.join(&file), &filters.filter(i, j).samples, fs)?;
            entries.push(ManifestEntry {
                source: i,
                receiver: j,
                file,
                wraparound_energy_ratio: Some(filters.wraparound_energy_ratio(i, j)),
            });
        }
    }
    let out_manifest = Manifest {
        kind: ManifestKind::Filters,
        degraded: manifest.degraded,
        note: manifest.note.clone(),
        room: manifest.room.clone(),
        sources: manifest.sources.clone(),
        receivers: manifest.receivers.clone(),
        entries,
        inversion: Some(InversionRecord {
            beta: cfg.beta,
            modeling_delay_seconds: cfg.modeling_delay,
            delay_samples: filters.delay_samples,
            window_tau: cfg.window_tau,
            fft_length: cfg.fft_length,
        }),
        inversion_defaults: Some(section),
        eval: manifest.eval.clone(),
        degradation: manifest.degradation.clone(),
    };
    out_manifest.save(out)?;
    Ok(())
}

fn load_filters(manifest_path: &Path) -> Result<(Manifest, InverseFilterSet)> {
    let (manifest, dir) = Manifest::load(manifest_path)?;
    if manifest.kind != ManifestKind::Filters {
        return Err(Error::InvalidConfig("expected a filters manifest".into()));
    }
    let record = manifest
        .inversion
        .clone()
        .ok_or_else(|| Error::InvalidConfig("filters manifest lacks inversion record".into()))?;
    let l = manifest.sources.len();
    let m = manifest.receivers.len();
    let mut rows = Vec::with_capacity(l);
    for i in 0..l {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            let file = manifest.entry_file(i, j)?;
            row.push(wav::read_mono_f32(&dir.join(file))?);
        }
        rows.push(row);
    }
    let cfg = InversionConfig {
        beta: record.beta,
        modeling_delay: record.modeling_delay_seconds,
        fft_length: record.fft_length,
        window_tau: record.window_tau,
    };
    let filters = InverseFilterSet::from_parts(rows, cfg, record.delay_samples)?;
    Ok((manifest, filters))
}

/// Filters a unit impulse per control point through filters and plant and
/// writes the equalized outputs as `out_r{j}.wav`.
pub fn cmd_apply(plant_manifest: &Path, filters_manifest: &Path, out: &Path) -> Result<()> {
    let (plant_man, plant_dir) = Manifest::load(plant_manifest)?;
    let plant = read_matrix(&plant_man, &plant_dir)?;
    let (_, filters) = load_filters(filters_manifest)?;
    let fs = plant.sample_rate();
    let pulses: Vec<ImpulseResponse> = (0..filters.receiver_count())
        .map(|_| ImpulseResponse::dirac(1, 0, fs))
        .collect::<Result<_>>()?;
    let outputs = apply(&filters, &plant, &pulses)?;
    std::fs::create_dir_all(out)?;
    for (j, x_hat) in outputs.iter().enumerate() {
        wav::write_mono_f32(&out.join(format!("out_r{j}.wav")), &x_hat.samples, fs.round() as u32)?;
    }
    Ok(())
}

fn reverb_seconds(t: &ReverbTime) -> f64 {
    t.seconds()
}

fn db_field(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.4}")
    }
}

pub fn report_csv(reports: &[EvalReport]) -> String {
    let mut csv = String::from(REPORT_HEADER);
    csv.push('\n');
    for r in reports {
        writeln!(
            csv,
            "{},{},{},{},{:.8e},{:.8e},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.control_point,
            db_field(r.dr_total_db),
            db_field(r.dr_early_db),
            db_field(r.snr_db),
            r.residual_energy_total,
            r.residual_energy_early,
            reverb_seconds(&r.t10_measured),
            reverb_seconds(&r.t20_measured),
            reverb_seconds(&r.t60_measured),
            reverb_seconds(&r.t10_dereverberated),
            reverb_seconds(&r.t20_dereverberated),
            reverb_seconds(&r.t60_dereverberated),
        )
        .expect("string write");
    }
    csv
}

/// Runs the equalized-impulse evaluation and writes `report.csv`.
pub fn cmd_evaluate(plant_manifest: &Path, filters_manifest: &Path, out: &Path) -> Result<()> {
    let (plant_man, plant_dir) = Manifest::load(plant_manifest)?;
    let plant = read_matrix(&plant_man, &plant_dir)?;
    let (filters_man, filters) = load_filters(filters_manifest)?;
    let eval = filters_man
        .eval
        .clone()
        .or_else(|| plant_man.eval.clone())
        .unwrap_or_default();
    let reports = evaluate_filters(&plant, &filters, &eval.to_config(filters.delay_seconds()))?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(REPORT_CSV), report_csv(&reports))?;
    Ok(())
}

/// One full pipeline run per swept value against a fixed plant; rows are
/// (parameter, value, control point, DR totals).
pub fn cmd_sweep(
    config: &ScenarioConfig,
    parameter: SweepParameter,
    values: &[f64],
    out: &Path,
) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::InvalidConfig("sweep needs at least two values".into()));
    }
    let rows = run_sweep(config, parameter, values)?;
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    let name = match parameter {
        SweepParameter::Tau => "tau",
        SweepParameter::Beta => "beta",
        SweepParameter::Abar => "abar",
    };
    for (value, reports) in &rows {
        for r in reports {
            writeln!(
                csv,
                "{name},{value},{},{},{}",
                r.control_point,
                db_field(r.dr_total_db),
                db_field(r.dr_early_db)
            )
            .expect("string write");
        }
    }
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(SWEEP_CSV), csv)?;
    Ok(())
}

/// Sweep engine shared by the CLI and the tests: the plant is simulated
/// once from the scenario (degraded when enabled) and stays fixed; each
/// value rebuilds the model-side filters.
pub fn run_sweep(
    config: &ScenarioConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<(f64, Vec<EvalReport>)>> {
    let room = config.room_model()?;
    let sources = config.source_points()?;
    let receivers = config.receiver_points()?;
    let plant = if config.degradation.enabled {
        degrade_matrix(&room, &sources, &receivers, &config.degradation)?
    } else {
        simulate_matrix(&room, &sources, &receivers)?
    };

    let mut out = Vec::with_capacity(values.len());
    for &value in values {
        let mut inversion: InversionSection = config.inversion.clone();
        let mut model_room = room.clone();
        match parameter {
            SweepParameter::Tau => inversion.window_tau = Some(value),
            SweepParameter::Beta => inversion.beta = value,
            SweepParameter::Abar => {
                let r = crate::evaluation::reflection_from_absorptivity(value)?;
                model_room = crate::room::RoomModel::new(
                    room.dims,
                    r,
                    room.speed_of_sound,
                    room.sample_rate,
                    room.ir_length,
                )?;
            }
        }
        let model = simulate_matrix(&model_room, &sources, &receivers)?;
        let cfg = inversion.to_config(model.response_len());
        let filters = build_filters(&model, &cfg)?;
        let eval = EvalSection {
            t_min: config.eval.t_min,
            early_window: config.eval.early_window,
            mse_interval: config.eval.mse_interval,
        };
        let reports = evaluate_filters(&plant, &filters, &eval.to_config(filters.delay_seconds()))?;
        out.push((value, reports));
    }
    Ok(out)
}
