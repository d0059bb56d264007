//! File-backed stages. Each stage reads the previous stage's lossless
//! intermediates from a scenario directory, so stages can be rerun alone
//! and a chained run matches the in-memory computation bit for bit.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::audio::{istft, write_wav, AudioBuffer, BitDepth};
use crate::beamform::{shadow_apply, BeamRun, RunReport};
use crate::error::{Error, Result};
use crate::metrics::{write_gain_csv, write_nmse_csv, write_repeatability_csv};
use crate::scene::{simulate_experiment, SceneConfig, TransferFunctionTrack};

use super::config::{scenario_name, Emit, ExperimentConfig};
use super::scenario::{artificial_mixture, beamform_mixture, evaluate_run, ArtificialMixture, EvaluationInputs};
use super::tensor_io::{read_audio, read_tensor, write_audio, write_tensor};

pub const SOFTWARE: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

const SCENARIO: &str = "scenario.json";
const SIMULATE: &str = "simulate.json";
const BEAMFORM: &str = "beamform.json";
const EVALUATION: &str = "evaluation.json";
const MANIFEST: &str = "manifest.json";

/// Inputs that fully determine a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRecord {
    pub speed_rev_s: f64,
    /// The experiment with `output_dir` recorded as `"."`.
    pub experiment: ExperimentConfig,
    /// Scene actually rendered, including every seed.
    pub scene: SceneConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRecord {
    pub takes: usize,
    pub ambient_sigma: f64,
    pub wav_gains: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamformRecord {
    pub noise_gain: f64,
    pub floored_bins: usize,
    pub held_rtf_frames: usize,
    pub degenerate_frames: usize,
    pub wav_gains: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationRecord {
    pub burn_in_s: f64,
    pub mean_gain_db: Option<f64>,
    pub mean_gain_above_2khz_db: Option<f64>,
    pub flagged_bands_hz: Vec<f64>,
    pub nmse_db: f64,
    pub nmse_per_channel_db: Vec<f64>,
    pub repeatability_db: Option<Vec<f64>>,
    pub repeatability_corrected_db: Option<Vec<f64>>,
    pub median_rtf_error: f64,
    pub wav_gains: BTreeMap<String, f64>,
}

/// Reproducibility record written next to the artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub software: String,
    pub scenario: ScenarioRecord,
    pub simulate: Option<SimulateRecord>,
    pub beamform: Option<BeamformRecord>,
    pub evaluation: Option<EvaluationRecord>,
    pub files: Vec<String>,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut out = create(path)?;
    write(&mut out).and_then(|_| std::io::Write::flush(&mut out)).map_err(|e| Error::io(path, e))
}

/// Largest power of two that keeps `buffer` inside [−1, 1].
fn wav_gain(buffer: &AudioBuffer) -> f64 {
    let peak = buffer.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        1.0
    } else {
        2f64.powi(-(peak.log2().ceil() as i32))
    }
}

/// Writes a float32 WAV scaled by a power of two, recording the gain.
fn emit_wav(dir: &Path, name: &str, buffer: &AudioBuffer, gains: &mut BTreeMap<String, f64>) -> Result<()> {
    let g = wav_gain(buffer);
    write_wav(&buffer.scaled(g), dir.join(name), BitDepth::Float32)?;
    gains.insert(name.to_string(), g);
    Ok(())
}

fn take_name(i: usize) -> String {
    format!("target_take_{i:02}")
}

/// Directory of one scenario under `root`.
pub fn scenario_dir(root: &Path, speed_rev_s: f64) -> PathBuf {
    root.join(scenario_name(speed_rev_s))
}

fn prepare_dir(dir: &Path, overwrite: bool) -> Result<()> {
    if dir.exists() {
        if !overwrite {
            return Err(Error::Exists(dir.to_path_buf()));
        }
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Renders the session for one speed into `root/speed_X.XX`.
pub fn simulate_stage(cfg: &ExperimentConfig, speed_rev_s: f64, root: &Path, overwrite: bool) -> Result<PathBuf> {
    cfg.validate()?;
    let scene = cfg.scenario_scene(speed_rev_s)?;
    let dir = scenario_dir(root, speed_rev_s);
    prepare_dir(&dir, overwrite)?;
    let mut experiment = cfg.clone();
    experiment.output_dir = PathBuf::from(".");
    let record = ScenarioRecord {
        speed_rev_s,
        experiment,
        scene: scene.clone(),
    };
    write_json(&record, &dir.join(SCENARIO))?;

    let rec = simulate_experiment(&scene, cfg.takes)?;
    for (i, take) in rec.target_takes.iter().enumerate() {
        write_audio(take, dir.join(format!("{}.htab", take_name(i))))?;
    }
    write_audio(&rec.noise_only, dir.join("noise_only.htab"))?;
    write_audio(&rec.natural_mixture, dir.join("natural_mixture.htab"))?;
    write_tensor(&rec.ground_truth.atf, dir.join("ground_truth.htct"))?;

    let mut wav_gains = BTreeMap::new();
    if cfg.emit.wav {
        for (i, take) in rec.target_takes.iter().enumerate() {
            emit_wav(&dir, &format!("{}.wav", take_name(i)), take, &mut wav_gains)?;
        }
        emit_wav(&dir, "noise_only.wav", &rec.noise_only, &mut wav_gains)?;
        emit_wav(&dir, "natural_mixture.wav", &rec.natural_mixture, &mut wav_gains)?;
    }
    write_json(
        &SimulateRecord {
            takes: rec.takes(),
            ambient_sigma: rec.ambient_sigma,
            wav_gains,
        },
        &dir.join(SIMULATE),
    )?;
    refresh_manifest(&dir, cfg.emit)?;
    Ok(dir)
}

pub fn load_scenario(dir: &Path) -> Result<ScenarioRecord> {
    read_json(&dir.join(SCENARIO))
}

fn load_takes(dir: &Path, record: &ScenarioRecord) -> Result<Vec<AudioBuffer>> {
    (0..record.experiment.takes)
        .map(|i| read_audio(dir.join(format!("{}.htab", take_name(i)))))
        .collect()
}

fn load_mix(dir: &Path, record: &ScenarioRecord) -> Result<ArtificialMixture> {
    let take = read_audio(dir.join(format!("{}.htab", take_name(0))))?;
    let noise_only = read_audio(dir.join("noise_only.htab"))?;
    artificial_mixture(&take, &noise_only, record.experiment.mix_snr_db)
}

fn load_run(dir: &Path, record: &ScenarioRecord, mix: &ArtificialMixture) -> Result<BeamRun> {
    let weights = read_tensor(dir.join("weights.htct"))?;
    let rtf = read_tensor(dir.join("rtf.htct"))?;
    let mixture = crate::audio::stft(&mix.mixture, &record.scene.stft)?;
    let mut run = BeamRun::from_weights(weights, &mixture, record.experiment.beam())?;
    if rtf.dim() != run.weights.dim() {
        return Err(Error::Malformed {
            path: dir.join("rtf.htct"),
            reason: "RTF tensor does not match the weights".into(),
        });
    }
    run.rtf = rtf;
    Ok(run)
}

/// Mixes take 0 with the scaled noise-only recording and runs MVDR + CW.
pub fn beamform_stage(dir: &Path) -> Result<()> {
    let record = load_scenario(dir)?;
    let emit = record.experiment.emit;
    let mix = load_mix(dir, &record)?;
    let (run, _) = beamform_mixture(&mix, &record.scene.stft, &record.experiment.beam())?;
    write_tensor(&run.weights, dir.join("weights.htct"))?;
    write_tensor(&run.rtf, dir.join("rtf.htct"))?;
    let report: &RunReport = &run.report;
    if emit.csv {
        let (params, rate) = (record.scene.stft, record.scene.sample_rate);
        csv(&dir.join("flags.csv"), |out| report.write_csv(out, |l| params.bin_hz(l, rate)))?;
    }
    let mut wav_gains = BTreeMap::new();
    if emit.wav {
        emit_wav(dir, "mixture.wav", &mix.mixture, &mut wav_gains)?;
        emit_wav(dir, "output.wav", &istft(&run.output, &record.scene.stft)?, &mut wav_gains)?;
    }
    write_json(
        &BeamformRecord {
            noise_gain: mix.noise_gain,
            floored_bins: report.floored.len(),
            held_rtf_frames: report.held_rtf.iter().sum(),
            degenerate_frames: report.degenerate.iter().sum(),
            wav_gains,
        },
        &dir.join(BEAMFORM),
    )?;
    refresh_manifest(dir, emit)
}

/// Computes every metric for a beamformed scenario.
pub fn evaluate_stage(dir: &Path) -> Result<EvaluationRecord> {
    let record = load_scenario(dir)?;
    let emit = record.experiment.emit;
    let scene = &record.scene;
    let mix = load_mix(dir, &record)?;
    let run = load_run(dir, &record, &mix)?;
    let takes = load_takes(dir, &record)?;
    let noise_only = read_audio(dir.join("noise_only.htab"))?;
    let natural = read_audio(dir.join("natural_mixture.htab"))?;
    let truth = TransferFunctionTrack {
        atf: read_tensor(dir.join("ground_truth.htct"))?,
        params: scene.stft,
        sample_rate: scene.sample_rate,
    };
    let burn_in = record.experiment.burn_in_s;
    let eval = evaluate_run(
        &EvaluationInputs {
            run: &run,
            mix: &mix,
            takes: &takes,
            noise_only: &noise_only,
            natural_mixture: &natural,
            ground_truth: &truth,
        },
        &scene.stft,
        burn_in,
        record.speed_rev_s,
    )?;

    if emit.csv {
        csv(&dir.join("snr_gain.csv"), |out| write_gain_csv(out, std::slice::from_ref(&eval.curve)))?;
        let rows = [
            ("left", eval.nmse.per_channel[0]),
            ("right", eval.nmse.per_channel[1]),
            ("pooled", eval.nmse.pooled),
        ];
        csv(&dir.join("nmse.csv"), |out| write_nmse_csv(out, &rows))?;
        if let Some(rep) = &eval.repeatability {
            csv(&dir.join("repeatability.csv"), |out| write_repeatability_csv(out, &rep.naive_db))?;
            csv(&dir.join("repeatability_corrected.csv"), |out| {
                write_repeatability_csv(out, &rep.corrected_db)
            })?;
        }
        csv(&dir.join("rtf_error.csv"), |out| {
            use std::io::Write;
            writeln!(out, "freq_hz,relative_error")?;
            for (f, e) in &eval.rtf_errors {
                writeln!(out, "{f},{e}")?;
            }
            Ok(())
        })?;
    }
    let mut wav_gains = BTreeMap::new();
    if emit.wav {
        let target_out = istft(&shadow_apply(&run, &crate::audio::stft(&mix.target, &scene.stft)?)?, &scene.stft)?;
        let noise_out = istft(&shadow_apply(&run, &crate::audio::stft(&mix.noise, &scene.stft)?)?, &scene.stft)?;
        emit_wav(dir, "output_target.wav", &target_out, &mut wav_gains)?;
        emit_wav(dir, "output_noise.wav", &noise_out, &mut wav_gains)?;
    }
    let out = EvaluationRecord {
        burn_in_s: burn_in,
        mean_gain_db: eval.curve.mean_gain(),
        mean_gain_above_2khz_db: eval.curve.mean_gain_above(2000.0),
        flagged_bands_hz: eval.curve.flagged_hz.clone(),
        nmse_db: eval.nmse.pooled,
        nmse_per_channel_db: eval.nmse.per_channel.clone(),
        repeatability_db: eval.repeatability.as_ref().map(|r| r.naive_db.clone()),
        repeatability_corrected_db: eval.repeatability.as_ref().map(|r| r.corrected_db.clone()),
        median_rtf_error: eval.median_rtf_error,
        wav_gains,
    };
    write_json(&out, &dir.join(EVALUATION))?;
    refresh_manifest(dir, emit)?;
    Ok(out)
}

fn optional<T: DeserializeOwned>(path: PathBuf) -> Result<Option<T>> {
    if path.exists() {
        read_json(&path).map(Some)
    } else {
        Ok(None)
    }
}

/// Rebuilds `manifest.json` from the stage records present in `dir`.
fn refresh_manifest(dir: &Path, emit: Emit) -> Result<()> {
    if !emit.manifest {
        return Ok(());
    }
    let mut files: Vec<String> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != MANIFEST)
        .collect();
    files.sort();
    let manifest = Manifest {
        software: SOFTWARE.to_string(),
        scenario: load_scenario(dir)?,
        simulate: optional(dir.join(SIMULATE))?,
        beamform: optional(dir.join(BEAMFORM))?,
        evaluation: optional(dir.join(EVALUATION))?,
        files,
    };
    write_json(&manifest, &dir.join(MANIFEST))
}

/// Scenario directories directly under `root` (or `root` itself), sorted by speed.
pub fn find_scenarios(root: &Path) -> Result<Vec<PathBuf>> {
    if root.join(SCENARIO).exists() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut found: Vec<(f64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let path = entry.map_err(|e| Error::io(root, e))?.path();
        if path.join(SCENARIO).exists() {
            found.push((load_scenario(&path)?.speed_rev_s, path));
        }
    }
    if found.is_empty() {
        return Err(Error::invalid(format!("no scenario directories under {}", root.display())));
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(found.into_iter().map(|(_, p)| p).collect())
}
