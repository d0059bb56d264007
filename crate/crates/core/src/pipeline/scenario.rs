//! In-memory processing of one scenario: artificial mixing, MVDR + CW and evaluation.

use crate::audio::{stft, AudioBuffer, StftParams};
use crate::beamform::{estimate_noise_scm, process_mvdr_cw, BeamConfig, BeamRun, NoiseScm};
use crate::error::Result;
use crate::metrics::{
    median, nmse_samplewise, repeatability_error, rtf_errors, scale_to_snr, snr_gain_per_band, ChannelDb,
    Repeatability, SnrGainCurve,
};
use crate::scene::{simulate_experiment, RecordingSet, SceneConfig, TransferFunctionTrack};

use super::config::ExperimentConfig;

/// Speech band over which RTF tracking error is summarized.
pub const RTF_BAND_HZ: (f64, f64) = (300.0, 8000.0);

/// First target take plus the noise-only recording scaled to the requested SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtificialMixture {
    pub noise_gain: f64,
    pub target: AudioBuffer,
    pub noise: AudioBuffer,
    pub mixture: AudioBuffer,
}

pub fn artificial_mixture(target: &AudioBuffer, noise_only: &AudioBuffer, snr_db: f64) -> Result<ArtificialMixture> {
    let noise_gain = scale_to_snr(target, noise_only, snr_db)?;
    let noise = noise_only.scaled(noise_gain);
    let mixture = target.try_add(&noise)?;
    Ok(ArtificialMixture {
        noise_gain,
        target: target.clone(),
        noise,
        mixture,
    })
}

/// Trains the noise SCM on the scaled noise component and runs MVDR + CW on the mixture.
pub fn beamform_mixture(mix: &ArtificialMixture, params: &StftParams, beam: &BeamConfig) -> Result<(BeamRun, NoiseScm)> {
    let scm = estimate_noise_scm(&stft(&mix.noise, params)?)?;
    let run = process_mvdr_cw(&stft(&mix.mixture, params)?, &scm, beam)?;
    Ok((run, scm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub curve: SnrGainCurve,
    /// Artificial mixture (take 0 + noise-only, unscaled) against the natural mixture.
    pub nmse: ChannelDb,
    /// Absent for single-take sessions.
    pub repeatability: Option<Repeatability>,
    pub rtf_errors: Vec<(f64, f64)>,
    pub median_rtf_error: f64,
}

/// Inputs to [`evaluate_run`], all taken from one scenario.
pub struct EvaluationInputs<'a> {
    pub run: &'a BeamRun,
    pub mix: &'a ArtificialMixture,
    pub takes: &'a [AudioBuffer],
    pub noise_only: &'a AudioBuffer,
    pub natural_mixture: &'a AudioBuffer,
    pub ground_truth: &'a TransferFunctionTrack,
}

pub fn evaluate_run(inputs: &EvaluationInputs<'_>, params: &StftParams, burn_in_s: f64, speed_rev_s: f64) -> Result<Evaluation> {
    let target = stft(&inputs.mix.target, params)?;
    let noise = stft(&inputs.mix.noise, params)?;
    let curve = snr_gain_per_band(inputs.run, &target, &noise, burn_in_s, speed_rev_s)?;
    let artificial = inputs.takes[0].try_add(inputs.noise_only)?;
    let nmse = nmse_samplewise(&artificial, inputs.natural_mixture)?;
    let repeatability = if inputs.takes.len() >= 2 {
        Some(repeatability_error(inputs.takes)?)
    } else {
        None
    };
    let errors = rtf_errors(
        &inputs.run.rtf,
        inputs.ground_truth,
        inputs.run.config.reference,
        burn_in_s,
        RTF_BAND_HZ.0,
        RTF_BAND_HZ.1,
    )?;
    let values: Vec<f64> = errors.iter().map(|e| e.1).collect();
    Ok(Evaluation {
        curve,
        nmse,
        repeatability,
        median_rtf_error: median(&values).unwrap_or(f64::NAN),
        rtf_errors: errors,
    })
}

/// Everything produced for one sweep speed, held in memory.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub speed_rev_s: f64,
    pub scene: SceneConfig,
    pub recording: RecordingSet,
    pub mix: ArtificialMixture,
    pub run: BeamRun,
    pub evaluation: Evaluation,
}

pub fn run_scenario(cfg: &ExperimentConfig, speed_rev_s: f64) -> Result<ScenarioResult> {
    cfg.validate()?;
    let scene = cfg.scenario_scene(speed_rev_s)?;
    let recording = simulate_experiment(&scene, cfg.takes)?;
    let mix = artificial_mixture(&recording.target_takes[0], &recording.noise_only, cfg.mix_snr_db)?;
    let (run, _) = beamform_mixture(&mix, &scene.stft, &cfg.beam())?;
    let evaluation = evaluate_run(
        &EvaluationInputs {
            run: &run,
            mix: &mix,
            takes: &recording.target_takes,
            noise_only: &recording.noise_only,
            natural_mixture: &recording.natural_mixture,
            ground_truth: &recording.ground_truth,
        },
        &scene.stft,
        cfg.burn_in_s,
        speed_rev_s,
    )?;
    Ok(ScenarioResult {
        speed_rev_s,
        scene,
        recording,
        mix,
        run,
        evaluation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::snr_db;

    #[test]
    fn artificial_mixture_hits_the_requested_snr() {
        let a = AudioBuffer::from_channels(&[vec![1.0, -1.0, 0.5], vec![0.2, 0.3, -0.1]], 48_000).unwrap();
        let b = AudioBuffer::from_channels(&[vec![0.1, 0.4, -0.2], vec![1.0, 0.0, 0.3]], 48_000).unwrap();
        let mix = artificial_mixture(&a, &b, 10.0).unwrap();
        assert!((snr_db(&mix.target, &mix.noise).unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(mix.mixture, a.try_add(&b.scaled(mix.noise_gain)).unwrap());
    }

    #[test]
    fn short_stationary_scenario_runs_end_to_end() {
        let mut cfg = ExperimentConfig::default();
        cfg.scene.duration_s = 2.0;
        cfg.takes = 2;
        let r = run_scenario(&cfg, 0.0).unwrap();
        assert_eq!(r.recording.takes(), 2);
        assert!(r.evaluation.curve.mean_gain().unwrap() > 0.0);
        assert!(r.evaluation.median_rtf_error < 0.2);
        assert_eq!(r.evaluation.repeatability.as_ref().unwrap().naive_db.len(), 2);
    }
}
