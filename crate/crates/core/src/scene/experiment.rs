//! One simulated recording session: noise-only, repeated target takes and a
//! natural mixture, each with its own ambient microphone noise.

use std::thread;

use super::config::SceneConfig;
use super::render::{render_diffuse_noise, render_moving_talker, TransferFunctionTrack};
use super::rng::{substream, white_noise};
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Everything a session produces. `target_takes[i] = target_clean + target_ambient[i]`,
/// `noise_only = noise_clean + noise_ambient`, and
/// `natural_mixture = target_clean + noise_clean + natural_ambient`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingSet {
    pub target_clean: AudioBuffer,
    pub noise_clean: AudioBuffer,
    pub target_takes: Vec<AudioBuffer>,
    pub target_ambient: Vec<AudioBuffer>,
    pub noise_only: AudioBuffer,
    pub noise_ambient: AudioBuffer,
    pub natural_mixture: AudioBuffer,
    pub natural_ambient: AudioBuffer,
    pub ground_truth: TransferFunctionTrack,
    /// Standard deviation of the ambient noise per channel, 0 when disabled.
    pub ambient_sigma: f64,
}

impl RecordingSet {
    pub fn takes(&self) -> usize {
        self.target_takes.len()
    }
}

/// The talker's dry source signal for a scene.
pub fn talker_source(scene: &SceneConfig) -> Vec<f64> {
    white_noise(&mut substream(scene.master_seed, "talker-source", 0), scene.num_samples())
}

fn ambient(scene: &SceneConfig, sigma: f64, label: &str, index: u64) -> Result<AudioBuffer> {
    let len = scene.num_samples();
    let channels: Vec<Vec<f64>> = (0..2)
        .map(|ch| {
            let mut rng = substream(scene.master_seed, label, 2 * index + ch);
            white_noise(&mut rng, len).into_iter().map(|v| sigma * v).collect()
        })
        .collect();
    AudioBuffer::from_channels(&channels, scene.sample_rate)
}

/// Renders a complete session. Target and noise renders run on separate
/// threads; every random stream is derived from the scene's master seed.
pub fn simulate_experiment(scene: &SceneConfig, n_takes: usize) -> Result<RecordingSet> {
    scene.validate()?;
    if n_takes == 0 {
        return Err(Error::invalid("n_takes must be at least 1"));
    }
    let source = talker_source(scene);
    let (target, noise) = thread::scope(|s| {
        let noise = s.spawn(|| render_diffuse_noise(scene));
        let target = render_moving_talker(scene, &source);
        (target, noise.join().expect("noise render panicked"))
    });
    let (target_clean, ground_truth) = target?;
    let noise_clean = noise?;

    let sigma = match scene.ambient.snr_db {
        Some(snr) => (target_clean.mean_power() / 10f64.powf(snr / 10.0)).sqrt(),
        None => 0.0,
    };
    let target_ambient = (0..n_takes)
        .map(|i| {
            let index = if scene.ambient.independent_takes { i as u64 } else { 0 };
            ambient(scene, sigma, "ambient-take", index)
        })
        .collect::<Result<Vec<_>>>()?;
    let target_takes = target_ambient
        .iter()
        .map(|a| target_clean.try_add(a))
        .collect::<Result<Vec<_>>>()?;
    let noise_ambient = ambient(scene, sigma, "ambient-noise", 0)?;
    let natural_ambient = ambient(scene, sigma, "ambient-natural", 0)?;
    let noise_only = noise_clean.try_add(&noise_ambient)?;
    let natural_mixture = target_clean.try_add(&noise_clean)?.try_add(&natural_ambient)?;

    Ok(RecordingSet {
        target_clean,
        noise_clean,
        target_takes,
        target_ambient,
        noise_only,
        noise_ambient,
        natural_mixture,
        natural_ambient,
        ground_truth,
        ambient_sigma: sigma,
    })
}
