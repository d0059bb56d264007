//! JSON-serializable description of a simulated recording session.

use serde::{Deserialize, Serialize};

use crate::audio::StftParams;
use crate::error::{Error, Result};

/// Fastest rotation the turntable is allowed to run, rev/s.
pub const MAX_SPEED_REV_S: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Stationary,
    ConstantRotation,
}

/// Talker head orientation over time, in degrees relative to facing the listener.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub start_deg: f64,
    pub end_deg: f64,
    pub speed_rev_per_s: f64,
    /// Time the talker holds `start_deg` before rotating.
    pub onset_s: f64,
}

impl Default for Trajectory {
    fn default() -> Self {
        Self {
            kind: TrajectoryKind::ConstantRotation,
            start_deg: -90.0,
            end_deg: 90.0,
            speed_rev_per_s: 0.1,
            onset_s: 0.0,
        }
    }
}

impl Trajectory {
    pub fn stationary(deg: f64) -> Self {
        Self {
            kind: TrajectoryKind::Stationary,
            start_deg: deg,
            end_deg: deg,
            speed_rev_per_s: 0.0,
            onset_s: 0.0,
        }
    }

    pub fn rotation(speed_rev_per_s: f64) -> Self {
        Self {
            speed_rev_per_s,
            ..Self::default()
        }
    }

    /// Seconds from `t = 0` until the final orientation is reached.
    pub fn end_time_s(&self) -> f64 {
        match self.kind {
            TrajectoryKind::Stationary => 0.0,
            TrajectoryKind::ConstantRotation => {
                self.onset_s + (self.end_deg - self.start_deg).abs() / (360.0 * self.speed_rev_per_s)
            }
        }
    }

    fn check(&self, errs: &mut Vec<String>) {
        match self.kind {
            TrajectoryKind::Stationary if self.speed_rev_per_s != 0.0 => {
                errs.push("talker.trajectory: stationary trajectory must have speed 0".into())
            }
            TrajectoryKind::ConstantRotation
                if !(self.speed_rev_per_s > 0.0 && self.speed_rev_per_s <= MAX_SPEED_REV_S) =>
            {
                errs.push(format!(
                    "talker.trajectory: rotation speed {} rev/s outside (0, {MAX_SPEED_REV_S}]",
                    self.speed_rev_per_s
                ))
            }
            _ => {}
        }
        if !(self.start_deg.is_finite() && self.end_deg.is_finite()) {
            errs.push("talker.trajectory: angles must be finite".into());
        }
        if !(self.onset_s >= 0.0) {
            errs.push("talker.trajectory: onset_s must be >= 0".into());
        }
    }
}

/// Per-band cardioid mix `(1 − β) + β·cos θ`, with β interpolated in log frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DirectivityModel {
    pub band_centers_hz: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Default for DirectivityModel {
    fn default() -> Self {
        Self {
            band_centers_hz: vec![500.0, 2000.0, 8000.0],
            beta: vec![0.3, 0.6, 0.85],
        }
    }
}

impl DirectivityModel {
    pub fn omni() -> Self {
        Self {
            band_centers_hz: vec![1000.0],
            beta: vec![0.0],
        }
    }

    fn check(&self, errs: &mut Vec<String>) {
        if self.band_centers_hz.is_empty() || self.band_centers_hz.len() != self.beta.len() {
            errs.push("talker.directivity: need matching non-empty band_centers_hz and beta".into());
            return;
        }
        if self.band_centers_hz.windows(2).any(|w| !(w[0] < w[1])) || self.band_centers_hz[0] <= 0.0 {
            errs.push("talker.directivity: band centers must be positive and ascending".into());
        }
        if self.beta.iter().any(|b| !(0.0..=1.0).contains(b)) {
            errs.push("talker.directivity: beta must lie in [0, 1]".into());
        }
        if self.beta.windows(2).any(|w| w[1] < w[0]) {
            errs.push("talker.directivity: beta must not decrease with frequency".into());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeadConfig {
    pub radius_m: f64,
    /// Ear positions are at ±this azimuth on the head sphere.
    pub ear_axis_deg: f64,
    /// Apply the spherical head-shadow filter.
    pub shadow: bool,
    /// Azimuth of maximal high-frequency boost for the left ear; mirrored for the right.
    pub shadow_ear_deg: f64,
}

impl Default for HeadConfig {
    fn default() -> Self {
        Self {
            radius_m: 0.0875,
            ear_axis_deg: 90.0,
            shadow: true,
            shadow_ear_deg: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TalkerConfig {
    /// Talker position seen from the listener; positive is to the listener's left.
    pub azimuth_deg: f64,
    pub distance_m: f64,
    pub gain: f64,
    pub trajectory: Trajectory,
    pub directivity: DirectivityModel,
}

impl Default for TalkerConfig {
    fn default() -> Self {
        Self {
            azimuth_deg: 30.0,
            distance_m: 1.0,
            gain: 1.0,
            trajectory: Trajectory::stationary(0.0),
            directivity: DirectivityModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSource {
    pub azimuth_deg: f64,
    #[serde(default = "default_noise_distance")]
    pub distance_m: f64,
    pub seed: u64,
    #[serde(default = "unit")]
    pub gain: f64,
}

fn default_noise_distance() -> f64 {
    2.0
}

fn unit() -> f64 {
    1.0
}

impl NoiseSource {
    pub fn new(azimuth_deg: f64, seed: u64) -> Self {
        Self {
            azimuth_deg,
            distance_m: default_noise_distance(),
            seed,
            gain: 1.0,
        }
    }

    /// Four loudspeakers in the room corners around the listener.
    pub fn corners() -> Vec<Self> {
        [45.0, 135.0, -135.0, -45.0]
            .into_iter()
            .zip(1..)
            .map(|(az, seed)| Self::new(az, seed))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AmbientConfig {
    /// Ambient microphone noise relative to the target render power; `null` disables it.
    pub snr_db: Option<f64>,
    /// Each take gets its own ambient realization. When false every take
    /// reuses the same one.
    pub independent_takes: bool,
}

impl Default for AmbientConfig {
    fn default() -> Self {
        Self {
            snr_db: Some(23.2),
            independent_takes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReverbConfig {
    pub enabled: bool,
    pub t60_s: f64,
    /// Reflections per second in the sparse tail.
    pub density_per_s: f64,
    /// Direct-to-reverberant energy ratio.
    pub drr_db: f64,
    pub predelay_s: f64,
}

impl Default for ReverbConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            t60_s: 0.15,
            density_per_s: 2000.0,
            drr_db: 6.0,
            predelay_s: 0.002,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub sample_rate: u32,
    pub duration_s: f64,
    pub master_seed: u64,
    pub speed_of_sound_mps: f64,
    pub head: HeadConfig,
    pub talker: TalkerConfig,
    pub noise_sources: Vec<NoiseSource>,
    pub ambient: AmbientConfig,
    pub reverb: ReverbConfig,
    /// Framing used for the exported ground-truth transfer functions.
    pub stft: StftParams,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            sample_rate: 48_000,
            duration_s: 6.0,
            master_seed: 1,
            speed_of_sound_mps: 343.0,
            head: HeadConfig::default(),
            talker: TalkerConfig::default(),
            noise_sources: NoiseSource::corners(),
            ambient: AmbientConfig::default(),
            reverb: ReverbConfig::default(),
            stft: StftParams::default(),
        }
    }
}

impl SceneConfig {
    pub fn num_samples(&self) -> usize {
        (self.duration_s * self.sample_rate as f64).round() as usize
    }

    /// Every violated constraint, one message each.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.sample_rate == 0 {
            errs.push("sample_rate must be positive".into());
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            errs.push("duration_s must be positive".into());
        }
        if !(self.speed_of_sound_mps > 0.0) {
            errs.push("speed_of_sound_mps must be positive".into());
        }
        if !(self.head.radius_m > 0.0) {
            errs.push("head.radius_m must be positive".into());
        }
        if !(self.talker.distance_m > 0.0) {
            errs.push("talker.distance_m must be positive".into());
        }
        if !(self.talker.distance_m > self.head.radius_m) {
            errs.push("talker must be outside the listener's head".into());
        }
        if !self.talker.gain.is_finite() {
            errs.push("talker.gain must be finite".into());
        }
        self.talker.trajectory.check(&mut errs);
        self.talker.directivity.check(&mut errs);
        let end = self.talker.trajectory.end_time_s();
        if self.talker.trajectory.kind == TrajectoryKind::ConstantRotation && end > self.duration_s + 1e-9 {
            errs.push(format!(
                "duration_s {} does not cover the trajectory, which ends at {end:.3} s",
                self.duration_s
            ));
        }
        for (i, n) in self.noise_sources.iter().enumerate() {
            if !(n.distance_m > self.head.radius_m) {
                errs.push(format!("noise_sources[{i}].distance_m must exceed the head radius"));
            }
            if !n.gain.is_finite() || !n.azimuth_deg.is_finite() {
                errs.push(format!("noise_sources[{i}]: values must be finite"));
            }
        }
        if let Some(db) = self.ambient.snr_db {
            if !db.is_finite() {
                errs.push("ambient.snr_db must be finite or null".into());
            }
        }
        if self.reverb.enabled
            && !(self.reverb.t60_s > 0.0 && self.reverb.density_per_s > 0.0 && self.reverb.predelay_s >= 0.0)
        {
            errs.push("reverb: t60_s and density_per_s must be positive".into());
        }
        if let Err(e) = self.stft.validate() {
            errs.push(format!("stft: {e}"));
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}
