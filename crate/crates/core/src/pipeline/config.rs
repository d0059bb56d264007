//! Experiment configuration: a base scene plus the sweep and mixing protocol.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::beamform::BeamConfig;
use crate::error::{Error, Result};
use crate::metrics::BURN_IN_S;
use crate::scene::{SceneConfig, Trajectory, MAX_SPEED_REV_S};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Emit {
    pub wav: bool,
    pub csv: bool,
    pub manifest: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self {
            wav: true,
            csv: true,
            manifest: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Base scene. Each speed overrides the talker trajectory and, for
    /// moving scenarios, the duration.
    pub scene: SceneConfig,
    pub speeds_rev_s: Vec<f64>,
    /// SNR of the artificial mixture (first target take + scaled noise-only).
    pub mix_snr_db: f64,
    pub takes: usize,
    pub tau_s: f64,
    pub reference: usize,
    /// Leading signal excluded from adaptive metrics; moving talkers hold
    /// their start angle for this long before rotating.
    pub burn_in_s: f64,
    pub output_dir: PathBuf,
    pub emit: Emit,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scene: SceneConfig::default(),
            speeds_rev_s: vec![0.0, 0.05, 0.1, 0.2, 0.4],
            mix_snr_db: 10.0,
            takes: 8,
            tau_s: 0.2,
            reference: 0,
            burn_in_s: BURN_IN_S,
            output_dir: PathBuf::from("out"),
            emit: Emit::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msgs) => Error::Config(msgs.into_iter().map(|m| format!("{}: {m}", path.display())).collect()),
            other => other,
        })
    }

    pub fn beam(&self) -> BeamConfig {
        BeamConfig {
            tau_s: self.tau_s,
            reference: self.reference,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.speeds_rev_s.is_empty() {
            errs.push("speeds_rev_s: at least one speed is required".into());
        }
        for &s in &self.speeds_rev_s {
            if !(0.0..=MAX_SPEED_REV_S).contains(&s) {
                errs.push(format!("speeds_rev_s: {s} outside [0, {MAX_SPEED_REV_S}]"));
            }
        }
        let mut sorted = self.speeds_rev_s.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| scenario_name(w[0]) == scenario_name(w[1])) {
            errs.push("speeds_rev_s: duplicate speeds".into());
        }
        if self.takes < 1 {
            errs.push("takes: must be at least 1".into());
        }
        if !self.mix_snr_db.is_finite() {
            errs.push("mix_snr_db: must be finite".into());
        }
        if let Err(e) = self.beam().validate() {
            errs.push(e.to_string());
        }
        if !(self.burn_in_s >= 0.0 && self.burn_in_s.is_finite()) {
            errs.push("burn_in_s: must be finite and >= 0".into());
        }
        if self.burn_in_s >= self.scene.duration_s {
            errs.push("burn_in_s: must be shorter than scene.duration_s".into());
        }
        errs.extend(self.scene.violations().into_iter().map(|e| format!("scene.{e}")));
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

    /// Scene for one sweep speed. Speed 0 keeps the base duration with the
    /// talker facing the listener; moving talkers hold −90° through the
    /// burn-in, then turn to +90° and the scene ends on arrival.
    pub fn scenario_scene(&self, speed_rev_s: f64) -> Result<SceneConfig> {
        let mut scene = self.scene.clone();
        if speed_rev_s == 0.0 {
            scene.talker.trajectory = Trajectory::stationary(0.0);
        } else {
            let mut t = Trajectory::rotation(speed_rev_s);
            t.onset_s = self.burn_in_s;
            scene.duration_s = t.end_time_s();
            scene.talker.trajectory = t;
        }
        scene.validate()?;
        Ok(scene)
    }
}

/// Directory name of a scenario, e.g. `speed_0.05`.
pub fn scenario_name(speed_rev_s: f64) -> String {
    format!("speed_{speed_rev_s:.2}")
}
