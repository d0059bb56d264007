use std::ops::Range;

use super::db;
use crate::audio::{StftParams, StftTensor};
use crate::beamform::{shadow_apply, BeamRun};
use crate::error::{Error, Result};

/// Adaptive-beamformer metrics skip this much signal at the start.
pub const BURN_IN_S: f64 = 1.0;

/// Frequency band `[lo_hz, hi_hz)` and the STFT bins whose centre falls inside.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub center_hz: f64,
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub bins: Range<usize>,
}

fn fractional_octave_bands(params: &StftParams, sample_rate: u32, per_octave: i32, lowest: i32) -> Vec<Band> {
    let nyquist = sample_rate as f64 / 2.0;
    let bin_hz = sample_rate as f64 / params.fft_len as f64;
    let half = 2f64.powf(0.5 / per_octave as f64);
    (lowest..)
        .map(|n| 1000.0 * 2f64.powf(n as f64 / per_octave as f64))
        .take_while(|c| c * half <= nyquist)
        .filter_map(|center_hz| {
            let (lo_hz, hi_hz) = (center_hz / half, center_hz * half);
            let first = (lo_hz / bin_hz).ceil() as usize;
            let end = ((hi_hz / bin_hz).ceil() as usize).min(params.bins());
            (first < end).then_some(Band {
                center_hz,
                lo_hz,
                hi_hz,
                bins: first..end,
            })
        })
        .collect()
}

/// Base-2 1/3-octave bands from 100 Hz up to the last band that fits below Nyquist.
pub fn third_octave_bands(params: &StftParams, sample_rate: u32) -> Vec<Band> {
    fractional_octave_bands(params, sample_rate, 3, -10)
}

/// Octave bands centred on 125 Hz · 2^n.
pub fn octave_bands(params: &StftParams, sample_rate: u32) -> Vec<Band> {
    fractional_octave_bands(params, sample_rate, 1, -3)
}

/// Per-band SNR before and after beamforming for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGainCurve {
    pub speed_rev_s: f64,
    pub band_hz: Vec<f64>,
    pub input_snr_db: Vec<f64>,
    pub output_snr_db: Vec<f64>,
    pub gain_db: Vec<f64>,
    /// Bands left out because a noise component had no power in them.
    pub flagged_hz: Vec<f64>,
}

impl SnrGainCurve {
    /// Mean gain over bands centred strictly above `hz`.
    pub fn mean_gain_above(&self, hz: f64) -> Option<f64> {
        let g: Vec<f64> = self
            .band_hz
            .iter()
            .zip(&self.gain_db)
            .filter(|(&f, _)| f > hz)
            .map(|(_, &g)| g)
            .collect();
        (!g.is_empty()).then(|| g.iter().sum::<f64>() / g.len() as f64)
    }

    pub fn mean_gain(&self) -> Option<f64> {
        self.mean_gain_above(0.0)
    }
}

/// First frame whose centre lies at or after `burn_in_s`.
fn first_scored_frame(t: &StftTensor, burn_in_s: f64) -> usize {
    let start = burn_in_s * t.sample_rate as f64;
    (0..t.frames())
        .find(|&k| t.params.frame_center(k) >= start)
        .unwrap_or(t.frames())
}

fn band_power(t: &StftTensor, ch: usize, frames: Range<usize>, bins: Range<usize>) -> f64 {
    let mut p = 0.0;
    for k in frames {
        for l in bins.clone() {
            p += t.data[(k, l, ch)].norm_sqr();
        }
    }
    p
}

/// SNR gain per 1/3-octave band. Input SNR is taken at the reference ear,
/// output SNR from the shadow-filtered target and noise components.
pub fn snr_gain_per_band(
    run: &BeamRun,
    input_target: &StftTensor,
    input_noise: &StftTensor,
    burn_in_s: f64,
    speed_rev_s: f64,
) -> Result<SnrGainCurve> {
    if !input_target.same_layout(input_noise) {
        return Err(Error::ShapeMismatch("target and noise components differ in layout".into()));
    }
    let out_t = shadow_apply(run, input_target)?;
    let out_n = shadow_apply(run, input_noise)?;
    let reference = run.config.reference;
    let start = first_scored_frame(input_target, burn_in_s);
    if start >= input_target.frames() {
        return Err(Error::invalid(format!("burn-in of {burn_in_s} s leaves no frames")));
    }
    let frames = start..input_target.frames();
    let mut curve = SnrGainCurve {
        speed_rev_s,
        band_hz: Vec::new(),
        input_snr_db: Vec::new(),
        output_snr_db: Vec::new(),
        gain_db: Vec::new(),
        flagged_hz: Vec::new(),
    };
    for band in third_octave_bands(&input_target.params, input_target.sample_rate) {
        let pt_in = band_power(input_target, reference, frames.clone(), band.bins.clone());
        let pn_in = band_power(input_noise, reference, frames.clone(), band.bins.clone());
        let pt_out = band_power(&out_t, 0, frames.clone(), band.bins.clone());
        let pn_out = band_power(&out_n, 0, frames.clone(), band.bins.clone());
        if pn_in == 0.0 || pn_out == 0.0 {
            curve.flagged_hz.push(band.center_hz);
            continue;
        }
        let input = db(pt_in / pn_in);
        let output = db(pt_out / pn_out);
        curve.band_hz.push(band.center_hz);
        curve.input_snr_db.push(input);
        curve.output_snr_db.push(output);
        curve.gain_db.push(output - input);
    }
    if curve.band_hz.is_empty() {
        return Err(Error::invalid("every band has zero noise power"));
    }
    Ok(curve)
}
