//! Time-varying binaural rendering of the talker and the corner noise sources.
//!
//! Each source→ear path is `gain/d × directivity × head shadow × delay`,
//! realized as one FIR: a frequency-sampled shaping filter convolved with a
//! windowed-sinc fractional delay. For a rotating talker the FIR is
//! recomputed at every block boundary (one STFT hop) and consecutive filters
//! are crossfaded linearly across the block.

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use super::config::{SceneConfig, TrajectoryKind};
use super::filter::{fractional_delay, frequency_sampled, LagFilter};
use super::head::{head_shadow_gain, itd_seconds, orientation_at, wrap_deg, Ear};
use super::rng::{substream, white_noise};
use crate::audio::{AudioBuffer, StftParams};
use crate::error::{Error, Result};
use crate::scene::config::DirectivityModel;

/// Frequency grid (points per full period) for the shaping filters.
const SHAPING_LEN: usize = 256;

/// Acoustic transfer functions `a[k,l]` at STFT frame granularity.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunctionTrack {
    /// `[frames × bins × 2]`.
    pub atf: Array3<Complex64>,
    pub params: StftParams,
    pub sample_rate: u32,
}

impl TransferFunctionTrack {
    pub fn frames(&self) -> usize {
        self.atf.dim().0
    }

    pub fn bins(&self) -> usize {
        self.atf.dim().1
    }

    /// Relative transfer function `a / a[reference]`; the reference channel is exactly one.
    pub fn rtf(&self, reference: usize) -> Result<Array3<Complex64>> {
        let mut h = self.atf.clone();
        for k in 0..self.frames() {
            for l in 0..self.bins() {
                let r = self.atf[(k, l, reference)];
                if r.norm() == 0.0 {
                    return Err(Error::invalid(format!(
                        "reference transfer function is zero at frame {k}, bin {l}"
                    )));
                }
                for m in 0..2 {
                    h[(k, l, m)] = if m == reference {
                        Complex64::new(1.0, 0.0)
                    } else {
                        self.atf[(k, l, m)] / r
                    };
                }
            }
        }
        Ok(h)
    }
}

/// Direction of a talker→ear ray relative to the talker's facing axis.
fn relative_angle_deg(scene: &SceneConfig, ear: Ear, orientation_deg: f64) -> f64 {
    let talker = &scene.talker;
    let phi = talker.azimuth_deg.to_radians();
    let (tx, ty) = (talker.distance_m * phi.cos(), talker.distance_m * phi.sin());
    let ear_az = (ear.side() * scene.head.ear_axis_deg).to_radians();
    let (ex, ey) = (scene.head.radius_m * ear_az.cos(), scene.head.radius_m * ear_az.sin());
    let ray = (ey - ty).atan2(ex - tx).to_degrees();
    let facing = talker.azimuth_deg + 180.0 + orientation_deg;
    wrap_deg(ray - facing)
}

/// Fixed (orientation-independent) part of one source→ear path.
struct PathBase {
    delay: LagFilter,
    shadow: Vec<Complex64>,
    scale: f64,
    grid_hz: Vec<f64>,
}

impl PathBase {
    fn new(scene: &SceneConfig, azimuth_deg: f64, distance_m: f64, gain: f64, ear: Ear) -> Self {
        let fs = scene.sample_rate as f64;
        let c = scene.speed_of_sound_mps;
        let itd = itd_seconds(azimuth_deg, scene.head.radius_m, c);
        let delay_s = distance_m / c - ear.side() * itd / 2.0;
        let grid_hz: Vec<f64> = (0..=SHAPING_LEN / 2)
            .map(|k| k as f64 * fs / SHAPING_LEN as f64)
            .collect();
        let shadow = grid_hz
            .iter()
            .map(|&f| {
                if scene.head.shadow {
                    head_shadow_gain(
                        azimuth_deg,
                        ear,
                        f,
                        scene.head.radius_m,
                        c,
                        scene.head.shadow_ear_deg,
                    )
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect();
        Self {
            delay: fractional_delay(delay_s * fs),
            shadow,
            scale: gain / distance_m,
            grid_hz,
        }
    }

    fn filter(&self, directivity: Option<(&DirectivityModel, f64)>) -> LagFilter {
        let response: Vec<Complex64> = self
            .grid_hz
            .iter()
            .zip(&self.shadow)
            .map(|(&f, &s)| {
                let d = directivity.map_or(1.0, |(m, theta)| m.gain(theta, f));
                s * (self.scale * d)
            })
            .collect();
        frequency_sampled(&response).convolve(&self.delay)
    }
}

fn lerp_taps(a: &LagFilter, b: &LagFilter, t: f64) -> LagFilter {
    debug_assert!(a.same_layout(b));
    LagFilter {
        first_lag: a.first_lag,
        taps: a
            .taps
            .iter()
            .zip(&b.taps)
            .map(|(x, y)| (1.0 - t) * x + t * y)
            .collect(),
    }
}

/// Filters sampled at block boundaries `b·block` samples (one per knot).
struct TimeVaryingPath {
    knots: Vec<LagFilter>,
    block: usize,
}

impl TimeVaryingPath {
    fn is_static(&self) -> bool {
        self.knots.windows(2).all(|w| w[0] == w[1])
    }

    fn render(&self, x: &[f64]) -> Vec<f64> {
        if self.is_static() {
            return self.knots[0].apply(x);
        }
        let mut out = vec![0.0; x.len()];
        for (b, chunk) in out.chunks_mut(self.block).enumerate() {
            let (h0, h1) = (&self.knots[b], &self.knots[b + 1]);
            let start = b * self.block;
            for (i, y) in chunk.iter_mut().enumerate() {
                let t = i as f64 / self.block as f64;
                let n = start + i;
                *y = (1.0 - t) * h0.apply_at(x, n) + t * h1.apply_at(x, n);
            }
        }
        out
    }

    /// Effective filter at (possibly fractional) sample time `t`.
    fn at(&self, t: f64) -> LagFilter {
        let pos = (t / self.block as f64).clamp(0.0, (self.knots.len() - 1) as f64);
        let b = (pos.floor() as usize).min(self.knots.len() - 2);
        let frac = pos - b as f64;
        if frac == 0.0 {
            self.knots[b].clone()
        } else {
            lerp_taps(&self.knots[b], &self.knots[b + 1], frac)
        }
    }
}

fn talker_paths(scene: &SceneConfig, len: usize) -> Result<[TimeVaryingPath; 2]> {
    let talker = &scene.talker;
    let block = scene.stft.hop;
    let n_knots = len.div_ceil(block) + 2;
    let fs = scene.sample_rate as f64;
    let stationary = talker.trajectory.kind == TrajectoryKind::Stationary;
    let orientations: Vec<f64> = if stationary {
        vec![talker.trajectory.start_deg; 1]
    } else {
        (0..n_knots)
            .map(|b| orientation_at(&talker.trajectory, (b * block) as f64 / fs))
            .collect::<Result<_>>()?
    };
    Ok(Ear::BOTH.map(|ear| {
        let base = PathBase::new(scene, talker.azimuth_deg, talker.distance_m, talker.gain, ear);
        let mut knots: Vec<LagFilter> = orientations
            .iter()
            .map(|&o| base.filter(Some((&talker.directivity, relative_angle_deg(scene, ear, o)))))
            .collect();
        if stationary {
            knots = vec![knots[0].clone(); n_knots];
        }
        TimeVaryingPath { knots, block }
    }))
}

/// Sparse exponentially decaying reflection tail, frozen by `(master_seed, label, index)`.
fn reverb_tail(scene: &SceneConfig, direct_lag: isize, scale: f64, label: &str, index: u64) -> Vec<(isize, f64)> {
    use rand::Rng;
    let r = &scene.reverb;
    let fs = scene.sample_rate as f64;
    let mut rng = substream(scene.master_seed, label, index);
    let len = (r.t60_s * fs).ceil() as usize;
    let prob = (r.density_per_s / fs).min(1.0);
    let start = direct_lag + (r.predelay_s * fs).round() as isize;
    let mut taps: Vec<(isize, f64)> = (0..len)
        .filter_map(|i| {
            let keep = rng.random::<f64>() < prob;
            let amp = if rng.random::<bool>() { 1.0 } else { -1.0 };
            keep.then(|| {
                let decay = 10f64.powf(-3.0 * i as f64 / (r.t60_s * fs));
                (start + i as isize, amp * decay)
            })
        })
        .collect();
    let energy: f64 = taps.iter().map(|(_, a)| a * a).sum();
    if energy > 0.0 {
        let target = scale * scale * 10f64.powf(-r.drr_db / 10.0);
        let g = (target / energy).sqrt();
        taps.iter_mut().for_each(|(_, a)| *a *= g);
    }
    taps
}

fn add_sparse(out: &mut [f64], x: &[f64], taps: &[(isize, f64)]) {
    for &(lag, a) in taps {
        for (n, y) in out.iter_mut().enumerate() {
            let idx = n as isize - lag;
            if idx >= 0 && (idx as usize) < x.len() {
                *y += a * x[idx as usize];
            }
        }
    }
}

fn check_signal(scene: &SceneConfig, signal: &[f64]) -> Result<()> {
    scene.validate()?;
    if signal.len() != scene.num_samples() {
        return Err(Error::invalid(format!(
            "source has {} samples, scene duration needs {}",
            signal.len(),
            scene.num_samples()
        )));
    }
    if signal.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("source signal"));
    }
    Ok(())
}

/// Renders the talker's signal at both ears and exports the realized
/// transfer functions at the centre of every STFT frame.
pub fn render_moving_talker(scene: &SceneConfig, source: &[f64]) -> Result<(AudioBuffer, TransferFunctionTrack)> {
    check_signal(scene, source)?;
    let len = source.len();
    let paths = talker_paths(scene, len)?;
    let mut out = Array2::zeros((2, len));
    for (e, path) in paths.iter().enumerate() {
        let mut y = path.render(source);
        if scene.reverb.enabled {
            let lag = path.knots[0].first_lag + path.knots[0].taps.len() as isize / 2;
            let scale = scene.talker.gain / scene.talker.distance_m;
            add_sparse(&mut y, source, &reverb_tail(scene, lag, scale, "reverb-talker", e as u64));
        }
        out.row_mut(e).assign(&ndarray::Array1::from(y));
    }

    let params = scene.stft;
    let frames = params.frames_for(len);
    let mut atf = Array3::zeros((frames, params.bins(), 2));
    for (e, path) in paths.iter().enumerate() {
        let mut cache: Option<(f64, Vec<Complex64>)> = None;
        for k in 0..frames {
            let t = params.frame_center(k).clamp(0.0, (len - 1) as f64);
            let resp = match &cache {
                Some((ct, r)) if *ct == t || path.is_static() => r.clone(),
                _ => {
                    let r = path.at(t).response(params.fft_len);
                    cache = Some((t, r.clone()));
                    r
                }
            };
            for (l, z) in resp.into_iter().enumerate() {
                atf[(k, l, e)] = z;
            }
        }
    }
    Ok((
        AudioBuffer::new(out, scene.sample_rate)?,
        TransferFunctionTrack {
            atf,
            params,
            sample_rate: scene.sample_rate,
        },
    ))
}

/// Point source with no directivity at `azimuth_deg`, `distance_m` through the head model.
pub fn render_static_source(
    scene: &SceneConfig,
    azimuth_deg: f64,
    distance_m: f64,
    gain: f64,
    signal: &[f64],
) -> Result<AudioBuffer> {
    if signal.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("source signal"));
    }
    let mut out = Array2::zeros((2, signal.len()));
    for ear in Ear::BOTH {
        let f = PathBase::new(scene, azimuth_deg, distance_m, gain, ear).filter(None);
        out.row_mut(ear.index()).assign(&ndarray::Array1::from(f.apply(signal)));
    }
    AudioBuffer::new(out, scene.sample_rate)
}

/// Independent seeded white noise from every configured noise source, summed at the ears.
pub fn render_diffuse_noise(scene: &SceneConfig) -> Result<AudioBuffer> {
    scene.validate()?;
    if scene.noise_sources.is_empty() {
        return Err(Error::invalid("no noise sources configured"));
    }
    let len = scene.num_samples();
    let mut total = AudioBuffer::zeros(2, len, scene.sample_rate);
    for (i, src) in scene.noise_sources.iter().enumerate() {
        let signal = white_noise(&mut substream(scene.master_seed, "noise-source", src.seed), len);
        let mut rendered = render_static_source(scene, src.azimuth_deg, src.distance_m, src.gain, &signal)?
            .into_samples();
        if scene.reverb.enabled {
            let fs = scene.sample_rate as f64;
            let lag = (src.distance_m / scene.speed_of_sound_mps * fs).round() as isize;
            for e in 0..2 {
                let mut y = rendered.row(e).to_vec();
                let tail = reverb_tail(scene, lag, src.gain / src.distance_m, "reverb-noise", (2 * i + e) as u64);
                add_sparse(&mut y, &signal, &tail);
                rendered.row_mut(e).assign(&ndarray::Array1::from(y));
            }
        }
        total = total.try_add(&AudioBuffer::new(rendered, scene.sample_rate)?)?;
    }
    Ok(total)
}
