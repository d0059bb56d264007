//! Root-Hann STFT/ISTFT pair at 50% overlap.
//!
//! Analysis and synthesis both use the square root of a periodic Hann window.
//! At a hop of half the frame length the squared windows sum to exactly one,
//! so weighted overlap-add reconstructs the input without normalization.
//! The signal is padded with one frame of zeros on each side before framing,
//! which keeps the first and last samples fully covered.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Array3, ArrayView2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftParams {
    pub frame_len: usize,
    pub hop: usize,
    pub fft_len: usize,
}

impl Default for StftParams {
    /// 20 ms frames at 48 kHz, zero-padded to a 1024-point transform.
    fn default() -> Self {
        Self {
            frame_len: 960,
            hop: 480,
            fft_len: 1024,
        }
    }
}

impl StftParams {
    pub fn new(frame_len: usize, fft_len: usize) -> Result<Self> {
        let p = Self {
            frame_len,
            hop: frame_len / 2,
            fft_len,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len < 2 || self.frame_len % 2 != 0 {
            return Err(Error::invalid("frame_len must be even and at least 2"));
        }
        if self.hop * 2 != self.frame_len {
            return Err(Error::invalid("hop must be half the frame length"));
        }
        if self.fft_len < self.frame_len {
            return Err(Error::invalid("fft_len must be at least frame_len"));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    pub fn bin_hz(&self, bin: usize, sample_rate: u32) -> f64 {
        bin as f64 * sample_rate as f64 / self.fft_len as f64
    }

    /// Number of frames produced for a signal of `len` samples.
    pub fn frames_for(&self, len: usize) -> usize {
        (self.frame_len + len - 1) / self.hop + 1
    }

    /// Time (in samples of the unpadded signal) at the centre of frame `k`.
    /// Negative for the leading frames that straddle the padding.
    pub fn frame_center(&self, k: usize) -> f64 {
        (k * self.hop) as f64 - self.frame_len as f64 / 2.0
    }

    /// Square root of the periodic Hann window.
    pub fn window(&self) -> Vec<f64> {
        let n = self.frame_len as f64;
        (0..self.frame_len)
            .map(|i| (0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos()).sqrt())
            .collect()
    }
}

/// Complex spectrogram stored `[frames × bins × channels]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StftTensor {
    pub data: Array3<Complex64>,
    pub params: StftParams,
    pub sample_rate: u32,
    /// Length of the time-domain signal this tensor was computed from.
    pub signal_len: usize,
}

impl StftTensor {
    pub fn zeros(params: StftParams, sample_rate: u32, signal_len: usize, channels: usize) -> Self {
        let frames = params.frames_for(signal_len);
        Self {
            data: Array3::zeros((frames, params.bins(), channels)),
            params,
            sample_rate,
            signal_len,
        }
    }

    pub fn frames(&self) -> usize {
        self.data.len_of(Axis(0))
    }

    pub fn bins(&self) -> usize {
        self.data.len_of(Axis(1))
    }

    pub fn channels(&self) -> usize {
        self.data.len_of(Axis(2))
    }

    pub fn bin_hz(&self, bin: usize) -> f64 {
        self.params.bin_hz(bin, self.sample_rate)
    }

    /// `[frames × bins]` view of one channel.
    pub fn channel(&self, ch: usize) -> ArrayView2<'_, Complex64> {
        self.data.index_axis(Axis(2), ch)
    }

    /// The two-channel vector at frame `k`, bin `l`.
    pub fn pair(&self, k: usize, l: usize) -> [Complex64; 2] {
        [self.data[(k, l, 0)], self.data[(k, l, 1)]]
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.data.dim() == other.data.dim()
            && self.params == other.params
            && self.sample_rate == other.sample_rate
            && self.signal_len == other.signal_len
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if !self.same_layout(other) {
            return Err(Error::ShapeMismatch("stft tensors differ in layout".into()));
        }
        Ok(Self {
            data: &self.data + &other.data,
            ..self.clone()
        })
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            data: self.data.mapv(|z| z * gain),
            ..self.clone()
        }
    }

    /// Energy of the underlying signal implied by the one-sided spectra.
    pub fn energy(&self) -> f64 {
        let n = self.params.fft_len as f64;
        let nyq = self.params.fft_len / 2;
        let mut total = 0.0;
        for ((_, l, _), z) in self.data.indexed_iter() {
            let w = if l == 0 || l == nyq { 1.0 } else { 2.0 };
            total += w * z.norm_sqr();
        }
        total / n
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(fft_len: usize) -> Plans {
    let mut planner = FftPlanner::new();
    Plans {
        forward: planner.plan_fft_forward(fft_len),
        inverse: planner.plan_fft_inverse(fft_len),
    }
}

/// Forward transform of every channel of `buffer`.
pub fn stft(buffer: &AudioBuffer, params: &StftParams) -> Result<StftTensor> {
    params.validate()?;
    let len = buffer.len();
    if len < params.frame_len {
        return Err(Error::invalid(format!(
            "signal of {len} samples is shorter than one frame ({})",
            params.frame_len
        )));
    }
    let window = params.window();
    let fft = plans(params.fft_len).forward;
    let mut out = StftTensor::zeros(*params, buffer.sample_rate(), len, buffer.channels());
    let mut scratch = vec![Complex64::default(); params.fft_len];
    let offset = params.frame_len as isize;

    for (c, channel) in buffer.samples().outer_iter().enumerate() {
        for k in 0..out.frames() {
            scratch.fill(Complex64::default());
            let start = (k * params.hop) as isize - offset;
            for (j, w) in window.iter().enumerate() {
                let i = start + j as isize;
                if i >= 0 && (i as usize) < len {
                    scratch[j] = Complex64::new(channel[i as usize] * w, 0.0);
                }
            }
            fft.process(&mut scratch);
            for l in 0..params.bins() {
                out.data[(k, l, c)] = scratch[l];
            }
        }
    }
    Ok(out)
}

/// Weighted overlap-add synthesis; inverse of [`stft`].
pub fn istft(tensor: &StftTensor, params: &StftParams) -> Result<AudioBuffer> {
    if tensor.params != *params {
        return Err(Error::ShapeMismatch(format!(
            "tensor was computed with {:?}, not {:?}",
            tensor.params, params
        )));
    }
    params.validate()?;
    if tensor.bins() != params.bins() || tensor.frames() != params.frames_for(tensor.signal_len) {
        return Err(Error::ShapeMismatch("tensor shape does not match params".into()));
    }
    let n = params.fft_len;
    let window = params.window();
    let ifft = plans(n).inverse;
    let len = tensor.signal_len;
    let mut out = Array2::<f64>::zeros((tensor.channels(), len));
    let mut scratch = vec![Complex64::default(); n];
    let offset = params.frame_len as isize;
    let scale = 1.0 / n as f64;

    for c in 0..tensor.channels() {
        for k in 0..tensor.frames() {
            for l in 0..params.bins() {
                scratch[l] = tensor.data[(k, l, c)];
            }
            for l in 1..n - params.bins() + 1 {
                scratch[n - l] = tensor.data[(k, l, c)].conj();
            }
            ifft.process(&mut scratch);
            let start = (k * params.hop) as isize - offset;
            for (j, w) in window.iter().enumerate() {
                let i = start + j as isize;
                if i >= 0 && (i as usize) < len {
                    out[(c, i as usize)] += scratch[j].re * scale * w;
                }
            }
        }
    }
    AudioBuffer::new(out, tensor.sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(channels: usize, len: usize, seed: u64) -> AudioBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch: Vec<Vec<f64>> = (0..channels)
            .map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        AudioBuffer::from_channels(&ch, 48_000).unwrap()
    }

    fn rel_err(a: &AudioBuffer, b: &AudioBuffer) -> f64 {
        let num: f64 = (a.samples() - b.samples()).iter().map(|x| x * x).sum();
        let den: f64 = a.samples().iter().map(|x| x * x).sum();
        (num / den).sqrt()
    }

    #[test]
    fn default_params_are_20ms_at_48k() {
        let p = StftParams::default();
        assert_eq!(p.frame_len, 960);
        assert_eq!(p.hop, 480);
        assert_eq!(p.bins(), 513);
        assert_eq!(p.bin_hz(1, 48_000), 46.875);
        assert_eq!(p.bin_hz(16, 48_000), 750.0);
    }

    #[test]
    fn squared_window_overlap_adds_to_one() {
        let p = StftParams::default();
        let w = p.window();
        for j in 0..p.hop {
            let s = w[j] * w[j] + w[j + p.hop] * w[j + p.hop];
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_params_and_short_input() {
        assert!(StftParams::new(961, 1024).is_err());
        assert!(StftParams::new(960, 512).is_err());
        let p = StftParams::default();
        let short = AudioBuffer::zeros(1, 959, 48_000);
        assert!(stft(&short, &p).is_err());
    }

    #[test]
    fn zeros_in_zeros_out() {
        let p = StftParams::default();
        let x = AudioBuffer::zeros(2, 4800, 48_000);
        let t = stft(&x, &p).unwrap();
        assert!(t.data.iter().all(|z| *z == Complex64::default()));
        let back = istft(&StftTensor::zeros(p, 48_000, 4800, 2), &p).unwrap();
        assert!(back.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn impulse_gives_flat_magnitude_scaled_by_window() {
        let p = StftParams::default();
        let mut x = vec![0.0; 4800];
        // frame 3 starts at signal index 3*480 - 960 = 480; put the impulse 100 samples in.
        x[580] = 1.0;
        let t = stft(&AudioBuffer::mono(x, 48_000).unwrap(), &p).unwrap();
        let w = p.window()[100];
        for l in 0..p.bins() {
            let z = t.data[(3, l, 0)];
            assert!((z.norm() - w).abs() < 1e-12);
            let phase = Complex64::from_polar(w, -2.0 * PI * (100 * l) as f64 / 1024.0);
            assert!((z - phase).norm() < 1e-12);
        }
    }

    #[test]
    fn bin_centred_sinusoid_matches_direct_windowed_dft() {
        let p = StftParams::default();
        let len = 9600;
        let f = 750.0;
        let x: Vec<f64> = (0..len)
            .map(|n| (2.0 * PI * f * n as f64 / 48_000.0).sin())
            .collect();
        let t = stft(&AudioBuffer::mono(x.clone(), 48_000).unwrap(), &p).unwrap();
        let w = p.window();
        let k = 6;
        let start = k * p.hop - p.frame_len;
        // Direct O(N^2) DFT of the windowed frame.
        for l in 0..p.bins() {
            let mut acc = Complex64::default();
            for j in 0..p.frame_len {
                let ang = -2.0 * PI * (j * l) as f64 / p.fft_len as f64;
                acc += Complex64::from_polar(x[start + j] * w[j], ang);
            }
            assert!((acc - t.data[(k, l, 0)]).norm() < 1e-9, "bin {l}");
        }
        let mags: Vec<f64> = (0..p.bins()).map(|l| t.data[(k, l, 0)].norm()).collect();
        let peak = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peak, 16);
        // root-Hann leakage is confined to the neighbourhood of the peak
        let far: f64 = mags.iter().skip(40).map(|m| m * m).sum();
        let total: f64 = mags.iter().map(|m| m * m).sum();
        assert!(far / total < 1e-4);
    }

    #[test]
    fn round_trip_one_second_of_noise() {
        let p = StftParams::default();
        let x = noise(2, 48_000, 1);
        let y = istft(&stft(&x, &p).unwrap(), &p).unwrap();
        assert!(rel_err(&x, &y) < 1e-10);
    }

    #[test]
    fn energy_is_preserved() {
        let p = StftParams::default();
        let x = noise(1, 20_000, 2);
        let e: f64 = x.channel_energy().iter().sum();
        let t = stft(&x, &p).unwrap();
        assert!(((t.energy() - e) / e).abs() < 1e-6);
    }

    #[test]
    fn istft_rejects_mismatched_params() {
        let p = StftParams::default();
        let t = stft(&noise(1, 2000, 3), &p).unwrap();
        let other = StftParams::new(480, 512).unwrap();
        assert!(istft(&t, &other).is_err());
    }

    #[test]
    fn istft_is_linear() {
        let p = StftParams::default();
        let a = stft(&noise(2, 5000, 4), &p).unwrap();
        let b = stft(&noise(2, 5000, 5), &p).unwrap().scaled(0.3);
        let lhs = istft(&a.try_add(&b).unwrap(), &p).unwrap();
        let rhs = istft(&a, &p)
            .unwrap()
            .try_add(&istft(&b, &p).unwrap())
            .unwrap();
        let diff = (lhs.samples() - rhs.samples())
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()));
        assert!(diff < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn round_trip_any_length(len in 960usize..6000, seed in any::<u64>()) {
            let p = StftParams::default();
            let x = noise(1, len, seed);
            let y = istft(&stft(&x, &p).unwrap(), &p).unwrap();
            prop_assert!(rel_err(&x, &y) < 1e-10);
        }

        #[test]
        fn stft_is_linear(seed in any::<u64>(), g in -3.0f64..3.0) {
            let p = StftParams::default();
            let a = noise(2, 3000, seed);
            let b = noise(2, 3000, seed.wrapping_add(1));
            let sum = a.try_add(&b.scaled(g)).unwrap();
            let lhs = stft(&sum, &p).unwrap();
            let rhs = stft(&a, &p).unwrap().try_add(&stft(&b, &p).unwrap().scaled(g)).unwrap();
            let diff = (&lhs.data - &rhs.data).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            prop_assert!(diff < 1e-10);
        }
    }
}
