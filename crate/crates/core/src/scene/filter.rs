//! FIR filters with explicit lag offsets, and the building blocks of the
//! per-ear transfer chain.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Half-width of the windowed-sinc fractional delay (31 taps in total).
pub const FRAC_DELAY_HALF: isize = 15;

/// FIR `y[n] = Σ taps[i]·x[n − first_lag − i]`. Lags may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct LagFilter {
    pub first_lag: isize,
    pub taps: Vec<f64>,
}

impl LagFilter {
    pub fn impulse(lag: isize, gain: f64) -> Self {
        Self {
            first_lag: lag,
            taps: vec![gain],
        }
    }

    pub fn last_lag(&self) -> isize {
        self.first_lag + self.taps.len() as isize - 1
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.first_lag == other.first_lag && self.taps.len() == other.taps.len()
    }

    /// Full linear convolution of two lag filters.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut taps = vec![0.0; self.taps.len() + other.taps.len() - 1];
        for (i, a) in self.taps.iter().enumerate() {
            for (j, b) in other.taps.iter().enumerate() {
                taps[i + j] += a * b;
            }
        }
        Self {
            first_lag: self.first_lag + other.first_lag,
            taps,
        }
    }

    /// DTFT sampled at `k·fs/n_fft` for `k = 0..=n_fft/2`.
    pub fn response(&self, n_fft: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); n_fft];
        for (i, &t) in self.taps.iter().enumerate() {
            let m = (self.first_lag + i as isize).rem_euclid(n_fft as isize) as usize;
            buf[m] += t;
        }
        FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
        buf.truncate(n_fft / 2 + 1);
        buf
    }

    /// `y[n]` for `n` in `range`, with `x` taken as zero outside its support.
    pub fn apply_at(&self, x: &[f64], n: usize) -> f64 {
        let mut acc = 0.0;
        for (i, &t) in self.taps.iter().enumerate() {
            let idx = n as isize - self.first_lag - i as isize;
            if idx >= 0 && (idx as usize) < x.len() {
                acc += t * x[idx as usize];
            }
        }
        acc
    }

    /// Filters all of `x`, keeping the first `x.len()` output samples.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        fft_filter(x, self)
    }
}

/// Blackman-windowed sinc delaying by `delay` samples (any real value).
pub fn fractional_delay(delay: f64) -> LagFilter {
    let base = delay.floor();
    let mu = delay - base;
    let half = FRAC_DELAY_HALF as f64 + 1.0;
    let mut taps: Vec<f64> = (-FRAC_DELAY_HALF..=FRAC_DELAY_HALF)
        .map(|j| {
            let x = j as f64 - mu;
            let sinc = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
            let w = 0.42 + 0.5 * (PI * x / half).cos() + 0.08 * (2.0 * PI * x / half).cos();
            sinc * w
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= dc);
    LagFilter {
        first_lag: base as isize - FRAC_DELAY_HALF,
        taps,
    }
}

/// Zero-phase-centred FIR from a frequency response sampled at
/// `k·fs/n` for `k = 0..=n/2`. Lags run from `-n/2` to `n/2 - 1`.
pub fn frequency_sampled(response: &[Complex64]) -> LagFilter {
    let n = 2 * (response.len() - 1);
    let mut buf = vec![Complex64::default(); n];
    buf[..response.len()].copy_from_slice(response);
    buf[n / 2] = Complex64::new(response[n / 2].re, 0.0);
    buf[0] = Complex64::new(response[0].re, 0.0);
    for k in 1..n / 2 {
        buf[n - k] = response[k].conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let half = n / 2;
    let taps = (0..n)
        .map(|i| buf[(i + half) % n].re / n as f64)
        .collect();
    LagFilter {
        first_lag: -(half as isize),
        taps,
    }
}

/// Linear convolution via one large FFT; output truncated to `x.len()`.
pub fn fft_filter(x: &[f64], h: &LagFilter) -> Vec<f64> {
    let len = x.len();
    if len == 0 {
        return Vec::new();
    }
    let n = (len + h.taps.len()).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut xs: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    xs.resize(n, Complex64::default());
    let mut hs: Vec<Complex64> = h.taps.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    hs.resize(n, Complex64::default());
    fwd.process(&mut xs);
    fwd.process(&mut hs);
    for (a, b) in xs.iter_mut().zip(&hs) {
        *a *= b;
    }
    inv.process(&mut xs);
    // xs[j] now holds Σ taps[i]·x[j − i]; output index n' = j + first_lag.
    let scale = 1.0 / n as f64;
    (0..len)
        .map(|out| {
            let j = out as isize - h.first_lag;
            if j >= 0 && (j as usize) < len + h.taps.len() - 1 {
                xs[j as usize].re * scale
            } else {
                0.0
            }
        })
        .collect()
}
