use num_complex::Complex64;
use rustfft::FftPlanner;

use super::bands::Band;
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

fn spectrum(x: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::default());
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.truncate(n / 2 + 1);
    buf
}

/// Interaural level difference `L/R` in dB per frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct IldCurve {
    pub theta_deg: f64,
    pub freq_hz: Vec<f64>,
    pub ild_db: Vec<f64>,
    left_power: Vec<f64>,
    right_power: Vec<f64>,
}

impl IldCurve {
    /// Band ILD from power summed over each band.
    pub fn banded(&self, bands: &[Band]) -> Vec<(f64, f64)> {
        bands
            .iter()
            .filter_map(|b| {
                let (mut l, mut r) = (0.0, 0.0);
                for ((&f, &pl), &pr) in self.freq_hz.iter().zip(&self.left_power).zip(&self.right_power) {
                    if f >= b.lo_hz && f < b.hi_hz {
                        l += pl;
                        r += pr;
                    }
                }
                (l > 0.0 && r > 0.0).then(|| (b.center_hz, 10.0 * (l / r).log10()))
            })
            .collect()
    }
}

/// ILD of a two-channel probe render, optionally relative to a reference
/// render (e.g. the same probe at 0°). Frequencies with a zero magnitude in
/// any spectrum are dropped.
pub fn ild_curve(probe: &AudioBuffer, reference: Option<&AudioBuffer>, theta_deg: f64) -> Result<IldCurve> {
    if probe.channels() != 2 || probe.is_empty() {
        return Err(Error::invalid("ILD needs a non-empty two-channel render"));
    }
    if let Some(r) = reference {
        if r.channels() != 2 || r.len() != probe.len() {
            return Err(Error::ShapeMismatch("reference render differs from probe".into()));
        }
    }
    let n = probe.len().next_power_of_two();
    let fs = probe.sample_rate() as f64;
    let spec = |b: &AudioBuffer, ch: usize| spectrum(&b.channel(ch).to_vec(), n);
    let (pl, pr) = (spec(probe, 0), spec(probe, 1));
    let refs = reference.map(|r| (spec(r, 0), spec(r, 1)));
    let mut curve = IldCurve {
        theta_deg,
        freq_hz: Vec::new(),
        ild_db: Vec::new(),
        left_power: Vec::new(),
        right_power: Vec::new(),
    };
    for k in 0..pl.len() {
        let (mut l, mut r) = (pl[k].norm_sqr(), pr[k].norm_sqr());
        if let Some((rl, rr)) = &refs {
            let (a, b) = (rl[k].norm_sqr(), rr[k].norm_sqr());
            if a == 0.0 || b == 0.0 {
                continue;
            }
            l /= a;
            r /= b;
        }
        if l == 0.0 || r == 0.0 {
            continue;
        }
        curve.freq_hz.push(k as f64 * fs / n as f64);
        curve.ild_db.push(10.0 * (l / r).log10());
        curve.left_power.push(l);
        curve.right_power.push(r);
    }
    if curve.freq_hz.is_empty() {
        return Err(Error::invalid("probe spectrum is empty"));
    }
    Ok(curve)
}

/// Lag of the cross-correlation peak between the ears, refined by a
/// 3-point parabolic fit. Positive when the right ear lags the left.
pub fn itd_from_renders(left: &[f64], right: &[f64], sample_rate: u32) -> Result<f64> {
    if left.len() != right.len() || left.is_empty() {
        return Err(Error::ShapeMismatch("ear signals must be non-empty and equally long".into()));
    }
    let len = left.len();
    let n = (2 * len).next_power_of_two();
    let mut l: Vec<Complex64> = left.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut r: Vec<Complex64> = right.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    l.resize(n, Complex64::default());
    r.resize(n, Complex64::default());
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut l);
    planner.plan_fft_forward(n).process(&mut r);
    // c[τ] = Σ left[t]·right[t + τ]
    let mut c: Vec<Complex64> = l.iter().zip(&r).map(|(a, b)| a.conj() * b).collect();
    planner.plan_fft_inverse(n).process(&mut c);
    let at = |lag: isize| c[lag.rem_euclid(n as isize) as usize].re;
    let max_lag = len as isize - 1;
    let (best, peak) = (-max_lag..=max_lag)
        .map(|lag| (lag, at(lag)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    if !(peak > 0.0) || (-max_lag..=max_lag).all(|lag| at(lag) == peak) {
        return Err(Error::invalid("cross-correlation has no distinct peak"));
    }
    let mut offset = 0.0;
    if best > -max_lag && best < max_lag {
        let (y0, y1, y2) = (at(best - 1), peak, at(best + 1));
        let denom = y0 - 2.0 * y1 + y2;
        if denom != 0.0 {
            offset = 0.5 * (y0 - y2) / denom;
        }
    }
    Ok((best as f64 + offset) / sample_rate as f64)
}
