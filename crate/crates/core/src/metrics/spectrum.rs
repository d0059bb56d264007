use crate::audio::StftTensor;
use crate::error::{Error, Result};

/// Welch-style PSD of one channel: mean `|X[k,l]|²` over frames.
pub fn power_spectrum(t: &StftTensor, channel: usize) -> Result<Vec<f64>> {
    if channel >= t.channels() {
        return Err(Error::invalid(format!("channel {channel} out of range")));
    }
    let frames = t.frames() as f64;
    Ok((0..t.bins())
        .map(|l| (0..t.frames()).map(|k| t.data[(k, l, channel)].norm_sqr()).sum::<f64>() / frames)
        .collect())
}

/// Magnitude-squared coherence between channels 0 and 1, per bin. Bins
/// where either channel is silent report 0.
pub fn interaural_coherence(t: &StftTensor) -> Result<Vec<f64>> {
    if t.channels() != 2 {
        return Err(Error::invalid("coherence needs exactly two channels"));
    }
    Ok((0..t.bins())
        .map(|l| {
            let (mut s00, mut s11) = (0.0, 0.0);
            let mut s01 = num_complex::Complex64::default();
            for k in 0..t.frames() {
                let [a, b] = t.pair(k, l);
                s00 += a.norm_sqr();
                s11 += b.norm_sqr();
                s01 += a * b.conj();
            }
            if s00 == 0.0 || s11 == 0.0 {
                0.0
            } else {
                s01.norm_sqr() / (s00 * s11)
            }
        })
        .collect())
}

/// `max(signal − noise, 1e-12·max(signal))` per bin.
pub fn spectral_subtract(signal_psd: &[f64], noise_psd: &[f64]) -> Result<Vec<f64>> {
    if signal_psd.len() != noise_psd.len() {
        return Err(Error::ShapeMismatch(format!(
            "PSD grids differ: {} vs {} bins",
            signal_psd.len(),
            noise_psd.len()
        )));
    }
    let floor = 1e-12 * signal_psd.iter().cloned().fold(0.0, f64::max);
    Ok(signal_psd
        .iter()
        .zip(noise_psd)
        .map(|(s, n)| (s - n).max(floor))
        .collect())
}
