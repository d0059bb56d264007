use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scene::TransferFunctionTrack;

/// Per-bin mean of `‖ĥ − h‖ / ‖h‖` over frames centred at or after
/// `burn_in_s`, for bins with centre frequency in `[lo_hz, hi_hz]`.
/// Returns `(bin_hz, error)` pairs.
pub fn rtf_errors(
    estimate: &Array3<Complex64>,
    truth: &TransferFunctionTrack,
    reference: usize,
    burn_in_s: f64,
    lo_hz: f64,
    hi_hz: f64,
) -> Result<Vec<(f64, f64)>> {
    if estimate.dim() != truth.atf.dim() {
        return Err(Error::ShapeMismatch(format!(
            "estimate {:?} vs ground truth {:?}",
            estimate.dim(),
            truth.atf.dim()
        )));
    }
    let h = truth.rtf(reference)?;
    let start = burn_in_s * truth.sample_rate as f64;
    let frames: Vec<usize> = (0..truth.frames())
        .filter(|&k| truth.params.frame_center(k) >= start)
        .collect();
    if frames.is_empty() {
        return Err(Error::invalid(format!("burn-in of {burn_in_s} s leaves no frames")));
    }
    let out: Vec<(f64, f64)> = (0..truth.bins())
        .map(|l| (truth.params.bin_hz(l, truth.sample_rate), l))
        .filter(|(f, _)| *f >= lo_hz && *f <= hi_hz)
        .map(|(f, l)| {
            let total: f64 = frames
                .iter()
                .map(|&k| {
                    let (mut num, mut den) = (0.0, 0.0);
                    for m in 0..2 {
                        num += (estimate[(k, l, m)] - h[(k, l, m)]).norm_sqr();
                        den += h[(k, l, m)].norm_sqr();
                    }
                    (num / den).sqrt()
                })
                .sum();
            (f, total / frames.len() as f64)
        })
        .collect();
    if out.is_empty() {
        return Err(Error::invalid(format!("no bins between {lo_hz} and {hi_hz} Hz")));
    }
    Ok(out)
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
