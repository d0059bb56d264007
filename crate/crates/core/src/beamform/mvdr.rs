use crate::error::{Error, Result};

use super::hermitian::{dot, CVec2};
use super::scm::NoiseScm;

/// MVDR weights `R_v^{-1}·h / (h^H·R_v^{-1}·h)` for bin `l`. No diagonal loading.
pub fn mvdr_weights(scm: &NoiseScm, l: usize, h: &CVec2) -> Result<CVec2> {
    if !(h[0].is_finite() && h[1].is_finite()) {
        return Err(Error::NonFinite("relative transfer function"));
    }
    if l >= scm.len() {
        return Err(Error::invalid(format!("no noise SCM for bin {l}")));
    }
    let rinv_h = scm.bin(l).inverse.mul_vec(h);
    // Keep the complex denominator: conj(w)·h then divides to one exactly
    // up to a single rounding, whatever the rounding in R^{-1}·h.
    let denom = dot(h, &rinv_h);
    if !(denom.re > 0.0) || !denom.is_finite() {
        return Err(Error::Singular { bin: l });
    }
    Ok([rinv_h[0] / denom, rinv_h[1] / denom])
}
