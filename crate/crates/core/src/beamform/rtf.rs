use num_complex::Complex64;

use super::hermitian::{norm_sqr, CVec2, LowerTri2};

/// `|(L·q)[ref]|` below this fraction of `‖L·q‖` is treated as a zero denominator.
pub const DENOMINATOR_GUARD: f64 = 1e-10;

/// Relative transfer function estimate for one bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtfEstimate {
    pub h: CVec2,
    pub reference: usize,
    /// The normalization denominator vanished and `h` is the held previous value.
    pub held: bool,
}

/// Covariance-whitening RTF: de-whitens the principal eigenvector `q` with
/// the noise factor and normalizes to the reference channel.
///
/// If the reference entry of `L·q` is numerically zero the previous estimate
/// is held (or the unit vector of the reference channel when there is none).
pub fn cw_rtf(
    factor: &LowerTri2,
    q: &CVec2,
    reference: usize,
    previous: Option<&CVec2>,
) -> RtfEstimate {
    let v = factor.mul_vec(q);
    let denom = v[reference];
    if !(denom.norm() > DENOMINATOR_GUARD * norm_sqr(&v).sqrt()) {
        let mut fallback = [Complex64::new(0.0, 0.0); 2];
        fallback[reference] = Complex64::new(1.0, 0.0);
        return RtfEstimate {
            h: previous.copied().unwrap_or(fallback),
            reference,
            held: true,
        };
    }
    let mut h = [v[0] / denom, v[1] / denom];
    h[reference] = Complex64::new(1.0, 0.0);
    RtfEstimate {
        h,
        reference,
        held: false,
    }
}
