//! Noise covariance training and the recursive whitened covariance tracker.

use crate::audio::{StftParams, StftTensor};
use crate::error::{Error, Result};

use super::hermitian::{factor_hermitian_2x2, principal_eigvec_2x2, CVec2, Hermitian2, LowerTri2};

/// Fewest noise-only frames accepted for training.
pub const MIN_TRAINING_FRAMES: usize = 10;

/// Smallest eigenvalue kept in a trained noise SCM, relative to `trace / M`.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// Why a trained bin had to be modified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloorReason {
    /// The smallest eigenvalue was below the floor (e.g. identical channels).
    RankDeficient,
    /// The bin carried no energy at all.
    ZeroEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinScm {
    pub matrix: Hermitian2,
    pub factor: LowerTri2,
    pub inverse: Hermitian2,
}

impl BinScm {
    pub fn new(matrix: Hermitian2, bin: usize) -> Result<Self> {
        let factor = factor_hermitian_2x2(&matrix, bin)?;
        let inverse = matrix.inverse().ok_or(Error::Singular { bin })?;
        Ok(Self {
            matrix,
            factor,
            inverse,
        })
    }
}

/// Time-invariant per-bin noise SCM `R_v[l]` with cached Cholesky factor and inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseScm {
    bins: Vec<BinScm>,
    floored: Vec<(usize, FloorReason)>,
    params: Option<(StftParams, u32)>,
}

impl NoiseScm {
    /// Wraps externally supplied matrices; each must already be positive definite.
    pub fn from_matrices(matrices: impl IntoIterator<Item = Hermitian2>) -> Result<Self> {
        let bins = matrices
            .into_iter()
            .enumerate()
            .map(|(l, m)| BinScm::new(m, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            bins,
            floored: Vec::new(),
            params: None,
        })
    }

    pub fn identity(bins: usize) -> Self {
        Self::from_matrices(std::iter::repeat_n(Hermitian2::IDENTITY, bins))
            .expect("identity is positive definite")
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bin(&self, l: usize) -> &BinScm {
        &self.bins[l]
    }

    pub fn matrix(&self, l: usize) -> &Hermitian2 {
        &self.bins[l].matrix
    }

    pub fn factor(&self, l: usize) -> &LowerTri2 {
        &self.bins[l].factor
    }

    /// Bins whose trained estimate was floored, with the reason.
    pub fn floored(&self) -> &[(usize, FloorReason)] {
        &self.floored
    }

    /// STFT layout and sample rate the estimate was trained on, if known.
    pub fn trained_on(&self) -> Option<(StftParams, u32)> {
        self.params
    }
}

/// Raw frame average of `v·v^H` for every bin; no flooring.
pub fn average_outer_products(noise: &StftTensor) -> Vec<Hermitian2> {
    let frames = noise.frames();
    (0..noise.bins())
        .map(|l| {
            let mut acc = Hermitian2::ZERO;
            for k in 0..frames {
                acc = acc + Hermitian2::outer(&noise.pair(k, l));
            }
            acc.scale(1.0 / frames as f64)
        })
        .collect()
}

/// Clamps the smaller eigenvalue of `r` up to `floor`, leaving the principal
/// eigenpair untouched.
fn floor_eigenvalue(r: &Hermitian2, floor: f64) -> Hermitian2 {
    let (_, lmin) = r.eigenvalues();
    let q = principal_eigvec_2x2(r, None).vector;
    // I - q·q^H projects onto the minor eigenvector.
    let qq = Hermitian2::outer(&q);
    let minor = Hermitian2::new(1.0 - qq.d0, 1.0 - qq.d1, -qq.off);
    *r + minor.scale(floor - lmin)
}

/// Trains `R_v[l]` as the frame average of `v[k,l]·v[k,l]^H` over noise-only frames.
pub fn estimate_noise_scm(noise: &StftTensor) -> Result<NoiseScm> {
    if noise.channels() != 2 {
        return Err(Error::invalid(format!(
            "noise SCM needs 2 channels, got {}",
            noise.channels()
        )));
    }
    if noise.frames() < MIN_TRAINING_FRAMES {
        return Err(Error::invalid(format!(
            "noise SCM needs at least {MIN_TRAINING_FRAMES} frames, got {}",
            noise.frames()
        )));
    }

    let raw = average_outer_products(noise);
    let mean_trace = raw.iter().map(Hermitian2::trace).sum::<f64>() / raw.len() as f64;
    let mut floored = Vec::new();
    let mut bins = Vec::with_capacity(raw.len());
    for (l, r) in raw.into_iter().enumerate() {
        let trace = r.trace();
        let r = if trace <= 0.0 {
            floored.push((l, FloorReason::ZeroEnergy));
            let level = (EIGEN_FLOOR * mean_trace / 2.0).max(1e-30);
            Hermitian2::IDENTITY.scale(level)
        } else {
            let floor = EIGEN_FLOOR * trace / 2.0;
            if r.min_eigenvalue() < floor {
                floored.push((l, FloorReason::RankDeficient));
                floor_eigenvalue(&r, floor)
            } else {
                r
            }
        };
        bins.push(BinScm::new(r, l)?);
    }
    Ok(NoiseScm {
        bins,
        floored,
        params: Some((noise.params, noise.sample_rate)),
    })
}

/// `y = L^{-1}·x` for bin `l`.
pub fn whiten_frame(x: &CVec2, scm: &NoiseScm, l: usize) -> Result<CVec2> {
    let bin = scm
        .bins
        .get(l)
        .ok_or_else(|| Error::invalid(format!("no noise factor for bin {l}")))?;
    Ok(bin.factor.solve(x))
}

/// Forgetting factor for exponential averaging with time constant `tau_s`
/// at frame spacing `hop_s`.
pub fn alpha_from_tau(tau_s: f64, hop_s: f64) -> Result<f64> {
    if !(tau_s > 0.0) || !(hop_s > 0.0) {
        return Err(Error::invalid("tau and hop must be positive"));
    }
    Ok((-hop_s / tau_s).exp())
}

/// `α·R_prev + (1−α)·y·y^H`.
pub fn scm_update(prev: &Hermitian2, y: &CVec2, alpha: f64) -> Result<Hermitian2> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("forgetting factor {alpha} not in (0, 1]")));
    }
    Ok(prev.scale(alpha) + Hermitian2::outer(y).scale(1.0 - alpha))
}

/// Per-bin recursive estimate of the whitened mixture SCM `R_y[k,l]`.
#[derive(Debug, Clone)]
pub struct WhitenedScm {
    alpha: f64,
    bins: Vec<Option<Hermitian2>>,
}

impl WhitenedScm {
    pub fn new(bins: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("forgetting factor {alpha} not in (0, 1]")));
        }
        Ok(Self {
            alpha,
            bins: vec![None; bins],
        })
    }

    pub fn from_tau(bins: usize, tau_s: f64, hop_s: f64) -> Result<Self> {
        Self::new(bins, alpha_from_tau(tau_s, hop_s)?)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Folds in a new whitened observation. The first observation of a bin
    /// initializes it to `y·y^H`.
    pub fn update(&mut self, l: usize, y: &CVec2) -> Hermitian2 {
        let next = match &self.bins[l] {
            None => Hermitian2::outer(y),
            Some(prev) => {
                prev.scale(self.alpha) + Hermitian2::outer(y).scale(1.0 - self.alpha)
            }
        };
        self.bins[l] = Some(next);
        next
    }

    pub fn get(&self, l: usize) -> Option<&Hermitian2> {
        self.bins[l].as_ref()
    }
}
