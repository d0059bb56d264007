//! Closed-form kernels for 2×2 Hermitian matrices and complex 2-vectors.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex 2-vector (one STFT bin of a binaural frame).
pub type CVec2 = [Complex64; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn dot(a: &CVec2, b: &CVec2) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn norm_sqr(v: &CVec2) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// 2×2 Hermitian matrix `[[d0, conj(off)], [off, d1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hermitian2 {
    pub d0: f64,
    pub d1: f64,
    /// Lower off-diagonal element (row 1, column 0).
    pub off: Complex64,
}

impl Hermitian2 {
    pub const ZERO: Self = Self {
        d0: 0.0,
        d1: 0.0,
        off: ZERO,
    };

    pub const IDENTITY: Self = Self {
        d0: 1.0,
        d1: 1.0,
        off: ZERO,
    };

    pub fn new(d0: f64, d1: f64, off: Complex64) -> Self {
        Self { d0, d1, off }
    }

    pub fn diag(d0: f64, d1: f64) -> Self {
        Self::new(d0, d1, ZERO)
    }

    /// Builds from a full matrix, averaging the two off-diagonal entries.
    pub fn from_rows(m: [[Complex64; 2]; 2]) -> Self {
        Self {
            d0: m[0][0].re,
            d1: m[1][1].re,
            off: (m[1][0] + m[0][1].conj()) * 0.5,
        }
    }

    /// `v·v^H`.
    pub fn outer(v: &CVec2) -> Self {
        Self {
            d0: v[0].norm_sqr(),
            d1: v[1].norm_sqr(),
            off: v[1] * v[0].conj(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        match (r, c) {
            (0, 0) => self.d0.into(),
            (1, 1) => self.d1.into(),
            (1, 0) => self.off,
            (0, 1) => self.off.conj(),
            _ => panic!("index ({r}, {c}) out of range for 2x2"),
        }
    }

    pub fn rows(&self) -> [[Complex64; 2]; 2] {
        [[self.get(0, 0), self.get(0, 1)], [self.get(1, 0), self.get(1, 1)]]
    }

    pub fn trace(&self) -> f64 {
        self.d0 + self.d1
    }

    pub fn det(&self) -> f64 {
        self.d0 * self.d1 - self.off.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.d0.is_finite() && self.d1.is_finite() && self.off.is_finite()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.d0 * s, self.d1 * s, self.off * s)
    }

    pub fn mul_vec(&self, v: &CVec2) -> CVec2 {
        [
            self.d0 * v[0] + self.off.conj() * v[1],
            self.off * v[0] + self.d1 * v[1],
        ]
    }

    /// `v^H·R·v`, real for Hermitian `R`.
    pub fn quad_form(&self, v: &CVec2) -> f64 {
        dot(v, &self.mul_vec(v)).re
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.d0 + self.d1);
        let half_diff = 0.5 * (self.d0 - self.d1);
        let disc = half_diff.hypot(self.off.norm());
        (mean + disc, mean - disc)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().1
    }

    /// Explicit inverse via the adjugate.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = 1.0 / det;
        Some(Self::new(self.d1 * inv, self.d0 * inv, -self.off * inv))
    }
}

impl Add for Hermitian2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.d0 + o.d0, self.d1 + o.d1, self.off + o.off)
    }
}

impl Mul<f64> for Hermitian2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

/// Lower-triangular factor `[[l00, 0], [l10, l11]]` with real positive diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerTri2 {
    pub l00: f64,
    pub l10: Complex64,
    pub l11: f64,
}

impl LowerTri2 {
    pub const IDENTITY: Self = Self {
        l00: 1.0,
        l10: ZERO,
        l11: 1.0,
    };

    pub fn mul_vec(&self, v: &CVec2) -> CVec2 {
        [self.l00 * v[0], self.l10 * v[0] + self.l11 * v[1]]
    }

    /// `L^{-1}·v` by forward substitution.
    pub fn solve(&self, v: &CVec2) -> CVec2 {
        let y0 = v[0] / self.l00;
        let y1 = (v[1] - self.l10 * y0) / self.l11;
        [y0, y1]
    }

    /// `L^{-H}·v` by back substitution.
    pub fn solve_adjoint(&self, v: &CVec2) -> CVec2 {
        let y1 = v[1] / self.l11;
        let y0 = (v[0] - self.l10.conj() * y1) / self.l00;
        [y0, y1]
    }

    /// `L·L^H`.
    pub fn gram(&self) -> Hermitian2 {
        Hermitian2::new(
            self.l00 * self.l00,
            self.l10.norm_sqr() + self.l11 * self.l11,
            self.l10 * self.l00,
        )
    }
}

/// Cholesky factor `L` with `L·L^H = R`.
///
/// `bin` only labels the error.
pub fn factor_hermitian_2x2(r: &Hermitian2, bin: usize) -> Result<LowerTri2> {
    if !r.is_finite() {
        return Err(Error::NonFinite("covariance matrix"));
    }
    let floor = f64::EPSILON * r.trace().abs().max(f64::MIN_POSITIVE);
    if r.d0 <= floor {
        return Err(Error::NotPositiveDefinite { bin, pivot: r.d0 });
    }
    let l00 = r.d0.sqrt();
    let l10 = r.off / l00;
    let pivot = r.d1 - l10.norm_sqr();
    if pivot <= floor {
        return Err(Error::NotPositiveDefinite { bin, pivot });
    }
    Ok(LowerTri2 {
        l00,
        l10,
        l11: pivot.sqrt(),
    })
}

/// Principal eigenpair of a Hermitian 2×2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2 {
    /// Unit-norm eigenvector of the larger eigenvalue. Its first nonzero
    /// component is real and positive.
    pub vector: CVec2,
    pub value: f64,
    /// Eigenvalues were (numerically) equal, so `vector` came from the tie-break.
    pub degenerate: bool,
}

/// Relative gap below which the two eigenvalues are treated as equal.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Closed-form principal eigenvector from the characteristic polynomial.
///
/// When both eigenvalues coincide every vector is an eigenvector; `prefer`
/// (normally the previous frame's estimate) is then returned, or `e1` if none.
pub fn principal_eigvec_2x2(r: &Hermitian2, prefer: Option<&CVec2>) -> Eigen2 {
    let (lmax, lmin) = r.eigenvalues();
    let scale = lmax.abs().max(lmin.abs());
    if lmax - lmin <= DEGENERATE_TOL * scale || scale == 0.0 {
        let vector = prefer
            .filter(|p| norm_sqr(p) > 0.0)
            .map(|p| normalize_phase(*p))
            .unwrap_or([Complex64::new(1.0, 0.0), ZERO]);
        return Eigen2 {
            vector,
            value: lmax,
            degenerate: true,
        };
    }

    // (R - λI)v = 0 has two equivalent row solutions; use the one whose
    // leading entry is the larger gap to avoid cancellation.
    let v = if r.d0 >= r.d1 {
        [Complex64::new(lmax - r.d1, 0.0), r.off]
    } else {
        [r.off.conj(), Complex64::new(lmax - r.d0, 0.0)]
    };
    Eigen2 {
        vector: normalize_phase(v),
        value: lmax,
        degenerate: false,
    }
}

/// Unit norm, first nonzero component real positive.
pub fn normalize_phase(v: CVec2) -> CVec2 {
    let n = norm_sqr(&v).sqrt();
    let lead = if v[0].norm() > 0.0 { v[0] } else { v[1] };
    if n == 0.0 || lead.norm() == 0.0 {
        return v;
    }
    let rot = lead.conj() / (lead.norm() * n);
    let mut out = [v[0] * rot, v[1] * rot];
    if v[0].norm() > 0.0 {
        out[0] = Complex64::new(out[0].re, 0.0);
    } else {
        out[1] = Complex64::new(out[1].re, 0.0);
    }
    out
}
