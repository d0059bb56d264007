//! MVDR beamforming with covariance-whitening RTF estimation.
//!
//! The noise SCM is trained offline and held fixed; only the relative
//! transfer function is adapted, frame by frame, from the principal
//! eigenvector of a recursively averaged whitened mixture SCM.

pub mod hermitian;
mod mvdr;
mod rtf;
mod run;
mod scm;

pub use hermitian::{factor_hermitian_2x2, principal_eigvec_2x2, CVec2, Eigen2, Hermitian2, LowerTri2};
pub use mvdr::mvdr_weights;
pub use rtf::{cw_rtf, RtfEstimate, DENOMINATOR_GUARD};
pub use run::{
    identity_run, process_mvdr_cw, process_mvdr_fixed_rtf, shadow_apply, BeamConfig, BeamRun,
    RunReport,
};
pub use scm::{
    alpha_from_tau, average_outer_products, estimate_noise_scm, scm_update, whiten_frame, BinScm,
    FloorReason, NoiseScm, WhitenedScm, EIGEN_FLOOR, MIN_TRAINING_FRAMES,
};
