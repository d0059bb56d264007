//! Binaural MVDR beamforming with covariance-whitening RTF estimation,
//! evaluated on a simulated rotating talker.

pub mod audio;
pub mod beamform;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod scene;

pub use audio::{AudioBuffer, StftParams, StftTensor};
pub use error::{Error, Result};
pub use scene::SceneConfig;
