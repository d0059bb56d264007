//! Binaural scene simulation: a rotating directional talker and corner
//! noise loudspeakers recorded at the two ears of a spherical head.

mod config;
mod experiment;
pub mod filter;
mod head;
mod render;
mod rng;

pub use config::{
    AmbientConfig, DirectivityModel, HeadConfig, NoiseSource, ReverbConfig, SceneConfig, TalkerConfig, Trajectory,
    TrajectoryKind, MAX_SPEED_REV_S,
};
pub use experiment::{simulate_experiment, talker_source, RecordingSet};
pub use head::{head_shadow_gain, itd_seconds, orientation_at, wrap_deg, Ear};
pub use render::{render_diffuse_noise, render_moving_talker, render_static_source, TransferFunctionTrack};
pub use rng::{substream, white_noise};
