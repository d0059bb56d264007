//! Objective measurements: SNR and per-band SNR gain, mixing accuracy,
//! take repeatability, interaural cues and spectral subtraction.
//!
//! Every dB quantity that would be −∞ is reported as [`SENTINEL_DB`].

mod bands;
mod cues;
mod export;
mod level;
mod spectrum;
mod tracking;

pub use bands::{octave_bands, snr_gain_per_band, third_octave_bands, Band, SnrGainCurve, BURN_IN_S};
pub use cues::{ild_curve, itd_from_renders, IldCurve};
pub use export::{write_gain_csv, write_ild_csv, write_itd_csv, write_nmse_csv, write_repeatability_csv};
pub use level::{
    nmse_samplewise, repeatability_error, scale_to_snr, snr_db, snr_db_per_channel, ChannelDb,
    Repeatability,
};
pub use spectrum::{interaural_coherence, power_spectrum, spectral_subtract};
pub use tracking::{median, rtf_errors};

/// Stand-in for −∞ dB.
pub const SENTINEL_DB: f64 = -300.0;

/// `10·log10(ratio)`, clamped below at [`SENTINEL_DB`].
pub fn db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (10.0 * ratio.log10()).max(SENTINEL_DB)
    } else {
        SENTINEL_DB
    }
}
