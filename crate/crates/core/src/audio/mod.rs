//! Time-domain buffers, WAV I/O and the STFT analysis/synthesis pair.

mod buffer;
pub mod stft;
pub mod wav;

pub use buffer::{AudioBuffer, DEFAULT_SAMPLE_RATE};
pub use stft::{istft, stft, StftParams, StftTensor};
pub use wav::{read_wav, write_wav, BitDepth};
