//! RIFF/WAVE reading and writing for PCM16, PCM24 and IEEE float32.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::AudioBuffer;
use crate::error::{Error, Result};

/// On-disk sample encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitDepth {
    Pcm16,
    Pcm24,
    #[default]
    Float32,
}

impl BitDepth {
    fn spec(self, channels: u16, sample_rate: u32) -> WavSpec {
        let (bits_per_sample, sample_format) = match self {
            BitDepth::Pcm16 => (16, SampleFormat::Int),
            BitDepth::Pcm24 => (24, SampleFormat::Int),
            BitDepth::Float32 => (32, SampleFormat::Float),
        };
        WavSpec {
            channels,
            sample_rate,
            bits_per_sample,
            sample_format,
        }
    }
}

fn wav_err(path: &Path) -> impl FnOnce(hound::Error) -> Error + '_ {
    move |source| match source {
        hound::Error::IoError(e) => Error::io(path, e),
        source => Error::Wav {
            path: path.to_path_buf(),
            source,
        },
    }
}

/// Reads a WAV file into a buffer with samples normalized to `[-1, 1]`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(wav_err(path))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::UnsupportedFormat(format!(
            "{}: zero channels",
            path.display()
        )));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) | (SampleFormat::Int, 24) => {
            let scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()
                .map_err(wav_err(path))?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(wav_err(path))?,
        (format, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: {bits}-bit {format:?}",
                path.display()
            )))
        }
    };

    if interleaved.len() % channels != 0 {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            reason: "sample count is not a multiple of the channel count".into(),
        });
    }
    let frames = interleaved.len() / channels;
    let samples = Array2::from_shape_fn((channels, frames), |(c, i)| interleaved[i * channels + c]);
    AudioBuffer::new(samples, spec.sample_rate).map_err(|e| match e {
        Error::NonFinite(_) => Error::Malformed {
            path: path.to_path_buf(),
            reason: "non-finite float sample".into(),
        },
        other => other,
    })
}

/// Writes `buffer` as a WAV file. Samples outside `[-1, 1]` are an error;
/// nothing is clipped.
pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let samples = buffer.samples();
    for ((channel, index), &value) in samples.indexed_iter() {
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange {
                channel,
                index,
                value,
            });
        }
    }

    let channels = u16::try_from(buffer.channels())
        .map_err(|_| Error::invalid("too many channels for a wav file"))?;
    let spec = depth.spec(channels, buffer.sample_rate());
    let mut writer = WavWriter::create(path, spec).map_err(wav_err(path))?;
    for i in 0..buffer.len() {
        for c in 0..buffer.channels() {
            let v = samples[(c, i)];
            match depth {
                BitDepth::Pcm16 => {
                    let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(q)
                }
                BitDepth::Pcm24 => {
                    let q = (v * 8_388_608.0).round().clamp(-8_388_608.0, 8_388_607.0) as i32;
                    writer.write_sample(q)
                }
                BitDepth::Float32 => writer.write_sample(v as f32),
            }
            .map_err(wav_err(path))?;
        }
    }
    writer.finalize().map_err(wav_err(path))
}
