//! Lossless little-endian storage for the intermediates passed between stages.
//!
//! Complex tensors: magic `HTCT`, version `u32`, three `u64` dimensions, then
//! `(re, im)` pairs of `f64` in row-major order.
//! Audio: magic `HTAB`, version `u32`, sample rate `u32`, channels and
//! length as `u64`, then `f64` samples channel by channel.

use std::fs;
use std::path::Path;

use ndarray::Array3;
use num_complex::Complex64;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"HTCT";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 3 * 8;

pub fn encode_tensor(t: &Array3<Complex64>) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + t.len() * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    let (a, b, c) = t.dim();
    for d in [a, b, c] {
        buf.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for z in t.iter() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    buf
}

pub fn decode_tensor(bytes: &[u8], path: &Path) -> Result<Array3<Complex64>> {
    let bad = |reason: String| Error::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(bad("missing tensor header".into()));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported tensor version {version}")));
    }
    let dims = [word(8), word(16), word(24)].map(|d| d as usize);
    let count = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    let expected = count.and_then(|n| n.checked_mul(16)).and_then(|n| n.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(bad(format!("{} bytes do not match dimensions {dims:?}", bytes.len())));
    }
    let values: Vec<Complex64> = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Array3::from_shape_vec((dims[0], dims[1], dims[2]), values).map_err(|e| bad(e.to_string()))
}

pub fn write_tensor(t: &Array3<Complex64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_tensor(t)).map_err(|e| Error::io(path, e))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Array3<Complex64>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes, path)
}

const AUDIO_MAGIC: &[u8; 4] = b"HTAB";
const AUDIO_HEADER_LEN: usize = 4 + 4 + 4 + 2 * 8;

pub fn encode_audio(a: &AudioBuffer) -> Vec<u8> {
    let mut buf = Vec::with_capacity(AUDIO_HEADER_LEN + a.samples().len() * 8);
    buf.extend_from_slice(AUDIO_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&a.sample_rate().to_le_bytes());
    buf.extend_from_slice(&(a.channels() as u64).to_le_bytes());
    buf.extend_from_slice(&(a.len() as u64).to_le_bytes());
    for v in a.samples().iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_audio(bytes: &[u8], path: &Path) -> Result<AudioBuffer> {
    let bad = |reason: String| Error::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < AUDIO_HEADER_LEN || &bytes[..4] != AUDIO_MAGIC {
        return Err(bad("missing audio header".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported audio version {version}")));
    }
    let rate = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let channels = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let len = u64::from_le_bytes(bytes[20..28].try_into().unwrap()) as usize;
    let expected = channels
        .checked_mul(len)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(AUDIO_HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(bad(format!("{} bytes do not match {channels}x{len} samples", bytes.len())));
    }
    let values: Vec<f64> = bytes[AUDIO_HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let samples = ndarray::Array2::from_shape_vec((channels, len), values).map_err(|e| bad(e.to_string()))?;
    AudioBuffer::new(samples, rate).map_err(|e| bad(e.to_string()))
}

pub fn write_audio(a: &AudioBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_audio(a)).map_err(|e| Error::io(path, e))
}

pub fn read_audio(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_audio(&bytes, path)
}
