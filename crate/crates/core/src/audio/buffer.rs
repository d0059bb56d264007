use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 48_000;

/// Multichannel time-domain signal, stored `[channels × length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Array2<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Array2<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if samples.nrows() == 0 {
            return Err(Error::invalid("buffer needs at least one channel"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("audio buffer"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(channels: usize, len: usize, sample_rate: u32) -> Self {
        Self::new(Array2::zeros((channels.max(1), len)), sample_rate)
            .expect("zero buffer is always valid")
    }

    pub fn from_channels(channels: &[Vec<f64>], sample_rate: u32) -> Result<Self> {
        let len = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::ShapeMismatch(
                "all channels must have the same length".into(),
            ));
        }
        let flat: Vec<f64> = channels.iter().flatten().copied().collect();
        let samples = Array2::from_shape_vec((channels.len(), len), flat)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Self::new(samples, sample_rate)
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::from_channels(&[samples], sample_rate)
    }

    pub fn channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    pub fn channel(&self, ch: usize) -> ArrayView1<'_, f64> {
        self.samples.index_axis(Axis(0), ch)
    }

    pub fn into_samples(self) -> Array2<f64> {
        self.samples
    }

    /// Sum of squares per channel.
    pub fn channel_energy(&self) -> Vec<f64> {
        self.samples
            .outer_iter()
            .map(|c| c.iter().map(|s| s * s).sum())
            .collect()
    }

    /// Mean power over all channels and samples.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: &self.samples * gain,
            sample_rate: self.sample_rate,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.samples.dim() != other.samples.dim() || self.sample_rate != other.sample_rate {
            return Err(Error::ShapeMismatch(format!(
                "buffers differ: {:?}@{} Hz vs {:?}@{} Hz",
                self.samples.dim(),
                self.sample_rate,
                other.samples.dim(),
                other.sample_rate
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            samples: &self.samples + &other.samples,
            sample_rate: self.sample_rate,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            samples: &self.samples - &other.samples,
            sample_rate: self.sample_rate,
        })
    }

    /// Keeps only the listed channels, in the given order.
    pub fn select_channels(&self, channels: &[usize]) -> Result<Self> {
        if let Some(&bad) = channels.iter().find(|&&c| c >= self.channels()) {
            return Err(Error::invalid(format!("no channel {bad}")));
        }
        Self::new(self.samples.select(Axis(0), channels), self.sample_rate)
    }
}
