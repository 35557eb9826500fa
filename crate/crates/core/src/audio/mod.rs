//! Mono waveform container, WAV file I/O and sample-rate conversion.

mod resample;
mod wav;

pub use resample::{resample, resample_by_step, SincKernel, KAISER_BETA, TAPS_PER_PHASE};
pub use wav::{read_wav, read_wav_bytes, write_wav, write_wav_bytes};

use crate::error::{Error, Result};

/// Rate every downstream stage works at.
pub const TARGET_RATE: u32 = 16_000;

/// Mono audio: amplitudes in `[-1, 1]` and a sample rate in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl Waveform {
    /// Builds a waveform, clipping every amplitude into `[-1, 1]`.
    pub fn new(mut samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidWaveform(
                "sample rate must be positive".into(),
            ));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidWaveform(format!(
                "non-finite sample at index {i}"
            )));
        }
        clip_in_place(&mut samples);
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::InvalidWaveform("waveform has no samples".into()));
        }
        if self.sample_rate == 0 {
            return Err(Error::InvalidWaveform(
                "sample rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Averages interleaved frames of `channels` samples down to one channel.
pub fn downmix(interleaved: &[f32], channels: usize) -> Vec<f32> {
    if channels <= 1 {
        return interleaved.to_vec();
    }
    let scale = 1.0 / channels as f64;
    interleaved
        .chunks_exact(channels)
        .map(|frame| (frame.iter().map(|&s| s as f64).sum::<f64>() * scale) as f32)
        .collect()
}

pub(crate) fn clip_in_place(samples: &mut [f32]) {
    for s in samples {
        *s = s.clamp(-1.0, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stereo_frame_is_averaged() {
        assert_eq!(downmix(&[1.0, 0.0], 2), vec![0.5]);
        assert_eq!(downmix(&[0.2, 0.4, 0.6, -1.0, 0.0, 1.0], 3), vec![0.4, 0.0]);
    }

    #[test]
    fn new_clips_and_rejects_zero_rate() {
        let w = Waveform::new(vec![1.5, -2.0, 0.25], 8000).unwrap();
        assert_eq!(w.samples, vec![1.0, -1.0, 0.25]);
        assert!(Waveform::new(vec![0.0], 0).is_err());
        assert!(Waveform::new(vec![f32::NAN], 8000).is_err());
    }

    proptest! {
        #[test]
        fn downmix_is_linear(
            frames in prop::collection::vec(prop::collection::vec(-1.0f32..1.0, 2), 1..64),
            alpha in -1.0f32..1.0,
        ) {
            let flat: Vec<f32> = frames.concat();
            let scaled: Vec<f32> = flat.iter().map(|s| s * alpha).collect();
            let a = downmix(&scaled, 2);
            let b: Vec<f32> = downmix(&flat, 2).iter().map(|s| s * alpha).collect();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-6);
            }
        }
    }
}
