//! Speed perturbation: `y(t) = x(r1 * t)`.
//!
//! The sample sequence is resampled by `1 / r1` while the declared rate stays
//! put, so duration shrinks by `r1` and every spectral component moves up by
//! the same factor.

use crate::audio::{resample_by_step, Waveform, TAPS_PER_PHASE};
use crate::error::{Error, Result};

pub const MIN_FACTOR: f64 = 0.25;
pub const MAX_FACTOR: f64 = 4.0;

/// Speed factor `r1` in `[0.25, 4.0]`; values above 1 speed the signal up.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpeedFactor(f64);

impl SpeedFactor {
    pub fn new(r1: f64) -> Result<Self> {
        if !(MIN_FACTOR..=MAX_FACTOR).contains(&r1) {
            return Err(Error::FactorOutOfRange {
                name: "speed",
                value: r1,
                min: MIN_FACTOR,
                max: MAX_FACTOR,
            });
        }
        Ok(Self(r1))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Output length of a speed change: `round(len / r1)`.
pub fn speed_output_len(len: usize, r1: SpeedFactor) -> usize {
    (len as f64 / r1.0).round() as usize
}

pub fn perturb_speed(w: &Waveform, r1: SpeedFactor) -> Result<Waveform> {
    w.ensure_non_empty()?;
    if r1.0 == 1.0 {
        return Ok(w.clone());
    }
    let out_len = speed_output_len(w.len(), r1);
    if out_len < TAPS_PER_PHASE {
        return Err(Error::InputTooShort {
            len: w.len(),
            min: (TAPS_PER_PHASE as f64 * r1.0).ceil() as usize,
        });
    }
    Ok(Waveform {
        samples: resample_by_step(&w.samples, r1.0, out_len),
        sample_rate: w.sample_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tone(freq: f64, len: usize, rate: u32, amp: f64) -> Waveform {
        let samples = (0..len)
            .map(|i| {
                (amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin()) as f32
            })
            .collect();
        Waveform::new(samples, rate).unwrap()
    }

    fn rms_db(x: &[f32]) -> f64 {
        let e = x.iter().map(|&s| (s as f64).powi(2)).sum::<f64>() / x.len() as f64;
        10.0 * e.log10()
    }

    #[test]
    fn factor_range() {
        assert!(SpeedFactor::new(0.25).is_ok());
        assert!(SpeedFactor::new(4.0).is_ok());
        assert!(SpeedFactor::new(0.2).is_err());
        assert!(SpeedFactor::new(4.5).is_err());
        assert!(SpeedFactor::new(f64::NAN).is_err());
    }

    #[test]
    fn unit_factor_is_identity() {
        let w = tone(300.0, 1000, 16000, 0.7);
        assert_eq!(
            perturb_speed(&w, SpeedFactor::new(1.0).unwrap()).unwrap(),
            w
        );
    }

    #[test]
    fn doubling_halves_length() {
        let w = tone(440.0, 16000, 16000, 0.5);
        let out = perturb_speed(&w, SpeedFactor::new(2.0).unwrap()).unwrap();
        assert!((out.len() as i64 - 8000).abs() <= 1);
        assert_eq!(out.sample_rate, 16000);
    }

    #[test]
    fn rejects_degenerate_output() {
        let w = tone(440.0, 100, 16000, 0.5);
        assert!(matches!(
            perturb_speed(&w, SpeedFactor::new(2.0).unwrap()),
            Err(Error::InputTooShort { .. })
        ));
        let empty = Waveform {
            samples: vec![],
            sample_rate: 16000,
        };
        assert!(perturb_speed(&empty, SpeedFactor::new(1.5).unwrap()).is_err());
    }

    #[test]
    fn full_scale_tone_energy_within_one_db() {
        for r1 in [0.5, 0.8, 1.2, 1.4, 1.8, 2.0] {
            let w = tone(440.0, 16000, 16000, 1.0);
            let out = perturb_speed(&w, SpeedFactor::new(r1).unwrap()).unwrap();
            let edge = 64;
            let delta = rms_db(&out.samples[edge..out.len() - edge]) - rms_db(&w.samples);
            assert!(delta.abs() < 1.0, "r1 = {r1}: {delta} dB");
        }
    }

    proptest! {
        #[test]
        fn duration_contract(len in 200usize..5000, r1 in 0.25f64..4.0) {
            let w = Waveform::new(vec![0.1; len], 16000).unwrap();
            let f = SpeedFactor::new(r1).unwrap();
            match perturb_speed(&w, f) {
                Ok(out) => prop_assert!((out.len() as f64 - len as f64 / r1).abs() <= 1.0),
                Err(Error::InputTooShort { .. }) => prop_assert!(((len as f64) / r1).round() < 64.0),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }

        #[test]
        fn composition_length(len in 1000usize..4000, a in 0.5f64..2.0, b in 0.5f64..2.0) {
            let w = Waveform::new(vec![0.0; len], 16000).unwrap();
            let fa = SpeedFactor::new(a).unwrap();
            let fb = SpeedFactor::new(b).unwrap();
            let twice = perturb_speed(&perturb_speed(&w, fa).unwrap(), fb).unwrap();
            let once = perturb_speed(&w, SpeedFactor::new(a * b).unwrap()).unwrap();
            prop_assert!((twice.len() as i64 - once.len() as i64).abs() <= 2);
        }
    }
}
