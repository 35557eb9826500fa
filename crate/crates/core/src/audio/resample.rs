//! Band-limited sample-rate conversion with a Kaiser-windowed sinc kernel.
//!
//! The kernel spans `TAPS_PER_PHASE` zero crossings of the filter-rate sinc
//! and is tabulated at `PHASES` fractional offsets per crossing; any other
//! offset is linearly interpolated between neighbouring phases. When
//! decimating, the kernel is stretched by the rate ratio so the cutoff lands
//! on the output Nyquist frequency.

use std::sync::OnceLock;

use super::{clip_in_place, Waveform};
use crate::error::{Error, Result};

pub const KAISER_BETA: f64 = 8.6;
pub const TAPS_PER_PHASE: usize = 64;
const PHASES: usize = 512;

/// Tabulated right half of a symmetric windowed-sinc kernel.
#[derive(Debug)]
pub struct SincKernel {
    half_width: f64,
    table: Vec<f64>,
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

impl SincKernel {
    pub fn new(taps: usize, beta: f64) -> Self {
        let half_width = taps as f64 / 2.0;
        let n = (half_width as usize) * PHASES;
        let norm = bessel_i0(beta);
        let mut table = Vec::with_capacity(n + 2);
        for i in 0..=n {
            let u = i as f64 / PHASES as f64;
            let sinc = if i == 0 {
                1.0
            } else {
                (std::f64::consts::PI * u).sin() / (std::f64::consts::PI * u)
            };
            let r = u / half_width;
            let window = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / norm;
            table.push(sinc * window);
        }
        // Guard entry so interpolation at the very edge reads a zero.
        table.push(0.0);
        Self { half_width, table }
    }

    /// The shared default kernel (64 taps, beta 8.6).
    pub fn standard() -> &'static SincKernel {
        static KERNEL: OnceLock<SincKernel> = OnceLock::new();
        KERNEL.get_or_init(|| SincKernel::new(TAPS_PER_PHASE, KAISER_BETA))
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Kernel value at filter-rate offset `u` (zero outside the support).
    pub fn eval(&self, u: f64) -> f64 {
        let u = u.abs();
        if u >= self.half_width {
            return 0.0;
        }
        let pos = u * PHASES as f64;
        let i = pos as usize;
        let frac = pos - i as f64;
        self.table[i] + (self.table[i + 1] - self.table[i]) * frac
    }
}

/// Resamples `input` by reading it every `step` input samples, producing
/// exactly `out_len` samples. `step > 1` shortens the signal and applies an
/// anti-alias cutoff at `1 / step` of the input Nyquist frequency.
pub fn resample_by_step(input: &[f32], step: f64, out_len: usize) -> Vec<f32> {
    let kernel = SincKernel::standard();
    let scale = (1.0 / step).min(1.0);
    let reach = kernel.half_width() / scale;
    let last = input.len() as i64 - 1;

    let mut out: Vec<f32> = (0..out_len)
        .map(|n| {
            let t = n as f64 * step;
            let lo = ((t - reach).ceil() as i64).max(0);
            let hi = ((t + reach).floor() as i64).min(last);
            let mut acc = 0.0f64;
            for k in lo..=hi {
                acc += input[k as usize] as f64 * kernel.eval((t - k as f64) * scale);
            }
            (acc * scale) as f32
        })
        .collect();
    clip_in_place(&mut out);
    out
}

/// Converts `w` to `target_rate`, preserving its duration to within one
/// output sample.
pub fn resample(w: &Waveform, target_rate: u32) -> Result<Waveform> {
    if target_rate == 0 {
        return Err(Error::InvalidWaveform(
            "target rate must be positive".into(),
        ));
    }
    if w.sample_rate == 0 {
        return Err(Error::InvalidWaveform(
            "sample rate must be positive".into(),
        ));
    }
    if w.sample_rate == target_rate {
        return Ok(w.clone());
    }
    let out_len =
        (w.samples.len() as f64 * target_rate as f64 / w.sample_rate as f64).round() as usize;
    let step = w.sample_rate as f64 / target_rate as f64;
    Ok(Waveform {
        samples: resample_by_step(&w.samples, step, out_len),
        sample_rate: target_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        // I0(1) and I0(8.6) from tables.
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-12);
        assert!((bessel_i0(8.6) / 750.461_159_563_165_9 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_interpolating() {
        let k = SincKernel::standard();
        assert!((k.eval(0.0) - 1.0).abs() < 1e-12);
        for z in 1..32 {
            assert!(k.eval(z as f64).abs() < 1e-9, "nonzero at crossing {z}");
        }
        assert_eq!(k.eval(32.0), 0.0);
        assert_eq!(k.eval(-40.0), 0.0);
        assert!((k.eval(0.3) - k.eval(-0.3)).abs() < 1e-15);
    }

    #[test]
    fn unit_step_reproduces_input() {
        let x: Vec<f32> = (0..500)
            .map(|i| ((i * 37 % 101) as f32 / 101.0) - 0.5)
            .collect();
        let y = resample_by_step(&x, 1.0, x.len());
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn identity_rate_is_exact() {
        let w =
            Waveform::new((0..16000).map(|i| (i as f32 * 0.01).sin()).collect(), 16000).unwrap();
        let r = resample(&w, 16000).unwrap();
        assert_eq!(r, w);
    }

    #[test]
    fn duration_is_preserved() {
        let w = Waveform::new(vec![0.0; 44100], 44100).unwrap();
        let r = resample(&w, 16000).unwrap();
        assert!((r.len() as i64 - 16000).abs() <= 1);
        assert_eq!(r.sample_rate, 16000);

        let w = Waveform::new(vec![0.0; 12345], 22050).unwrap();
        let r = resample(&w, 16000).unwrap();
        assert!((r.duration() - w.duration()).abs() <= 1.0 / 16000.0);
    }

    #[test]
    fn dc_gain_is_unity_when_decimating() {
        let w = Waveform::new(vec![0.5; 4000], 48000).unwrap();
        let r = resample(&w, 16000).unwrap();
        for s in &r.samples[100..r.len() - 100] {
            assert!((s - 0.5).abs() < 1e-4, "{s}");
        }
    }

    #[test]
    fn rejects_zero_target() {
        let w = Waveform::new(vec![0.0; 10], 16000).unwrap();
        assert!(resample(&w, 0).is_err());
    }
}
