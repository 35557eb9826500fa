//! Tempo perturbation by waveform-similarity overlap-add (WSOLA).
//!
//! Synthesis frames are laid down at a fixed hop `H_s`. The analysis frame
//! for output frame `m` is nominally taken at `m * H_s / r2` in the input,
//! then shifted by up to `tolerance` samples to best match the natural
//! continuation of the previously copied frame. The output therefore lasts
//! `r2` times as long as the input while local waveform periods, and hence
//! pitch, are kept.

use crate::audio::Waveform;
use crate::augment::PerturbationParams;
use crate::error::{Error, Result};
use crate::speed::{perturb_speed, MAX_FACTOR, MIN_FACTOR};

/// Tempo factor `r2` in `[0.25, 4.0]`: output duration is `r2` times input
/// duration.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TempoFactor(f64);

impl TempoFactor {
    pub fn new(r2: f64) -> Result<Self> {
        if !(MIN_FACTOR..=MAX_FACTOR).contains(&r2) {
            return Err(Error::FactorOutOfRange {
                name: "tempo",
                value: r2,
                min: MIN_FACTOR,
                max: MAX_FACTOR,
            });
        }
        Ok(Self(r2))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Triangular,
}

impl Window {
    /// Periodic window of length `n`; both kinds sum to one at a hop of n/2.
    fn coefficients(self, n: usize) -> Vec<f64> {
        let len = n as f64;
        (0..n)
            .map(|i| {
                let x = i as f64 / len;
                match self {
                    Window::Hann => 0.5 - 0.5 * (2.0 * std::f64::consts::PI * x).cos(),
                    Window::Triangular => 1.0 - (2.0 * x - 1.0).abs(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WsolaConfig {
    /// Frame length in samples; must be even.
    pub frame_length: usize,
    /// Fixed hop between synthesis frames.
    pub synthesis_hop: usize,
    /// Largest shift of an analysis frame away from its nominal position.
    pub tolerance: usize,
    pub window: Window,
}

impl Default for WsolaConfig {
    /// 32 ms frames, 16 ms hop and 10 ms tolerance at 16 kHz.
    fn default() -> Self {
        Self {
            frame_length: 512,
            synthesis_hop: 256,
            tolerance: 160,
            window: Window::Hann,
        }
    }
}

impl WsolaConfig {
    /// The default timings (32 ms / 16 ms / 10 ms) expressed at `sample_rate`.
    pub fn for_sample_rate(sample_rate: u32) -> Self {
        if sample_rate == 16_000 {
            return Self::default();
        }
        let ms = |t: f64| (t * sample_rate as f64 / 1000.0).round() as usize;
        let frame_length = (ms(32.0) / 2).max(1) * 2;
        Self {
            frame_length,
            synthesis_hop: frame_length / 2,
            tolerance: ms(10.0),
            window: Window::Hann,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_length == 0 || !self.frame_length.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "frame length must be positive and even, got {}",
                self.frame_length
            )));
        }
        if self.synthesis_hop == 0 || self.synthesis_hop > self.frame_length {
            return Err(Error::Config(format!(
                "synthesis hop must be in 1..={}, got {}",
                self.frame_length, self.synthesis_hop
            )));
        }
        Ok(())
    }
}

/// Normalized cross-correlation of two equal-length segments; 0 when either
/// is silent.
fn similarity(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut ea, mut eb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        ea += x * x;
        eb += y * y;
    }
    if ea <= f64::MIN_POSITIVE || eb <= f64::MIN_POSITIVE {
        return 0.0;
    }
    dot / (ea * eb).sqrt()
}

/// Output length of a tempo change: `round(r2 * len)`.
pub fn tempo_output_len(len: usize, r2: TempoFactor) -> usize {
    (len as f64 * r2.0).round() as usize
}

pub fn perturb_tempo(w: &Waveform, r2: TempoFactor, cfg: &WsolaConfig) -> Result<Waveform> {
    cfg.validate()?;
    w.ensure_non_empty()?;
    let frame = cfg.frame_length;
    if w.len() < frame {
        return Err(Error::InputTooShort {
            len: w.len(),
            min: frame,
        });
    }
    let hop = cfg.synthesis_hop;
    let tol = cfg.tolerance;
    let half = frame / 2;
    let target = tempo_output_len(w.len(), r2);
    let analysis_hop = hop as f64 / r2.0;

    // Frame m covers output [m*hop - half, m*hop + half), so frames up to
    // ceil(target / hop) reach past the last output sample.
    let frames = target.div_ceil(hop) + 1;
    let nominal: Vec<usize> = (0..frames)
        .map(|m| (m as f64 * analysis_hop).round() as usize)
        .collect();

    // Input index i sits at padded[i + front]; front padding lets frame 0 be
    // centred on input sample 0 and lets the search reach `tol` before it.
    let front = half + tol;
    let needed = nominal[frames - 1] + 2 * tol + frame + hop + 1;
    let mut padded = vec![0.0f64; front + w.len() + needed.saturating_sub(w.len())];
    for (dst, &s) in padded[front..].iter_mut().zip(&w.samples) {
        *dst = s as f64;
    }

    let window = cfg.window.coefficients(frame);
    let out_span = (frames - 1) * hop + frame;
    let mut acc = vec![0.0f64; out_span];
    let mut envelope = vec![0.0f64; out_span];

    // Start in the padded buffer of the frame last copied to the output.
    let mut prev_start: Option<usize> = None;
    for (m, &nom) in nominal.iter().enumerate() {
        // Nominal frame start in padded coordinates, before any shift.
        let base = nom + tol;
        let start = match prev_start {
            None => base,
            Some(prev) => {
                let natural = &padded[prev + hop..prev + hop + frame];
                let mut best = base;
                let mut best_score = similarity(natural, &padded[base..base + frame]);
                // Scan outward from zero shift so that ties keep the smaller
                // displacement, negative side first.
                for d in 1..=tol {
                    for cand in [base - d, base + d] {
                        let score = similarity(natural, &padded[cand..cand + frame]);
                        if score > best_score {
                            best_score = score;
                            best = cand;
                        }
                    }
                }
                best
            }
        };
        let out_at = m * hop;
        for j in 0..frame {
            acc[out_at + j] += window[j] * padded[start + j];
            envelope[out_at + j] += window[j];
        }
        prev_start = Some(start);
    }

    let samples = acc[half..half + target]
        .iter()
        .zip(&envelope[half..half + target])
        .map(|(&a, &e)| {
            let v = if e > 1e-9 { a / e } else { 0.0 };
            v.clamp(-1.0, 1.0) as f32
        })
        .collect();
    Ok(Waveform {
        samples,
        sample_rate: w.sample_rate,
    })
}

/// Speed change by `r1` followed by WSOLA tempo change by `r2`.
pub fn pertubate_signal(w: &Waveform, p: &PerturbationParams) -> Result<Waveform> {
    let sped = perturb_speed(w, p.r1)?;
    let cfg = WsolaConfig::for_sample_rate(sped.sample_rate);
    perturb_tempo(&sped, p.r2, &cfg)
}
