//! Synthetic dysarthric speech generation and ASR evaluation.
//!
//! The signal side turns healthy recordings into impaired-sounding ones with
//! two perturbations applied in sequence: a speed change (plain resampling,
//! which moves pitch along with duration) followed by a WSOLA tempo change
//! (duration only). Four named severity presets fix the pair of factors.
//!
//! The text side scores recognizer output (WER/CER with substitution,
//! insertion and deletion counts), estimates a character confusion matrix
//! from aligned transcripts, and uses it to pull out-of-vocabulary words back
//! to the closest dictionary entry under a confusion-weighted Jaccard
//! distance.

pub mod audio;
pub mod augment;
pub mod confusion;
pub mod correct;
mod error;
pub mod score;
pub mod speed;
pub mod tempo;

pub use audio::{read_wav, resample, write_wav, Waveform};
pub use augment::{
    params_for, run_batch, split_by_gender, AugmentRecord, BatchOptions, BatchOutcome, Gender,
    ManifestEntry, PerturbationParams, Severity,
};
pub use confusion::{build_confusion, ConfusionMatrix};
pub use correct::{correct_sentence, correct_word, profile, weighted_jaccard, Dictionary};
pub use error::{Error, Result};
pub use score::{align, score, Alignment, EditOp, ScoreReport, Unit};
pub use speed::{perturb_speed, SpeedFactor};
pub use tempo::{pertubate_signal, perturb_tempo, TempoFactor, WsolaConfig};
