//! Severity presets and the manifest-driven batch generator.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audio::{read_wav, resample, write_wav, TARGET_RATE};
use crate::error::{Error, Result};
use crate::speed::SpeedFactor;
use crate::tempo::{pertubate_signal, TempoFactor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    S1,
    S2,
    S3,
    S4,
}

impl Severity {
    pub const ALL: [Severity; 4] = [Severity::S1, Severity::S2, Severity::S3, Severity::S4];

    /// `(r1, r2)` for this level.
    pub fn factors(self) -> (f64, f64) {
        match self {
            Severity::S1 => (1.2, 0.8),
            Severity::S2 => (1.4, 0.8),
            Severity::S3 => (1.8, 0.4),
            Severity::S4 => (2.0, 0.4),
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Severity::S1 => "S1",
            Severity::S2 => "S2",
            Severity::S3 => "S3",
            Severity::S4 => "S4",
        };
        f.write_str(s)
    }
}

impl FromStr for Severity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" => Ok(Severity::S1),
            "S2" => Ok(Severity::S2),
            "S3" => Ok(Severity::S3),
            "S4" => Ok(Severity::S4),
            other => Err(Error::Config(format!(
                "unknown severity {other:?}; expected one of S1, S2, S3, S4"
            ))),
        }
    }
}

/// A speed/tempo factor pair, optionally tagged with the preset it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationParams {
    pub r1: SpeedFactor,
    pub r2: TempoFactor,
    pub severity: Option<Severity>,
}

impl PerturbationParams {
    pub fn custom(r1: f64, r2: f64) -> Result<Self> {
        Ok(Self {
            r1: SpeedFactor::new(r1)?,
            r2: TempoFactor::new(r2)?,
            severity: None,
        })
    }
}

pub fn params_for(s: Severity) -> PerturbationParams {
    let (r1, r2) = s.factors();
    PerturbationParams {
        r1: SpeedFactor::new(r1).expect("preset speed factor in range"),
        r2: TempoFactor::new(r2).expect("preset tempo factor in range"),
        severity: Some(s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    #[serde(alias = "f", alias = "F", alias = "Female")]
    Female,
    #[serde(alias = "m", alias = "M", alias = "Male")]
    Male,
    #[default]
    #[serde(other)]
    Unknown,
}

/// One healthy utterance in an input manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub audio: PathBuf,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub speaker: String,
    #[serde(default)]
    pub gender: Gender,
}

/// One synthetic utterance in an output manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentRecord {
    #[serde(flatten)]
    pub entry: ManifestEntry,
    pub source_id: String,
    pub severity: Severity,
    pub r1: f64,
    pub r2: f64,
}

/// Reads a JSON Lines manifest. Relative audio paths are resolved against
/// the manifest's directory; blank lines are skipped.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut entries = parse_manifest(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    for e in &mut entries {
        if e.audio.is_relative() {
            e.audio = base.join(&e.audio);
        }
    }
    Ok(entries)
}

/// Parses manifest lines, checking that ids are unique and audio paths set.
pub fn parse_manifest(reader: impl BufRead) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<manifest>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry = serde_json::from_str(&line).map_err(|e| Error::Manifest {
            line: i + 1,
            detail: e.to_string(),
        })?;
        if entry.audio.as_os_str().is_empty() {
            return Err(Error::Manifest {
                line: i + 1,
                detail: format!("entry {:?} has an empty audio path", entry.id),
            });
        }
        if !seen.insert(entry.id.clone()) {
            return Err(Error::Manifest {
                line: i + 1,
                detail: format!("duplicate id {:?}", entry.id),
            });
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub severities: BTreeSet<Severity>,
    /// Levels drawn (without replacement) per input utterance.
    pub replication: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
}

/// A draw that could not be produced.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchFailure {
    pub id: String,
    pub severity: Option<Severity>,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct BatchOutcome {
    pub records: Vec<AugmentRecord>,
    pub failures: Vec<BatchFailure>,
}

/// 32-byte generator seed derived from the batch seed and the utterance id,
/// so an utterance's draws do not depend on its position in the manifest.
fn entry_seed(seed: u64, id: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    h.finalize().into()
}

/// Severity levels assigned to one utterance, in draw order.
pub fn draw_severities(
    severities: &BTreeSet<Severity>,
    replication: usize,
    seed: u64,
    id: &str,
) -> Vec<Severity> {
    let pool: Vec<Severity> = severities.iter().copied().collect();
    let mut rng = ChaCha8Rng::from_seed(entry_seed(seed, id));
    rand::seq::index::sample(&mut rng, pool.len(), replication)
        .into_iter()
        .map(|i| pool[i])
        .collect()
}

fn output_name(id: &str, severity: Severity) -> String {
    format!("{id}_{severity}")
}

fn process_entry(
    entry: &ManifestEntry,
    opts: &BatchOptions,
) -> (Vec<AugmentRecord>, Vec<BatchFailure>) {
    let draws = draw_severities(&opts.severities, opts.replication, opts.seed, &entry.id);
    let fail = |severity, e: Error| BatchFailure {
        id: entry.id.clone(),
        severity,
        message: e.to_string(),
    };
    let source = match read_wav(&entry.audio).and_then(|w| resample(&w, TARGET_RATE)) {
        Ok(w) => w,
        Err(e) => return (Vec::new(), vec![fail(None, e)]),
    };

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for severity in draws {
        let params = params_for(severity);
        let name = output_name(&entry.id, severity);
        let path = opts.out_dir.join(format!("{name}.wav"));
        let written = pertubate_signal(&source, &params).and_then(|w| write_wav(&w, &path));
        match written {
            Ok(()) => records.push(AugmentRecord {
                entry: ManifestEntry {
                    id: name,
                    audio: path,
                    text: entry.text.clone(),
                    speaker: entry.speaker.clone(),
                    gender: entry.gender,
                },
                source_id: entry.id.clone(),
                severity,
                r1: params.r1.value(),
                r2: params.r2.value(),
            }),
            Err(e) => failures.push(fail(Some(severity), e)),
        }
    }
    (records, failures)
}

/// Generates `replication` perturbed copies of every manifest entry.
///
/// Each copy is written to `<out_dir>/<id>_<severity>.wav` as 16 kHz mono
/// PCM16. Unreadable or too-short clips are reported in
/// [`BatchOutcome::failures`] and skipped. Records come back in manifest
/// order regardless of how many worker threads are used.
pub fn run_batch(manifest: &[ManifestEntry], opts: &BatchOptions) -> Result<BatchOutcome> {
    if manifest.is_empty() {
        return Err(Error::EmptyInput("manifest has no entries"));
    }
    if opts.severities.is_empty() {
        return Err(Error::Config("at least one severity is required".into()));
    }
    if opts.replication == 0 || opts.replication > opts.severities.len() {
        return Err(Error::Config(format!(
            "replication must be in 1..={}, got {}",
            opts.severities.len(),
            opts.replication
        )));
    }
    fs::create_dir_all(&opts.out_dir).map_err(|e| Error::io(&opts.out_dir, e))?;
    let probe = opts.out_dir.join(".dysaug-write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&opts.out_dir, e))?;
    let _ = fs::remove_file(&probe);

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = opts.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let per_entry: Vec<_> = pool.install(|| {
        manifest
            .par_iter()
            .map(|entry| process_entry(entry, opts))
            .collect()
    });

    let mut outcome = BatchOutcome::default();
    for (records, failures) in per_entry {
        for f in &failures {
            log::warn!(
                "skipping {}{}: {}",
                f.id,
                f.severity.map(|s| format!(" ({s})")).unwrap_or_default(),
                f.message
            );
        }
        outcome.records.extend(records);
        outcome.failures.extend(failures);
    }
    Ok(outcome)
}

/// Splits a manifest into female, male and unknown-gender groups.
pub fn split_by_gender(
    manifest: &[ManifestEntry],
) -> (Vec<ManifestEntry>, Vec<ManifestEntry>, Vec<ManifestEntry>) {
    let mut female = Vec::new();
    let mut male = Vec::new();
    let mut other = Vec::new();
    for e in manifest {
        match e.gender {
            Gender::Female => female.push(e.clone()),
            Gender::Male => male.push(e.clone()),
            Gender::Unknown => other.push(e.clone()),
        }
    }
    (female, male, other)
}
