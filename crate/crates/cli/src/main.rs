//! `dysaug`: generate synthetic dysarthric speech and score or correct ASR
//! transcripts.
//!
//! Exit status: 0 on success, 1 when any input file could not be processed,
//! 2 for invalid flags or configuration.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dysaug_core::audio::{read_wav, resample, write_wav, TARGET_RATE};
use dysaug_core::augment::{read_manifest, run_batch, write_jsonl, BatchOptions};
use dysaug_core::confusion::{build_confusion, ConfusionMatrix};
use dysaug_core::correct::{Corrector, Dictionary};
use dysaug_core::score::{score_with, ScoreOptions, Unit};
use dysaug_core::speed::{MAX_FACTOR, MIN_FACTOR};
use dysaug_core::{params_for, pertubate_signal, PerturbationParams, Severity};

#[derive(Parser, Debug)]
#[command(
    name = "dysaug",
    version,
    about = "Synthetic dysarthric speech and ASR scoring"
)]
struct Cli {
    /// Seed for every random choice (batch severity draws).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Perturb one WAV file at a severity preset or explicit factors.
    Perturb(PerturbArgs),
    /// Perturb every utterance of a JSON Lines manifest.
    Batch(BatchArgs),
    /// Estimate a character confusion matrix from line-aligned transcripts.
    Confusion(ConfusionArgs),
    /// Replace out-of-vocabulary words with their nearest dictionary entry.
    Correct(CorrectArgs),
    /// Print WER or CER with a substitution/insertion/deletion breakdown.
    Score(ScoreArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
#[value(rename_all = "UPPER")]
enum SeverityArg {
    S1,
    S2,
    S3,
    S4,
}

impl From<SeverityArg> for Severity {
    fn from(s: SeverityArg) -> Self {
        match s {
            SeverityArg::S1 => Severity::S1,
            SeverityArg::S2 => Severity::S2,
            SeverityArg::S3 => Severity::S3,
            SeverityArg::S4 => Severity::S4,
        }
    }
}

fn factor(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|e| format!("{s:?} is not a number: {e}"))?;
    if !(MIN_FACTOR..=MAX_FACTOR).contains(&v) {
        return Err(format!("{v} is outside [{MIN_FACTOR}, {MAX_FACTOR}]"));
    }
    Ok(v)
}

#[derive(Args, Debug)]
struct PerturbArgs {
    #[arg(long = "in", value_name = "WAV")]
    input: PathBuf,
    #[arg(long, value_name = "WAV")]
    out: PathBuf,
    #[arg(long, ignore_case = true, conflicts_with_all = ["r1", "r2"], required_unless_present_all = ["r1", "r2"])]
    severity: Option<SeverityArg>,
    /// Speed factor; values above 1 shorten the clip and raise pitch.
    #[arg(long, value_parser = factor, requires = "r2")]
    r1: Option<f64>,
    /// Tempo factor; output duration is r2 times the sped-up duration.
    #[arg(long, value_parser = factor, requires = "r1")]
    r2: Option<f64>,
    /// Use 1/r1 and 1/r2 instead, turning a speed-up into a slow-down.
    #[arg(long)]
    reciprocal: bool,
}

#[derive(Args, Debug)]
struct BatchArgs {
    #[arg(long, value_name = "JSONL")]
    manifest: PathBuf,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Comma-separated severity levels to draw from.
    #[arg(
        long,
        value_delimiter = ',',
        ignore_case = true,
        default_value = "S1,S2,S3,S4"
    )]
    severities: Vec<SeverityArg>,
    /// Number of distinct severities generated per utterance.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    replication: u32,
    /// Worker threads (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Output manifest path (default: <out-dir>/manifest.jsonl).
    #[arg(long, value_name = "JSONL")]
    out_manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConfusionArgs {
    #[arg(long)]
    refs: PathBuf,
    #[arg(long)]
    hyps: PathBuf,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CorrectArgs {
    /// Word list, one word per line with an optional tab-separated count.
    #[arg(long)]
    dict: PathBuf,
    /// Confusion matrix JSON produced by `dysaug confusion`.
    #[arg(long)]
    confusion: Option<PathBuf>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UnitArg {
    Word,
    Char,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    refs: PathBuf,
    #[arg(long)]
    hyps: PathBuf,
    #[arg(long, value_enum, default_value = "word")]
    unit: UnitArg,
    /// Strip Arabic tatweel and diacritics before scoring.
    #[arg(long)]
    normalize_arabic: bool,
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Ok,
    /// Some inputs failed; they have been reported.
    PartialFailure,
    /// Flags were syntactically valid but inconsistent.
    Usage(String),
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn read_pairs(refs: &Path, hyps: &Path) -> Result<Vec<(String, String)>> {
    let r = read_lines(refs)?;
    let h = read_lines(hyps)?;
    if r.len() != h.len() {
        bail!(
            "{} has {} lines but {} has {}",
            refs.display(),
            r.len(),
            hyps.display(),
            h.len()
        );
    }
    Ok(r.into_iter().zip(h).collect())
}

fn perturb(args: &PerturbArgs) -> Result<Status> {
    let mut params = match (args.severity, args.r1, args.r2) {
        (Some(s), _, _) => params_for(s.into()),
        (None, Some(r1), Some(r2)) => PerturbationParams::custom(r1, r2)?,
        _ => {
            return Ok(Status::Usage(
                "give --severity or both --r1 and --r2".into(),
            ))
        }
    };
    if args.reciprocal {
        let (r1, r2) = (1.0 / params.r1.value(), 1.0 / params.r2.value());
        params = match PerturbationParams::custom(r1, r2) {
            Ok(p) => p,
            Err(e) => return Ok(Status::Usage(e.to_string())),
        };
    }
    let input = read_wav(&args.input)?;
    let input = resample(&input, TARGET_RATE)?;
    let out = pertubate_signal(&input, &params)
        .with_context(|| format!("perturbing {}", args.input.display()))?;
    write_wav(&out, &args.out)?;
    log::info!(
        "{} -> {} (r1 {}, r2 {}, {} -> {} samples)",
        args.input.display(),
        args.out.display(),
        params.r1.value(),
        params.r2.value(),
        input.len(),
        out.len()
    );
    Ok(Status::Ok)
}

fn batch(args: &BatchArgs, seed: u64) -> Result<Status> {
    let severities: BTreeSet<Severity> = args.severities.iter().map(|&s| s.into()).collect();
    let replication = args.replication as usize;
    if replication > severities.len() {
        return Ok(Status::Usage(format!(
            "--replication {replication} exceeds the {} distinct severities given",
            severities.len()
        )));
    }
    let manifest = read_manifest(&args.manifest)?;
    if manifest.is_empty() {
        return Ok(Status::Usage(format!(
            "{} has no entries",
            args.manifest.display()
        )));
    }
    let opts = BatchOptions {
        severities,
        replication,
        seed,
        out_dir: args.out_dir.clone(),
        jobs: args.jobs.map(|j| j as usize),
    };
    let outcome = run_batch(&manifest, &opts)?;
    let out_manifest = args
        .out_manifest
        .clone()
        .unwrap_or_else(|| args.out_dir.join("manifest.jsonl"));
    write_jsonl(&out_manifest, &outcome.records)?;
    log::info!(
        "{} input utterances -> {} records in {}",
        manifest.len(),
        outcome.records.len(),
        out_manifest.display()
    );
    if outcome.failures.is_empty() {
        return Ok(Status::Ok);
    }
    eprintln!("{} item(s) failed:", outcome.failures.len());
    for f in &outcome.failures {
        match f.severity {
            Some(s) => eprintln!("  {} ({s}): {}", f.id, f.message),
            None => eprintln!("  {}: {}", f.id, f.message),
        }
    }
    Ok(Status::PartialFailure)
}

fn confusion(args: &ConfusionArgs) -> Result<Status> {
    let pairs = read_pairs(&args.refs, &args.hyps)?;
    let matrix = build_confusion(&pairs)?;
    matrix.save(&args.out)?;
    log::info!(
        "{} pairs, {} symbols -> {}",
        pairs.len(),
        matrix.size(),
        args.out.display()
    );
    Ok(Status::Ok)
}

fn correct(args: &CorrectArgs) -> Result<Status> {
    let dict = Dictionary::load(&args.dict)?;
    if dict.is_empty() {
        return Ok(Status::Usage(format!(
            "{} contains no words",
            args.dict.display()
        )));
    }
    let matrix = args
        .confusion
        .as_ref()
        .map(ConfusionMatrix::load)
        .transpose()?;
    let corrector = Corrector::new(&dict, matrix.as_ref())?;
    let lines = read_lines(&args.input)?;
    let mut out = String::new();
    for line in &lines {
        out.push_str(&corrector.correct_sentence(line));
        out.push('\n');
    }
    fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    log::info!("corrected {} lines -> {}", lines.len(), args.out.display());
    Ok(Status::Ok)
}

fn score(args: &ScoreArgs) -> Result<Status> {
    let pairs = read_pairs(&args.refs, &args.hyps)?;
    let opts = ScoreOptions {
        unit: match args.unit {
            UnitArg::Word => Unit::Word,
            UnitArg::Char => Unit::Char,
        },
        strip_arabic_marks: args.normalize_arabic,
    };
    let report = score_with(&pairs, opts)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{report}")?;
    Ok(Status::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    env_logger::Builder::new()
        .filter_level(if cli.quiet {
            log::LevelFilter::Error
        } else {
            log::LevelFilter::Info
        })
        .format_target(false)
        .format_timestamp(None)
        .init();

    let result = match &cli.command {
        Command::Perturb(a) => perturb(a),
        Command::Batch(a) => batch(a, cli.seed),
        Command::Confusion(a) => confusion(a),
        Command::Correct(a) => correct(a),
        Command::Score(a) => score(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::PartialFailure) => ExitCode::from(1),
        Ok(Status::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
