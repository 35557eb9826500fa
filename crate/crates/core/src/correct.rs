//! Dictionary lookup under a confusion-weighted Jaccard distance.
//!
//! A word is reduced to a profile of (soft) character counts. Without a
//! confusion matrix the profile is the character multiset; with one, each
//! occurrence of `c` spreads its unit of mass over the characters it is
//! confused with, in proportion to row `c` of the matrix. Two words that
//! differ only in easily confused characters then share most of their mass.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::io::BufRead;
use std::path::Path;

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};

/// Soft character counts of one word.
pub type CharProfile = BTreeMap<char, f64>;

pub fn profile(word: &str, m: Option<&ConfusionMatrix>) -> Result<CharProfile> {
    if word.is_empty() {
        return Err(Error::EmptyInput("cannot profile an empty word"));
    }
    let mut counts = CharProfile::new();
    for c in word.chars() {
        match m.and_then(|m| m.row(Some(c)).map(|row| (m.alphabet(), row))) {
            Some((alphabet, row)) => {
                // The trailing null column (mass lost to deletion) is dropped.
                for (&to, &p) in alphabet.iter().zip(row) {
                    if p > 0.0 {
                        *counts.entry(to).or_default() += p;
                    }
                }
            }
            None => *counts.entry(c).or_default() += 1.0,
        }
    }
    Ok(counts)
}

/// `1 - sum(min) / sum(max)` over the union of both profiles' characters.
pub fn profile_distance(p: &CharProfile, g: &CharProfile) -> f64 {
    let mut min_sum = 0.0;
    let mut max_sum = 0.0;
    let mut a = p.iter().peekable();
    let mut b = g.iter().peekable();
    loop {
        let (x, y) = match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(&(_, &x)), None) => {
                a.next();
                (x, 0.0)
            }
            (None, Some(&(_, &y))) => {
                b.next();
                (0.0, y)
            }
            (Some(&(ca, &x)), Some(&(cb, &y))) => match ca.cmp(cb) {
                Ordering::Less => {
                    a.next();
                    (x, 0.0)
                }
                Ordering::Greater => {
                    b.next();
                    (0.0, y)
                }
                Ordering::Equal => {
                    a.next();
                    b.next();
                    (x, y)
                }
            },
        };
        min_sum += x.min(y);
        max_sum += x.max(y);
    }
    if max_sum <= 0.0 {
        return if p == g { 0.0 } else { 1.0 };
    }
    1.0 - min_sum / max_sum
}

pub fn weighted_jaccard(w_p: &str, w_g: &str, m: Option<&ConfusionMatrix>) -> Result<f64> {
    Ok(profile_distance(&profile(w_p, m)?, &profile(w_g, m)?))
}

/// Word list with optional frequencies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dictionary {
    words: BTreeMap<String, u64>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` to the word's frequency, inserting it if needed.
    pub fn insert(&mut self, word: impl Into<String>, count: u64) {
        *self.words.entry(word.into()).or_default() += count;
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains_key(word)
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.words.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.words.iter().map(|(w, &f)| (w.as_str(), f))
    }

    /// Parses `word` or `word<TAB>frequency` lines. A line without a
    /// frequency counts once; repeated words accumulate.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut dict = Dictionary::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<dictionary>", e))?;
            let line = line.trim_end_matches(['\r', '\n']);
            let (word, freq) = match line.split_once('\t') {
                Some((w, f)) => {
                    let f = f.trim().parse::<u64>().map_err(|e| {
                        Error::Config(format!("dictionary line {}: frequency {f:?}: {e}", i + 1))
                    })?;
                    (w.trim(), f)
                }
                None => (line.trim(), 1),
            };
            if word.is_empty() {
                continue;
            }
            dict.insert(word, freq);
        }
        Ok(dict)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }
}

impl<S: Into<String>> FromIterator<S> for Dictionary {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut d = Dictionary::new();
        for w in iter {
            d.insert(w, 1);
        }
        d
    }
}

struct Candidate<'a> {
    word: &'a str,
    freq: u64,
    len: usize,
    profile: CharProfile,
}

/// Dictionary with precomputed profiles for repeated lookups.
pub struct Corrector<'a> {
    dict: &'a Dictionary,
    matrix: Option<&'a ConfusionMatrix>,
    candidates: Vec<Candidate<'a>>,
}

impl<'a> Corrector<'a> {
    pub fn new(dict: &'a Dictionary, matrix: Option<&'a ConfusionMatrix>) -> Result<Self> {
        if dict.is_empty() {
            return Err(Error::EmptyInput("dictionary has no words"));
        }
        let candidates = dict
            .iter()
            .map(|(word, freq)| {
                Ok(Candidate {
                    word,
                    freq,
                    len: word.chars().count(),
                    profile: profile(word, matrix)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            dict,
            matrix,
            candidates,
        })
    }

    /// Returns `word` if it is in the dictionary, otherwise the entry with
    /// the smallest distance. Ties go to the higher frequency, then the
    /// shorter word, then the lexicographically smaller one.
    pub fn correct_word(&self, word: &str) -> Result<&'a str> {
        if let Some((w, _)) = self.dict.words.get_key_value(word) {
            return Ok(w.as_str());
        }
        let query = profile(word, self.matrix)?;
        let best = self
            .candidates
            .iter()
            .map(|c| (profile_distance(&query, &c.profile), c))
            .min_by(|(da, a), (db, b)| {
                da.total_cmp(db)
                    .then_with(|| b.freq.cmp(&a.freq))
                    .then_with(|| a.len.cmp(&b.len))
                    .then_with(|| a.word.cmp(b.word))
            })
            .expect("dictionary is non-empty");
        Ok(best.1.word)
    }

    /// Corrects every purely alphabetic whitespace-separated token and
    /// rejoins with single spaces. Tokens with digits or punctuation pass
    /// through untouched.
    pub fn correct_sentence(&self, sentence: &str) -> String {
        sentence
            .split_whitespace()
            .map(|tok| {
                if tok.chars().all(char::is_alphabetic) {
                    self.correct_word(tok).unwrap_or(tok)
                } else {
                    tok
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn correct_word(w_p: &str, d: &Dictionary, m: Option<&ConfusionMatrix>) -> Result<String> {
    if d.is_empty() {
        return Err(Error::EmptyInput("dictionary has no words"));
    }
    if d.contains(w_p) {
        return Ok(w_p.to_owned());
    }
    Ok(Corrector::new(d, m)?.correct_word(w_p)?.to_owned())
}

pub fn correct_sentence(s: &str, d: &Dictionary, m: Option<&ConfusionMatrix>) -> Result<String> {
    Ok(Corrector::new(d, m)?.correct_sentence(s))
}
