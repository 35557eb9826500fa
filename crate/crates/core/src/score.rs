//! Levenshtein alignment and WER/CER scoring with an error-type breakdown.

use std::fmt;
use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};

/// One step of an alignment between a reference and a hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditOp<T> {
    Hit { reference: T, hypothesis: T },
    Substitute { reference: T, hypothesis: T },
    Insert { hypothesis: T },
    Delete { reference: T },
}

impl<T> EditOp<T> {
    pub fn reference(&self) -> Option<&T> {
        match self {
            EditOp::Hit { reference, .. }
            | EditOp::Substitute { reference, .. }
            | EditOp::Delete { reference } => Some(reference),
            EditOp::Insert { .. } => None,
        }
    }

    pub fn hypothesis(&self) -> Option<&T> {
        match self {
            EditOp::Hit { hypothesis, .. }
            | EditOp::Substitute { hypothesis, .. }
            | EditOp::Insert { hypothesis } => Some(hypothesis),
            EditOp::Delete { .. } => None,
        }
    }

    pub fn cost(&self) -> usize {
        match self {
            EditOp::Hit { .. } => 0,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment<T> {
    pub ops: Vec<EditOp<T>>,
}

impl<T: Clone> Alignment<T> {
    pub fn distance(&self) -> usize {
        self.ops.iter().map(EditOp::cost).sum()
    }

    pub fn reference(&self) -> Vec<T> {
        self.ops
            .iter()
            .filter_map(|op| op.reference().cloned())
            .collect()
    }

    pub fn hypothesis(&self) -> Vec<T> {
        self.ops
            .iter()
            .filter_map(|op| op.hypothesis().cloned())
            .collect()
    }

    pub fn counts(&self) -> ScoreReport {
        let mut r = ScoreReport::default();
        for op in &self.ops {
            match op {
                EditOp::Hit { .. } => r.hits += 1,
                EditOp::Substitute { .. } => r.substitutions += 1,
                EditOp::Insert { .. } => r.insertions += 1,
                EditOp::Delete { .. } => r.deletions += 1,
            }
        }
        r.ref_length = r.hits + r.substitutions + r.deletions;
        r
    }
}

/// Minimum-edit-distance alignment under unit costs.
///
/// The backtrace walks from the end of both sequences and, among the moves
/// that stay on an optimal path, prefers hit, then substitution, then
/// deletion, then insertion.
pub fn align<T: PartialEq + Clone>(reference: &[T], hypothesis: &[T]) -> Alignment<T> {
    let n = reference.len();
    let m = hypothesis.len();
    let cols = m + 1;
    let mut d = vec![0usize; (n + 1) * cols];
    for (j, cell) in d[..cols].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        d[i * cols] = i;
        for j in 1..=m {
            let diag =
                d[(i - 1) * cols + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let up = d[(i - 1) * cols + j] + 1;
            let left = d[i * cols + j - 1] + 1;
            d[i * cols + j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * cols + j];
        if i > 0 && j > 0 {
            let diag = d[(i - 1) * cols + j - 1];
            let same = reference[i - 1] == hypothesis[j - 1];
            if same && diag == here {
                ops.push(EditOp::Hit {
                    reference: reference[i - 1].clone(),
                    hypothesis: hypothesis[j - 1].clone(),
                });
                i -= 1;
                j -= 1;
                continue;
            }
            if !same && diag + 1 == here {
                ops.push(EditOp::Substitute {
                    reference: reference[i - 1].clone(),
                    hypothesis: hypothesis[j - 1].clone(),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[(i - 1) * cols + j] + 1 == here {
            ops.push(EditOp::Delete {
                reference: reference[i - 1].clone(),
            });
            i -= 1;
        } else {
            ops.push(EditOp::Insert {
                hypothesis: hypothesis[j - 1].clone(),
            });
            j -= 1;
        }
    }
    ops.reverse();
    Alignment { ops }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Unit {
    #[default]
    Word,
    Char,
}

/// Corpus-level error counts. `ref_length = substitutions + deletions + hits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScoreReport {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub hits: usize,
    pub ref_length: usize,
}

impl ScoreReport {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    /// `(S + I + D) / N`; may exceed 1. Zero-length references give 0.
    pub fn error_rate(&self) -> f64 {
        if self.ref_length == 0 {
            return 0.0;
        }
        self.errors() as f64 / self.ref_length as f64
    }
}

impl Add for ScoreReport {
    type Output = ScoreReport;

    fn add(mut self, rhs: ScoreReport) -> ScoreReport {
        self += rhs;
        self
    }
}

impl AddAssign for ScoreReport {
    fn add_assign(&mut self, rhs: ScoreReport) {
        self.substitutions += rhs.substitutions;
        self.insertions += rhs.insertions;
        self.deletions += rhs.deletions;
        self.hits += rhs.hits;
        self.ref_length += rhs.ref_length;
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "Sub.", "Ins.", "Del.", "Hits", "Ref", "rate"
        )?;
        write!(
            f,
            "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8.3}",
            self.substitutions,
            self.insertions,
            self.deletions,
            self.hits,
            self.ref_length,
            self.error_rate()
        )
    }
}

/// Trims and collapses internal whitespace runs to one space.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_arabic_mark(c: char) -> bool {
    matches!(c,
        '\u{0640}'                      // tatweel
        | '\u{0610}'..='\u{061A}'
        | '\u{064B}'..='\u{065F}'
        | '\u{0670}'
        | '\u{06D6}'..='\u{06DC}'
        | '\u{06DF}'..='\u{06E4}'
        | '\u{06E7}'..='\u{06E8}'
        | '\u{06EA}'..='\u{06ED}')
}

/// Strips Arabic tatweel and diacritics.
pub fn strip_arabic_marks(s: &str) -> String {
    s.chars().filter(|&c| !is_arabic_mark(c)).collect()
}

/// Token sequence for one utterance at the given unit.
pub fn tokenize(s: &str, unit: Unit) -> Vec<String> {
    match unit {
        Unit::Word => s.split_whitespace().map(str::to_owned).collect(),
        Unit::Char => normalize_whitespace(s).chars().map(String::from).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScoreOptions {
    pub unit: Unit,
    pub strip_arabic_marks: bool,
}

/// Scores one utterance pair; the reference may be empty.
pub fn score_pair(reference: &str, hypothesis: &str, opts: ScoreOptions) -> ScoreReport {
    let prep = |s: &str| {
        if opts.strip_arabic_marks {
            tokenize(&strip_arabic_marks(s), opts.unit)
        } else {
            tokenize(s, opts.unit)
        }
    };
    align(&prep(reference), &prep(hypothesis)).counts()
}

/// Sums per-utterance alignments over a corpus of (reference, hypothesis)
/// pairs.
pub fn score_with<R, H>(pairs: &[(R, H)], opts: ScoreOptions) -> Result<ScoreReport>
where
    R: AsRef<str>,
    H: AsRef<str>,
{
    let total = pairs
        .iter()
        .map(|(r, h)| score_pair(r.as_ref(), h.as_ref(), opts))
        .fold(ScoreReport::default(), Add::add);
    if total.ref_length == 0 {
        return Err(Error::EmptyInput("every reference is empty"));
    }
    Ok(total)
}

pub fn score<R, H>(pairs: &[(R, H)], unit: Unit) -> Result<ScoreReport>
where
    R: AsRef<str>,
    H: AsRef<str>,
{
    score_with(
        pairs,
        ScoreOptions {
            unit,
            strip_arabic_marks: false,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    /// Every alignment of a and b, enumerated explicitly.
    fn all_alignment_costs(a: &[char], b: &[char]) -> Vec<usize> {
        if a.is_empty() {
            return vec![b.len()];
        }
        if b.is_empty() {
            return vec![a.len()];
        }
        let mut out = Vec::new();
        let sub = usize::from(a[0] != b[0]);
        out.extend(
            all_alignment_costs(&a[1..], &b[1..])
                .into_iter()
                .map(|c| c + sub),
        );
        out.extend(all_alignment_costs(&a[1..], b).into_iter().map(|c| c + 1));
        out.extend(all_alignment_costs(a, &b[1..]).into_iter().map(|c| c + 1));
        out
    }

    #[test]
    fn identity_and_empty() {
        let a = align(&chars("abc"), &chars("abc"));
        assert_eq!(a.counts().hits, 3);
        assert_eq!(a.distance(), 0);
        let a = align(&chars("abc"), &[]);
        assert!(a.ops.iter().all(|op| matches!(op, EditOp::Delete { .. })));
        assert_eq!(a.ops.len(), 3);
        let a = align::<char>(&[], &chars("ab"));
        assert_eq!(a.counts().insertions, 2);
        assert!(align::<char>(&[], &[]).ops.is_empty());
    }

    #[test]
    fn single_substitution() {
        let a = align(&chars("abc"), &chars("axc"));
        assert_eq!(
            a.ops,
            vec![
                EditOp::Hit {
                    reference: 'a',
                    hypothesis: 'a'
                },
                EditOp::Substitute {
                    reference: 'b',
                    hypothesis: 'x'
                },
                EditOp::Hit {
                    reference: 'c',
                    hypothesis: 'c'
                },
            ]
        );
    }

    #[test]
    fn tie_break_prefers_substitution_then_deletion() {
        // "ab" vs "b": delete a + hit b beats sub+... both cost 1; the
        // backtrace takes the hit on b first, then deletes a.
        let a = align(&chars("ab"), &chars("b"));
        assert_eq!(a.counts().deletions, 1);
        assert_eq!(a.counts().hits, 1);
        // "ab" vs "ba": cost 2 via two substitutions or delete+insert.
        let a = align(&chars("ab"), &chars("ba"));
        assert_eq!(a.counts().substitutions, 2);
        // "a" vs "bc": sub + insert, substitution taken at the end.
        let a = align(&chars("a"), &chars("bc"));
        assert_eq!(
            a.ops.last(),
            Some(&EditOp::Substitute {
                reference: 'a',
                hypothesis: 'c'
            })
        );
    }

    #[test]
    fn matches_explicit_enumeration() {
        let alphabet = ['a', 'b', 'c'];
        let mut words = vec![String::new()];
        for len in 1..=4 {
            let mut next = Vec::new();
            for w in words.iter().filter(|w| w.len() == len - 1) {
                for c in alphabet {
                    next.push(format!("{w}{c}"));
                }
            }
            words.extend(next);
        }
        for a in &words {
            for b in &words {
                let (ca, cb) = (chars(a), chars(b));
                let best = all_alignment_costs(&ca, &cb).into_iter().min().unwrap();
                assert_eq!(align(&ca, &cb).distance(), best, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn word_and_char_scoring() {
        let r = score(&[("a b c", "a x c")], Unit::Word).unwrap();
        assert_eq!(r.substitutions, 1);
        assert!((r.error_rate() - 1.0 / 3.0).abs() < 1e-12);

        let r = score(&[("ab", "abc")], Unit::Char).unwrap();
        assert_eq!(r.insertions, 1);
        assert_eq!(r.error_rate(), 0.5);

        let r = score(&[("same words", "same words")], Unit::Word).unwrap();
        assert_eq!(r.error_rate(), 0.0);
        assert_eq!(r.hits, r.ref_length);
    }

    #[test]
    fn error_rate_can_exceed_one() {
        let r = score(&[("a", "x y z")], Unit::Word).unwrap();
        assert_eq!(r.errors(), 3);
        assert_eq!(r.error_rate(), 3.0);
    }

    #[test]
    fn char_scoring_normalizes_whitespace() {
        let r = score(&[("  a  b ", "a b")], Unit::Char).unwrap();
        assert_eq!(r.errors(), 0);
        assert_eq!(r.ref_length, 3);
    }

    #[test]
    fn all_empty_references_is_an_error() {
        assert!(matches!(
            score(&[("", "x"), (" ", "")], Unit::Word),
            Err(Error::EmptyInput(_))
        ));
        let none: [(&str, &str); 0] = [];
        assert!(score(&none, Unit::Char).is_err());
    }

    #[test]
    fn arabic_marks_optional() {
        let reference = "كَتَبَ";
        let hypothesis = "كتب";
        let plain = score(&[(reference, hypothesis)], Unit::Char).unwrap();
        assert!(plain.errors() > 0);
        let stripped = score_with(
            &[(reference, hypothesis)],
            ScoreOptions {
                unit: Unit::Char,
                strip_arabic_marks: true,
            },
        )
        .unwrap();
        assert_eq!(stripped.errors(), 0);
        assert_eq!(strip_arabic_marks("عـــلم"), "علم");
    }

    #[test]
    fn table_layout() {
        let r = ScoreReport {
            substitutions: 1,
            insertions: 0,
            deletions: 0,
            hits: 2,
            ref_length: 3,
        };
        let text = r.to_string();
        let header: Vec<_> = text.lines().next().unwrap().split_whitespace().collect();
        assert_eq!(header, ["Sub.", "Ins.", "Del.", "Hits", "Ref", "rate"]);
        assert!(text.ends_with("0.333"));
    }

    fn sentence() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "dd"]), 0..8)
            .prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn replay_reconstructs_both_sides(a in "[abc]{0,8}", b in "[abc]{0,8}") {
            let (ca, cb) = (chars(&a), chars(&b));
            let al = align(&ca, &cb);
            prop_assert_eq!(al.reference(), ca);
            prop_assert_eq!(al.hypothesis(), cb);
        }

        #[test]
        fn additive_and_order_free(
            pairs in prop::collection::vec((sentence(), sentence()), 1..6),
            split in 0usize..6,
        ) {
            prop_assume!(pairs.iter().any(|(r, _)| !r.trim().is_empty()));
            let opts = ScoreOptions::default();
            let whole: ScoreReport = pairs.iter().map(|(r, h)| score_pair(r, h, opts)).fold(Default::default(), Add::add);
            let k = split.min(pairs.len());
            let left: ScoreReport = pairs[..k].iter().map(|(r, h)| score_pair(r, h, opts)).fold(Default::default(), Add::add);
            let right: ScoreReport = pairs[k..].iter().map(|(r, h)| score_pair(r, h, opts)).fold(Default::default(), Add::add);
            prop_assert_eq!(left + right, whole);
            let mut reversed = pairs.clone();
            reversed.reverse();
            prop_assert_eq!(score(&reversed, Unit::Word).unwrap(), score(&pairs, Unit::Word).unwrap());
        }
    }
}
