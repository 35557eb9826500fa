//! Character confusion estimated from aligned reference/hypothesis pairs.
//!
//! Rows are truth characters, columns are what the recognizer produced. The
//! null symbol (`None`) stands for "nothing": a reference character aligned
//! to null was deleted, and the null row collects inserted characters.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::{align, normalize_whitespace, EditOp};

/// Additive smoothing applied to every cell before row normalization.
pub const SMOOTHING: f64 = 0.5;

const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Row-stochastic character confusion matrix. The null symbol is always the
/// last entry of the alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct ConfusionMatrix {
    alphabet: Vec<char>,
    probabilities: Vec<f64>,
}

/// On-disk layout: the alphabet with `null` as the null symbol, and the
/// probabilities flattened row-major.
#[derive(Serialize, Deserialize)]
struct MatrixFile {
    alphabet: Vec<Option<char>>,
    probabilities: Vec<f64>,
}

impl From<ConfusionMatrix> for MatrixFile {
    fn from(m: ConfusionMatrix) -> Self {
        let mut alphabet: Vec<Option<char>> = m.alphabet.into_iter().map(Some).collect();
        alphabet.push(None);
        MatrixFile {
            alphabet,
            probabilities: m.probabilities,
        }
    }
}

impl TryFrom<MatrixFile> for ConfusionMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        let nulls = f.alphabet.iter().filter(|c| c.is_none()).count();
        if nulls != 1 {
            return Err(Error::Confusion(format!(
                "alphabet must contain exactly one null symbol, found {nulls}"
            )));
        }
        let k = f.alphabet.len();
        if f.probabilities.len() != k * k {
            return Err(Error::Confusion(format!(
                "{} probabilities for an alphabet of {k}",
                f.probabilities.len()
            )));
        }
        // Reorder so the null symbol sits last.
        let null_at = f.alphabet.iter().position(Option::is_none).unwrap();
        let order: Vec<usize> = (0..k).filter(|&i| i != null_at).chain([null_at]).collect();
        let alphabet: Vec<char> = order[..k - 1]
            .iter()
            .map(|&i| f.alphabet[i].unwrap())
            .collect();
        let mut probabilities = Vec::with_capacity(k * k);
        for &r in &order {
            for &c in &order {
                probabilities.push(f.probabilities[r * k + c]);
            }
        }
        ConfusionMatrix::from_parts(alphabet, probabilities)
    }
}

impl ConfusionMatrix {
    /// Builds a matrix from an alphabet (without the null symbol) and a
    /// row-major table covering the alphabet plus null.
    pub fn from_parts(alphabet: Vec<char>, probabilities: Vec<f64>) -> Result<Self> {
        let unique: BTreeSet<char> = alphabet.iter().copied().collect();
        if unique.len() != alphabet.len() {
            return Err(Error::Confusion("alphabet contains duplicates".into()));
        }
        let k = alphabet.len() + 1;
        if probabilities.len() != k * k {
            return Err(Error::Confusion(format!(
                "{} probabilities for {k} symbols",
                probabilities.len()
            )));
        }
        if let Some(p) = probabilities.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Confusion(format!("invalid probability {p}")));
        }
        for (r, row) in probabilities.chunks_exact(k).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Confusion(format!("row {r} sums to {sum}")));
            }
        }
        Ok(Self {
            alphabet,
            probabilities,
        })
    }

    /// Identity confusion over `alphabet`: every character maps to itself.
    pub fn identity(alphabet: impl IntoIterator<Item = char>) -> Self {
        let alphabet: Vec<char> = alphabet
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let k = alphabet.len() + 1;
        let mut probabilities = vec![0.0; k * k];
        for i in 0..k {
            probabilities[i * k + i] = 1.0;
        }
        Self {
            alphabet,
            probabilities,
        }
    }

    /// Alphabet without the null symbol.
    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    /// Number of symbols including null.
    pub fn size(&self) -> usize {
        self.alphabet.len() + 1
    }

    fn index(&self, c: Option<char>) -> Option<usize> {
        match c {
            None => Some(self.alphabet.len()),
            Some(c) => self.alphabet.iter().position(|&a| a == c),
        }
    }

    /// `P(hypothesis = to | truth = from)`; `None` is the null symbol.
    /// Characters outside the alphabet have probability 0.
    pub fn prob(&self, from: Option<char>, to: Option<char>) -> f64 {
        match (self.index(from), self.index(to)) {
            (Some(r), Some(c)) => self.probabilities[r * self.size() + c],
            _ => 0.0,
        }
    }

    /// The full row for `from`, or `None` if it is outside the alphabet.
    pub fn row(&self, from: Option<char>) -> Option<&[f64]> {
        let k = self.size();
        self.index(from)
            .map(|r| &self.probabilities[r * k..(r + 1) * k])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probabilities.chunks_exact(self.size())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Raw alignment counts keyed by (truth, realized) with null as `None`.
#[derive(Debug, Clone, Default)]
pub struct ConfusionCounts {
    alphabet: BTreeSet<char>,
    cells: std::collections::HashMap<(Option<char>, Option<char>), u64>,
}

impl ConfusionCounts {
    /// Accumulates one character-level alignment of whitespace-normalized
    /// strings.
    pub fn add_pair(&mut self, reference: &str, hypothesis: &str) {
        let r: Vec<char> = normalize_whitespace(reference).chars().collect();
        let h: Vec<char> = normalize_whitespace(hypothesis).chars().collect();
        self.alphabet.extend(r.iter().copied());
        self.alphabet.extend(h.iter().copied());
        for op in align(&r, &h).ops {
            let key = match op {
                EditOp::Hit {
                    reference,
                    hypothesis,
                }
                | EditOp::Substitute {
                    reference,
                    hypothesis,
                } => (Some(reference), Some(hypothesis)),
                EditOp::Delete { reference } => (Some(reference), None),
                EditOp::Insert { hypothesis } => (None, Some(hypothesis)),
            };
            *self.cells.entry(key).or_default() += 1;
        }
    }

    pub fn get(&self, from: Option<char>, to: Option<char>) -> u64 {
        self.cells.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: ConfusionCounts) {
        self.alphabet.extend(other.alphabet);
        for (k, v) in other.cells {
            *self.cells.entry(k).or_default() += v;
        }
    }

    /// Normalizes each row after adding [`SMOOTHING`] to every cell.
    pub fn normalize(&self) -> ConfusionMatrix {
        let alphabet: Vec<char> = self.alphabet.iter().copied().collect();
        let symbols: Vec<Option<char>> = alphabet.iter().copied().map(Some).chain([None]).collect();
        let k = symbols.len();
        let mut probabilities = Vec::with_capacity(k * k);
        for &from in &symbols {
            let row: Vec<f64> = symbols
                .iter()
                .map(|&to| self.get(from, to) as f64 + SMOOTHING)
                .collect();
            let total: f64 = row.iter().sum();
            probabilities.extend(row.into_iter().map(|v| v / total));
        }
        ConfusionMatrix {
            alphabet,
            probabilities,
        }
    }
}

/// Estimates a confusion matrix from character alignments of each pair.
pub fn build_confusion<R, H>(pairs: &[(R, H)]) -> Result<ConfusionMatrix>
where
    R: AsRef<str>,
    H: AsRef<str>,
{
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no reference/hypothesis pairs"));
    }
    let mut counts = ConfusionCounts::default();
    for (r, h) in pairs {
        counts.add_pair(r.as_ref(), h.as_ref());
    }
    Ok(counts.normalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_stochastic(m: &ConfusionMatrix) {
        for row in m.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            assert!(row.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn clean_pairs_only_smooth_off_diagonal() {
        let m = build_confusion(&[("ab", "ab"), ("ba", "ba")]).unwrap();
        assert_eq!(m.alphabet(), ['a', 'b']);
        assert!(m.prob(Some('a'), Some('a')) > m.prob(Some('a'), Some('b')));
        // counts a->a = 2; row = [2.5, 0.5, 0.5] / 3.5
        assert!((m.prob(Some('a'), Some('a')) - 2.5 / 3.5).abs() < 1e-15);
        assert!((m.prob(Some('a'), Some('b')) - 0.5 / 3.5).abs() < 1e-15);
        assert_stochastic(&m);
    }

    #[test]
    fn substitutions_dominate_off_diagonal() {
        let pairs: Vec<(&str, &str)> = (0..100).map(|_| ("abc", "axc")).collect();
        let m = build_confusion(&pairs).unwrap();
        let row = m.row(Some('b')).unwrap();
        let x = m.alphabet().iter().position(|&c| c == 'x').unwrap();
        let b = m.alphabet().iter().position(|&c| c == 'b').unwrap();
        let best_off = row
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != b)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(best_off, x);
        assert_stochastic(&m);
    }

    #[test]
    fn deletions_and_insertions_use_null() {
        let mut counts = ConfusionCounts::default();
        counts.add_pair("abc", "ac");
        counts.add_pair("ac", "acd");
        assert_eq!(counts.get(Some('b'), None), 1);
        assert_eq!(counts.get(None, Some('d')), 1);
        assert_eq!(counts.get(Some('a'), Some('a')), 2);
        let m = counts.normalize();
        assert!(m.prob(Some('b'), None) > m.prob(Some('b'), Some('b')));
    }

    #[test]
    fn empty_input_rejected() {
        let none: [(&str, &str); 0] = [];
        assert!(matches!(build_confusion(&none), Err(Error::EmptyInput(_))));
        // Degenerate but non-empty: only the null row survives.
        let m = build_confusion(&[("", "")]).unwrap();
        assert_eq!(m.size(), 1);
        assert_stochastic(&m);
    }

    #[test]
    fn json_round_trip_and_layout() {
        let m = build_confusion(&[("ab", "ax")]).unwrap();
        let json = m.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["alphabet"], serde_json::json!(["a", "b", "x", null]));
        assert_eq!(v["probabilities"].as_array().unwrap().len(), 16);
        assert_eq!(ConfusionMatrix::from_json(&json).unwrap(), m);
    }

    #[test]
    fn json_null_may_appear_anywhere() {
        let json = r#"{"alphabet":[null,"a"],"probabilities":[1.0,0.0,0.25,0.75]}"#;
        let m = ConfusionMatrix::from_json(json).unwrap();
        assert_eq!(m.prob(Some('a'), Some('a')), 0.75);
        assert_eq!(m.prob(Some('a'), None), 0.25);
        assert_eq!(m.prob(None, None), 1.0);
    }

    #[test]
    fn invalid_json_matrices_rejected() {
        for bad in [
            r#"{"alphabet":["a"],"probabilities":[1.0]}"#,
            r#"{"alphabet":["a",null],"probabilities":[0.5,0.4,0.0,1.0]}"#,
            r#"{"alphabet":["a",null],"probabilities":[1.5,-0.5,0.0,1.0]}"#,
            r#"{"alphabet":["a",null],"probabilities":[1.0]}"#,
            r#"{"alphabet":["a","a",null],"probabilities":[1,0,0,0,1,0,0,0,1]}"#,
        ] {
            assert!(ConfusionMatrix::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn identity_rows() {
        let m = ConfusionMatrix::identity("cab".chars());
        assert_eq!(m.alphabet(), ['a', 'b', 'c']);
        assert_eq!(m.prob(Some('b'), Some('b')), 1.0);
        assert_eq!(m.prob(Some('b'), Some('a')), 0.0);
        assert_eq!(m.prob(Some('z'), Some('z')), 0.0);
        assert_stochastic(&m);
    }
}
