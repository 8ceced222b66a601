//! Document-term matrices from phrase-segmented text and a fixed vocabulary.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub tokens: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<Term>,
}

impl Vocabulary {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &terms {
            if t.tokens.is_empty() {
                return Err(Error::invalid(format!("term `{}` has no tokens", t.label)));
            }
            if !seen.insert(t.label.as_str()) {
                return Err(Error::invalid(format!("duplicate term `{}`", t.label)));
            }
        }
        Ok(Self { terms })
    }

    /// One term per line: `label` or `label = token sequence`. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut seen = HashSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, seq) = match line.split_once('=') {
                Some((l, s)) => (l.trim(), s),
                None => (line, line),
            };
            let tokens = tokenize(seq);
            if label.is_empty() || tokens.is_empty() {
                return Err(Error::parse(n + 1, format!("no term in `{line}`")));
            }
            if !seen.insert(label.to_string()) {
                return Err(Error::parse(n + 1, format!("duplicate term `{label}`")));
            }
            terms.push(Term {
                label: label.to_string(),
                tokens,
            });
        }
        Ok(Self { terms })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Lowercases and splits on anything that is not alphanumeric, keeping
/// hyphens between alphanumerics (`eretz-israel`).
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (k, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if c == '-'
            && !cur.is_empty()
            && chars.get(k + 1).is_some_and(|n| n.is_alphanumeric())
        {
            cur.push('-');
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segmentation {
    /// One phrase per non-empty line.
    #[default]
    Line,
    /// Split on any of the given characters.
    Delimiter(String),
}

pub const DEFAULT_DELIMITERS: &str = ".;!?";

/// Segments text into phrases with ids `R1..Rn`.
pub fn split_phrases(text: &str, mode: &Segmentation) -> Result<Vec<(String, String)>> {
    let pieces: Vec<&str> = match mode {
        Segmentation::Line => text.lines().collect(),
        Segmentation::Delimiter(d) => text.split(|c: char| d.contains(c)).collect(),
    };
    let phrases: Vec<(String, String)> = pieces
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(k, s)| {
            (
                format!("R{}", k + 1),
                s.split_whitespace().collect::<Vec<_>>().join(" "),
            )
        })
        .collect();
    if phrases.is_empty() {
        return Err(Error::EmptyResult("no phrases in input text".into()));
    }
    Ok(phrases)
}

/// Indices of the terms present in a token stream. At each position the
/// longest matching term wins and its tokens are consumed.
fn present(tokens: &[String], by_length: &[(usize, &Term)]) -> Vec<usize> {
    let mut hit = Vec::new();
    let mut p = 0;
    while p < tokens.len() {
        let m = by_length
            .iter()
            .find(|(_, t)| tokens[p..].starts_with(&t.tokens));
        match m {
            Some(&(k, t)) => {
                hit.push(k);
                p += t.tokens.len();
            }
            None => p += 1,
        }
    }
    hit.sort_unstable();
    hit.dedup();
    hit
}

/// Binary phrase-by-term table. All-zero rows are kept.
pub fn build_dtm<T: Scalar>(
    phrases: &[(String, String)],
    vocab: &Vocabulary,
) -> Result<LabeledMatrix<T>> {
    if vocab.is_empty() {
        return Err(Error::invalid("vocabulary is empty"));
    }
    let mut seen = HashSet::new();
    for (id, _) in phrases {
        if !seen.insert(id.as_str()) {
            return Err(Error::invalid(format!("duplicate phrase id `{id}`")));
        }
    }
    let mut by_length: Vec<(usize, &Term)> = vocab.terms.iter().enumerate().collect();
    by_length.sort_by(|a, b| b.1.tokens.len().cmp(&a.1.tokens.len()).then(a.0.cmp(&b.0)));

    let hits: Vec<Vec<usize>> = phrases
        .par_iter()
        .map(|(_, text)| present(&tokenize(text), &by_length))
        .collect();
    let triplets = hits
        .iter()
        .enumerate()
        .flat_map(|(i, h)| h.iter().map(move |&j| (i, j, T::one())));
    let m = LabeledMatrix::from_triplets(
        phrases.iter().map(|p| p.0.clone()).collect(),
        vocab.terms.iter().map(|t| t.label.clone()).collect(),
        triplets,
    )?;
    for r in empty_rows(&m) {
        log::info!("phrase {r} contains no vocabulary term");
    }
    Ok(m)
}

/// Labels of all-zero rows.
pub fn empty_rows<T: Scalar>(m: &LabeledMatrix<T>) -> Vec<String> {
    m.row_sums()
        .iter()
        .zip(m.row_labels())
        .filter(|(s, _)| **s == T::zero())
        .map(|(_, l)| l.clone())
        .collect()
}
