//! Turning per-character label distributions into segmentations.
//!
//! Decoding is pointwise: each position takes its argmax label and the
//! partition is read off the labels that open a word. Every label string
//! therefore decodes to a valid partition, including ones the scheme's
//! grammar would reject.

use rayon::prelude::*;

use crate::corpus::{Label, LabelScheme, LabelSequence, Span, WORD_DELIMITER};
use crate::error::{Error, Result};
use crate::model::SegmenterModel;
use crate::nn::Real;

/// Index of the largest score; exact ties go to the lower index, which is
/// the label order B < I < E < S.
pub fn argmax<T: Real>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate().skip(1) {
        if v > scores[best] {
            best = i;
        }
    }
    best
}

pub fn predict_labels<T: Real>(
    distributions: &[Vec<T>],
    scheme: LabelScheme,
) -> Result<LabelSequence> {
    let indices = distributions
        .iter()
        .enumerate()
        .map(|(t, y)| {
            if y.len() != scheme.size() {
                return Err(Error::ShapeMismatch {
                    op: "predict_labels",
                    expected: format!("{} scores", scheme.size()),
                    actual: format!("{} at position {t}", y.len()),
                });
            }
            Ok(argmax(y))
        })
        .collect::<Result<Vec<_>>>()?;
    LabelSequence::from_indices(scheme, &indices)
}

/// Spans induced by the word-opening labels. Position 0 always opens a word.
pub fn labels_to_segmentation(labels: &LabelSequence) -> Vec<Span> {
    boundaries_to_spans(labels.labels(), labels.scheme())
}

fn boundaries_to_spans(labels: &[Label], scheme: LabelScheme) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (t, &label) in labels.iter().enumerate().skip(1) {
        if scheme.starts_word(label) {
            spans.push((start, t));
            start = t;
        }
    }
    if !labels.is_empty() {
        spans.push((start, labels.len()));
    }
    spans
}

fn join_words(chars: &[char], spans: &[Span], out: &mut String) {
    for (k, &(s, e)) in spans.iter().enumerate() {
        if k > 0 {
            out.push(WORD_DELIMITER);
        }
        out.extend(&chars[s..e]);
    }
}

impl SegmenterModel {
    pub fn predict_labels(&self, chars: &[char]) -> Result<LabelSequence> {
        predict_labels(&self.forward_chars(chars)?, self.config().scheme)
    }

    pub fn predict_spans(&self, chars: &[char]) -> Result<Vec<Span>> {
        Ok(labels_to_segmentation(&self.predict_labels(chars)?))
    }

    /// Segments one line. Spaces already present are kept as fixed word
    /// boundaries and each chunk between them is segmented on its own.
    pub fn segment_line(&self, line: &str) -> Result<String> {
        let mut out = String::with_capacity(line.len() * 2);
        for chunk in line.split(WORD_DELIMITER).filter(|c| !c.is_empty()) {
            if !out.is_empty() {
                out.push(WORD_DELIMITER);
            }
            let chars: Vec<char> = chunk.chars().collect();
            join_words(&chars, &self.predict_spans(&chars)?, &mut out);
        }
        Ok(out)
    }

    /// Segments many lines in parallel; the output order matches the input.
    pub fn segment_lines<S: AsRef<str> + Sync>(&self, lines: &[S]) -> Result<Vec<String>> {
        lines
            .par_iter()
            .map(|l| self.segment_line(l.as_ref()))
            .collect()
    }
}

/// Segments newline-separated text. Each input line yields one output line
/// terminated by `\n`; empty lines stay empty.
pub fn segment(model: &SegmenterModel, raw_text: &str) -> Result<String> {
    let lines: Vec<&str> = raw_text.lines().collect();
    let mut out = String::with_capacity(raw_text.len() * 2);
    for line in model.segment_lines(&lines)? {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
