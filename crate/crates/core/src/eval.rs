//! Segmentation scoring: token-level precision/recall/F1 over exact word
//! spans, sentence accuracy, and per-domain breakdowns.
//!
//! Corpus scores are micro-averaged: counts are summed over sentences
//! before the ratios are taken.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::AddAssign;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Sentence, Span};
use crate::error::{Error, Result};

pub const ALL_DOMAINS: &str = "All";

/// Word counts behind precision and recall.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PrfCounts {
    pub correct: usize,
    pub gold: usize,
    pub pred: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl PrfCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.pred)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.gold)
    }

    /// Harmonic mean of precision and recall, 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn prf(&self) -> Prf {
        Prf {
            precision: self.precision(),
            recall: self.recall(),
            f1: self.f1(),
        }
    }
}

impl AddAssign for PrfCounts {
    fn add_assign(&mut self, o: Self) {
        self.correct += o.correct;
        self.gold += o.gold;
        self.pred += o.pred;
    }
}

impl std::iter::Sum for PrfCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |mut a, b| {
            a += b;
            a
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Counts exact span matches between two span lists sorted by start, as
/// every valid partition is.
pub fn span_counts(gold: &[Span], pred: &[Span]) -> PrfCounts {
    let (mut i, mut j, mut correct) = (0, 0, 0);
    while i < gold.len() && j < pred.len() {
        match gold[i].cmp(&pred[j]) {
            std::cmp::Ordering::Equal => {
                correct += 1;
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    PrfCounts {
        correct,
        gold: gold.len(),
        pred: pred.len(),
    }
}

fn sentence_counts(index: usize, gold: &Sentence, pred: &Sentence) -> Result<PrfCounts> {
    if gold.chars != pred.chars {
        return Err(Error::CharMismatch { index });
    }
    Ok(span_counts(gold.gold_spans()?, pred.gold_spans()?))
}

/// Token-level scores of one predicted sentence against its gold version.
pub fn token_prf(gold: &Sentence, pred: &Sentence) -> Result<Prf> {
    Ok(sentence_counts(0, gold, pred)?.prf())
}

fn check_aligned(gold: &[Sentence], pred: &[Sentence]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch(format!(
            "{} gold sentences but {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    Ok(())
}

fn per_sentence(gold: &[Sentence], pred: &[Sentence]) -> Result<Vec<PrfCounts>> {
    check_aligned(gold, pred)?;
    gold.par_iter()
        .zip(pred)
        .enumerate()
        .map(|(i, (g, p))| sentence_counts(i, g, p))
        .collect()
}

/// Micro-averaged token counts over aligned corpora.
pub fn corpus_prf(gold: &[Sentence], pred: &[Sentence]) -> Result<PrfCounts> {
    Ok(per_sentence(gold, pred)?.into_iter().sum())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SentenceAccuracy {
    pub total: usize,
    pub incorrect: usize,
}

impl SentenceAccuracy {
    pub fn correct(&self) -> usize {
        self.total - self.incorrect
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.correct(), self.total)
    }
}

impl AddAssign for SentenceAccuracy {
    fn add_assign(&mut self, o: Self) {
        self.total += o.total;
        self.incorrect += o.incorrect;
    }
}

fn is_exact(c: &PrfCounts) -> bool {
    c.correct == c.gold && c.correct == c.pred
}

/// Fraction of sentences segmented exactly as in gold, with the count of
/// those that were not.
pub fn sentence_accuracy(gold: &[Sentence], pred: &[Sentence]) -> Result<SentenceAccuracy> {
    let counts = per_sentence(gold, pred)?;
    Ok(SentenceAccuracy {
        total: counts.len(),
        incorrect: counts.iter().filter(|c| !is_exact(c)).count(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvalRow {
    pub domain: String,
    pub tokens: PrfCounts,
    pub sentences: SentenceAccuracy,
}

impl EvalRow {
    fn new(domain: impl Into<String>) -> Self {
        Self {
            domain: domain.into(),
            tokens: PrfCounts::default(),
            sentences: SentenceAccuracy::default(),
        }
    }

    fn add(&mut self, c: PrfCounts) {
        self.tokens += c;
        self.sentences += SentenceAccuracy {
            total: 1,
            incorrect: usize::from(!is_exact(&c)),
        };
    }
}

/// Evaluation table: one row per domain (sorted by name) and an `All` row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    pub domains: Vec<EvalRow>,
    pub all: EvalRow,
}

/// Whole-corpus scores without a domain breakdown.
pub fn evaluate(gold: &[Sentence], pred: &[Sentence]) -> Result<EvalReport> {
    let mut all = EvalRow::new(ALL_DOMAINS);
    for c in per_sentence(gold, pred)? {
        all.add(c);
    }
    Ok(EvalReport {
        domains: Vec::new(),
        all,
    })
}

/// Per-domain scores. Every gold sentence must carry a domain tag.
pub fn domain_report(gold: &[Sentence], pred: &[Sentence]) -> Result<EvalReport> {
    if let Some(index) = gold.iter().position(|s| s.domain.is_none()) {
        return Err(Error::Untagged { index });
    }
    let counts = per_sentence(gold, pred)?;
    let mut rows: BTreeMap<&str, EvalRow> = BTreeMap::new();
    let mut all = EvalRow::new(ALL_DOMAINS);
    for (s, c) in gold.iter().zip(counts) {
        let d = s.domain.as_deref().unwrap_or_default();
        rows.entry(d).or_insert_with(|| EvalRow::new(d)).add(c);
        all.add(c);
    }
    Ok(EvalReport {
        domains: rows.into_values().collect(),
        all,
    })
}

impl EvalReport {
    pub fn rows(&self) -> impl Iterator<Item = &EvalRow> {
        self.domains.iter().chain(std::iter::once(&self.all))
    }

    /// Aligned plain-text table; scores are percentages.
    pub fn to_table(&self) -> String {
        let width = self
            .rows()
            .map(|r| r.domain.chars().count())
            .max()
            .unwrap_or(0)
            .max(6);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>7}  {:>7}  {:>7}  {:>8}  {:>9}  {:>8}",
            "domain", "P", "R", "F1", "#sent", "#incorrect", "sent.acc"
        );
        for r in self.rows() {
            let p = r.tokens.prf();
            let _ = writeln!(
                out,
                "{:<width$}  {:>7.2}  {:>7.2}  {:>7.2}  {:>8}  {:>9}  {:>8.2}",
                r.domain,
                100.0 * p.precision,
                100.0 * p.recall,
                100.0 * p.f1,
                r.sentences.total,
                r.sentences.incorrect,
                100.0 * r.sentences.accuracy(),
            );
        }
        out
    }

    /// One `key=value` line per row.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for r in self.rows() {
            let p = r.tokens.prf();
            let _ = writeln!(
                out,
                "domain={} precision={:.6} recall={:.6} f1={:.6} sentences={} incorrect={} accuracy={:.6}",
                r.domain,
                p.precision,
                p.recall,
                p.f1,
                r.sentences.total,
                r.sentences.incorrect,
                r.sentences.accuracy(),
            );
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let row = |r: &EvalRow| {
            let p = r.tokens.prf();
            serde_json::json!({
                "domain": r.domain,
                "precision": p.precision,
                "recall": p.recall,
                "f1": p.f1,
                "correct_words": r.tokens.correct,
                "gold_words": r.tokens.gold,
                "pred_words": r.tokens.pred,
                "sentences": r.sentences.total,
                "incorrect": r.sentences.incorrect,
                "accuracy": r.sentences.accuracy(),
            })
        };
        serde_json::json!({
            "domains": self.domains.iter().map(row).collect::<Vec<_>>(),
            "all": row(&self.all),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(line: &str) -> Sentence {
        Sentence::from_words(line.split(' ')).unwrap()
    }

    #[test]
    fn identical_is_perfect() {
        let p = token_prf(&s("あ いう え"), &s("あ いう え")).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_worked_example() {
        let p = token_prf(&s("あ い う"), &s("あい う")).unwrap();
        assert!((p.precision - 0.5).abs() < 1e-12);
        assert!((p.recall - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.f1 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn char_mismatch_is_error() {
        assert!(matches!(
            token_prf(&s("あ い"), &s("あ う")),
            Err(Error::CharMismatch { .. })
        ));
    }

    #[test]
    fn swapping_swaps_p_and_r() {
        let (g, p) = (s("ab c de"), s("a bc de"));
        let a = token_prf(&g, &p).unwrap();
        let b = token_prf(&p, &g).unwrap();
        assert_eq!((a.precision, a.recall, a.f1), (b.recall, b.precision, b.f1));
    }

    #[test]
    fn sentence_accuracy_counts() {
        let gold = vec![s("a b"), s("cd"), s("e f"), s("g")];
        let mut pred = gold.clone();
        assert_eq!(sentence_accuracy(&gold, &pred).unwrap().incorrect, 0);
        assert_eq!(sentence_accuracy(&gold, &pred).unwrap().accuracy(), 1.0);
        pred[2] = s("ef");
        let acc = sentence_accuracy(&gold, &pred).unwrap();
        assert_eq!((acc.accuracy(), acc.incorrect), (0.75, 1));
        assert!(matches!(
            sentence_accuracy(&gold, &pred[..3]),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn single_domain_has_identical_all_row() {
        let gold: Vec<_> = [s("a b"), s("cd e")]
            .into_iter()
            .map(|x| x.with_domain("news"))
            .collect();
        let pred = vec![s("ab"), s("cd e")];
        let r = domain_report(&gold, &pred).unwrap();
        assert_eq!(r.domains.len(), 1);
        assert_eq!(r.domains[0].tokens, r.all.tokens);
        assert_eq!(r.domains[0].sentences, r.all.sentences);
    }

    #[test]
    fn untagged_sentence_is_error() {
        let gold = vec![s("a").with_domain("x"), s("b")];
        assert!(matches!(
            domain_report(&gold, &gold),
            Err(Error::Untagged { index: 1 })
        ));
    }

    #[test]
    fn report_formats() {
        let gold = vec![s("a b").with_domain("blog"), s("c d").with_domain("news")];
        let pred = vec![s("ab"), s("c d")];
        let r = domain_report(&gold, &pred).unwrap();
        let table = r.to_table();
        assert_eq!(table.lines().count(), 4);
        assert!(table.lines().last().unwrap().starts_with("All"));
        let kv = r.to_key_values();
        assert!(kv.contains("domain=All") && kv.contains("incorrect=1"));
        assert_eq!(r.to_json()["all"]["incorrect"], 1);
    }
}
