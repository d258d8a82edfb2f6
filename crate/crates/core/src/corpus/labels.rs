use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Sentence;
use crate::error::{Error, Result};

/// Per-character boundary label. The declaration order is also the
/// tie-break order used when decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    B,
    I,
    E,
    S,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::B, Label::I, Label::E, Label::S];
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::B => "B",
            Label::I => "I",
            Label::E => "E",
            Label::S => "S",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    #[default]
    Bies,
    Bie,
    Bi,
}

impl LabelScheme {
    pub const ALL: [LabelScheme; 3] = [LabelScheme::Bies, LabelScheme::Bie, LabelScheme::Bi];

    /// Label inventory in output-class order.
    pub fn labels(self) -> &'static [Label] {
        match self {
            LabelScheme::Bies => &[Label::B, Label::I, Label::E, Label::S],
            LabelScheme::Bie => &[Label::B, Label::I, Label::E],
            LabelScheme::Bi => &[Label::B, Label::I],
        }
    }

    pub fn size(self) -> usize {
        self.labels().len()
    }

    pub fn index_of(self, label: Label) -> Option<usize> {
        self.labels().iter().position(|&l| l == label)
    }

    /// Whether `label` opens a new word under this scheme.
    pub fn starts_word(self, label: Label) -> bool {
        match self {
            LabelScheme::Bies => matches!(label, Label::B | Label::S),
            LabelScheme::Bie | LabelScheme::Bi => label == Label::B,
        }
    }

    /// Labels for one word of `len` characters.
    pub fn word_labels(self, len: usize, out: &mut Vec<Label>) {
        debug_assert!(len > 0);
        match (self, len) {
            (LabelScheme::Bies, 1) => out.push(Label::S),
            (LabelScheme::Bies | LabelScheme::Bie, _) => {
                out.push(Label::B);
                if len > 1 {
                    out.extend(std::iter::repeat_n(Label::I, len - 2));
                    out.push(Label::E);
                }
            }
            (LabelScheme::Bi, _) => {
                out.push(Label::B);
                out.extend(std::iter::repeat_n(Label::I, len - 1));
            }
        }
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelScheme::Bies => "bies",
            LabelScheme::Bie => "bie",
            LabelScheme::Bi => "bi",
        })
    }
}

impl FromStr for LabelScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bies" => Ok(LabelScheme::Bies),
            "bie" => Ok(LabelScheme::Bie),
            "bi" => Ok(LabelScheme::Bi),
            other => Err(Error::Config(format!("unknown label scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSequence {
    scheme: LabelScheme,
    labels: Vec<Label>,
}

impl LabelSequence {
    pub fn new(scheme: LabelScheme, labels: Vec<Label>) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| scheme.index_of(l).is_none()) {
            return Err(Error::Precondition(format!(
                "label {bad} is not part of the {scheme} scheme"
            )));
        }
        Ok(Self { scheme, labels })
    }

    /// Builds a sequence from output-class indices.
    pub fn from_indices(scheme: LabelScheme, indices: &[usize]) -> Result<Self> {
        let inventory = scheme.labels();
        let labels = indices
            .iter()
            .map(|&i| {
                inventory.get(i).copied().ok_or_else(|| {
                    Error::Precondition(format!("class index {i} out of range for {scheme}"))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { scheme, labels })
    }

    pub fn scheme(&self) -> LabelScheme {
        self.scheme
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .map(|&l| {
                self.scheme
                    .index_of(l)
                    .expect("label validated on construction")
            })
            .collect()
    }

    /// Whether the sequence obeys the grammar of its scheme (so that it can
    /// be decoded without repair).
    pub fn is_well_formed(&self) -> bool {
        use Label::*;
        let labels = &self.labels;
        match self.scheme {
            LabelScheme::Bies => {
                let mut in_word = false;
                for &l in labels {
                    match (in_word, l) {
                        (false, B) => in_word = true,
                        (false, S) => {}
                        (true, I) => {}
                        (true, E) => in_word = false,
                        _ => return false,
                    }
                }
                !in_word
            }
            LabelScheme::Bie => {
                // B (I* E)? per word
                let mut state = 0u8; // 0: outside, 1: after B, 2: after I
                for &l in labels {
                    state = match (state, l) {
                        (_, B) if state != 2 => 1,
                        (1 | 2, I) => 2,
                        (1 | 2, E) => 0,
                        _ => return false,
                    };
                }
                state != 2
            }
            LabelScheme::Bi => labels.first().is_none_or(|&l| l == B),
        }
    }
}

/// Encodes the gold segmentation of `sentence` under `scheme`.
pub fn encode_labels(sentence: &Sentence, scheme: LabelScheme) -> Result<LabelSequence> {
    let spans = sentence.gold_spans()?;
    let mut labels = Vec::with_capacity(sentence.len());
    for &(start, end) in spans {
        scheme.word_labels(end - start, &mut labels);
    }
    Ok(LabelSequence { scheme, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    fn tameike() -> Sentence {
        Sentence::from_words(["ため池", "の"]).unwrap()
    }

    #[test]
    fn bies_and_bi_encoding() {
        let s = tameike();
        assert_eq!(
            encode_labels(&s, LabelScheme::Bies).unwrap().labels(),
            &[B, I, E, S]
        );
        assert_eq!(
            encode_labels(&s, LabelScheme::Bie).unwrap().labels(),
            &[B, I, E, B]
        );
        assert_eq!(
            encode_labels(&s, LabelScheme::Bi).unwrap().labels(),
            &[B, I, I, B]
        );
        let single = Sentence::from_words(["猫"]).unwrap();
        assert_eq!(
            encode_labels(&single, LabelScheme::Bies).unwrap().labels(),
            &[S]
        );
    }

    #[test]
    fn missing_spans_is_an_error() {
        assert!(matches!(
            encode_labels(&Sentence::raw("ため池"), LabelScheme::Bies),
            Err(Error::MissingSpans)
        ));
    }

    #[test]
    fn inventory_sizes() {
        assert_eq!(LabelScheme::Bies.size(), 4);
        assert_eq!(LabelScheme::Bie.size(), 3);
        assert_eq!(LabelScheme::Bi.size(), 2);
    }

    #[test]
    fn grammar_checks() {
        let ok = |scheme, labels: &[Label]| {
            LabelSequence::new(scheme, labels.to_vec())
                .unwrap()
                .is_well_formed()
        };
        assert!(ok(LabelScheme::Bies, &[B, I, E, S]));
        assert!(!ok(LabelScheme::Bies, &[I, E, S]));
        assert!(!ok(LabelScheme::Bies, &[B, I]));
        assert!(ok(LabelScheme::Bie, &[B, B, E, B, I, E]));
        assert!(!ok(LabelScheme::Bie, &[B, I, B]));
        assert!(ok(LabelScheme::Bi, &[B, I, B]));
        assert!(!ok(LabelScheme::Bi, &[I, B]));
        assert!(LabelSequence::new(LabelScheme::Bi, vec![S]).is_err());
    }

    #[test]
    fn encoded_sequences_are_well_formed() {
        let s = Sentence::from_words(["a", "bc", "def", "g", "hijk"]).unwrap();
        for scheme in LabelScheme::ALL {
            let seq = encode_labels(&s, scheme).unwrap();
            assert_eq!(seq.len(), s.len());
            assert!(seq.is_well_formed(), "{scheme}");
        }
    }
}
