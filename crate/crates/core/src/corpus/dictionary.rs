use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::Sentence;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_LEN: usize = 4;
/// Widest cutoff the fixed-width dictionary vector can represent.
pub const MAX_CUTOFF: usize = 4;

/// Word list backing the dictionary features.
///
/// Words of any length are stored; `max_len` is the length at which matches
/// are clipped when the dictionary vector is computed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "DictionaryRecord", into = "DictionaryRecord")]
pub struct SegDictionary {
    words: BTreeSet<String>,
    index: FxHashSet<Vec<char>>,
    /// Bit `k` is set when some word has length `k` (lengths above 63 share bit 63).
    lengths: u64,
    longest: usize,
    max_len: usize,
}

#[derive(Serialize, Deserialize)]
struct DictionaryRecord {
    max_len: usize,
    words: Vec<String>,
}

impl From<DictionaryRecord> for SegDictionary {
    fn from(record: DictionaryRecord) -> Self {
        Self::new(record.words, record.max_len)
    }
}

impl From<SegDictionary> for DictionaryRecord {
    fn from(dict: SegDictionary) -> Self {
        Self {
            max_len: dict.max_len,
            words: dict.words.into_iter().collect(),
        }
    }
}

fn length_bit(len: usize) -> u64 {
    1 << len.min(63)
}

impl Default for SegDictionary {
    fn default() -> Self {
        Self::new(Vec::<String>::new(), DEFAULT_MAX_LEN)
    }
}

impl SegDictionary {
    /// Empty strings are dropped. `max_len` is clamped into `1..=MAX_CUTOFF`.
    pub fn new<I, S>(words: I, max_len: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: BTreeSet<String> = words
            .into_iter()
            .map(Into::into)
            .filter(|w| !w.is_empty())
            .collect();
        let index: FxHashSet<Vec<char>> = words.iter().map(|w| w.chars().collect()).collect();
        let longest = index.iter().map(Vec::len).max().unwrap_or(0);
        let lengths = index.iter().fold(0u64, |m, w| m | length_bit(w.len()));
        Self {
            words,
            index,
            lengths,
            longest,
            max_len: max_len.clamp(1, MAX_CUTOFF),
        }
    }

    pub fn contains(&self, word: &[char]) -> bool {
        self.lengths & length_bit(word.len()) != 0 && self.index.contains(word)
    }

    pub fn contains_str(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Length in characters of the longest stored word.
    pub fn longest(&self) -> usize {
        self.longest
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// Builds a dictionary from the word types of one or more segmented corpora.
///
/// With `prune_singletons`, types whose total frequency across all corpora
/// is 1 are dropped. Passing train and test corpora together gives the
/// upper-bound "gold" dictionary.
pub fn build_dictionary(
    corpora: &[&[Sentence]],
    prune_singletons: bool,
    max_len: usize,
) -> Result<SegDictionary> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for corpus in corpora {
        for sentence in corpus.iter() {
            let spans = sentence.gold_spans()?;
            for &(s, e) in spans {
                *counts
                    .entry(sentence.chars[s..e].iter().collect())
                    .or_default() += 1;
            }
        }
    }
    let words = counts
        .into_iter()
        .filter(|&(_, c)| !prune_singletons || c > 1)
        .map(|(w, _)| w);
    Ok(SegDictionary::new(words, max_len))
}

/// Reads a dictionary file: UTF-8, one word per line, blank lines ignored.
pub fn read_dictionary(path: impl AsRef<Path>, max_len: usize) -> Result<SegDictionary> {
    let reader = BufReader::new(File::open(path)?);
    let mut words = Vec::new();
    for (i, line) in reader.split(b'\n').enumerate() {
        let mut line = line?;
        if line.last() == Some(&b'\r') {
            line.pop();
        }
        let word = String::from_utf8(line).map_err(|_| Error::Decode { line: i + 1 })?;
        if !word.is_empty() {
            words.push(word);
        }
    }
    Ok(SegDictionary::new(words, max_len))
}

pub fn write_dictionary(path: impl AsRef<Path>, dict: &SegDictionary) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for word in dict.words() {
        writeln!(w, "{word}")?;
    }
    w.flush()?;
    Ok(())
}
