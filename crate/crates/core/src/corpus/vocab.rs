use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::Sentence;
use crate::error::{Error, Result};
use crate::features::{char_ngram_key, ctype_ngram_key, MAX_ORDER};

pub const UNK_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
pub const RESERVED_IDS: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Char,
    CharType,
}

impl Stream {
    pub const ALL: [Stream; 2] = [Stream::Char, Stream::CharType];
}

/// String-to-id map for one (stream, order) pair. Ids `0..RESERVED_IDS`
/// are the UNK/BOS/EOS sentinels; observed keys follow in lexicographic order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct NgramTable {
    keys: Vec<String>,
    index: HashMap<String, u32>,
}

impl From<Vec<String>> for NgramTable {
    fn from(mut keys: Vec<String>) -> Self {
        keys.sort();
        keys.dedup();
        let index = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i as u32 + RESERVED_IDS))
            .collect();
        Self { keys, index }
    }
}

impl From<NgramTable> for Vec<String> {
    fn from(table: NgramTable) -> Self {
        table.keys
    }
}

impl NgramTable {
    /// Id of `key`, or [`UNK_ID`] when unseen.
    pub fn get(&self, key: &str) -> u32 {
        self.index.get(key).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }

    /// Number of ids including the reserved sentinels.
    pub fn size(&self) -> usize {
        self.keys.len() + RESERVED_IDS as usize
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    min_count: usize,
    /// Indexed by `stream * MAX_ORDER + (order - 1)`.
    tables: Vec<NgramTable>,
}

fn slot(stream: Stream, order: usize) -> usize {
    debug_assert!((1..=MAX_ORDER).contains(&order));
    let s = match stream {
        Stream::Char => 0,
        Stream::CharType => 1,
    };
    s * MAX_ORDER + order - 1
}

impl Vocabulary {
    /// Collects every character and character-type n-gram (orders 1..=3,
    /// left-padded with the start sentinel) seen at least `min_count` times.
    pub fn build(corpus: &[Sentence], min_count: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut counts: Vec<HashMap<String, usize>> = vec![HashMap::new(); 2 * MAX_ORDER];
        for sentence in corpus {
            for t in 0..sentence.len() {
                for order in 1..=MAX_ORDER {
                    *counts[slot(Stream::Char, order)]
                        .entry(char_ngram_key(&sentence.chars, t, order))
                        .or_default() += 1;
                    *counts[slot(Stream::CharType, order)]
                        .entry(ctype_ngram_key(&sentence.chars, t, order))
                        .or_default() += 1;
                }
            }
        }
        let tables = counts
            .into_iter()
            .map(|table| {
                let keys: BTreeMap<_, _> =
                    table.into_iter().filter(|&(_, c)| c >= min_count).collect();
                NgramTable::from(keys.into_keys().collect::<Vec<_>>())
            })
            .collect();
        Ok(Self { min_count, tables })
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn table(&self, stream: Stream, order: usize) -> &NgramTable {
        &self.tables[slot(stream, order)]
    }

    pub fn id(&self, stream: Stream, order: usize, key: &str) -> u32 {
        self.table(stream, order).get(key)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.tables.len() != 2 * MAX_ORDER {
            return Err(Error::Precondition(format!(
                "vocabulary has {} tables, expected {}",
                self.tables.len(),
                2 * MAX_ORDER
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{CharType, BOS_SYMBOL};

    fn keys(v: &Vocabulary, stream: Stream, order: usize) -> Vec<String> {
        v.table(stream, order).keys().to_vec()
    }

    #[test]
    fn padded_ngrams_of_a_two_char_corpus() {
        let corpus = vec![Sentence::from_words(["ああ"]).unwrap()];
        let v = Vocabulary::build(&corpus, 1).unwrap();
        let bos = BOS_SYMBOL;
        assert_eq!(keys(&v, Stream::Char, 1), vec!["あ".to_string()]);
        let mut bi = vec![format!("{bos}あ"), "ああ".to_string()];
        bi.sort();
        assert_eq!(keys(&v, Stream::Char, 2), bi);
        let mut tri = vec![format!("{bos}{bos}あ"), format!("{bos}ああ")];
        tri.sort();
        assert_eq!(keys(&v, Stream::Char, 3), tri);
    }

    #[test]
    fn min_count_can_exclude_everything() {
        let corpus = vec![Sentence::from_words(["あい", "う"]).unwrap()];
        let v = Vocabulary::build(&corpus, 2).unwrap();
        for stream in [Stream::Char] {
            for order in 1..=3 {
                assert_eq!(v.table(stream, order).size(), RESERVED_IDS as usize);
            }
        }
        // char types repeat, so only the character stream is guaranteed empty here
        assert_eq!(v.id(Stream::Char, 1, "あ"), UNK_ID);
    }

    #[test]
    fn ctype_unigrams_are_char_types() {
        let corpus =
            vec![Sentence::from_words(["ため池", "の", "カタカナ", "ABC", "123", "。"]).unwrap()];
        let v = Vocabulary::build(&corpus, 1).unwrap();
        let codes: Vec<String> = CharType::ALL.iter().map(|t| t.code().to_string()).collect();
        for key in keys(&v, Stream::CharType, 1) {
            assert!(codes.contains(&key), "{key}");
        }
    }

    #[test]
    fn ids_are_dense_and_deterministic() {
        let corpus = vec![
            Sentence::from_words(["エルマー", "と", "りゅう"]).unwrap(),
            Sentence::from_words(["ため池", "など"]).unwrap(),
        ];
        let a = Vocabulary::build(&corpus, 1).unwrap();
        let b = Vocabulary::build(&corpus, 1).unwrap();
        assert_eq!(a, b);
        let table = a.table(Stream::Char, 2);
        let mut ids: Vec<u32> = table.keys().iter().map(|k| table.get(k)).collect();
        ids.sort();
        let expected: Vec<u32> = (RESERVED_IDS..table.size() as u32).collect();
        assert_eq!(ids, expected);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(matches!(Vocabulary::build(&[], 1), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn serde_round_trip() {
        let corpus = vec![Sentence::from_words(["ため池", "の", "絵"]).unwrap()];
        let v = Vocabulary::build(&corpus, 1).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(v, back);
    }
}
