//! Per-position feature extraction.
//!
//! A position `t` is described by character and character-type n-grams
//! ending at `t` (orders 1 to 3, left-padded with a start sentinel), taken
//! at every offset of a symmetric window, and optionally by an 11-component
//! binary dictionary vector describing the boundary just before `t`.

use serde::{Deserialize, Serialize};

use crate::corpus::{SegDictionary, Sentence, Stream, Vocabulary, BOS_ID, EOS_ID, MAX_CUTOFF};
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 3;

/// Stand-in symbol for positions before the sentence start inside
/// character n-gram keys.
pub const BOS_SYMBOL: char = '\u{2}';

/// Coarse script class of a character.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CharType {
    Hiragana,
    Katakana,
    Kanji,
    Alphabet,
    Number,
    Symbol,
    Start,
    Terminal,
}

impl CharType {
    pub const ALL: [CharType; 8] = [
        CharType::Hiragana,
        CharType::Katakana,
        CharType::Kanji,
        CharType::Alphabet,
        CharType::Number,
        CharType::Symbol,
        CharType::Start,
        CharType::Terminal,
    ];

    /// One-letter code used inside character-type n-gram keys.
    pub fn code(self) -> char {
        match self {
            CharType::Hiragana => 'H',
            CharType::Katakana => 'K',
            CharType::Kanji => 'C',
            CharType::Alphabet => 'A',
            CharType::Number => 'N',
            CharType::Symbol => 'O',
            CharType::Start => 'S',
            CharType::Terminal => 'T',
        }
    }
}

const KANJI_NUMERALS: &str = "〇一二三四五六七八九十百千万億兆";

/// Total classification of a character. Kanji numerals count as numbers.
/// `Start`/`Terminal` are never returned; they only label sentinels.
pub fn classify_char_type(c: char) -> CharType {
    match c {
        '0'..='9' | '\u{FF10}'..='\u{FF19}' => CharType::Number,
        c if KANJI_NUMERALS.contains(c) => CharType::Number,
        '\u{3041}'..='\u{309F}' => CharType::Hiragana,
        '\u{30A0}'..='\u{30FF}' | '\u{31F0}'..='\u{31FF}' | '\u{FF66}'..='\u{FF9D}' => {
            CharType::Katakana
        }
        '\u{4E00}'..='\u{9FFF}' | '\u{3400}'..='\u{4DBF}' | '\u{3005}' => CharType::Kanji,
        'A'..='Z' | 'a'..='z' | '\u{FF21}'..='\u{FF3A}' | '\u{FF41}'..='\u{FF5A}' => {
            CharType::Alphabet
        }
        _ => CharType::Symbol,
    }
}

fn ngram_key(chars: &[char], t: usize, order: usize, map: impl Fn(Option<char>) -> char) -> String {
    (0..order)
        .rev()
        .map(|back| map(t.checked_sub(back).map(|i| chars[i])))
        .collect()
}

/// Key of the character n-gram `chars[t+1-order ..= t]`.
pub fn char_ngram_key(chars: &[char], t: usize, order: usize) -> String {
    ngram_key(chars, t, order, |c| c.unwrap_or(BOS_SYMBOL))
}

/// Key of the character-type n-gram ending at `t`.
pub fn ctype_ngram_key(chars: &[char], t: usize, order: usize) -> String {
    ngram_key(chars, t, order, |c| {
        c.map_or(CharType::Start, classify_char_type).code()
    })
}

/// Vocabulary ids of the n-grams ending at one position.
/// Arrays are indexed by `order - 1` (unigram, bigram, trigram).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NgramIds {
    pub chars: [u32; MAX_ORDER],
    pub ctypes: [u32; MAX_ORDER],
}

impl NgramIds {
    pub const BOS: NgramIds = NgramIds::sentinel(BOS_ID);
    pub const EOS: NgramIds = NgramIds::sentinel(EOS_ID);

    const fn sentinel(id: u32) -> Self {
        Self {
            chars: [id; MAX_ORDER],
            ctypes: [id; MAX_ORDER],
        }
    }

    pub fn get(&self, stream: Stream, order: usize) -> u32 {
        match stream {
            Stream::Char => self.chars[order - 1],
            Stream::CharType => self.ctypes[order - 1],
        }
    }
}

fn ids_at(chars: &[char], t: usize, vocab: &Vocabulary) -> NgramIds {
    let mut ids = NgramIds::BOS;
    for order in 1..=MAX_ORDER {
        ids.chars[order - 1] = vocab.id(Stream::Char, order, &char_ngram_key(chars, t, order));
        ids.ctypes[order - 1] =
            vocab.id(Stream::CharType, order, &ctype_ngram_key(chars, t, order));
    }
    ids
}

/// N-gram ids for position `t` of `sentence`. Unseen n-grams map to UNK.
pub fn extract_ngram_ids(sentence: &Sentence, t: usize, vocab: &Vocabulary) -> Result<NgramIds> {
    check_position(sentence, t)?;
    Ok(ids_at(&sentence.chars, t, vocab))
}

/// N-gram ids for every position of a character sequence.
pub fn sentence_ngram_ids(chars: &[char], vocab: &Vocabulary) -> Vec<NgramIds> {
    (0..chars.len()).map(|t| ids_at(chars, t, vocab)).collect()
}

/// Slot for window offset `t + offset`, substituting sentinels outside the sentence.
pub fn window_slot(ngrams: &[NgramIds], t: usize, offset: isize) -> NgramIds {
    let pos = t as isize + offset;
    if pos < 0 {
        NgramIds::BOS
    } else if pos as usize >= ngrams.len() {
        NgramIds::EOS
    } else {
        ngrams[pos as usize]
    }
}

pub fn check_window(window: usize) -> Result<()> {
    if window.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "window size must be odd, got {window}"
        )));
    }
    Ok(())
}

/// Window features around one position: one [`NgramIds`] per offset in
/// `-(window-1)/2 ..= (window-1)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionFeatures {
    pub slots: Vec<NgramIds>,
}

impl PositionFeatures {
    /// All ids flattened, six per window slot.
    pub fn ids(&self) -> Vec<u32> {
        self.slots
            .iter()
            .flat_map(|s| s.chars.iter().chain(s.ctypes.iter()).copied())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.slots.len() * 2 * MAX_ORDER
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

pub fn assemble_window(
    sentence: &Sentence,
    t: usize,
    vocab: &Vocabulary,
    window: usize,
) -> Result<PositionFeatures> {
    check_window(window)?;
    check_position(sentence, t)?;
    let half = (window / 2) as isize;
    let lo = t.saturating_sub(window / 2);
    let hi = (t + window / 2 + 1).min(sentence.len());
    // only the positions the window touches
    let local: Vec<NgramIds> = (lo..hi)
        .map(|p| ids_at(&sentence.chars, p, vocab))
        .collect();
    let slots = (-half..=half)
        .map(|off| {
            let pos = t as isize + off;
            if pos < 0 {
                NgramIds::BOS
            } else if pos as usize >= sentence.len() {
                NgramIds::EOS
            } else {
                local[pos as usize - lo]
            }
        })
        .collect();
    Ok(PositionFeatures { slots })
}

fn check_position(sentence: &Sentence, t: usize) -> Result<()> {
    if t >= sentence.len() {
        return Err(Error::Precondition(format!(
            "position {t} out of range for sentence of length {}",
            sentence.len()
        )));
    }
    Ok(())
}

pub const DICT_WIDTH: usize = 3 * MAX_CUTOFF - 1;

/// Component names in vector order.
pub const DICT_COMPONENTS: [&str; DICT_WIDTH] = [
    "L1", "L2", "L3", "L4", "R1", "R2", "R3", "R4", "I2", "I3", "I4",
];

/// Binary dictionary features for the boundary just before a character.
///
/// Layout: `[L1..L4, R1..R4, I2..I4]`. `Lk` fires when a dictionary word of
/// clipped length `k` ends right before the boundary, `Rk` when one starts
/// right after it, and `Ik` when one of clipped length `k >= 2` spans it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct DictVector(pub [u8; DICT_WIDTH]);

impl DictVector {
    pub fn left_index(len: usize) -> usize {
        len - 1
    }

    pub fn right_index(len: usize) -> usize {
        MAX_CUTOFF + len - 1
    }

    pub fn inside_index(len: usize) -> usize {
        debug_assert!(len >= 2);
        2 * MAX_CUTOFF + len - 2
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }
}

/// Dictionary vector at position `t`, by scanning the words that end at,
/// start at, or straddle the boundary before `t`.
pub fn dictionary_vector(
    sentence: &Sentence,
    t: usize,
    dict: &SegDictionary,
) -> Result<DictVector> {
    check_position(sentence, t)?;
    let chars = &sentence.chars;
    let n = chars.len();
    let clip = |k: usize| k.min(dict.max_len());
    let mut v = DictVector::default();
    let longest = dict.longest();
    for k in 1..=longest.min(t) {
        if dict.contains(&chars[t - k..t]) {
            v.0[DictVector::left_index(clip(k))] = 1;
        }
    }
    for k in 1..=longest.min(n - t) {
        if dict.contains(&chars[t..t + k]) {
            v.0[DictVector::right_index(clip(k))] = 1;
        }
    }
    // words [s, e) with s <= t-1 and e >= t+1
    for s in t.saturating_sub(longest.saturating_sub(1))..t {
        for e in t + 1..=(s + longest).min(n) {
            if clip(e - s) >= 2 && dict.contains(&chars[s..e]) {
                v.0[DictVector::inside_index(clip(e - s))] = 1;
            }
        }
    }
    Ok(v)
}

/// Dictionary vectors for every position, computed from one pass over all
/// dictionary matches in the sentence.
pub fn sentence_dictionary_vectors(chars: &[char], dict: &SegDictionary) -> Vec<DictVector> {
    let n = chars.len();
    let mut out = vec![DictVector::default(); n];
    for s in 0..n {
        for k in 1..=dict.longest().min(n - s) {
            if !dict.contains(&chars[s..s + k]) {
                continue;
            }
            let clipped = k.min(dict.max_len());
            out[s].0[DictVector::right_index(clipped)] = 1;
            if s + k < n {
                out[s + k].0[DictVector::left_index(clipped)] = 1;
            }
            // a word clipped to length 1 has no inside component
            if clipped >= 2 {
                for v in &mut out[s + 1..s + k] {
                    v.0[DictVector::inside_index(clipped)] = 1;
                }
            }
        }
    }
    out
}
