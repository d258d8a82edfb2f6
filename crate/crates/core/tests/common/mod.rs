//! Oracles and corpus generators shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use std::collections::HashSet;

use kiru::corpus::{Sentence, Span};
use kiru::features::DICT_WIDTH;
use rand::seq::SliceRandom;
use rand::Rng;

/// Dictionary vector by enumerating every (word, start) pair.
pub fn brute_dict_vector(
    chars: &[char],
    words: &[Vec<char>],
    max_len: usize,
    t: usize,
) -> [u8; DICT_WIDTH] {
    let mut v = [0u8; DICT_WIDTH];
    for w in words.iter().filter(|w| !w.is_empty()) {
        let k = w.len();
        let c = k.min(max_len);
        for s in 0..chars.len() {
            if s + k > chars.len() || chars[s..s + k] != w[..] {
                continue;
            }
            let e = s + k;
            if e == t {
                v[c - 1] = 1;
            }
            if s == t {
                v[4 + c - 1] = 1;
            }
            if c >= 2 && s < t && e > t {
                v[8 + c - 2] = 1;
            }
        }
    }
    v
}

/// Brute-force vectors for every position of `chars` from a single
/// enumeration of (word, start) pairs.
pub fn brute_dict_vectors(
    chars: &[char],
    words: &[Vec<char>],
    max_len: usize,
) -> Vec<[u8; DICT_WIDTH]> {
    let n = chars.len();
    let mut out = vec![[0u8; DICT_WIDTH]; n];
    for w in words.iter().filter(|w| !w.is_empty()) {
        let k = w.len();
        let c = k.min(max_len);
        for s in 0..n {
            if s + k > n || chars[s..s + k] != w[..] {
                continue;
            }
            out[s][4 + c - 1] = 1;
            if s + k < n {
                out[s + k][c - 1] = 1;
            }
            if c >= 2 {
                for v in &mut out[s + 1..s + k] {
                    v[8 + c - 2] = 1;
                }
            }
        }
    }
    out
}

/// (correct, |gold|, |pred|) by materialising both span sets and
/// intersecting them.
pub fn brute_prf_counts(gold: &[Span], pred: &[Span]) -> (usize, usize, usize) {
    let g: HashSet<Span> = gold.iter().copied().collect();
    let p: HashSet<Span> = pred.iter().copied().collect();
    (g.intersection(&p).count(), g.len(), p.len())
}

pub fn brute_prf(gold: &[Span], pred: &[Span]) -> (f64, f64, f64) {
    let (c, g, p) = brute_prf_counts(gold, pred);
    let prec = if p == 0 { 0.0 } else { c as f64 / p as f64 };
    let rec = if g == 0 { 0.0 } else { c as f64 / g as f64 };
    let f1 = if prec + rec == 0.0 {
        0.0
    } else {
        2.0 * prec * rec / (prec + rec)
    };
    (prec, rec, f1)
}

/// Uniformly random partition of `0..n` (each inner boundary flips a coin).
pub fn random_partition<R: Rng>(n: usize, rng: &mut R) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = 0;
    for t in 1..n {
        if rng.gen_bool(0.5) {
            spans.push((start, t));
            start = t;
        }
    }
    if n > 0 {
        spans.push((start, n));
    }
    spans
}

/// Boundary decisions before positions `1..n`, as induced by a partition.
pub fn boundary_flags(spans: &[Span], n: usize) -> Vec<bool> {
    let mut flags = vec![false; n];
    for &(s, _) in spans {
        flags[s] = true;
    }
    flags
}

pub const HIRAGANA: &str =
    "あいうえおかきくけこさしすせそたちつてとなにぬねのはひふへほまみむめもやゆよらりるれろわをん";
pub const KANJI: &str =
    "日本語学校水池山川田中村上下大小人手目口耳足火木金土月年時間生先後前新古高安長";

fn pick(alphabet: &[char], len: usize, rng: &mut impl Rng) -> String {
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

/// Small lexicon-driven corpus of `n` sentences with 3 to 6 words each.
pub fn lexicon_corpus<R: Rng>(n: usize, rng: &mut R) -> Vec<Sentence> {
    let hira: Vec<char> = HIRAGANA.chars().collect();
    let kanji: Vec<char> = KANJI.chars().collect();
    let mut lexicon: Vec<String> = Vec::new();
    for _ in 0..12 {
        let len = rng.gen_range(1..=3);
        lexicon.push(pick(&kanji, len, rng));
        let len = rng.gen_range(1..=3);
        lexicon.push(pick(&hira, len, rng));
    }
    lexicon.sort();
    lexicon.dedup();
    (0..n)
        .map(|_| {
            let words: Vec<&String> = (0..rng.gen_range(3..=6))
                .map(|_| lexicon.choose(rng).unwrap())
                .collect();
            Sentence::from_words(words).unwrap()
        })
        .collect()
}

pub const MARKER_JOIN: char = 'P';
pub const MARKER_SPLIT: char = 'Q';
pub const BLOCK: usize = 9;

/// Long-dependency corpus: every sentence is a run of 9-character blocks.
/// A block opens with a marker followed by 8 random filler characters; the
/// marker `P` makes the whole block one word, `Q` makes every character a
/// word of its own. The boundary before the last filler is therefore decided
/// by a character 8 positions back.
pub fn marker_corpus<R: Rng>(n: usize, blocks: usize, rng: &mut R) -> Vec<Sentence> {
    let fillers: Vec<char> = "abcdef".chars().collect();
    (0..n)
        .map(|_| {
            let mut words = Vec::new();
            for _ in 0..blocks {
                let body = pick(&fillers, BLOCK - 1, rng);
                if rng.gen_bool(0.5) {
                    words.push(format!("{MARKER_JOIN}{body}"));
                } else {
                    words.push(MARKER_SPLIT.to_string());
                    words.extend(body.chars().map(String::from));
                }
            }
            Sentence::from_words(words).unwrap()
        })
        .collect()
}

const KANJI_POOL: &str =
    "日本語学校水池山川田中村上下大小人手目口耳足火木金土月年時間生先後前新古高安長\
    東西南北春夏秋冬朝昼夜雨雪風空海森林花草石糸車道店駅国町市村社会話言読書見聞食飲行来出入休働";

/// Zipf-weighted lexicon corpus mixing two character-type-like alphabets.
///
/// Content words are kanji compounds, kanji stems with hiragana endings, or
/// pure hiragana; most are followed by a short hiragana particle. Type
/// changes hint at boundaries without determining them, and rare words make
/// a held-out split contain unseen words.
pub struct MixedLexicon {
    content: Vec<String>,
    particles: Vec<String>,
    cumulative: Vec<f64>,
}

impl MixedLexicon {
    pub fn new<R: Rng>(rng: &mut R) -> Self {
        let hira: Vec<char> = HIRAGANA.chars().collect();
        let kanji: Vec<char> = KANJI_POOL.chars().collect();
        let mut content = Vec::new();
        for _ in 0..300 {
            let len = rng.gen_range(1..=3);
            content.push(pick(&kanji, len, rng));
        }
        for _ in 0..150 {
            let (a, b) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
            content.push(format!("{}{}", pick(&kanji, a, rng), pick(&hira, b, rng)));
        }
        for _ in 0..100 {
            let len = rng.gen_range(2..=4);
            content.push(pick(&hira, len, rng));
        }
        content.shuffle(rng);
        let mut seen = HashSet::new();
        content.retain(|w| seen.insert(w.clone()));
        let particles = [
            "の", "に", "を", "は", "が", "で", "と", "も", "から", "まで", "より", "へ",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let mut total = 0.0;
        let cumulative = (1..=content.len())
            .map(|r| {
                total += 1.0 / r as f64;
                total
            })
            .collect();
        Self {
            content,
            particles,
            cumulative,
        }
    }

    fn content_word<R: Rng>(&self, rng: &mut R) -> &str {
        let u = rng.gen::<f64>() * self.cumulative.last().unwrap();
        let i = self
            .cumulative
            .partition_point(|&c| c < u)
            .min(self.content.len() - 1);
        &self.content[i]
    }

    pub fn sentence<R: Rng>(&self, rng: &mut R) -> Sentence {
        let mut words: Vec<&str> = Vec::new();
        for _ in 0..rng.gen_range(2..=4) {
            words.push(self.content_word(rng));
            if rng.gen_bool(0.3) {
                words.push(self.content_word(rng));
            }
            if rng.gen_bool(0.75) {
                words.push(self.particles.choose(rng).unwrap());
            }
        }
        Sentence::from_words(words).unwrap()
    }

    pub fn corpus<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Sentence> {
        (0..n).map(|_| self.sentence(rng)).collect()
    }
}
