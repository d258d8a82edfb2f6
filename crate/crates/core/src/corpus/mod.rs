//! Segmented and raw corpora.
//!
//! The on-disk format is plain UTF-8 text with one sentence per line and
//! words separated by a single ASCII space. A directory of such files can
//! be read as a multi-domain corpus, with each file stem used as the
//! domain tag of its sentences.

mod dictionary;
mod labels;
mod vocab;

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub use dictionary::{
    build_dictionary, read_dictionary, write_dictionary, SegDictionary, DEFAULT_MAX_LEN, MAX_CUTOFF,
};
pub use labels::{encode_labels, Label, LabelScheme, LabelSequence};
pub use vocab::{NgramTable, Stream, Vocabulary, BOS_ID, EOS_ID, RESERVED_IDS, UNK_ID};

use crate::error::{Error, Result};

/// Half-open character range `[start, end)` covering one word.
pub type Span = (usize, usize);

pub const WORD_DELIMITER: char = ' ';

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub chars: Vec<char>,
    pub spans: Option<Vec<Span>>,
    pub domain: Option<String>,
}

impl Sentence {
    /// An unsegmented sentence.
    pub fn raw(text: &str) -> Self {
        Self {
            chars: text.chars().collect(),
            spans: None,
            domain: None,
        }
    }

    /// Builds a segmented sentence from its words.
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut chars = Vec::new();
        let mut spans = Vec::new();
        for word in words {
            let start = chars.len();
            chars.extend(word.as_ref().chars());
            spans.push((start, chars.len()));
        }
        Self::with_spans(chars, spans)
    }

    pub fn with_spans(chars: Vec<char>, spans: Vec<Span>) -> Result<Self> {
        if chars.contains(&WORD_DELIMITER) {
            return Err(Error::InvalidSpans(
                "sentence contains the word delimiter".into(),
            ));
        }
        validate_spans(&spans, chars.len())?;
        Ok(Self {
            chars,
            spans: Some(spans),
            domain: None,
        })
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.domain = Some(domain.into());
        self
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }

    pub fn gold_spans(&self) -> Result<&[Span]> {
        self.spans.as_deref().ok_or(Error::MissingSpans)
    }

    pub fn words(&self) -> Option<Vec<String>> {
        self.spans.as_ref().map(|spans| {
            spans
                .iter()
                .map(|&(s, e)| self.chars[s..e].iter().collect())
                .collect()
        })
    }

    /// Renders the sentence in corpus format. Unsegmented sentences are
    /// written as a single run of characters.
    pub fn to_line(&self) -> String {
        match self.words() {
            Some(words) => words.join(" "),
            None => self.text(),
        }
    }
}

/// Checks that `spans` are sorted, contiguous, non-empty and cover `[0, len)`.
pub fn validate_spans(spans: &[Span], len: usize) -> Result<()> {
    let mut cursor = 0;
    for &(start, end) in spans {
        if start != cursor {
            return Err(Error::InvalidSpans(format!(
                "span ({start}, {end}) does not start at {cursor}"
            )));
        }
        if end <= start {
            return Err(Error::InvalidSpans(format!("empty span ({start}, {end})")));
        }
        cursor = end;
    }
    if cursor != len {
        return Err(Error::InvalidSpans(format!(
            "spans cover [0, {cursor}) but sentence has {len} characters"
        )));
    }
    Ok(())
}

/// Parses one non-empty corpus line. `line_no` is 1-based and only used for errors.
pub fn parse_segmented_line(line: &str, line_no: usize) -> Result<Sentence> {
    let format_err = |message: &str| Error::Format {
        line: line_no,
        message: message.to_string(),
    };
    if line.starts_with(WORD_DELIMITER) {
        return Err(format_err("leading space"));
    }
    if line.ends_with(WORD_DELIMITER) {
        return Err(format_err("trailing space"));
    }
    let mut chars = Vec::with_capacity(line.len());
    let mut spans = Vec::new();
    for word in line.split(WORD_DELIMITER) {
        if word.is_empty() {
            return Err(format_err("consecutive spaces"));
        }
        let start = chars.len();
        chars.extend(word.chars());
        spans.push((start, chars.len()));
    }
    Ok(Sentence {
        chars,
        spans: Some(spans),
        domain: None,
    })
}

fn read_lines<R: BufRead>(
    mut reader: R,
    mut on_line: impl FnMut(&str, usize) -> Result<()>,
) -> Result<()> {
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        line_no += 1;
        if buf.last() == Some(&b'\n') {
            buf.pop();
            if buf.last() == Some(&b'\r') {
                buf.pop();
            }
        }
        let line = std::str::from_utf8(&buf).map_err(|_| Error::Decode { line: line_no })?;
        on_line(line, line_no)?;
    }
}

pub fn read_segmented<R: BufRead>(reader: R) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    read_lines(reader, |line, line_no| {
        if !line.is_empty() {
            sentences.push(parse_segmented_line(line, line_no)?);
        }
        Ok(())
    })?;
    Ok(sentences)
}

pub fn read_segmented_corpus(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    read_segmented(BufReader::new(File::open(path)?))
}

/// Reads raw text, one sentence per line. Empty lines are kept.
pub fn read_raw<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    read_lines(reader, |line, _| {
        lines.push(line.to_string());
        Ok(())
    })?;
    Ok(lines)
}

pub fn write_segmented<W: Write>(mut writer: W, sentences: &[Sentence]) -> Result<()> {
    for sentence in sentences {
        writeln!(writer, "{}", sentence.to_line())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_segmented_corpus(path: impl AsRef<Path>, sentences: &[Sentence]) -> Result<()> {
    write_segmented(BufWriter::new(File::create(path)?), sentences)
}

/// Reads every regular file in `dir` (sorted by file name) as a segmented
/// corpus, tagging its sentences with the file stem as domain.
pub fn read_domain_corpus(dir: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let domain = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for sentence in read_segmented_corpus(&path)? {
            out.push(sentence.with_domain(domain.clone()));
        }
    }
    Ok(out)
}
