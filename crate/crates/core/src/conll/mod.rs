//! Reading and writing the CoNLL-2012 tabular format.
//!
//! A file is a sequence of `#begin document (<id>); part <nnn>` blocks, each
//! holding sentences separated by blank lines and closed by `#end document`.
//! Every token row carries the 13 annotation layers: document id, part,
//! word number, word, POS, parse bit, lemma, frameset, sense, speaker,
//! named entity, zero or more argument columns, and coreference.
//!
//! Consecutive blocks with the same document id become the parts of one
//! [`Document`]. Arabic text is kept as opaque UTF-8.

mod mentions;
mod tags;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use mentions::{encode_mentions, extract_mentions, raw_mentions, EncodeError};
pub use tags::{format_cell, parse_cell, Boundary, CorefTag, EMPTY_CELL};

/// Surface form of an explicit zero pronoun in an extended file.
pub const PRO_MARKER: &str = "*pro*";

/// Fewest columns a row may have: 11 fixed layers, no arguments, coreference.
pub const MIN_COLUMNS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenRow {
    pub doc_id: String,
    pub part_number: usize,
    pub word_number: usize,
    pub word: String,
    pub pos: String,
    pub parse_bit: String,
    pub lemma: String,
    pub frameset_id: String,
    pub word_sense: String,
    pub speaker: String,
    pub named_entity: String,
    pub arguments: Vec<String>,
    pub coref: Vec<CorefTag>,
}

impl TokenRow {
    pub fn is_pro(&self) -> bool {
        self.word == PRO_MARKER
    }

    pub fn column_count(&self) -> usize {
        MIN_COLUMNS + self.arguments.len()
    }

    fn columns(&self) -> Vec<String> {
        let mut cols = vec![
            self.doc_id.clone(),
            self.part_number.to_string(),
            self.word_number.to_string(),
            self.word.clone(),
            self.pos.clone(),
            self.parse_bit.clone(),
            self.lemma.clone(),
            self.frameset_id.clone(),
            self.word_sense.clone(),
            self.speaker.clone(),
            self.named_entity.clone(),
        ];
        cols.extend(self.arguments.iter().cloned());
        cols.push(format_cell(&self.coref));
        cols
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub rows: Vec<TokenRow>,
}

impl Sentence {
    pub fn new(rows: Vec<TokenRow>) -> Self {
        Sentence { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of tokens that are not `*pro*` markers.
    pub fn overt_len(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_pro()).count()
    }

    pub fn overt_rows(&self) -> impl Iterator<Item = &TokenRow> {
        self.rows.iter().filter(|r| !r.is_pro())
    }

    /// Row index of each overt token.
    pub fn overt_row_indices(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_pro())
            .map(|(i, _)| i)
            .collect()
    }

    /// Gap index of every `*pro*` row, paired with its row index.
    pub fn pro_gaps(&self) -> Vec<(usize, usize)> {
        let mut overt = 0;
        let mut out = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            if r.is_pro() {
                out.push((i, overt));
            } else {
                overt += 1;
            }
        }
        out
    }

    /// Word number of the first row; the numbering base of the sentence.
    pub fn numbering_base(&self) -> usize {
        self.rows.first().map_or(0, |r| r.word_number)
    }

    pub fn renumber(&mut self, base: usize) {
        for (i, r) in self.rows.iter_mut().enumerate() {
            r.word_number = base + i;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Part {
    pub number: usize,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub parts: Vec<Part>,
}

impl Document {
    pub fn sentence(&self, part: usize, sentence: usize) -> Option<&Sentence> {
        self.parts.get(part)?.sentences.get(sentence)
    }

    pub fn sentences(&self) -> impl Iterator<Item = (usize, usize, &Sentence)> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(p, part)| part.sentences.iter().enumerate().map(move |(s, sent)| (p, s, sent)))
    }

    pub fn rows(&self) -> impl Iterator<Item = &TokenRow> {
        self.parts.iter().flat_map(|p| p.sentences.iter()).flat_map(|s| s.rows.iter())
    }

    pub fn sentence_count(&self) -> usize {
        self.parts.iter().map(|p| p.sentences.len()).sum()
    }

    pub fn pro_count(&self) -> usize {
        self.rows().filter(|r| r.is_pro()).count()
    }

    pub fn has_pro_rows(&self) -> bool {
        self.rows().any(TokenRow::is_pro)
    }

    /// Chain ids that appear anywhere in the coreference column.
    pub fn chain_ids(&self) -> std::collections::BTreeSet<crate::model::ChainId> {
        self.rows().flat_map(|r| r.coref.iter().map(|t| t.chain_id)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("input is not valid UTF-8 (byte offset {offset})")]
    NonUtf8Input { offset: usize },
    #[error("line {line}: malformed document framing: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: expected at least {expected} columns, found {found}")]
    ColumnCountMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: bad number in column {column}: {value:?}")]
    MalformedNumber { line: usize, column: usize, value: String },
    #[error("line {line}: unparseable coreference cell {cell:?}")]
    MalformedCorefTag { line: usize, cell: String },
    #[error("line {line}: unbalanced coreference bracket for chain {chain_id}")]
    UnbalancedCorefBrackets { line: usize, chain_id: u32 },
    #[error("line {line}: document {doc_id:?} is never closed")]
    UnterminatedDocument { line: usize, doc_id: String },
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::NonUtf8Input { .. } => None,
            ParseError::MalformedHeader { line, .. }
            | ParseError::ColumnCountMismatch { line, .. }
            | ParseError::MalformedNumber { line, .. }
            | ParseError::MalformedCorefTag { line, .. }
            | ParseError::UnbalancedCorefBrackets { line, .. }
            | ParseError::UnterminatedDocument { line, .. } => Some(*line),
        }
    }
}

pub fn parse_conll_bytes(input: &[u8]) -> Result<Vec<Document>, ParseError> {
    let text = std::str::from_utf8(input)
        .map_err(|e| ParseError::NonUtf8Input { offset: e.valid_up_to() })?;
    parse_conll(text)
}

struct OpenBlock {
    doc_id: String,
    part: usize,
    header_line: usize,
    sentences: Vec<Sentence>,
    pending: Vec<TokenRow>,
    pending_lines: Vec<usize>,
}

impl OpenBlock {
    fn flush(&mut self) -> Result<(), ParseError> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let rows = std::mem::take(&mut self.pending);
        let lines = std::mem::take(&mut self.pending_lines);
        check_sentence(&rows, &lines)?;
        self.sentences.push(Sentence { rows });
        Ok(())
    }
}

// Per-sentence arity and bracket balance.
fn check_sentence(rows: &[TokenRow], lines: &[usize]) -> Result<(), ParseError> {
    let arity = rows[0].column_count();
    for (row, &line) in rows.iter().zip(lines) {
        if row.column_count() != arity {
            return Err(ParseError::ColumnCountMismatch { line, expected: arity, found: row.column_count() });
        }
    }
    let mut open: Vec<(u32, usize)> = Vec::new();
    for (row, &line) in rows.iter().zip(lines) {
        for tag in &row.coref {
            match tag.boundary {
                Boundary::Open => open.push((tag.chain_id, line)),
                Boundary::OpenAndClose => {}
                Boundary::Close => match open.iter().rposition(|(c, _)| *c == tag.chain_id) {
                    Some(i) => {
                        open.remove(i);
                    }
                    None => return Err(ParseError::UnbalancedCorefBrackets { line, chain_id: tag.chain_id }),
                },
            }
        }
    }
    if let Some(&(chain_id, line)) = open.first() {
        return Err(ParseError::UnbalancedCorefBrackets { line, chain_id });
    }
    Ok(())
}

fn parse_header(line: &str) -> Option<(String, usize)> {
    let rest = line.strip_prefix("#begin document (")?;
    let close = rest.rfind(");")?;
    let id = &rest[..close];
    let part = rest[close + 2..].trim().strip_prefix("part")?.trim();
    if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((id.to_string(), part.parse().ok()?))
}

fn parse_number(value: &str, line: usize, column: usize) -> Result<usize, ParseError> {
    value
        .parse()
        .map_err(|_| ParseError::MalformedNumber { line, column, value: value.to_string() })
}

fn parse_row(text: &str, line: usize) -> Result<TokenRow, ParseError> {
    let cols: Vec<&str> = text.split_whitespace().collect();
    if cols.len() < MIN_COLUMNS {
        return Err(ParseError::ColumnCountMismatch { line, expected: MIN_COLUMNS, found: cols.len() });
    }
    let last = cols.len() - 1;
    let coref = parse_cell(cols[last])
        .map_err(|_| ParseError::MalformedCorefTag { line, cell: cols[last].to_string() })?;
    Ok(TokenRow {
        doc_id: cols[0].to_string(),
        part_number: parse_number(cols[1], line, 2)?,
        word_number: parse_number(cols[2], line, 3)?,
        word: cols[3].to_string(),
        pos: cols[4].to_string(),
        parse_bit: cols[5].to_string(),
        lemma: cols[6].to_string(),
        frameset_id: cols[7].to_string(),
        word_sense: cols[8].to_string(),
        speaker: cols[9].to_string(),
        named_entity: cols[10].to_string(),
        arguments: cols[11..last].iter().map(|s| s.to_string()).collect(),
        coref,
    })
}

/// Parses a CoNLL-2012 file into documents, in order of first appearance.
pub fn parse_conll(input: &str) -> Result<Vec<Document>, ParseError> {
    let mut docs: Vec<Document> = Vec::new();
    let mut block: Option<OpenBlock> = None;

    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let text = raw.strip_suffix('\r').unwrap_or(raw);

        if text.starts_with("#begin document") {
            if let Some(b) = &block {
                return Err(ParseError::MalformedHeader {
                    line,
                    reason: format!("document {:?} opened on line {} is not closed", b.doc_id, b.header_line),
                });
            }
            let (doc_id, part) = parse_header(text).ok_or_else(|| ParseError::MalformedHeader {
                line,
                reason: format!("cannot read header {text:?}"),
            })?;
            block = Some(OpenBlock {
                doc_id,
                part,
                header_line: line,
                sentences: Vec::new(),
                pending: Vec::new(),
                pending_lines: Vec::new(),
            });
            continue;
        }

        if text.starts_with("#end document") {
            let mut b = block.take().ok_or_else(|| ParseError::MalformedHeader {
                line,
                reason: "#end document without #begin document".into(),
            })?;
            b.flush()?;
            let expected = match docs.last() {
                Some(d) if d.doc_id == b.doc_id => d.parts.len(),
                _ => 0,
            };
            if b.part != expected {
                return Err(ParseError::MalformedHeader {
                    line: b.header_line,
                    reason: format!("part {} of {:?} out of sequence, expected {}", b.part, b.doc_id, expected),
                });
            }
            let part = Part { number: b.part, sentences: b.sentences };
            match docs.last_mut() {
                Some(d) if d.doc_id == b.doc_id => d.parts.push(part),
                _ => docs.push(Document { doc_id: b.doc_id, parts: vec![part] }),
            }
            continue;
        }

        match block.as_mut() {
            None => {
                if !text.trim().is_empty() {
                    return Err(ParseError::MalformedHeader {
                        line,
                        reason: "content outside a #begin/#end document block".into(),
                    });
                }
            }
            Some(b) => {
                if text.trim().is_empty() {
                    b.flush()?;
                } else if text.starts_with('#') {
                    return Err(ParseError::MalformedHeader { line, reason: format!("unexpected directive {text:?}") });
                } else {
                    let row = parse_row(text, line)?;
                    b.pending.push(row);
                    b.pending_lines.push(line);
                }
            }
        }
    }

    if let Some(b) = block {
        return Err(ParseError::UnterminatedDocument { line: b.header_line, doc_id: b.doc_id });
    }
    Ok(docs)
}

/// How columns are separated on output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ColumnLayout {
    /// One space between columns. This is the canonical form.
    #[default]
    Single,
    /// Columns padded to the widest cell of their sentence, three spaces apart.
    Aligned,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WriteError {
    #[error("{doc_id} part {part} sentence {sentence}: {reason}")]
    InvariantViolation { doc_id: String, part: usize, sentence: usize, reason: String },
}

pub fn write_conll(docs: &[Document]) -> Result<String, WriteError> {
    write_conll_with(docs, ColumnLayout::Single)
}

pub fn write_conll_with(docs: &[Document], layout: ColumnLayout) -> Result<String, WriteError> {
    let mut out = String::new();
    for doc in docs {
        for (p, part) in doc.parts.iter().enumerate() {
            let _ = writeln!(out, "#begin document ({}); part {:03}", doc.doc_id, part.number);
            for (s, sent) in part.sentences.iter().enumerate() {
                let violation = |reason: String| WriteError::InvariantViolation {
                    doc_id: doc.doc_id.clone(),
                    part: p,
                    sentence: s,
                    reason,
                };
                if sent.rows.is_empty() {
                    return Err(violation("empty sentence".into()));
                }
                let lines: Vec<usize> = (0..sent.rows.len()).collect();
                check_sentence(&sent.rows, &lines).map_err(|e| violation(e.to_string()))?;
                write_sentence(&mut out, sent, layout);
                out.push('\n');
            }
            out.push_str("#end document\n");
        }
    }
    Ok(out)
}

fn write_sentence(out: &mut String, sent: &Sentence, layout: ColumnLayout) {
    let table: Vec<Vec<String>> = sent.rows.iter().map(TokenRow::columns).collect();
    match layout {
        ColumnLayout::Single => {
            for cols in &table {
                out.push_str(&cols.join(" "));
                out.push('\n');
            }
        }
        ColumnLayout::Aligned => {
            let width = table[0].len();
            let widths: Vec<usize> = (0..width)
                .map(|c| table.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
                .collect();
            for cols in &table {
                let mut line = String::new();
                for (c, cell) in cols.iter().enumerate() {
                    line.push_str(cell);
                    if c + 1 < cols.len() {
                        let pad = widths[c] - cell.chars().count() + 3;
                        line.extend(std::iter::repeat(' ').take(pad));
                    }
                }
                out.push_str(&line);
                out.push('\n');
            }
        }
    }
}
