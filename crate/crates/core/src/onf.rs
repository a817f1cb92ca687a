//! Coreference-chain sections of OntoNotes Normal Form (`.onf`) files.
//!
//! Two layouts are accepted. The indented listing found in distributed
//! files:
//!
//! ```text
//! Coreference chains for section 0:
//! ---------------------------------
//!
//!     Chain 71 (IDENT)
//!                 6.2-13     الجيش الشعبي ...
//!                 7.2-2      *
//!
//!     Chain 95 (APPOS)
//!         ATTRIB  8.1-4      وكيل وزارة الخارجية السودانية
//!         HEAD    8.5-6      مطرف صديق
//! ```
//!
//! and a flattened one-line form where all coordinates follow the header
//! and the member texts are concatenated:
//!
//! ```text
//! Chain 71 (IDENT)	6.2-13 7.2-2	الجيش الشعبي ... *
//! ```
//!
//! In the flattened form the text is handed out from the right: the last
//! member takes as many tokens as its span covers, then the one before it,
//! and the first member gets whatever remains (long texts are truncated
//! on the left in these listings).
//!
//! A coordinate `s.a-b` addresses words `a..=b` of sentence `s` in the
//! section; word indices count empty elements such as the `*` zero marker.
//! Everything outside chain blocks is ignored.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::ChainId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OnfCoordinate {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

impl OnfCoordinate {
    pub fn width(&self) -> usize {
        self.end - self.start + 1
    }
}

impl fmt::Display for OnfCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}-{}", self.sentence, self.start, self.end)
    }
}

impl FromStr for OnfCoordinate {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let (sentence, span) = s.split_once('.').ok_or(())?;
        let (start, end) = span.split_once('-').ok_or(())?;
        let num = |t: &str| -> Result<usize, ()> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(());
            }
            t.parse().map_err(|_| ())
        };
        let coord = OnfCoordinate { sentence: num(sentence)?, start: num(start)?, end: num(end)? };
        if coord.start > coord.end {
            return Err(());
        }
        Ok(coord)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChainKind {
    #[serde(rename = "IDENT")]
    Ident,
    #[serde(rename = "APPOS")]
    Appos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AppositionRole {
    #[serde(rename = "ATTRIB")]
    Attrib,
    #[serde(rename = "HEAD")]
    Head,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnfChainMember {
    pub coordinate: OnfCoordinate,
    pub is_azp: bool,
    pub surface: String,
    pub role: Option<AppositionRole>,
}

impl OnfChainMember {
    fn new(coordinate: OnfCoordinate, surface: String, role: Option<AppositionRole>) -> Self {
        let is_azp = is_zero_marker(surface.trim());
        OnfChainMember { coordinate, is_azp, surface, role }
    }

    pub fn surface_tokens(&self) -> Vec<&str> {
        self.surface.split_whitespace().collect()
    }
}

/// `*` is how OntoNotes writes an anaphoric zero; `*pro*` is accepted too.
pub fn is_zero_marker(token: &str) -> bool {
    token == "*" || token == crate::conll::PRO_MARKER
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnfChain {
    pub chain_id: ChainId,
    pub kind: ChainKind,
    /// Section (document part) the chain was listed under.
    pub part: usize,
    pub members: Vec<OnfChainMember>,
}

impl OnfChain {
    pub fn overt_members(&self) -> impl Iterator<Item = &OnfChainMember> {
        self.members.iter().filter(|m| !m.is_azp)
    }

    pub fn azp_members(&self) -> impl Iterator<Item = &OnfChainMember> {
        self.members.iter().filter(|m| m.is_azp)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnfDocument {
    pub doc_id: String,
    pub chains: Vec<OnfChain>,
}

impl OnfDocument {
    pub fn chain(&self, id: ChainId) -> Option<&OnfChain> {
        self.chains.iter().find(|c| c.chain_id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OnfError {
    #[error("line {line}: malformed chain header {text:?}")]
    MalformedChainHeader { line: usize, text: String },
    #[error("line {line}: malformed coordinate {text:?}")]
    MalformedCoordinate { line: usize, text: String },
    #[error("line {line}: chain {chain_id} listed twice")]
    DuplicateChainId { line: usize, chain_id: ChainId },
}

fn header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^Chain\s+(\d+)\s+\((IDENT|APPOS)\)(?:\s+(.*))?$").unwrap())
}

fn section_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^Coreference chains for section (\d+)").unwrap())
}

fn looks_like_coordinate(token: &str) -> bool {
    let mut chars = token.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_digit()) && token.contains('.')
}

fn parse_role(token: &str) -> Option<AppositionRole> {
    match token {
        "ATTRIB" => Some(AppositionRole::Attrib),
        "HEAD" => Some(AppositionRole::Head),
        _ => None,
    }
}

struct Pending {
    chain: OnfChain,
    line: usize,
}

/// Parses the chain listing of an ONF file. `doc_id` is left empty; see
/// [`parse_onf_named`].
pub fn parse_onf(input: &str) -> Result<OnfDocument, OnfError> {
    parse_onf_named(input, "")
}

pub fn parse_onf_named(input: &str, doc_id: &str) -> Result<OnfDocument, OnfError> {
    let mut chains: Vec<OnfChain> = Vec::new();
    let mut seen: HashSet<(usize, ChainId)> = HashSet::new();
    let mut part = 0;
    let mut current: Option<Pending> = None;

    let mut finish = |pending: Option<Pending>, chains: &mut Vec<OnfChain>| -> Result<(), OnfError> {
        if let Some(Pending { chain, line }) = pending {
            if chain.members.is_empty() {
                return Err(OnfError::MalformedChainHeader { line, text: format!("chain {} has no members", chain.chain_id) });
            }
            if !seen.insert((chain.part, chain.chain_id)) {
                return Err(OnfError::DuplicateChainId { line, chain_id: chain.chain_id });
            }
            chains.push(chain);
        }
        Ok(())
    };

    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();

        if let Some(caps) = section_re().captures(trimmed) {
            finish(current.take(), &mut chains)?;
            part = caps[1].parse().unwrap_or(0);
            continue;
        }

        if trimmed.starts_with("Chain ") {
            finish(current.take(), &mut chains)?;
            let caps = header_re()
                .captures(trimmed)
                .ok_or_else(|| OnfError::MalformedChainHeader { line, text: trimmed.to_string() })?;
            let chain_id = caps[1]
                .parse()
                .map_err(|_| OnfError::MalformedChainHeader { line, text: trimmed.to_string() })?;
            let kind = if &caps[2] == "IDENT" { ChainKind::Ident } else { ChainKind::Appos };
            let mut chain = OnfChain { chain_id, kind, part, members: Vec::new() };
            if let Some(rest) = caps.get(3).map(|m| m.as_str().trim()).filter(|r| !r.is_empty()) {
                chain.members = parse_flat_members(rest, line)?;
            }
            current = Some(Pending { chain, line });
            continue;
        }

        let Some(pending) = current.as_mut() else { continue };

        if trimmed.is_empty() {
            if !pending.chain.members.is_empty() {
                finish(current.take(), &mut chains)?;
            }
            continue;
        }

        match parse_member_line(trimmed, line)? {
            Some(member) => pending.chain.members.push(member),
            None => finish(current.take(), &mut chains)?,
        }
    }
    finish(current.take(), &mut chains)?;

    Ok(OnfDocument { doc_id: doc_id.to_string(), chains })
}

// `[ROLE] s.a-b text...`; None when the line is not a member line at all.
fn parse_member_line(trimmed: &str, line: usize) -> Result<Option<OnfChainMember>, OnfError> {
    let mut rest = trimmed;
    let mut role = None;
    let first = rest.split_whitespace().next().unwrap_or("");
    if let Some(r) = parse_role(first) {
        role = Some(r);
        rest = rest[first.len()..].trim_start();
    }
    let coord_token = rest.split_whitespace().next().unwrap_or("");
    if !looks_like_coordinate(coord_token) {
        if role.is_some() {
            return Err(OnfError::MalformedCoordinate { line, text: coord_token.to_string() });
        }
        return Ok(None);
    }
    let coordinate = coord_token
        .parse()
        .map_err(|_| OnfError::MalformedCoordinate { line, text: coord_token.to_string() })?;
    let surface = rest[coord_token.len()..].trim().to_string();
    Ok(Some(OnfChainMember::new(coordinate, surface, role)))
}

fn parse_flat_members(rest: &str, line: usize) -> Result<Vec<OnfChainMember>, OnfError> {
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    let mut slots: Vec<(OnfCoordinate, Option<AppositionRole>)> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let role = parse_role(tokens[i]);
        let at = if role.is_some() { i + 1 } else { i };
        let Some(tok) = tokens.get(at) else {
            return Err(OnfError::MalformedCoordinate { line, text: String::new() });
        };
        if !looks_like_coordinate(tok) {
            if role.is_some() {
                return Err(OnfError::MalformedCoordinate { line, text: tok.to_string() });
            }
            break;
        }
        let coord = tok
            .parse()
            .map_err(|_| OnfError::MalformedCoordinate { line, text: tok.to_string() })?;
        slots.push((coord, role));
        i = at + 1;
    }
    let mut text: Vec<&str> = tokens[i..].to_vec();

    let mut surfaces = vec![String::new(); slots.len()];
    for k in (0..slots.len()).rev() {
        let take = if k == 0 { text.len() } else { slots[k].0.width().min(text.len()) };
        let split = text.len() - take;
        surfaces[k] = text[split..].join(" ");
        text.truncate(split);
    }
    Ok(slots
        .into_iter()
        .zip(surfaces)
        .map(|((coord, role), surface)| OnfChainMember::new(coord, surface, role))
        .collect())
}

/// Every zero-pronoun member, with its chain id, in document order.
pub fn azp_members(doc: &OnfDocument) -> Vec<(ChainId, OnfChainMember)> {
    doc.chains
        .iter()
        .flat_map(|c| c.azp_members().map(move |m| (c.chain_id, m.clone())))
        .collect()
}
