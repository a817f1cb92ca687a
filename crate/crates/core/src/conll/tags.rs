use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::ChainId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Close,
    OpenAndClose,
}

/// One bracket in the coreference column: `(7`, `7)` or `(7)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorefTag {
    pub chain_id: ChainId,
    pub boundary: Boundary,
}

impl CorefTag {
    pub fn open(chain_id: ChainId) -> Self {
        CorefTag { chain_id, boundary: Boundary::Open }
    }

    pub fn close(chain_id: ChainId) -> Self {
        CorefTag { chain_id, boundary: Boundary::Close }
    }

    pub fn single(chain_id: ChainId) -> Self {
        CorefTag { chain_id, boundary: Boundary::OpenAndClose }
    }
}

impl fmt::Display for CorefTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.boundary {
            Boundary::Open => write!(f, "({}", self.chain_id),
            Boundary::Close => write!(f, "{})", self.chain_id),
            Boundary::OpenAndClose => write!(f, "({})", self.chain_id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadTag(pub String);

impl FromStr for CorefTag {
    type Err = BadTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadTag(s.to_string());
        let id = |digits: &str| -> Result<ChainId, BadTag> {
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            digits.parse().map_err(|_| bad())
        };
        match (s.strip_prefix('('), s.strip_suffix(')')) {
            (Some(rest), Some(_)) => {
                let inner = rest.strip_suffix(')').ok_or_else(bad)?;
                Ok(CorefTag::single(id(inner)?))
            }
            (Some(rest), None) => Ok(CorefTag::open(id(rest)?)),
            (None, Some(rest)) => Ok(CorefTag::close(id(rest)?)),
            (None, None) => Err(bad()),
        }
    }
}

pub const EMPTY_CELL: &str = "-";

/// Parses a whole coreference cell. `-` is the empty marker; tags are
/// separated by `|`.
pub fn parse_cell(cell: &str) -> Result<Vec<CorefTag>, BadTag> {
    if cell == EMPTY_CELL {
        return Ok(Vec::new());
    }
    cell.split('|').map(str::parse).collect()
}

pub fn format_cell(tags: &[CorefTag]) -> String {
    if tags.is_empty() {
        return EMPTY_CELL.to_string();
    }
    tags.iter().map(ToString::to_string).collect::<Vec<_>>().join("|")
}
