//! Out-of-process resolvers speaking JSON over stdin/stdout.
//!
//! One request per process run:
//!
//! ```text
//! -> {"v":1,"op":"resolve","doc":{...}}
//! <- {"v":1,"clusters":[{"id":0,"members":[...]}, ...]}
//! -> {"v":1,"op":"identify","doc":{...}}
//! <- {"v":1,"gaps":[[sentence,gap], [part,sentence,gap], ...]}
//! ```
//!
//! Clusters may also be sent as bare member lists; ids are then assigned
//! in order. A response may carry `{"error": "..."}` instead.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use super::{AzpIdentifier, CorefResolver, ResolverError, StringMatchCoref, VerbGapIdentifier};
use crate::conll::Document;
use crate::model::{Azp, ChainId, Cluster, ClusterSet, Member};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Resolve,
    Identify,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub v: u32,
    pub op: Op,
    pub doc: Document,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireCluster {
    Full(Cluster),
    Bare(Vec<Member>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<Vec<WireCluster>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn protocol(msg: impl Into<String>) -> ResolverError {
    ResolverError::Protocol(msg.into())
}

impl Response {
    fn check(self) -> Result<Self, ResolverError> {
        if let Some(v) = self.v.filter(|v| *v != PROTOCOL_VERSION) {
            return Err(protocol(format!("unsupported protocol version {v}")));
        }
        if let Some(e) = &self.error {
            return Err(ResolverError::Process(e.clone()));
        }
        Ok(self)
    }

    pub fn into_clusters(self) -> Result<ClusterSet, ResolverError> {
        let wire = self.check()?.clusters.ok_or_else(|| protocol("response has no \"clusters\""))?;
        let clusters = wire
            .into_iter()
            .enumerate()
            .map(|(i, c)| match c {
                WireCluster::Full(c) => Cluster::new(c.id, c.members),
                WireCluster::Bare(members) => Cluster::new(i as ChainId, members),
            })
            .collect();
        Ok(ClusterSet::new(clusters))
    }

    pub fn into_gaps(self) -> Result<Vec<Azp>, ResolverError> {
        let wire = self.check()?.gaps.ok_or_else(|| protocol("response has no \"gaps\""))?;
        wire.into_iter()
            .map(|g| match g[..] {
                [sentence, gap] => Ok(Azp::new(0, sentence, gap)),
                [part, sentence, gap] => Ok(Azp::new(part, sentence, gap)),
                _ => Err(protocol(format!("gap {g:?} should have 2 or 3 numbers"))),
            })
            .collect()
    }
}

/// Runs `program args...` once per request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubprocessResolver {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl SubprocessResolver {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        SubprocessResolver { program: program.into(), args }
    }

    pub fn call(&self, op: Op, doc: &Document) -> Result<Response, ResolverError> {
        let request = serde_json::to_vec(&Request { v: PROTOCOL_VERSION, op, doc: doc.clone() })
            .map_err(|e| protocol(e.to_string()))?;
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        // write from another thread so a chatty child cannot block us
        let output = std::thread::scope(|s| {
            let writer = s.spawn(move || -> std::io::Result<()> {
                stdin.write_all(&request)?;
                stdin.write_all(b"\n")
            });
            let out = child.wait_with_output();
            let _ = writer.join();
            out
        })?;
        if !output.status.success() {
            return Err(ResolverError::Process(format!(
                "{} exited with {}: {}",
                self.program.display(),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        serde_json::from_slice(&output.stdout).map_err(|e| protocol(format!("bad response: {e}")))
    }
}

impl CorefResolver for SubprocessResolver {
    fn resolve(&self, doc: &Document) -> Result<ClusterSet, ResolverError> {
        self.call(Op::Resolve, doc)?.into_clusters()
    }
}

impl AzpIdentifier for SubprocessResolver {
    fn identify(&self, doc: &Document) -> Result<Vec<Azp>, ResolverError> {
        self.call(Op::Identify, doc)?.into_gaps()
    }
}

/// Answers one request with the baseline resolvers. This is what the
/// hidden `protocol-baseline` command of the binary runs.
pub fn serve_baseline(request: &str) -> String {
    let response = match serde_json::from_str::<Request>(request) {
        Err(e) => Response { error: Some(format!("bad request: {e}")), ..Default::default() },
        Ok(r) if r.v != PROTOCOL_VERSION => {
            Response { error: Some(format!("unsupported protocol version {}", r.v)), ..Default::default() }
        }
        Ok(Request { op: Op::Resolve, doc, .. }) => match StringMatchCoref::default().resolve(&doc) {
            Ok(set) => Response {
                v: Some(PROTOCOL_VERSION),
                clusters: Some(set.clusters.into_iter().map(WireCluster::Full).collect()),
                ..Default::default()
            },
            Err(e) => Response { error: Some(e.to_string()), ..Default::default() },
        },
        Ok(Request { op: Op::Identify, doc, .. }) => match VerbGapIdentifier::default().identify(&doc) {
            Ok(gaps) => Response {
                v: Some(PROTOCOL_VERSION),
                gaps: Some(
                    gaps.into_iter()
                        .map(|a| if a.part == 0 { vec![a.sentence, a.gap] } else { vec![a.part, a.sentence, a.gap] })
                        .collect(),
                ),
                ..Default::default()
            },
            Err(e) => Response { error: Some(e.to_string()), ..Default::default() },
        },
    };
    serde_json::to_string(&response).expect("responses serialize")
}
