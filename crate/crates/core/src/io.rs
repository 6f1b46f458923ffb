//! Solution-space files (JSON Lines).
//!
//! The first line is a header naming the action metric, the world spec hash,
//! and how the space was produced. Each following line is one solution:
//!
//! ```text
//! {"format":"ng-solution-space","version":1,"metric":{"kind":"discrete","max_a":1.0},"spec_hash":"…","producer":{"kind":"exact","budget":10000000},"total_size":2}
//! {"length":2,"actions":[[0.0,1.0],[1.0,0.0]]}
//! {"length":2,"actions":[[1.0,0.0],[0.0,1.0]]}
//! ```
//!
//! Solutions are written by ascending length, canonical order within a
//! length, so the bytes depend only on the space.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{partition_space, MetricError};
use crate::sampling::SamplingConfig;
use crate::{ActionMetricSpec, ActionVector, Solution, SolutionSpace};

pub const SPACE_FORMAT: &str = "ng-solution-space";
pub const SPACE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpaceFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("malformed solution-space file: {0}")]
    Format(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Producer {
    Exact { budget: u64 },
    Sampled(SamplingConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceHeader {
    pub format: String,
    pub version: u32,
    pub metric: ActionMetricSpec,
    pub spec_hash: String,
    pub producer: Producer,
    pub total_size: usize,
}

impl SpaceHeader {
    pub fn new(space: &SolutionSpace, spec_hash: impl Into<String>, producer: Producer) -> Self {
        Self {
            format: SPACE_FORMAT.into(),
            version: SPACE_FORMAT_VERSION,
            metric: space.metric().clone(),
            spec_hash: spec_hash.into(),
            producer,
            total_size: space.total_size(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionLine {
    length: usize,
    actions: Vec<ActionVector>,
}

pub fn write_space(mut w: impl Write, header: &SpaceHeader, space: &SolutionSpace) -> Result<(), SpaceFileError> {
    serde_json::to_writer(&mut w, header).map_err(|e| SpaceFileError::Json { line: 1, source: e })?;
    w.write_all(b"\n")?;
    for (i, s) in space.iter().enumerate() {
        let line = SolutionLine { length: s.len(), actions: s.actions().to_vec() };
        serde_json::to_writer(&mut w, &line).map_err(|e| SpaceFileError::Json { line: i + 2, source: e })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn space_to_string(header: &SpaceHeader, space: &SolutionSpace) -> String {
    let mut buf = Vec::new();
    write_space(&mut buf, header, space).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn read_space(r: impl BufRead) -> Result<(SpaceHeader, SolutionSpace), SpaceFileError> {
    let mut lines = r.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| SpaceFileError::Format("missing header line".into()))?;
    let header: SpaceHeader =
        serde_json::from_str(&first?).map_err(|e| SpaceFileError::Json { line: 1, source: e })?;
    if header.format != SPACE_FORMAT || header.version != SPACE_FORMAT_VERSION {
        return Err(SpaceFileError::Format(format!(
            "unsupported format {} v{}",
            header.format, header.version
        )));
    }
    let mut solutions = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SolutionLine =
            serde_json::from_str(&line).map_err(|e| SpaceFileError::Json { line: i + 1, source: e })?;
        if rec.length != rec.actions.len() {
            return Err(SpaceFileError::Format(format!(
                "line {}: length {} but {} actions",
                i + 1,
                rec.length,
                rec.actions.len()
            )));
        }
        solutions.push(Solution::new(rec.actions)?);
    }
    let space = partition_space(solutions, &header.metric)?;
    if space.total_size() != header.total_size {
        return Err(SpaceFileError::Format(format!(
            "header declares {} solutions, file holds {} distinct",
            header.total_size,
            space.total_size()
        )));
    }
    Ok((header, space))
}
