// Copyright 2026 The AWAIRE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Crate-wide error type.

use thiserror::Error;

/// Errors raised while loading contests or running audits.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("ballot file is empty")]
    EmptyFile,
    #[error("line {line}: candidate {name:?} appears more than once in a ranking")]
    DuplicateCandidate { line: usize, name: String },
    #[error("unknown candidate {0:?}")]
    UnknownCandidate(String),
    #[error("line {line}: ballot count must be positive, got {count}")]
    NonPositiveCount { line: usize, count: i64 },
    #[error("invalid contest: {0}")]
    InvalidContest(String),
    #[error("invalid ballot: {0}")]
    InvalidBallot(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("contest has {found} candidates, more than the supported maximum of {max}")]
    TooManyCandidates { found: usize, max: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("assorter value {0} is outside [0, 1]")]
    ValueOutOfRange(f64),
    #[error("population of {0} ballots is already exhausted")]
    PopulationExhausted(usize),
    #[error("audit is no longer ongoing")]
    AuditClosed,
    #[error("candidate rosters do not match: {0}")]
    RosterMismatch(String),
    #[error("session closed")]
    SessionClosed,
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("event log is corrupt: {0}")]
    CorruptLog(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
