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

//! Ballot-polling risk-limiting audits for instant-runoff (IRV) contests that
//! need no cast vote records.
//!
//! The audit enumerates every elimination order in which someone other than
//! the reported winner wins, describes each by the "directly beats"
//! requirements that completely determine it, and tests each requirement
//! with an ALPHA supermartingale. For every alternative order the
//! requirement processes are blended by an adaptively weighted intersection
//! supermartingale; the reported winner is confirmed once every one of them
//! exceeds `1/alpha`.

pub mod alpha;
pub mod contest;
pub mod engine;
pub mod error;
pub mod requirements;
pub mod service;
pub mod simulate;
pub mod tabulation;

pub use alpha::{AlphaConfig, AlphaState};
pub use contest::{
    generate_pathological, parse_ballot_file, validate_roster, write_ballot_file, Ballot,
    BallotFormat, Candidate, CandidateId, CandidateSet, Contest,
};
pub use engine::{
    tune_from_cvrs, AuditConfig, AuditSetup, AuditState, AuditStatus, Decision, WeightScheme,
};
pub use error::{Error, Result};
pub use requirements::{requirements_for_order, DbRequirement, RequirementPool};
pub use simulate::{permute_labels, SimSummary, Simulator, TrialResult};
pub use tabulation::{
    enumerate_alt_orders, tabulate, tally, AltOrderSet, EliminationOrder, EliminationResult,
    TieBreak,
};
