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

//! Monte-Carlo audit simulation: replicated sampling orders, mean sample
//! size and certification rate.
//!
//! Sampling order `k` of a run with master seed `s` is a Fisher-Yates
//! shuffle of `0..B` (`rand::seq::SliceRandom::shuffle`) driven by
//! `ChaCha8Rng::seed_from_u64(trial_seed(s, k))`, where `trial_seed` is the
//! SplitMix64 finaliser applied to `s + (k + 1) * 0x9E3779B97F4A7C15`. All
//! method variants run with the same master seed therefore see identical
//! sampling orders.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contest::{Ballot, CandidateId, Contest};
use crate::engine::{AuditConfig, AuditSetup, AuditState, Decision, TuningPlan};
use crate::error::{Error, Result};
use crate::tabulation::{tabulate, TieBreak};

pub const PRNG_DESCRIPTION: &str =
    "ChaCha8Rng::seed_from_u64(splitmix64(master_seed + (trial + 1) * 0x9E3779B97F4A7C15)); \
     Fisher-Yates shuffle of 0..B via rand 0.9 SliceRandom::shuffle";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialDecision {
    Certified,
    FullCountNeeded,
}

impl TrialDecision {
    pub fn label(self) -> &'static str {
        match self {
            TrialDecision::Certified => "certified",
            TrialDecision::FullCountNeeded => "full_count_needed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub sample_size: usize,
    pub decision: TrialDecision,
    pub permutation_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub audit: AuditConfig,
    pub reported_winner: String,
    pub master_seed: u64,
    pub tuned_from_cvrs: bool,
    pub prng: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub n_reps: usize,
    pub mean_sample_size: f64,
    pub certification_rate: f64,
    #[serde(skip)]
    pub per_trial: Vec<TrialResult>,
    pub config_echo: ConfigEcho,
}

impl SimSummary {
    fn from_trials(per_trial: Vec<TrialResult>, config_echo: ConfigEcho) -> Self {
        let n = per_trial.len();
        let total: usize = per_trial.iter().map(|t| t.sample_size).sum();
        let certified = per_trial
            .iter()
            .filter(|t| t.decision == TrialDecision::Certified)
            .count();
        SimSummary {
            n_reps: n,
            mean_sample_size: total as f64 / n as f64,
            certification_rate: certified as f64 / n as f64,
            per_trial,
            config_echo,
        }
    }

    /// Writes `trial,seed,sample_size,decision` rows.
    pub fn write_trials_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "trial,seed,sample_size,decision")?;
        for t in &self.per_trial {
            writeln!(
                out,
                "{},{},{},{}",
                t.trial,
                t.permutation_seed,
                t.sample_size,
                t.decision.label()
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is serialisable")
    }
}

/// Seed of sampling order `trial` under `master_seed`.
pub fn trial_seed(master_seed: u64, trial: usize) -> u64 {
    let mut z = master_seed.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A uniformly random ordering of `0..population`.
pub fn sampling_order(population: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Everything needed to replay audits of one contest under one method.
pub struct Simulator {
    contest: Arc<Contest>,
    setup: Arc<AuditSetup>,
    config: AuditConfig,
    tuning: Option<TuningPlan>,
    /// Index into `kinds` for every ballot.
    kind_of: Vec<u32>,
    kinds: Vec<Ballot>,
    /// Pooled assorter values, `kinds.len()` rows of `pool.len()`.
    assorted: Vec<f64>,
}

impl Simulator {
    pub fn new(
        contest: &Contest,
        reported_winner: CandidateId,
        config: AuditConfig,
        tuning: Option<TuningPlan>,
    ) -> Result<Self> {
        config.validate()?;
        let setup = Arc::new(AuditSetup::new(
            contest.num_candidates(),
            reported_winner,
            config.max_candidates,
        )?);
        Self::with_setup(contest, setup, config, tuning)
    }

    pub fn with_setup(
        contest: &Contest,
        setup: Arc<AuditSetup>,
        config: AuditConfig,
        tuning: Option<TuningPlan>,
    ) -> Result<Self> {
        let mut index: HashMap<&Ballot, u32> = HashMap::new();
        let mut kinds = Vec::new();
        let kind_of = contest
            .ballots()
            .iter()
            .map(|b| {
                *index.entry(b).or_insert_with(|| {
                    kinds.push(b.clone());
                    kinds.len() as u32 - 1
                })
            })
            .collect();
        let pool = setup.pool();
        let mut assorted = Vec::with_capacity(kinds.len() * pool.len());
        let mut row = Vec::new();
        for kind in &kinds {
            pool.assort_all(kind, &mut row);
            assorted.extend_from_slice(&row);
        }
        let sim = Simulator {
            contest: Arc::new(contest.clone()),
            setup,
            config,
            tuning,
            kind_of,
            kinds,
            assorted,
        };
        // Surface configuration errors before any trial runs.
        sim.new_audit()?;
        Ok(sim)
    }

    pub fn setup(&self) -> &Arc<AuditSetup> {
        &self.setup
    }

    pub fn contest(&self) -> &Contest {
        &self.contest
    }

    fn new_audit(&self) -> Result<AuditState> {
        AuditState::new(
            self.setup.clone(),
            self.contest.num_ballots(),
            self.config,
            self.tuning.as_ref(),
        )
    }

    /// Audits ballots in `permutation` order until certification or
    /// exhaustion.
    pub fn run_permutation(
        &self,
        permutation: &[usize],
        seed: u64,
        trial: usize,
    ) -> Result<TrialResult> {
        let b = self.contest.num_ballots();
        if permutation.len() != b {
            return Err(Error::InvalidPermutation(format!(
                "expected {b} entries, got {}",
                permutation.len()
            )));
        }
        let mut seen = vec![false; b];
        for &p in permutation {
            if p >= b || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidPermutation(format!(
                    "entry {p} out of range or repeated"
                )));
            }
        }
        let mut audit = self.new_audit()?;
        let width = self.setup.pool().len();
        for &p in permutation {
            let kind = self.kind_of[p] as usize;
            let values = &self.assorted[kind * width..(kind + 1) * width];
            let decision = audit.observe_assorted(&self.kinds[kind], values)?;
            if !decision.is_ongoing() {
                break;
            }
        }
        let decision = match audit.decision() {
            Decision::Certified => TrialDecision::Certified,
            Decision::FullCountNeeded { .. } => TrialDecision::FullCountNeeded,
            Decision::Ongoing => unreachable!("a full permutation always reaches a decision"),
        };
        Ok(TrialResult {
            trial,
            sample_size: audit.t(),
            decision,
            permutation_seed: seed,
        })
    }

    pub fn run_trial(&self, trial: usize, master_seed: u64) -> TrialResult {
        let seed = trial_seed(master_seed, trial);
        let order = sampling_order(self.contest.num_ballots(), seed);
        self.run_permutation(&order, seed, trial)
            .expect("generated permutations are valid")
    }

    /// Runs `n_reps` independent trials in parallel; results are in trial
    /// order and depend only on the inputs.
    pub fn run_replications(&self, n_reps: usize, master_seed: u64) -> Result<SimSummary> {
        if n_reps == 0 {
            return Err(Error::InvalidConfig("need at least one replication".into()));
        }
        let per_trial: Vec<TrialResult> = (0..n_reps)
            .into_par_iter()
            .map(|k| self.run_trial(k, master_seed))
            .collect();
        let echo = ConfigEcho {
            audit: self.config,
            reported_winner: self.contest.name(self.setup.reported_winner()).to_owned(),
            master_seed,
            tuned_from_cvrs: self.tuning.is_some(),
            prng: PRNG_DESCRIPTION,
        };
        Ok(SimSummary::from_trials(per_trial, echo))
    }
}

pub fn run_once(
    contest: &Contest,
    reported_winner: CandidateId,
    permutation: &[usize],
    config: AuditConfig,
    tuning: Option<TuningPlan>,
) -> Result<TrialResult> {
    Simulator::new(contest, reported_winner, config, tuning)?.run_permutation(permutation, 0, 0)
}

pub fn run_replications(
    contest: &Contest,
    reported_winner: CandidateId,
    n_reps: usize,
    master_seed: u64,
    config: AuditConfig,
    tuning: Option<TuningPlan>,
) -> Result<SimSummary> {
    Simulator::new(contest, reported_winner, config, tuning)?.run_replications(n_reps, master_seed)
}

/// Relabels candidates: every ranking entry `c` becomes `perm[c]`.
pub fn permute_labels(ballots: &[Ballot], perm: &[CandidateId]) -> Result<Vec<Ballot>> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p as usize >= n || std::mem::replace(&mut seen[p as usize], true) {
            return Err(Error::InvalidPermutation(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
    }
    ballots
        .iter()
        .map(|b| {
            let ranking = b
                .ranking()
                .iter()
                .map(|&c| {
                    perm.get(c as usize).copied().ok_or_else(|| {
                        Error::InvalidPermutation(format!("no image for candidate {c}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ballot::new(ranking)
        })
        .collect()
}

/// The candidate eliminated last before the winner, used as a false
/// reported winner.
pub fn runner_up(contest: &Contest) -> CandidateId {
    let order = tabulate(contest, &TieBreak::default()).order;
    let seq = order.as_slice();
    seq[seq.len().saturating_sub(2)]
}
