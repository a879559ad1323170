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

//! "Directly beats" requirements, their assorters and the shared requirement
//! pool.

use std::collections::HashMap;

use crate::contest::{Ballot, CandidateId, CandidateSet, Contest};
use crate::tabulation::{tally, AltOrderSet, EliminationOrder};

/// `DB(ahead, behind, standing)`: with exactly `standing` in the count,
/// `ahead` has strictly more votes than `behind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DbRequirement {
    pub ahead: CandidateId,
    pub behind: CandidateId,
    pub standing: CandidateSet,
}

impl DbRequirement {
    pub fn new(ahead: CandidateId, behind: CandidateId, standing: CandidateSet) -> Self {
        debug_assert!(ahead != behind);
        debug_assert!(standing.contains(ahead) && standing.contains(behind));
        DbRequirement {
            ahead,
            behind,
            standing,
        }
    }

    /// 1 for a vote for `behind`, 0 for a vote for `ahead`, 1/2 otherwise.
    #[inline]
    pub fn assort(&self, ballot: &Ballot) -> f64 {
        self.assort_preference(ballot.first_preference(self.standing))
    }

    #[inline]
    pub fn assort_preference(&self, first: Option<CandidateId>) -> f64 {
        match first {
            Some(c) if c == self.behind => 1.0,
            Some(c) if c == self.ahead => 0.0,
            _ => 0.5,
        }
    }

    /// Assorter mean over a ballot population.
    pub fn mean(&self, ballots: &[Ballot]) -> f64 {
        let sum: f64 = ballots.iter().map(|b| self.assort(b)).sum();
        sum / ballots.len() as f64
    }

    /// Whether the requirement is true for the contest, by comparing tallies.
    pub fn holds(&self, contest: &Contest) -> bool {
        let counts = tally(contest.ballots(), self.standing, contest.num_candidates());
        counts[self.ahead as usize] > counts[self.behind as usize]
    }
}

/// The `C(C-1)/2` requirements that together pin down every elimination in
/// `order`, latest elimination first.
pub fn requirements_for_order(order: &EliminationOrder) -> Vec<DbRequirement> {
    let seq = order.as_slice();
    let n = seq.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for k in (0..n.saturating_sub(1)).rev() {
        let standing = order.standing_at(k);
        for m in (k + 1..n).rev() {
            out.push(DbRequirement::new(seq[m], seq[k], standing));
        }
    }
    out
}

/// Deduplicated requirements across all alt-orders.
#[derive(Debug, Clone)]
pub struct RequirementPool {
    requirements: Vec<DbRequirement>,
    per_order: Vec<Vec<usize>>,
    standing_sets: Vec<CandidateSet>,
    standing_of: Vec<usize>,
}

impl RequirementPool {
    pub fn build(alt_orders: &AltOrderSet) -> Self {
        let mut index: HashMap<DbRequirement, usize> = HashMap::new();
        let mut requirements = Vec::new();
        let mut per_order = Vec::with_capacity(alt_orders.len());
        for order in alt_orders.orders() {
            let refs = requirements_for_order(order)
                .into_iter()
                .map(|req| {
                    *index.entry(req).or_insert_with(|| {
                        requirements.push(req);
                        requirements.len() - 1
                    })
                })
                .collect();
            per_order.push(refs);
        }
        let mut set_index: HashMap<CandidateSet, usize> = HashMap::new();
        let mut standing_sets = Vec::new();
        let standing_of = requirements
            .iter()
            .map(|r| {
                *set_index.entry(r.standing).or_insert_with(|| {
                    standing_sets.push(r.standing);
                    standing_sets.len() - 1
                })
            })
            .collect();
        RequirementPool {
            requirements,
            per_order,
            standing_sets,
            standing_of,
        }
    }

    pub fn requirements(&self) -> &[DbRequirement] {
        &self.requirements
    }

    pub fn len(&self) -> usize {
        self.requirements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    /// Pool indices of the requirements of alt-order `i`.
    pub fn order_refs(&self, i: usize) -> &[usize] {
        &self.per_order[i]
    }

    pub fn num_orders(&self) -> usize {
        self.per_order.len()
    }

    /// Evaluates every pooled assorter on `ballot`, computing each distinct
    /// standing set's first preference once.
    pub fn assort_all(&self, ballot: &Ballot, out: &mut Vec<f64>) {
        let firsts: Vec<Option<CandidateId>> = self
            .standing_sets
            .iter()
            .map(|&s| ballot.first_preference(s))
            .collect();
        out.clear();
        out.extend(
            self.requirements
                .iter()
                .zip(&self.standing_of)
                .map(|(req, &s)| req.assort_preference(firsts[s])),
        );
    }
}

/// Upper bound on the number of distinct requirements for `c` candidates.
pub fn max_pool_size(c: usize) -> usize {
    (2..=c).map(|s| binomial(c, s) * s * (s - 1)).sum()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
