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

//! IRV tabulation and enumeration of alternative elimination orders.

use std::fmt;

use crate::contest::{Ballot, CandidateId, CandidateSet, Contest};
use crate::error::{Error, Result};

/// Default cap on the number of candidates for which alt-orders are
/// enumerated. Tracking cost grows as `C! * C^2`.
pub const DEFAULT_MAX_CANDIDATES: usize = 6;

/// Candidates in the order they are eliminated; the last entry is the winner.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EliminationOrder(Vec<CandidateId>);

impl EliminationOrder {
    pub fn new(order: Vec<CandidateId>) -> Result<Self> {
        let n = order.len();
        let set: CandidateSet = order.iter().copied().collect();
        if n == 0 || set.len() != n || set != CandidateSet::full(n) {
            return Err(Error::InvalidPermutation(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
        Ok(EliminationOrder(order))
    }

    pub fn as_slice(&self) -> &[CandidateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn winner(&self) -> CandidateId {
        *self.0.last().expect("elimination orders are non-empty")
    }

    /// Candidates standing just before the `k`-th elimination (0-based).
    pub fn standing_at(&self, k: usize) -> CandidateSet {
        self.0[k..].iter().copied().collect()
    }
}

impl fmt::Display for EliminationOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Total order used to break ties for last place: among tied candidates the
/// one appearing earliest in `priority` is eliminated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieBreak {
    priority: Vec<CandidateId>,
}

impl TieBreak {
    pub fn new(priority: Vec<CandidateId>) -> Result<Self> {
        EliminationOrder::new(priority.clone())?;
        Ok(TieBreak { priority })
    }

    fn rank(&self, c: CandidateId) -> usize {
        self.priority
            .iter()
            .position(|&p| p == c)
            .unwrap_or(c as usize)
    }
}

impl Default for TieBreak {
    /// Ascending candidate id; covers any contest size.
    fn default() -> Self {
        TieBreak {
            priority: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub standing: CandidateSet,
    /// Votes per candidate id; zero for candidates not standing.
    pub tallies: Vec<usize>,
    pub exhausted: usize,
    pub eliminated: CandidateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieEvent {
    pub round: usize,
    pub tied: Vec<CandidateId>,
    pub eliminated: CandidateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationResult {
    pub order: EliminationOrder,
    /// One entry per elimination; the final round with a single standing
    /// candidate is included, with that candidate as `eliminated`.
    pub rounds: Vec<Round>,
    pub tie_events: Vec<TieEvent>,
}

impl EliminationResult {
    pub fn winner(&self) -> CandidateId {
        self.order.winner()
    }
}

/// First-preference counts among `standing`, indexed by candidate id.
pub fn tally(ballots: &[Ballot], standing: CandidateSet, num_candidates: usize) -> Vec<usize> {
    let mut counts = vec![0; num_candidates];
    for ballot in ballots {
        if let Some(c) = ballot.first_preference(standing) {
            counts[c as usize] += 1;
        }
    }
    counts
}

/// Runs the IRV count, eliminating the lowest tally each round.
pub fn tabulate(contest: &Contest, tie_break: &TieBreak) -> EliminationResult {
    tabulate_ballots(contest.ballots(), contest.num_candidates(), tie_break)
}

pub fn tabulate_ballots(
    ballots: &[Ballot],
    num_candidates: usize,
    tie_break: &TieBreak,
) -> EliminationResult {
    let mut standing = CandidateSet::full(num_candidates);
    let mut order = Vec::with_capacity(num_candidates);
    let mut rounds = Vec::with_capacity(num_candidates);
    let mut tie_events = Vec::new();
    while !standing.is_empty() {
        let tallies = tally(ballots, standing, num_candidates);
        let allocated: usize = tallies.iter().sum();
        let min = standing.iter().map(|c| tallies[c as usize]).min().unwrap();
        let tied: Vec<CandidateId> = standing
            .iter()
            .filter(|&c| tallies[c as usize] == min)
            .collect();
        let eliminated = *tied.iter().min_by_key(|&&c| tie_break.rank(c)).unwrap();
        if tied.len() > 1 {
            tie_events.push(TieEvent {
                round: rounds.len(),
                tied,
                eliminated,
            });
        }
        rounds.push(Round {
            standing,
            tallies,
            exhausted: ballots.len() - allocated,
            eliminated,
        });
        order.push(eliminated);
        standing.remove(eliminated);
    }
    EliminationResult {
        order: EliminationOrder(order),
        rounds,
        tie_events,
    }
}

/// Every elimination order that does not end with the reported winner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltOrderSet {
    num_candidates: usize,
    reported_winner: CandidateId,
    orders: Vec<EliminationOrder>,
}

impl AltOrderSet {
    pub fn orders(&self) -> &[EliminationOrder] {
        &self.orders
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn reported_winner(&self) -> CandidateId {
        self.reported_winner
    }
}

/// Enumerates alt-orders in lexicographic order. There are `(C-1) * (C-1)!`.
pub fn enumerate_alt_orders(
    num_candidates: usize,
    reported_winner: CandidateId,
    max_candidates: usize,
) -> Result<AltOrderSet> {
    if num_candidates < 2 {
        return Err(Error::InvalidContest(
            "an audit needs at least two candidates".into(),
        ));
    }
    if num_candidates > max_candidates {
        return Err(Error::TooManyCandidates {
            found: num_candidates,
            max: max_candidates,
        });
    }
    if reported_winner as usize >= num_candidates {
        return Err(Error::InvalidContest(format!(
            "reported winner {reported_winner} is not a candidate"
        )));
    }
    let mut perm: Vec<CandidateId> = (0..num_candidates as CandidateId).collect();
    let mut orders = Vec::new();
    loop {
        if *perm.last().unwrap() != reported_winner {
            orders.push(EliminationOrder(perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(AltOrderSet {
        num_candidates,
        reported_winner,
        orders,
    })
}

fn next_permutation(perm: &mut [CandidateId]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).unwrap();
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}
