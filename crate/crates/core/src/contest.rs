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

//! Ballots, contests, ballot-file ingestion and the synthetic pathological
//! contest generator.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::tabulation::{tabulate, TieBreak};

/// Index of a candidate within its contest, `0..C`.
pub type CandidateId = u8;

/// Hard upper bound on candidates, imposed by the bitmask standing sets.
pub const MAX_CANDIDATES: usize = 64;

/// A set of candidate ids stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CandidateSet(u64);

impl CandidateSet {
    pub const fn empty() -> Self {
        CandidateSet(0)
    }

    /// The set `{0, 1, ..., n - 1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_CANDIDATES);
        if n == MAX_CANDIDATES {
            CandidateSet(u64::MAX)
        } else {
            CandidateSet((1u64 << n) - 1)
        }
    }

    pub const fn from_bits(bits: u64) -> Self {
        CandidateSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn contains(self, c: CandidateId) -> bool {
        self.0 >> c & 1 == 1
    }

    pub fn insert(&mut self, c: CandidateId) {
        self.0 |= 1 << c;
    }

    pub fn remove(&mut self, c: CandidateId) {
        self.0 &= !(1 << c);
    }

    pub fn with(mut self, c: CandidateId) -> Self {
        self.insert(c);
        self
    }

    pub fn without(mut self, c: CandidateId) -> Self {
        self.remove(c);
        self
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in ascending id order.
    pub fn iter(self) -> impl Iterator<Item = CandidateId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let c = bits.trailing_zeros() as CandidateId;
                bits &= bits - 1;
                Some(c)
            }
        })
    }
}

impl FromIterator<CandidateId> for CandidateSet {
    fn from_iter<I: IntoIterator<Item = CandidateId>>(iter: I) -> Self {
        let mut set = CandidateSet::empty();
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub id: CandidateId,
    pub name: String,
}

/// A ranking of distinct candidates, most preferred first. May be partial or
/// empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ballot {
    ranking: Vec<CandidateId>,
}

impl Ballot {
    /// Builds a ballot, rejecting repeated candidates.
    pub fn new(ranking: Vec<CandidateId>) -> Result<Self> {
        let mut seen = CandidateSet::empty();
        for &c in &ranking {
            if c as usize >= MAX_CANDIDATES || seen.contains(c) {
                return Err(Error::InvalidBallot(format!(
                    "candidate {c} repeated or out of range in {ranking:?}"
                )));
            }
            seen.insert(c);
        }
        Ok(Ballot { ranking })
    }

    pub fn blank() -> Self {
        Ballot::default()
    }

    pub fn ranking(&self) -> &[CandidateId] {
        &self.ranking
    }

    pub fn is_blank(&self) -> bool {
        self.ranking.is_empty()
    }

    /// The highest-ranked candidate still standing, or `None` when the ballot
    /// is exhausted with respect to `standing`.
    #[inline]
    pub fn first_preference(&self, standing: CandidateSet) -> Option<CandidateId> {
        self.ranking.iter().copied().find(|&c| standing.contains(c))
    }
}

/// A finite ballot population together with its reported winner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contest {
    candidates: Vec<Candidate>,
    ballots: Vec<Ballot>,
    reported_winner: CandidateId,
}

impl Contest {
    pub fn new(
        names: Vec<String>,
        ballots: Vec<Ballot>,
        reported_winner: CandidateId,
    ) -> Result<Self> {
        validate_roster(&names)?;
        if ballots.is_empty() {
            return Err(Error::InvalidContest("no ballots".into()));
        }
        let c = names.len();
        if let Some(bad) = ballots
            .iter()
            .find(|b| b.ranking.iter().any(|&id| id as usize >= c))
        {
            return Err(Error::InvalidBallot(format!(
                "{:?} references a candidate outside 0..{c}",
                bad.ranking
            )));
        }
        if reported_winner as usize >= c {
            return Err(Error::InvalidContest(format!(
                "reported winner {reported_winner} is not a candidate"
            )));
        }
        let candidates = names
            .into_iter()
            .enumerate()
            .map(|(id, name)| Candidate {
                id: id as CandidateId,
                name,
            })
            .collect();
        Ok(Contest {
            candidates,
            ballots,
            reported_winner,
        })
    }

    /// Builds a contest whose reported winner is the tabulated winner under
    /// the default tie-break.
    pub fn with_tabulated_winner(names: Vec<String>, ballots: Vec<Ballot>) -> Result<Self> {
        let mut contest = Contest::new(names, ballots, 0)?;
        contest.reported_winner = tabulate(&contest, &TieBreak::default()).winner();
        Ok(contest)
    }

    pub fn with_reported_winner(mut self, winner: CandidateId) -> Result<Self> {
        if winner as usize >= self.candidates.len() {
            return Err(Error::InvalidContest(format!(
                "reported winner {winner} is not a candidate"
            )));
        }
        self.reported_winner = winner;
        Ok(self)
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn num_ballots(&self) -> usize {
        self.ballots.len()
    }

    pub fn reported_winner(&self) -> CandidateId {
        self.reported_winner
    }

    pub fn all_candidates(&self) -> CandidateSet {
        CandidateSet::full(self.candidates.len())
    }

    pub fn name(&self, id: CandidateId) -> &str {
        &self.candidates[id as usize].name
    }

    pub fn names(&self) -> Vec<String> {
        self.candidates.iter().map(|c| c.name.clone()).collect()
    }

    pub fn find(&self, name: &str) -> Option<CandidateId> {
        self.candidates
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.id)
    }

    /// Replaces the ballots, keeping roster and reported winner.
    pub fn with_ballots(&self, ballots: Vec<Ballot>) -> Result<Self> {
        Contest::new(self.names(), ballots, self.reported_winner)
    }
}

/// Checks a candidate roster: non-empty, within the size limit, valid and
/// distinct names.
pub fn validate_roster(names: &[String]) -> Result<()> {
    if names.is_empty() {
        return Err(Error::InvalidContest("no candidates".into()));
    }
    if names.len() > MAX_CANDIDATES {
        return Err(Error::TooManyCandidates {
            found: names.len(),
            max: MAX_CANDIDATES,
        });
    }
    let mut unique = HashMap::new();
    for name in names {
        validate_name(name)?;
        if unique.insert(name.as_str(), ()).is_some() {
            return Err(Error::InvalidContest(format!(
                "candidate name {name:?} declared twice"
            )));
        }
    }
    Ok(())
}

fn validate_name(name: &str) -> Result<()> {
    if name.is_empty()
        || name.trim() != name
        || name.contains(['>', ',', '\n', '\r'])
        || name.starts_with('#')
    {
        return Err(Error::InvalidContest(format!(
            "candidate name {name:?} is empty or contains reserved characters"
        )));
    }
    Ok(())
}

/// On-disk ballot file layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BallotFormat {
    /// One ballot per line, `A>B>C`; a blank line is a blank ballot.
    #[default]
    Ranks,
    /// `ranking,count` per line.
    Aggregated,
}

impl std::str::FromStr for BallotFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ranks" | "csv" | "csv_ranks" => Ok(BallotFormat::Ranks),
            "aggregated" | "aggregated_csv" => Ok(BallotFormat::Aggregated),
            other => Err(Error::InvalidConfig(format!(
                "unknown ballot format {other:?}"
            ))),
        }
    }
}

const ROSTER_PREFIX: &str = "# candidates:";

struct Roster {
    names: Vec<String>,
    index: HashMap<String, CandidateId>,
    declared: bool,
}

impl Roster {
    fn declared(list: &str, line: usize) -> Result<Self> {
        let mut roster = Roster {
            names: Vec::new(),
            index: HashMap::new(),
            declared: false,
        };
        for name in list.split(',').map(str::trim) {
            if roster.index.contains_key(name) {
                return Err(Error::Parse {
                    line,
                    message: format!("candidate {name:?} declared twice"),
                });
            }
            roster.add(name, line)?;
        }
        roster.declared = true;
        Ok(roster)
    }

    fn add(&mut self, name: &str, line: usize) -> Result<CandidateId> {
        if self.names.len() == MAX_CANDIDATES {
            return Err(Error::TooManyCandidates {
                found: MAX_CANDIDATES + 1,
                max: MAX_CANDIDATES,
            });
        }
        validate_name(name).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let id = self.names.len() as CandidateId;
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        Ok(id)
    }

    fn lookup(&mut self, name: &str, line: usize) -> Result<CandidateId> {
        match self.index.get(name) {
            Some(&id) => Ok(id),
            None if self.declared => Err(Error::UnknownCandidate(name.to_owned())),
            None => self.add(name, line),
        }
    }

    fn parse_ranking(&mut self, text: &str, line: usize) -> Result<Ballot> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Ballot::blank());
        }
        let mut ranking = Vec::new();
        let mut seen = CandidateSet::empty();
        for name in text.split('>').map(str::trim) {
            let id = self.lookup(name, line)?;
            if seen.contains(id) {
                return Err(Error::DuplicateCandidate {
                    line,
                    name: name.to_owned(),
                });
            }
            seen.insert(id);
            ranking.push(id);
        }
        Ok(Ballot { ranking })
    }
}

/// Parses a ballot file. Without a `# candidates:` header the roster is
/// discovered in order of first appearance. The reported winner of the
/// returned contest is its tabulated winner.
pub fn parse_ballot_file(bytes: &[u8], format: BallotFormat) -> Result<Contest> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    if text.is_empty() {
        return Err(Error::EmptyFile);
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));

    let mut roster = Roster {
        names: Vec::new(),
        index: HashMap::new(),
        declared: false,
    };
    let mut ballots = Vec::new();
    let mut first = lines.next();
    if let Some(list) = first.and_then(|l| l.trim_start().strip_prefix(ROSTER_PREFIX)) {
        roster = Roster::declared(list, 1)?;
        first = None;
    }
    let numbered = first
        .into_iter()
        .map(|l| (1, l))
        .chain(lines.enumerate().map(|(i, l)| (i + 2, l)));
    for (line_no, line) in numbered {
        match format {
            BallotFormat::Ranks => ballots.push(roster.parse_ranking(line, line_no)?),
            BallotFormat::Aggregated => {
                let (ranking, count) = line.rsplit_once(',').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "expected `ranking,count`".into(),
                })?;
                let count: i64 = count.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid count {:?}", count.trim()),
                })?;
                if count <= 0 {
                    return Err(Error::NonPositiveCount {
                        line: line_no,
                        count,
                    });
                }
                let ballot = roster.parse_ranking(ranking, line_no)?;
                ballots.extend(std::iter::repeat_n(ballot, count as usize));
            }
        }
    }
    if ballots.is_empty() {
        return Err(Error::EmptyFile);
    }
    if roster.names.is_empty() {
        return Err(Error::InvalidContest(
            "no candidates declared or ranked".into(),
        ));
    }
    Contest::with_tabulated_winner(roster.names, ballots)
}

/// Serialises a contest with a roster header so that re-parsing yields the
/// same contest.
pub fn write_ballot_file(contest: &Contest, format: BallotFormat) -> String {
    let mut out = format!("{ROSTER_PREFIX} {}\n", contest.names().join(","));
    let ranking = |b: &Ballot| {
        b.ranking
            .iter()
            .map(|&c| contest.name(c))
            .collect::<Vec<_>>()
            .join(">")
    };
    match format {
        BallotFormat::Ranks => {
            for b in contest.ballots() {
                out.push_str(&ranking(b));
                out.push('\n');
            }
        }
        BallotFormat::Aggregated => {
            let ballots = contest.ballots();
            let mut start = 0;
            while start < ballots.len() {
                let run = ballots[start..]
                    .iter()
                    .take_while(|b| **b == ballots[start])
                    .count();
                out.push_str(&format!("{},{run}\n", ranking(&ballots[start])));
                start += run;
            }
        }
    }
    out
}

/// Builds the six-candidate, 56,000-ballot contest that is hard to audit:
/// `16000 + 2m` ballots `[a]`, `8000 - 2m` ballots `[b]` and 8000 ballots
/// `[c_i, b, a]` for each of `c1..c4`. Candidate ids are a=0, b=1,
/// c1..c4=2..5 and `a` is the reported (and true) winner.
pub fn generate_pathological(m: f64) -> Result<Contest> {
    let twice = 2.0 * m;
    if !twice.is_finite() || twice.fract() != 0.0 {
        return Err(Error::InvalidConfig(format!(
            "2m must be an integer, got m = {m}"
        )));
    }
    if !(0.0..=8000.0).contains(&twice) {
        return Err(Error::InvalidConfig(format!(
            "2m must lie in [0, 8000], got {twice}"
        )));
    }
    let twice = twice as usize;
    let names = ["a", "b", "c1", "c2", "c3", "c4"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut ballots = Vec::with_capacity(56_000);
    ballots.extend(std::iter::repeat_n(
        Ballot { ranking: vec![0] },
        16_000 + twice,
    ));
    ballots.extend(std::iter::repeat_n(
        Ballot { ranking: vec![1] },
        8_000 - twice,
    ));
    for c in 2..6 {
        ballots.extend(std::iter::repeat_n(
            Ballot {
                ranking: vec![c, 1, 0],
            },
            8_000,
        ));
    }
    Contest::new(names, ballots, 0)
}
