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

//! The adaptively weighted audit: one intersection supermartingale per
//! alt-order, built from per-requirement ALPHA processes that are shared
//! through the requirement pool.
//!
//! For alt-order `i` with requirements `r = 1..r_i` and base terms `e_{r,k}`
//! the intersection process is
//!
//! ```text
//!     E_t = prod_{k<=t} (sum_r w_{r,k} e_{r,k}) / (sum_r w_{r,k})
//! ```
//!
//! where the weights `w_{r,k}` depend only on draws before `k`. Weights are
//! recomputed from the base values every `update_every` draws. An alt-order
//! is rejected once `ln E_t >= ln(1/alpha)`; the reported winner is
//! confirmed once every alt-order is rejected.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::alpha::{AlphaConfig, AlphaState};
use crate::contest::{Ballot, CandidateId};
use crate::error::{Error, Result};
use crate::requirements::{DbRequirement, RequirementPool};
use crate::tabulation::{
    enumerate_alt_orders, tabulate_ballots, AltOrderSet, EliminationOrder, TieBreak,
    DEFAULT_MAX_CANDIDATES,
};

/// How the weights of an alt-order's requirements are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    /// Proportional to the previous base value.
    Linear,
    /// Proportional to the square of the previous base value.
    Quadratic,
    /// Weight one on the largest base value(s), zero elsewhere.
    Largest,
    /// Starting weights are never changed.
    Fixed,
}

impl std::str::FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(WeightScheme::Linear),
            "quadratic" => Ok(WeightScheme::Quadratic),
            "largest" => Ok(WeightScheme::Largest),
            "fixed" => Ok(WeightScheme::Fixed),
            other => Err(Error::InvalidConfig(format!(
                "unknown weight scheme {other:?}"
            ))),
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightScheme::Linear => "linear",
            WeightScheme::Quadratic => "quadratic",
            WeightScheme::Largest => "largest",
            WeightScheme::Fixed => "fixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditConfig {
    /// Risk limit.
    #[serde(rename = "alpha")]
    pub risk_limit: f64,
    pub scheme: WeightScheme,
    /// Draws between weight updates.
    pub update_every: u32,
    #[serde(flatten)]
    pub alpha_params: AlphaConfig,
    pub max_candidates: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            risk_limit: 0.05,
            scheme: WeightScheme::Largest,
            update_every: 25,
            alpha_params: AlphaConfig::default(),
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.risk_limit > 0.0 && self.risk_limit < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "risk limit must lie in (0, 1), got {}",
                self.risk_limit
            )));
        }
        if self.update_every == 0 {
            return Err(Error::InvalidConfig(
                "update_every must be at least 1".into(),
            ));
        }
        self.alpha_params.validate()
    }

    pub fn threshold_log(&self) -> f64 {
        -self.risk_limit.ln()
    }
}

/// Alt-orders and their pooled requirements for one contest shape; shared
/// read-only between audits.
#[derive(Debug, Clone)]
pub struct AuditSetup {
    num_candidates: usize,
    alt_orders: AltOrderSet,
    pool: RequirementPool,
}

impl AuditSetup {
    pub fn new(
        num_candidates: usize,
        reported_winner: CandidateId,
        max_candidates: usize,
    ) -> Result<Self> {
        let alt_orders = enumerate_alt_orders(num_candidates, reported_winner, max_candidates)?;
        Ok(Self::from_alt_orders(alt_orders))
    }

    pub fn from_alt_orders(alt_orders: AltOrderSet) -> Self {
        let pool = RequirementPool::build(&alt_orders);
        AuditSetup {
            num_candidates: alt_orders.num_candidates(),
            alt_orders,
            pool,
        }
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn reported_winner(&self) -> CandidateId {
        self.alt_orders.reported_winner()
    }

    pub fn alt_orders(&self) -> &AltOrderSet {
        &self.alt_orders
    }

    pub fn pool(&self) -> &RequirementPool {
        &self.pool
    }
}

/// Starting weights and per-requirement `eta0` derived from cast vote
/// records.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningPlan {
    /// Per alt-order, aligned with `RequirementPool::order_refs`.
    pub starting_weights: Vec<Vec<f64>>,
    /// Per pooled requirement.
    pub eta0: Vec<f64>,
    /// Assorter mean of each pooled requirement over the records.
    pub reported_means: Vec<f64>,
}

impl TuningPlan {
    fn validate(&self, setup: &AuditSetup, config: &AuditConfig) -> Result<()> {
        let pool = setup.pool();
        if self.starting_weights.len() != pool.num_orders() || self.eta0.len() != pool.len() {
            return Err(Error::InvalidConfig(
                "tuning plan does not match the requirement pool".into(),
            ));
        }
        for (i, weights) in self.starting_weights.iter().enumerate() {
            if weights.len() != pool.order_refs(i).len()
                || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
                || weights.iter().sum::<f64>() <= 0.0
            {
                return Err(Error::InvalidConfig(format!(
                    "starting weights for alt-order {i} must be non-negative with a positive sum"
                )));
            }
        }
        for &eta0 in &self.eta0 {
            config.alpha_params.with_eta0(eta0).validate()?;
        }
        Ok(())
    }
}

/// Chooses starting weights and `eta0` from cast vote records: for each
/// alt-order, weight one on the requirement(s) with the largest reported
/// assorter mean; `eta0` is the reported mean where it exceeds the null
/// bound, else the configured default.
pub fn tune_from_cvrs(
    cvrs: &[Ballot],
    setup: &AuditSetup,
    config: &AuditConfig,
) -> Result<TuningPlan> {
    if cvrs.is_empty() {
        return Err(Error::InvalidConfig("no cast vote records".into()));
    }
    let c = setup.num_candidates();
    let mut distinct: HashMap<&[CandidateId], usize> = HashMap::new();
    for ballot in cvrs {
        if let Some(&bad) = ballot.ranking().iter().find(|&&id| id as usize >= c) {
            return Err(Error::RosterMismatch(format!(
                "record ranks candidate {bad} but the contest has {c} candidates"
            )));
        }
        *distinct.entry(ballot.ranking()).or_default() += 1;
    }
    let pool = setup.pool();
    let mut sums = vec![0.0; pool.len()];
    let mut values = Vec::new();
    for (ranking, count) in distinct {
        let ballot = Ballot::new(ranking.to_vec())?;
        pool.assort_all(&ballot, &mut values);
        for (s, v) in sums.iter_mut().zip(&values) {
            *s += v * count as f64;
        }
    }
    let reported_means: Vec<f64> = sums.iter().map(|s| s / cvrs.len() as f64).collect();
    let starting_weights = (0..pool.num_orders())
        .map(|i| {
            let refs = pool.order_refs(i);
            let best = refs
                .iter()
                .map(|&r| reported_means[r])
                .fold(f64::NEG_INFINITY, f64::max);
            refs.iter()
                .map(|&r| if reported_means[r] == best { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let defaults = config.alpha_params;
    let eta0 = reported_means
        .iter()
        .map(|&m| if m > defaults.mu0 { m } else { defaults.eta0 })
        .collect();
    Ok(TuningPlan {
        starting_weights,
        eta0,
        reported_means,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Ongoing,
    /// Every alt-order has been rejected.
    Certified,
    /// Every ballot was inspected with some alt-order still standing; the
    /// outcome is the full count.
    FullCountNeeded {
        outcome: EliminationOrder,
    },
}

impl Decision {
    pub fn label(&self) -> &'static str {
        match self {
            Decision::Ongoing => "ongoing",
            Decision::Certified => "certified",
            Decision::FullCountNeeded { .. } => "full_count_needed",
        }
    }

    pub fn is_ongoing(&self) -> bool {
        matches!(self, Decision::Ongoing)
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Intersection supermartingale for one alt-order.
#[derive(Debug, Clone)]
pub struct IntersectionTracker {
    order_index: usize,
    /// Aligned with the order's pool references.
    weights: Vec<f64>,
    /// `(pool index, weight)` for the positive weights only.
    support: Vec<(usize, f64)>,
    weight_sum: f64,
    log_e: f64,
    rejected_at: Option<usize>,
    unrejectable: bool,
}

impl IntersectionTracker {
    fn new(order_index: usize, refs: &[usize], weights: Vec<f64>) -> Self {
        let mut tracker = IntersectionTracker {
            order_index,
            weights: Vec::new(),
            support: Vec::new(),
            weight_sum: 0.0,
            log_e: 0.0,
            rejected_at: None,
            unrejectable: false,
        };
        tracker.set_weights(refs, weights);
        tracker
    }

    fn set_weights(&mut self, refs: &[usize], weights: Vec<f64>) {
        self.support = refs
            .iter()
            .zip(&weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&r, &w)| (r, w))
            .collect();
        self.weight_sum = self.support.iter().map(|(_, w)| w).sum();
        self.weights = weights;
    }

    pub fn order_index(&self) -> usize {
        self.order_index
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln E_t`.
    pub fn log_e(&self) -> f64 {
        self.log_e
    }

    pub fn is_rejected(&self) -> bool {
        self.rejected_at.is_some()
    }

    /// Draw count at which the order was rejected.
    pub fn rejected_at(&self) -> Option<usize> {
        self.rejected_at
    }

    /// The process is stuck at zero and can never reach the threshold.
    pub fn is_unrejectable(&self) -> bool {
        self.unrejectable
    }

    fn is_live(&self) -> bool {
        self.rejected_at.is_none() && !self.unrejectable
    }
}

/// Weights for one alt-order from the log values of its base processes.
/// Returns `false` when every base process is at zero.
fn scheme_weights(scheme: WeightScheme, logs: &[f64], out: &mut Vec<f64>) -> bool {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return false;
    }
    out.clear();
    if max == f64::INFINITY {
        out.extend(logs.iter().map(|&l| if l == max { 1.0 } else { 0.0 }));
        return true;
    }
    match scheme {
        WeightScheme::Linear => out.extend(logs.iter().map(|&l| (l - max).exp())),
        WeightScheme::Quadratic => out.extend(logs.iter().map(|&l| (2.0 * (l - max)).exp())),
        WeightScheme::Largest | WeightScheme::Fixed => {
            out.extend(logs.iter().map(|&l| if l == max { 1.0 } else { 0.0 }))
        }
    }
    true
}

/// Snapshot of one alt-order's progress.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatus {
    pub order: EliminationOrder,
    pub log_e: f64,
    pub rejected: bool,
    pub unrejectable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequirementStatus {
    pub requirement: DbRequirement,
    pub log_m: f64,
    /// Still referenced by an alt-order that has not been rejected.
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditStatus {
    pub t: usize,
    pub population: usize,
    pub decision: Decision,
    pub risk_limit: f64,
    pub threshold_log: f64,
    /// Alt-orders not yet rejected.
    pub remaining: usize,
    pub orders: Vec<OrderStatus>,
    pub requirements: Vec<RequirementStatus>,
}

/// Live audit state for one contest and sampling order.
#[derive(Debug, Clone)]
pub struct AuditState {
    setup: Arc<AuditSetup>,
    config: AuditConfig,
    population: usize,
    threshold_log: f64,
    base: Vec<AlphaState>,
    /// Number of live trackers referencing each pooled requirement.
    live_refs: Vec<u32>,
    terms: Vec<f64>,
    assorted: Vec<f64>,
    trackers: Vec<IntersectionTracker>,
    remaining: usize,
    any_saturated: bool,
    t: usize,
    decision: Decision,
    observed: HashMap<Vec<CandidateId>, usize>,
}

impl AuditState {
    /// Starts an audit of `population` ballots. Without tuning every
    /// requirement starts with weight one.
    pub fn new(
        setup: Arc<AuditSetup>,
        population: usize,
        config: AuditConfig,
        tuning: Option<&TuningPlan>,
    ) -> Result<Self> {
        config.validate()?;
        if population == 0 {
            return Err(Error::InvalidConfig("population must be non-empty".into()));
        }
        if setup.num_candidates() > config.max_candidates {
            return Err(Error::TooManyCandidates {
                found: setup.num_candidates(),
                max: config.max_candidates,
            });
        }
        if let Some(plan) = tuning {
            plan.validate(&setup, &config)?;
        }
        let pool = setup.pool();
        let base = (0..pool.len())
            .map(|r| {
                let params = match tuning {
                    Some(plan) => config.alpha_params.with_eta0(plan.eta0[r]),
                    None => config.alpha_params,
                };
                AlphaState::new(population, params)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut live_refs = vec![0; pool.len()];
        let trackers: Vec<IntersectionTracker> = (0..pool.num_orders())
            .map(|i| {
                let refs = pool.order_refs(i);
                for &r in refs {
                    live_refs[r] += 1;
                }
                let weights = match tuning {
                    Some(plan) => plan.starting_weights[i].clone(),
                    None => vec![1.0; refs.len()],
                };
                IntersectionTracker::new(i, refs, weights)
            })
            .collect();
        Ok(AuditState {
            threshold_log: config.threshold_log(),
            config,
            population,
            base,
            live_refs,
            terms: vec![1.0; pool.len()],
            assorted: Vec::with_capacity(pool.len()),
            remaining: trackers.len(),
            trackers,
            any_saturated: false,
            t: 0,
            decision: Decision::Ongoing,
            observed: HashMap::new(),
            setup,
        })
    }

    pub fn setup(&self) -> &Arc<AuditSetup> {
        &self.setup
    }

    pub fn config(&self) -> &AuditConfig {
        &self.config
    }

    pub fn population(&self) -> usize {
        self.population
    }

    /// Ballots observed so far.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn decision(&self) -> &Decision {
        &self.decision
    }

    pub fn threshold_log(&self) -> f64 {
        self.threshold_log
    }

    pub fn trackers(&self) -> &[IntersectionTracker] {
        &self.trackers
    }

    pub fn base(&self) -> &[AlphaState] {
        &self.base
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    /// Feeds the next sampled ballot.
    pub fn observe(&mut self, ballot: &Ballot) -> Result<&Decision> {
        self.check_ballot(ballot)?;
        let mut assorted = std::mem::take(&mut self.assorted);
        self.setup.pool().assort_all(ballot, &mut assorted);
        let result = self.advance(ballot, &assorted);
        self.assorted = assorted;
        result.map(|()| &self.decision)
    }

    fn check_ballot(&self, ballot: &Ballot) -> Result<()> {
        let c = self.setup.num_candidates();
        match ballot.ranking().iter().find(|&&id| id as usize >= c) {
            Some(bad) => Err(Error::InvalidBallot(format!(
                "candidate {bad} is not one of the {c} candidates"
            ))),
            None => Ok(()),
        }
    }

    /// As [`observe`](Self::observe), with the pooled assorter values of
    /// `ballot` already computed.
    pub(crate) fn observe_assorted(
        &mut self,
        ballot: &Ballot,
        assorted: &[f64],
    ) -> Result<&Decision> {
        self.advance(ballot, assorted)?;
        Ok(&self.decision)
    }

    fn advance(&mut self, ballot: &Ballot, assorted: &[f64]) -> Result<()> {
        if !self.decision.is_ongoing() {
            return Err(Error::AuditClosed);
        }
        if self.t >= self.population {
            return Err(Error::PopulationExhausted(self.population));
        }
        debug_assert_eq!(assorted.len(), self.base.len());

        for (r, state) in self.base.iter_mut().enumerate() {
            if self.live_refs[r] > 0 {
                let step = state.step(assorted[r])?;
                self.terms[r] = step.term;
                if step.term == f64::INFINITY {
                    self.any_saturated = true;
                }
            }
        }

        let pool = self.setup.pool();
        let adaptive = self.config.scheme != WeightScheme::Fixed;
        for tracker in self.trackers.iter_mut().filter(|tr| tr.is_live()) {
            let refs = pool.order_refs(tracker.order_index);
            let saturated_hit = self.any_saturated
                && refs
                    .iter()
                    .zip(&tracker.weights)
                    .any(|(&r, &w)| self.base[r].is_saturated() && (adaptive || w > 0.0));
            if saturated_hit {
                tracker.log_e = f64::INFINITY;
            } else {
                let mut mix = 0.0;
                for &(r, w) in &tracker.support {
                    mix += w * self.terms[r];
                }
                tracker.log_e += (mix / tracker.weight_sum).ln();
            }
            if tracker.log_e >= self.threshold_log {
                tracker.rejected_at = Some(self.t + 1);
            } else if tracker.log_e == f64::NEG_INFINITY {
                tracker.unrejectable = true;
            } else {
                continue;
            }
            for &r in refs {
                self.live_refs[r] -= 1;
            }
            if tracker.rejected_at.is_some() {
                self.remaining -= 1;
            }
        }

        self.t += 1;
        match self.observed.get_mut(ballot.ranking()) {
            Some(count) => *count += 1,
            None => {
                self.observed.insert(ballot.ranking().to_vec(), 1);
            }
        }

        if self.remaining == 0 {
            self.decision = Decision::Certified;
        } else if self.t == self.population {
            self.decision = Decision::FullCountNeeded {
                outcome: self.full_count(),
            };
        } else if self.t % self.config.update_every as usize == 0 {
            self.reweigh();
        }
        Ok(())
    }

    /// Recomputes every live alt-order's weights from the current base
    /// values.
    pub fn reweigh(&mut self) {
        if self.config.scheme == WeightScheme::Fixed {
            return;
        }
        let pool = self.setup.pool();
        let mut logs = Vec::new();
        let mut weights = Vec::new();
        for tracker in self.trackers.iter_mut().filter(|tr| tr.is_live()) {
            let refs = pool.order_refs(tracker.order_index);
            logs.clear();
            logs.extend(refs.iter().map(|&r| self.base[r].log_m()));
            if scheme_weights(self.config.scheme, &logs, &mut weights) {
                tracker.set_weights(refs, weights.clone());
            } else {
                tracker.unrejectable = true;
                for &r in refs {
                    self.live_refs[r] -= 1;
                }
            }
        }
    }

    fn full_count(&self) -> EliminationOrder {
        let ballots: Vec<Ballot> = self
            .observed
            .iter()
            .flat_map(|(ranking, &n)| {
                std::iter::repeat_n(Ballot::new(ranking.clone()).expect("validated"), n)
            })
            .collect();
        tabulate_ballots(&ballots, self.setup.num_candidates(), &TieBreak::default()).order
    }

    pub fn status(&self) -> AuditStatus {
        let pool = self.setup.pool();
        AuditStatus {
            t: self.t,
            population: self.population,
            decision: self.decision.clone(),
            risk_limit: self.config.risk_limit,
            threshold_log: self.threshold_log,
            remaining: self.remaining,
            orders: self
                .trackers
                .iter()
                .map(|tr| OrderStatus {
                    order: self.setup.alt_orders().orders()[tr.order_index].clone(),
                    log_e: tr.log_e,
                    rejected: tr.is_rejected(),
                    unrejectable: tr.unrejectable,
                })
                .collect(),
            requirements: pool
                .requirements()
                .iter()
                .zip(&self.base)
                .zip(&self.live_refs)
                .map(|((req, state), &live)| RequirementStatus {
                    requirement: *req,
                    log_m: state.log_m(),
                    active: live > 0,
                })
                .collect(),
        }
    }
}
