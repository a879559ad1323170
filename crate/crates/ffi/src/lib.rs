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

//! C ABI for the awaire audit engine.
//!
//! Contests and audits are opaque handles created by `awaire_*_new` style
//! functions and released with the matching `*_free`. Fallible functions
//! return an [`AwaireStatus`]; on failure a description is available from
//! [`awaire_last_error`] on the same thread until the next failing call.
//! Candidates are identified by their zero-based index in the roster.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use awaire::engine::{AuditConfig, AuditSetup, AuditState, Decision, WeightScheme};
use awaire::simulate::Simulator;
use awaire::{AlphaConfig, Ballot, BallotFormat, Contest, Error, TieBreak};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwaireStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed ballot file.
    Parse = 2,
    /// An argument or configuration value is out of range.
    InvalidArgument = 3,
    /// The audit already reached a decision or saw every ballot.
    Closed = 4,
    /// A caller-provided buffer is too small.
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwaireScheme {
    Linear = 0,
    Quadratic = 1,
    Largest = 2,
    Fixed = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwaireDecision {
    Ongoing = 0,
    Certified = 1,
    FullCountNeeded = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwaireConfig {
    /// Risk limit, in (0, 1).
    pub alpha: f64,
    pub scheme: AwaireScheme,
    /// Draws between weight updates.
    pub update_every: u32,
    pub mu0: f64,
    pub eta0: f64,
    pub d: u32,
    pub max_candidates: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwaireSimSummary {
    pub n_reps: usize,
    pub mean_sample_size: f64,
    pub certification_rate: f64,
}

/// A parsed or generated contest.
pub struct AwaireContest(Contest);

/// A live audit.
pub struct AwaireAudit(AuditState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn fail(status: AwaireStatus, message: impl Into<String>) -> AwaireStatus {
    set_error(message.into());
    status
}

fn status_of(e: &Error) -> AwaireStatus {
    match e {
        Error::Parse { .. }
        | Error::EmptyFile
        | Error::DuplicateCandidate { .. }
        | Error::UnknownCandidate(_)
        | Error::NonPositiveCount { .. } => AwaireStatus::Parse,
        Error::AuditClosed | Error::PopulationExhausted(_) | Error::SessionClosed => {
            AwaireStatus::Closed
        }
        _ => AwaireStatus::InvalidArgument,
    }
}

fn from_error(e: Error) -> AwaireStatus {
    let status = status_of(&e);
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into [`AwaireStatus::Internal`].
fn guard(f: impl FnOnce() -> AwaireStatus) -> AwaireStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(AwaireStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

impl From<AwaireScheme> for WeightScheme {
    fn from(s: AwaireScheme) -> Self {
        match s {
            AwaireScheme::Linear => WeightScheme::Linear,
            AwaireScheme::Quadratic => WeightScheme::Quadratic,
            AwaireScheme::Largest => WeightScheme::Largest,
            AwaireScheme::Fixed => WeightScheme::Fixed,
        }
    }
}

impl From<WeightScheme> for AwaireScheme {
    fn from(s: WeightScheme) -> Self {
        match s {
            WeightScheme::Linear => AwaireScheme::Linear,
            WeightScheme::Quadratic => AwaireScheme::Quadratic,
            WeightScheme::Largest => AwaireScheme::Largest,
            WeightScheme::Fixed => AwaireScheme::Fixed,
        }
    }
}

impl From<&AwaireConfig> for AuditConfig {
    fn from(c: &AwaireConfig) -> Self {
        AuditConfig {
            risk_limit: c.alpha,
            scheme: c.scheme.into(),
            update_every: c.update_every,
            alpha_params: AlphaConfig {
                mu0: c.mu0,
                eta0: c.eta0,
                d: c.d,
            },
            max_candidates: c.max_candidates,
        }
    }
}

fn decision_code(d: &Decision) -> AwaireDecision {
    match d {
        Decision::Ongoing => AwaireDecision::Ongoing,
        Decision::Certified => AwaireDecision::Certified,
        Decision::FullCountNeeded { .. } => AwaireDecision::FullCountNeeded,
    }
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn awaire_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Fills `out` with the default configuration.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_config_default(out: *mut AwaireConfig) -> AwaireStatus {
    if out.is_null() {
        return fail(AwaireStatus::NullPointer, "out is NULL");
    }
    let d = AuditConfig::default();
    out.write(AwaireConfig {
        alpha: d.risk_limit,
        scheme: d.scheme.into(),
        update_every: d.update_every,
        mu0: d.alpha_params.mu0,
        eta0: d.alpha_params.eta0,
        d: d.alpha_params.d,
        max_candidates: d.max_candidates,
    });
    AwaireStatus::Ok
}

/// Parses a UTF-8 ballot file of `len` bytes. `aggregated` selects the
/// `ranking,count` row format.
///
/// # Safety
/// `data` must be valid for `len` bytes and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_contest_parse(
    data: *const u8,
    len: usize,
    aggregated: bool,
    out: *mut *mut AwaireContest,
) -> AwaireStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return fail(AwaireStatus::NullPointer, "data or out is NULL");
        }
        let bytes = slice::from_raw_parts(data, len);
        let format = if aggregated {
            BallotFormat::Aggregated
        } else {
            BallotFormat::Ranks
        };
        match awaire::parse_ballot_file(bytes, format) {
            Ok(contest) => {
                out.write(Box::into_raw(Box::new(AwaireContest(contest))));
                AwaireStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Builds the pathological six-candidate contest with margin parameter `m`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_contest_pathological(
    m: f64,
    out: *mut *mut AwaireContest,
) -> AwaireStatus {
    guard(|| {
        if out.is_null() {
            return fail(AwaireStatus::NullPointer, "out is NULL");
        }
        match awaire::generate_pathological(m) {
            Ok(contest) => {
                out.write(Box::into_raw(Box::new(AwaireContest(contest))));
                AwaireStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `contest` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn awaire_contest_free(contest: *mut AwaireContest) {
    if !contest.is_null() {
        drop(Box::from_raw(contest));
    }
}

/// # Safety
/// `contest` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn awaire_contest_num_candidates(contest: *const AwaireContest) -> usize {
    contest.as_ref().map_or(0, |c| c.0.num_candidates())
}

/// # Safety
/// `contest` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn awaire_contest_num_ballots(contest: *const AwaireContest) -> usize {
    contest.as_ref().map_or(0, |c| c.0.num_ballots())
}

/// Index of the tabulated winner.
///
/// # Safety
/// `contest` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_contest_winner(
    contest: *const AwaireContest,
    out: *mut u8,
) -> AwaireStatus {
    match (contest.as_ref(), out.is_null()) {
        (Some(c), false) => {
            out.write(c.0.reported_winner());
            AwaireStatus::Ok
        }
        _ => fail(AwaireStatus::NullPointer, "contest or out is NULL"),
    }
}

/// Copies the name of candidate `id`, NUL-terminated, into `buf` of `cap`
/// bytes. `needed` receives the required size including the terminator.
///
/// # Safety
/// `contest` must be a live handle, `buf` valid for `cap` bytes (or NULL
/// when `cap` is 0) and `needed` NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_contest_candidate_name(
    contest: *const AwaireContest,
    id: u8,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> AwaireStatus {
    let Some(c) = contest.as_ref() else {
        return fail(AwaireStatus::NullPointer, "contest is NULL");
    };
    if id as usize >= c.0.num_candidates() {
        return fail(AwaireStatus::InvalidArgument, format!("no candidate {id}"));
    }
    let name = c.0.name(id).as_bytes();
    if !needed.is_null() {
        needed.write(name.len() + 1);
    }
    if cap < name.len() + 1 || buf.is_null() {
        return fail(AwaireStatus::BufferTooSmall, "name buffer too small");
    }
    ptr::copy_nonoverlapping(name.as_ptr(), buf.cast::<u8>(), name.len());
    buf.add(name.len()).write(0);
    AwaireStatus::Ok
}

/// Writes the elimination order (winner last) into `out`, which must hold
/// `awaire_contest_num_candidates` entries.
///
/// # Safety
/// `contest` must be a live handle and `out` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_contest_elimination_order(
    contest: *const AwaireContest,
    out: *mut u8,
    cap: usize,
) -> AwaireStatus {
    guard(|| {
        let Some(c) = contest.as_ref() else {
            return fail(AwaireStatus::NullPointer, "contest is NULL");
        };
        if out.is_null() {
            return fail(AwaireStatus::NullPointer, "out is NULL");
        }
        let result = awaire::tabulate(&c.0, &TieBreak::default());
        let order = result.order.as_slice();
        if cap < order.len() {
            return fail(AwaireStatus::BufferTooSmall, "order buffer too small");
        }
        ptr::copy_nonoverlapping(order.as_ptr(), out, order.len());
        AwaireStatus::Ok
    })
}

/// Starts an audit of `population` ballots among `num_candidates`
/// candidates. `config` may be NULL for the defaults.
///
/// # Safety
/// `config` must be NULL or valid for reads, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_audit_new(
    num_candidates: usize,
    reported_winner: u8,
    population: usize,
    config: *const AwaireConfig,
    out: *mut *mut AwaireAudit,
) -> AwaireStatus {
    guard(|| {
        if out.is_null() {
            return fail(AwaireStatus::NullPointer, "out is NULL");
        }
        let config = config
            .as_ref()
            .map_or_else(AuditConfig::default, AuditConfig::from);
        let state = config
            .validate()
            .and_then(|()| AuditSetup::new(num_candidates, reported_winner, config.max_candidates))
            .and_then(|setup| AuditState::new(Arc::new(setup), population, config, None));
        match state {
            Ok(state) => {
                out.write(Box::into_raw(Box::new(AwaireAudit(state))));
                AwaireStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `audit` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn awaire_audit_free(audit: *mut AwaireAudit) {
    if !audit.is_null() {
        drop(Box::from_raw(audit));
    }
}

/// Feeds the next sampled ballot, given as `len` candidate indices in
/// preference order (`len` may be 0 for a blank ballot).
///
/// # Safety
/// `audit` must be a live handle, `ranking` valid for `len` reads (or NULL
/// when `len` is 0) and `decision` NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_audit_observe(
    audit: *mut AwaireAudit,
    ranking: *const u8,
    len: usize,
    decision: *mut AwaireDecision,
) -> AwaireStatus {
    guard(|| {
        let Some(a) = audit.as_mut() else {
            return fail(AwaireStatus::NullPointer, "audit is NULL");
        };
        let ids = if len == 0 {
            &[][..]
        } else if ranking.is_null() {
            return fail(AwaireStatus::NullPointer, "ranking is NULL");
        } else {
            slice::from_raw_parts(ranking, len)
        };
        let result = Ballot::new(ids.to_vec()).and_then(|b| a.0.observe(&b).map(decision_code));
        match result {
            Ok(d) => {
                if !decision.is_null() {
                    decision.write(d);
                }
                AwaireStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `audit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn awaire_audit_decision(audit: *const AwaireAudit) -> AwaireDecision {
    audit
        .as_ref()
        .map_or(AwaireDecision::Ongoing, |a| decision_code(a.0.decision()))
}

/// Ballots observed so far.
///
/// # Safety
/// `audit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn awaire_audit_t(audit: *const AwaireAudit) -> usize {
    audit.as_ref().map_or(0, |a| a.0.t())
}

/// Number of alternative elimination orders under test.
///
/// # Safety
/// `audit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn awaire_audit_num_orders(audit: *const AwaireAudit) -> usize {
    audit.as_ref().map_or(0, |a| a.0.trackers().len())
}

/// Alt-orders not yet rejected.
///
/// # Safety
/// `audit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn awaire_audit_remaining(audit: *const AwaireAudit) -> usize {
    audit.as_ref().map_or(0, |a| a.0.remaining())
}

/// Progress of alt-order `index`: `ln E_t` (possibly infinite) and whether
/// it has been rejected.
///
/// # Safety
/// `audit` must be a live handle; `log_e` and `rejected` NULL or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_audit_order(
    audit: *const AwaireAudit,
    index: usize,
    log_e: *mut f64,
    rejected: *mut bool,
) -> AwaireStatus {
    let Some(a) = audit.as_ref() else {
        return fail(AwaireStatus::NullPointer, "audit is NULL");
    };
    let Some(tracker) = a.0.trackers().get(index) else {
        return fail(
            AwaireStatus::InvalidArgument,
            format!("no alt-order {index}"),
        );
    };
    if !log_e.is_null() {
        log_e.write(tracker.log_e());
    }
    if !rejected.is_null() {
        rejected.write(tracker.is_rejected());
    }
    AwaireStatus::Ok
}

/// Writes alt-order `index` (winner last) into `out` of `cap` entries.
///
/// # Safety
/// `audit` must be a live handle and `out` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_audit_order_sequence(
    audit: *const AwaireAudit,
    index: usize,
    out: *mut u8,
    cap: usize,
) -> AwaireStatus {
    let Some(a) = audit.as_ref() else {
        return fail(AwaireStatus::NullPointer, "audit is NULL");
    };
    let Some(order) = a.0.setup().alt_orders().orders().get(index) else {
        return fail(
            AwaireStatus::InvalidArgument,
            format!("no alt-order {index}"),
        );
    };
    let seq = order.as_slice();
    if out.is_null() || cap < seq.len() {
        return fail(AwaireStatus::BufferTooSmall, "order buffer too small");
    }
    ptr::copy_nonoverlapping(seq.as_ptr(), out, seq.len());
    AwaireStatus::Ok
}

/// Replays `n_reps` audits of `contest` with `reported_winner` over seeded
/// random sampling orders. `sample_sizes`, when not NULL, receives one
/// entry per trial.
///
/// # Safety
/// `contest` must be a live handle, `config` NULL or valid for reads,
/// `out` valid for writes and `sample_sizes` NULL or valid for `n_reps`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn awaire_simulate(
    contest: *const AwaireContest,
    reported_winner: u8,
    n_reps: usize,
    seed: u64,
    config: *const AwaireConfig,
    out: *mut AwaireSimSummary,
    sample_sizes: *mut usize,
) -> AwaireStatus {
    guard(|| {
        let Some(c) = contest.as_ref() else {
            return fail(AwaireStatus::NullPointer, "contest is NULL");
        };
        if out.is_null() {
            return fail(AwaireStatus::NullPointer, "out is NULL");
        }
        let config = config
            .as_ref()
            .map_or_else(AuditConfig::default, AuditConfig::from);
        let summary = Simulator::new(&c.0, reported_winner, config, None)
            .and_then(|sim| sim.run_replications(n_reps, seed));
        match summary {
            Ok(s) => {
                out.write(AwaireSimSummary {
                    n_reps: s.n_reps,
                    mean_sample_size: s.mean_sample_size,
                    certification_rate: s.certification_rate,
                });
                if !sample_sizes.is_null() {
                    for (k, trial) in s.per_trial.iter().enumerate() {
                        sample_sizes.add(k).write(trial.sample_size);
                    }
                }
                AwaireStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
