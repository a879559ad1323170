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

//! Live audit sessions backed by an append-only JSON Lines event log.
//!
//! Each session lives in `<data>/<id>.jsonl`. The first event is `Created`
//! and carries the manifest and configuration; every later ballot is a
//! `BallotEntered` event, followed by the `WeightsUpdated` and `Decision`
//! events that the engine derives from it. Each event's checksum is the
//! SHA-256 of the previous checksum, the sequence number, the kind and the
//! compact payload, so the log is tamper-evident. Loading a session replays
//! the ballots, checks that the derived events agree, drops a torn final
//! line and appends any derived events lost in a crash.

pub mod http;

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::contest::{validate_roster, Ballot, CandidateId};
use crate::engine::{tune_from_cvrs, AuditConfig, AuditSetup, AuditState, Decision, WeightScheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateRequest {
    /// Number of paper ballots in the contest.
    pub ballot_count: usize,
    pub candidates: Vec<String>,
    pub reported_winner: String,
    #[serde(default)]
    pub config: AuditConfig,
    /// Cast vote records as rankings of candidate names, used for tuning.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cvrs: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub ranking: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Created,
    BallotEntered,
    WeightsUpdated,
    Decision,
}

impl EventKind {
    fn as_str(self) -> &'static str {
        match self {
            EventKind::Created => "Created",
            EventKind::BallotEntered => "BallotEntered",
            EventKind::WeightsUpdated => "WeightsUpdated",
            EventKind::Decision => "Decision",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub kind: EventKind,
    pub payload: Value,
    pub checksum: String,
}

fn chain_checksum(prev: &str, seq: u64, kind: EventKind, payload: &Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prev.as_bytes());
    hasher.update(b"\n");
    hasher.update(seq.to_string().as_bytes());
    hasher.update(b"\n");
    hasher.update(kind.as_str().as_bytes());
    hasher.update(b"\n");
    hasher.update(payload.to_string().as_bytes());
    hex::encode(hasher.finalize())
}

/// A log value that may be infinite; infinities serialise as `"inf"` and
/// `"-inf"` since JSON has no literal for them.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "LogRepr")]
pub struct LogValue(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum LogRepr {
    Number(f64),
    Text(String),
}

impl From<LogRepr> for LogValue {
    fn from(r: LogRepr) -> Self {
        match r {
            LogRepr::Number(x) => LogValue(x),
            LogRepr::Text(s) if s == "-inf" => LogValue(f64::NEG_INFINITY),
            LogRepr::Text(_) => LogValue(f64::INFINITY),
        }
    }
}

impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            x if x == f64::INFINITY => s.serialize_str("inf"),
            x if x == f64::NEG_INFINITY => s.serialize_str("-inf"),
            x => s.serialize_f64(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderBody {
    pub order: Vec<String>,
    pub log_e: LogValue,
    pub rejected: bool,
    pub unrejectable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementBody {
    /// The candidate required to be ahead.
    pub i: String,
    pub j: String,
    pub standing: Vec<String>,
    pub log_m: LogValue,
    pub active: bool,
}

/// Session status as served over HTTP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusBody {
    pub session_id: String,
    pub created_at: u64,
    pub candidates: Vec<String>,
    pub reported_winner: String,
    pub ballot_count: usize,
    pub t: usize,
    pub decision: String,
    /// Full-count elimination order, once known.
    pub outcome: Option<Vec<String>>,
    pub alpha: f64,
    pub threshold_log: f64,
    pub remaining: usize,
    pub orders: Vec<OrderBody>,
    pub requirements: Vec<RequirementBody>,
}

pub struct Session {
    id: String,
    created_at: u64,
    request: CreateRequest,
    audit: AuditState,
    log: EventLog,
}

struct EventLog {
    path: PathBuf,
    events: Vec<SessionEvent>,
}

impl EventLog {
    /// Chains `drafts` onto the log and writes them with a single append.
    fn append(&mut self, drafts: Vec<(EventKind, Value)>) -> Result<()> {
        let mut batch: Vec<SessionEvent> = Vec::with_capacity(drafts.len());
        for (kind, payload) in drafts {
            let last = batch.last().or(self.events.last());
            let event = chain_after(last, kind, payload);
            batch.push(event);
        }
        let mut text = String::new();
        for event in &batch {
            text.push_str(&serde_json::to_string(event).expect("events serialise"));
            text.push('\n');
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        file.write_all(text.as_bytes())?;
        file.sync_data()?;
        self.events.extend(batch);
        Ok(())
    }
}

fn chain_after(last: Option<&SessionEvent>, kind: EventKind, payload: Value) -> SessionEvent {
    let (prev, seq) = match last {
        Some(e) => (e.checksum.as_str(), e.seq + 1),
        None => ("", 1),
    };
    SessionEvent {
        seq,
        checksum: chain_checksum(prev, seq, kind, &payload),
        kind,
        payload,
    }
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn lookup(names: &[String], name: &str) -> Result<CandidateId> {
    names
        .iter()
        .position(|n| n == name)
        .map(|i| i as CandidateId)
        .ok_or_else(|| Error::UnknownCandidate(name.to_owned()))
}

fn ballot_from_names(names: &[String], ranking: &[String]) -> Result<Ballot> {
    if let Some((k, dup)) = ranking
        .iter()
        .enumerate()
        .find(|(k, n)| ranking[..*k].contains(n))
    {
        return Err(Error::InvalidBallot(format!(
            "{dup:?} ranked more than once (position {})",
            k + 1
        )));
    }
    let ids = ranking
        .iter()
        .map(|n| lookup(names, n))
        .collect::<Result<Vec<_>>>()?;
    Ballot::new(ids)
}

fn build_audit(request: &CreateRequest) -> Result<AuditState> {
    let config = request.config;
    config.validate()?;
    validate_roster(&request.candidates)?;
    if request.ballot_count == 0 {
        return Err(Error::InvalidConfig(
            "ballot_count must be at least 1".into(),
        ));
    }
    let winner = lookup(&request.candidates, &request.reported_winner)?;
    let setup = Arc::new(AuditSetup::new(
        request.candidates.len(),
        winner,
        config.max_candidates,
    )?);
    let tuning = match &request.cvrs {
        Some(cvrs) => {
            let ballots = cvrs
                .iter()
                .map(|r| ballot_from_names(&request.candidates, r))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| match e {
                    Error::UnknownCandidate(n) => {
                        Error::RosterMismatch(format!("CVR ranks unknown candidate {n:?}"))
                    }
                    other => other,
                })?;
            Some(tune_from_cvrs(&ballots, &setup, &config)?)
        }
        None => None,
    };
    AuditState::new(setup, request.ballot_count, config, tuning.as_ref())
}

/// Events the engine derives from the ballot that brought it to `audit`.
fn derived_events(audit: &AuditState, names: &[String]) -> Vec<(EventKind, Value)> {
    let mut out = Vec::new();
    let t = audit.t();
    match audit.decision() {
        Decision::Ongoing => {
            let config = audit.config();
            if config.scheme != WeightScheme::Fixed && t % config.update_every as usize == 0 {
                let orders: Vec<Value> = audit
                    .trackers()
                    .iter()
                    .filter(|tr| !tr.is_rejected() && !tr.is_unrejectable())
                    .map(|tr| json!({"index": tr.order_index(), "weights": tr.weights()}))
                    .collect();
                out.push((EventKind::WeightsUpdated, json!({"t": t, "orders": orders})));
            }
        }
        Decision::Certified => {
            out.push((
                EventKind::Decision,
                json!({"t": t, "decision": "certified"}),
            ));
        }
        Decision::FullCountNeeded { outcome } => {
            let names: Vec<&str> = outcome
                .as_slice()
                .iter()
                .map(|&c| names[c as usize].as_str())
                .collect();
            out.push((
                EventKind::Decision,
                json!({"t": t, "decision": "full_count_needed", "outcome": names}),
            ));
        }
    }
    out
}

impl Session {
    fn create(dir: &Path, request: CreateRequest) -> Result<Session> {
        let audit = build_audit(&request)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let created_at = now_secs();
        let mut session = Session {
            log: EventLog {
                path: dir.join(format!("{id}.jsonl")),
                events: Vec::new(),
            },
            id,
            created_at,
            request,
            audit,
        };
        let payload = json!({
            "id": session.id,
            "created_at": created_at,
            "request": session.request,
        });
        session.log.append(vec![(EventKind::Created, payload)])?;
        Ok(session)
    }

    /// Rebuilds a session from its log file, repairing a torn tail.
    fn load(path: &Path) -> Result<Session> {
        let corrupt = |msg: String| Error::CorruptLog(format!("{}: {msg}", path.display()));
        let text =
            String::from_utf8(fs::read(path)?).map_err(|_| corrupt("log is not UTF-8".into()))?;
        let mut lines: Vec<&str> = text.split('\n').collect();
        let tail = lines.pop().unwrap_or("");
        if !tail.is_empty() {
            if serde_json::from_str::<SessionEvent>(tail).is_ok() {
                OpenOptions::new()
                    .append(true)
                    .open(path)?
                    .write_all(b"\n")?;
                lines.push(tail);
            } else {
                log::warn!("{}: dropping torn final line", path.display());
                OpenOptions::new()
                    .write(true)
                    .open(path)?
                    .set_len((text.len() - tail.len()) as u64)?;
            }
        }
        let mut logged = Vec::with_capacity(lines.len());
        let mut prev = String::new();
        for (k, line) in lines.iter().enumerate() {
            let event: SessionEvent =
                serde_json::from_str(line).map_err(|e| corrupt(format!("line {}: {e}", k + 1)))?;
            if event.seq != k as u64 + 1 {
                return Err(corrupt(format!("line {} has seq {}", k + 1, event.seq)));
            }
            if chain_checksum(&prev, event.seq, event.kind, &event.payload) != event.checksum {
                return Err(corrupt(format!("checksum mismatch at seq {}", event.seq)));
            }
            prev = event.checksum.clone();
            logged.push(event);
        }
        let mut iter = logged.into_iter().peekable();
        let created = iter
            .next()
            .filter(|e| e.kind == EventKind::Created)
            .ok_or_else(|| corrupt("missing Created event".into()))?;
        let id = created.payload["id"]
            .as_str()
            .ok_or_else(|| corrupt("Created event lacks an id".into()))?
            .to_owned();
        let created_at = created.payload["created_at"].as_u64().unwrap_or(0);
        let request: CreateRequest = serde_json::from_value(created.payload["request"].clone())
            .map_err(|e| corrupt(format!("bad Created payload: {e}")))?;
        let audit = build_audit(&request)?;
        let mut session = Session {
            log: EventLog {
                path: path.to_owned(),
                events: vec![created],
            },
            id,
            created_at,
            request,
            audit,
        };

        while let Some(event) = iter.next() {
            if event.kind != EventKind::BallotEntered {
                return Err(corrupt(format!(
                    "unexpected {:?} at seq {}",
                    event.kind, event.seq
                )));
            }
            let ranking: Vec<String> = serde_json::from_value(event.payload["ranking"].clone())
                .map_err(|e| corrupt(format!("bad ballot at seq {}: {e}", event.seq)))?;
            let ballot = ballot_from_names(&session.request.candidates, &ranking)?;
            session.audit.observe(&ballot)?;
            session.log.events.push(event);
            let mut missing = Vec::new();
            for (kind, payload) in derived_events(&session.audit, &session.request.candidates) {
                match iter.peek() {
                    Some(next) if next.kind != EventKind::BallotEntered => {
                        let next = iter.next().expect("peeked");
                        if next.kind != kind || next.payload != payload {
                            return Err(corrupt(format!(
                                "seq {} does not match the replayed audit",
                                next.seq
                            )));
                        }
                        session.log.events.push(next);
                    }
                    Some(next) => {
                        return Err(corrupt(format!(
                            "derived events missing before seq {}",
                            next.seq
                        )));
                    }
                    None => missing.push((kind, payload)),
                }
            }
            if !missing.is_empty() {
                log::warn!(
                    "{}: restoring {} derived event(s)",
                    path.display(),
                    missing.len()
                );
                session.log.append(missing)?;
            }
        }
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn audit(&self) -> &AuditState {
        &self.audit
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.log.events
    }

    /// Records and applies the next sampled ballot. Nothing is written
    /// unless the engine accepts the ballot.
    fn submit(&mut self, ranking: &[String]) -> Result<StatusBody> {
        if !self.audit.decision().is_ongoing() {
            return Err(Error::SessionClosed);
        }
        let ballot = ballot_from_names(&self.request.candidates, ranking)?;
        let mut next = self.audit.clone();
        next.observe(&ballot)?;
        let mut events = vec![(
            EventKind::BallotEntered,
            json!({"t": next.t(), "ranking": ranking}),
        )];
        events.extend(derived_events(&next, &self.request.candidates));
        self.log.append(events)?;
        self.audit = next;
        Ok(self.status())
    }

    pub fn status(&self) -> StatusBody {
        let names = &self.request.candidates;
        let name = |c: CandidateId| names[c as usize].clone();
        let status = self.audit.status();
        let outcome = match &status.decision {
            Decision::FullCountNeeded { outcome } => {
                Some(outcome.as_slice().iter().map(|&c| name(c)).collect())
            }
            _ => None,
        };
        StatusBody {
            session_id: self.id.clone(),
            created_at: self.created_at,
            candidates: names.clone(),
            reported_winner: self.request.reported_winner.clone(),
            ballot_count: self.request.ballot_count,
            t: status.t,
            decision: status.decision.label().to_owned(),
            outcome,
            alpha: status.risk_limit,
            threshold_log: status.threshold_log,
            remaining: status.remaining,
            orders: status
                .orders
                .iter()
                .map(|o| OrderBody {
                    order: o.order.as_slice().iter().map(|&c| name(c)).collect(),
                    log_e: LogValue(o.log_e),
                    rejected: o.rejected,
                    unrejectable: o.unrejectable,
                })
                .collect(),
            requirements: status
                .requirements
                .iter()
                .map(|r| RequirementBody {
                    i: name(r.requirement.ahead),
                    j: name(r.requirement.behind),
                    standing: r.requirement.standing.iter().map(name).collect(),
                    log_m: LogValue(r.log_m),
                    active: r.active,
                })
                .collect(),
        }
    }
}

/// All sessions under one data directory. Submissions to a session are
/// serialised by its mutex; distinct sessions are independent.
pub struct SessionStore {
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    /// Opens `dir`, creating it if needed, and replays every session log in
    /// it. Logs that fail verification are skipped with an error message.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            match Session::load(&path) {
                Ok(session) => {
                    sessions.insert(session.id.clone(), Arc::new(Mutex::new(session)));
                }
                Err(e) => log::error!("skipping session log {}: {e}", path.display()),
            }
        }
        Ok(SessionStore {
            dir,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSession(id.to_owned()))
    }

    pub fn create(&self, request: CreateRequest) -> Result<StatusBody> {
        let session = Session::create(&self.dir, request)?;
        let status = session.status();
        self.sessions
            .write()
            .expect("session map lock")
            .insert(session.id.clone(), Arc::new(Mutex::new(session)));
        Ok(status)
    }

    pub fn status(&self, id: &str) -> Result<StatusBody> {
        Ok(self.get(id)?.lock().expect("session lock").status())
    }

    pub fn submit(&self, id: &str, ranking: &[String]) -> Result<StatusBody> {
        self.get(id)?.lock().expect("session lock").submit(ranking)
    }

    pub fn events(&self, id: &str) -> Result<Vec<SessionEvent>> {
        Ok(self
            .get(id)?
            .lock()
            .expect("session lock")
            .events()
            .to_vec())
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .expect("session map lock")
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }
}
