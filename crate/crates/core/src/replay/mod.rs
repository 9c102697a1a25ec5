//! Input traces, state hashing and deterministic re-execution.
//!
//! A replay log is JSON Lines:
//!
//! ```text
//! {"header":{"scenario":"laser_cutter","scenario_hash":"…","difficulty":"default","dt":0.008333…,"engine_version":"0.1.0"}}
//! {"tick":0,"input":{"kind":"press","action_id":"power_off"}}
//! {"checkpoint":{"tick":120,"hash":"9f0c…"}}
//! {"final":{"tick":240,"hash":"…","report":{…}}}
//! ```
//!
//! A record stamped with tick `N` is applied by the session tick that runs
//! while the clock reads `N`. Checkpoints hash the state after every 120th
//! tick.

use std::collections::BTreeMap;
use std::hash::Hasher;
use std::io::{BufRead, Write};
use std::sync::Arc;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use crate::lang::format_canonical;
use crate::scene::Scenario;
use crate::session::{FrameReport, ScoreReport, Session, SessionError, UserInput};

pub const CHECKPOINT_INTERVAL: u64 = 120;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// FNV-1a 64 over the world bytes followed by the session status bytes.
pub fn state_hash(session: &Session) -> u64 {
    let mut buf = Vec::with_capacity(4096);
    session.world().write_state(&mut buf);
    session.write_status(&mut buf);
    fnv1a64(&buf)
}

/// Hash of the canonical text, so reformatting a file keeps its identity.
pub fn scenario_hash(s: &Scenario) -> u64 {
    fnv1a64(format_canonical(s).as_bytes())
}

pub fn hex16(h: u64) -> String {
    format!("{h:016x}")
}

fn parse_hex16(s: &str) -> Option<u64> {
    (s.len() == 16).then(|| u64::from_str_radix(s, 16).ok()).flatten()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub input: UserInput,
}

impl TraceRecord {
    pub fn new(tick: u64, input: UserInput) -> Self {
        TraceRecord { tick, input }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub scenario: String,
    pub scenario_hash: String,
    pub difficulty: String,
    pub dt: f64,
    pub engine_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub tick: u64,
    pub hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Final {
    pub tick: u64,
    pub hash: String,
    pub report: ScoreReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Line {
    Header { header: Header },
    Checkpoint { checkpoint: Checkpoint },
    Final {
        #[serde(rename = "final")]
        end: Final,
    },
    Record(TraceRecord),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayLog {
    pub header: Header,
    pub records: Vec<TraceRecord>,
    /// tick → state hash
    pub checkpoints: BTreeMap<u64, u64>,
    pub end_tick: u64,
    pub end_hash: u64,
    pub report: ScoreReport,
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("records out of tick order at line {0}")]
    Unordered(usize),
    #[error("scenario hash mismatch: log has {logged}, file has {actual}")]
    ScenarioMismatch { logged: String, actual: String },
    #[error("log was recorded with dt {logged}, engine uses {actual}")]
    DtMismatch { logged: f64, actual: f64 },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How long a recorded run lasts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RunLength {
    /// Exactly this many ticks.
    Ticks(u64),
    /// Until every record is applied and every step is terminal, or the cap.
    UntilFinished { max_ticks: u64 },
}

/// Parses a trace: JSON Lines of `{"tick":N,"input":{…}}`. Header,
/// checkpoint and final lines are skipped, so a replay log is also a trace.
/// Blank lines are ignored.
pub fn read_trace(text: &str) -> Result<Vec<TraceRecord>, ReplayError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(line).map_err(|e| ReplayError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if let Line::Record(r) = parsed {
            if out.last().is_some_and(|p: &TraceRecord| p.tick > r.tick) {
                return Err(ReplayError::Unordered(i + 1));
            }
            out.push(r);
        }
    }
    Ok(out)
}

pub fn write_trace(records: &[TraceRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("record serializes"));
        s.push('\n');
    }
    s
}

/// Drives a session through `records`. Calls `on_tick` after every tick.
pub fn drive(
    session: &mut Session,
    records: &[TraceRecord],
    length: RunLength,
    mut on_tick: impl FnMut(&Session),
) -> Result<(), SessionError> {
    let mut next = 0;
    let mut batch = Vec::new();
    loop {
        if finished(session, records.len() - next, length) {
            return Ok(());
        }
        let now = session.tick_count();
        // records stamped in the past run at the first tick we reach
        batch.clear();
        while next < records.len() && records[next].tick <= now {
            batch.push(records[next].input.clone());
            next += 1;
        }
        session.tick(&batch)?;
        on_tick(session);
    }
}

/// A live session that logs every input it applies, stamped with the tick
/// that consumed it, and hashes a checkpoint every 120 ticks.
pub struct Recorder {
    scenario: Arc<Scenario>,
    session: Session,
    records: Vec<TraceRecord>,
    checkpoints: BTreeMap<u64, u64>,
}

impl Recorder {
    pub fn start(scenario: Arc<Scenario>, difficulty: &str) -> Result<Recorder, SessionError> {
        Ok(Recorder {
            session: Session::start(scenario.clone(), difficulty)?,
            scenario,
            records: Vec::new(),
            checkpoints: BTreeMap::new(),
        })
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn tick(&mut self, inputs: &[UserInput]) -> Result<FrameReport, SessionError> {
        let now = self.session.tick_count();
        let frame = self.session.tick(inputs)?;
        self.records.extend(inputs.iter().cloned().map(|i| TraceRecord::new(now, i)));
        let t = self.session.tick_count();
        if t % CHECKPOINT_INTERVAL == 0 {
            self.checkpoints.insert(t, state_hash(&self.session));
        }
        Ok(frame)
    }

    /// The log as of now. An unfinished session is reported as abandoned.
    pub fn log(&self) -> Result<ReplayLog, SessionError> {
        let s = &self.session;
        Ok(ReplayLog {
            header: Header {
                scenario: self.scenario.name.clone(),
                scenario_hash: hex16(scenario_hash(&self.scenario)),
                difficulty: s.difficulty().id.clone(),
                dt: s.world().config.dt,
                engine_version: crate::ENGINE_VERSION.to_string(),
            },
            records: self.records.clone(),
            checkpoints: self.checkpoints.clone(),
            end_tick: s.tick_count(),
            end_hash: state_hash(s),
            report: s.finalize(!s.is_finished())?,
        })
    }
}

/// Runs a fresh session over `records` and captures the log. Records
/// stamped in the past are logged with the tick that applied them.
pub fn record(
    scenario: Arc<Scenario>,
    difficulty: &str,
    records: &[TraceRecord],
    length: RunLength,
) -> Result<ReplayLog, ReplayError> {
    let mut rec = Recorder::start(scenario, difficulty)?;
    let mut next = 0;
    let mut batch = Vec::new();
    while !finished(rec.session(), records.len() - next, length) {
        let now = rec.session().tick_count();
        batch.clear();
        while next < records.len() && records[next].tick <= now {
            batch.push(records[next].input.clone());
            next += 1;
        }
        rec.tick(&batch)?;
    }
    Ok(rec.log()?)
}

fn finished(session: &Session, pending: usize, length: RunLength) -> bool {
    let now = session.tick_count();
    match length {
        RunLength::Ticks(n) => now >= n,
        RunLength::UntilFinished { max_ticks } => now >= max_ticks || (pending == 0 && session.is_finished()),
    }
}

/// Result of [`replay`].
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Ok,
    /// The first tick whose recorded hash or report disagrees.
    Diverged { tick: u64, expected: String, actual: String },
}

/// Re-executes the log against `scenario` and compares every checkpoint,
/// the final hash and the final report.
pub fn replay(log: &ReplayLog, scenario: Arc<Scenario>) -> Result<Verdict, ReplayError> {
    let actual = hex16(scenario_hash(&scenario));
    if actual != log.header.scenario_hash {
        return Err(ReplayError::ScenarioMismatch {
            logged: log.header.scenario_hash.clone(),
            actual,
        });
    }
    let mut session = Session::start(scenario, &log.header.difficulty)?;
    let dt = session.world().config.dt;
    if dt.to_bits() != log.header.dt.to_bits() {
        return Err(ReplayError::DtMismatch { logged: log.header.dt, actual: dt });
    }
    let mut verdict = None;
    drive(&mut session, &log.records, RunLength::Ticks(log.end_tick), |s| {
        if verdict.is_some() {
            return;
        }
        let tick = s.tick_count();
        let expected = log.checkpoints.get(&tick).copied();
        let is_check = tick % CHECKPOINT_INTERVAL == 0;
        if is_check || expected.is_some() {
            let h = state_hash(s);
            if expected != Some(h) {
                verdict = Some(Verdict::Diverged {
                    tick,
                    expected: expected.map_or_else(|| "none".into(), hex16),
                    actual: hex16(h),
                });
            }
        }
    })?;
    if let Some(v) = verdict {
        return Ok(v);
    }
    let h = state_hash(&session);
    if h != log.end_hash {
        return Ok(Verdict::Diverged {
            tick: log.end_tick,
            expected: hex16(log.end_hash),
            actual: hex16(h),
        });
    }
    let report = session.finalize(!session.is_finished())?;
    if report != log.report {
        return Ok(Verdict::Diverged {
            tick: log.end_tick,
            expected: serde_json::to_string(&log.report).unwrap_or_default(),
            actual: serde_json::to_string(&report).unwrap_or_default(),
        });
    }
    Ok(Verdict::Ok)
}

impl ReplayLog {
    /// Header, then records and checkpoints in tick order (a checkpoint at
    /// tick `N` precedes records stamped `N`), then the final line.
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut line = |l: &Line| -> std::io::Result<()> {
            serde_json::to_writer(&mut w, l)?;
            w.write_all(b"\n")
        };
        line(&Line::Header {
            header: self.header.clone(),
        })?;
        let mut checks = self.checkpoints.iter().peekable();
        for r in &self.records {
            while let Some((&t, &h)) = checks.next_if(|(&t, _)| t <= r.tick) {
                line(&Line::Checkpoint {
                    checkpoint: Checkpoint { tick: t, hash: hex16(h) },
                })?;
            }
            line(&Line::Record(r.clone()))?;
        }
        for (&t, &h) in checks {
            line(&Line::Checkpoint {
                checkpoint: Checkpoint { tick: t, hash: hex16(h) },
            })?;
        }
        line(&Line::Final {
            end: Final {
                tick: self.end_tick,
                hash: hex16(self.end_hash),
                report: self.report.clone(),
            },
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<ReplayLog, ReplayError> {
        let mut header = None;
        let mut end = None;
        let mut records: Vec<TraceRecord> = Vec::new();
        let mut checkpoints = BTreeMap::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| ReplayError::Malformed { line: n, message };
            match serde_json::from_str::<Line>(&line).map_err(|e| bad(e.to_string()))? {
                Line::Header { header: h } => {
                    if n != 1 {
                        return Err(bad("header must be the first line".into()));
                    }
                    header = Some(h);
                }
                Line::Checkpoint { checkpoint } => {
                    let h = parse_hex16(&checkpoint.hash).ok_or_else(|| bad("hash is not 16 hex digits".into()))?;
                    checkpoints.insert(checkpoint.tick, h);
                }
                Line::Final { end: f } => end = Some(f),
                Line::Record(rec) => {
                    if records.last().is_some_and(|p| p.tick > rec.tick) {
                        return Err(ReplayError::Unordered(n));
                    }
                    records.push(rec);
                }
            }
        }
        let header = header.ok_or(ReplayError::Missing("header"))?;
        let end = end.ok_or(ReplayError::Missing("final line"))?;
        let end_hash = parse_hex16(&end.hash).ok_or(ReplayError::Malformed {
            line: 0,
            message: "final hash is not 16 hex digits".into(),
        })?;
        Ok(ReplayLog {
            header,
            records,
            checkpoints,
            end_tick: end.tick,
            end_hash,
            report: end.report,
        })
    }

    pub fn from_jsonl(text: &str) -> Result<ReplayLog, ReplayError> {
        Self::read_jsonl(text.as_bytes())
    }
}
