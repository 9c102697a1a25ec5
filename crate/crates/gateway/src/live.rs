//! One running session: a recorder confined behind a mutex, a command
//! queue drained by the engine task, and a broadcast fan-out of frames.

use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use interact_core::replay::{hex16, state_hash, Recorder, ReplayLog};
use interact_core::session::{SessionError, UserInput};
use interact_core::Scenario;
use tokio::sync::broadcast;
use tokio::time::MissedTickBehavior;

use crate::wire::{ClientCommand, Control, FinalMessage, ServerMessage, SessionState, WireFrame};

/// What subscribers receive.
#[derive(Clone, Debug)]
pub enum Event {
    /// A serialized [`ServerMessage`].
    Text(Arc<str>),
    /// The engine stopped; the stream should close with this reason.
    Close(String),
}

struct Inner {
    rec: Recorder,
    queue: Vec<UserInput>,
    paused: bool,
    end: Option<FinalMessage>,
    fired: Vec<String>,
    completed: Vec<String>,
    score_partial: f64,
}

pub struct Live {
    pub id: String,
    pub scenario_id: String,
    inner: Mutex<Inner>,
    tx: broadcast::Sender<Event>,
}

fn text(m: &ServerMessage) -> Event {
    Event::Text(m.to_json().into())
}

impl Live {
    /// Starts the session and spawns its engine task on the current runtime.
    pub fn spawn(
        id: String,
        scenario_id: String,
        scenario: Arc<Scenario>,
        difficulty: &str,
        divisor: u64,
        period: Duration,
    ) -> Result<Arc<Live>, SessionError> {
        let rec = Recorder::start(scenario, difficulty)?;
        let (tx, _) = broadcast::channel(256);
        let live = Arc::new(Live {
            id,
            scenario_id,
            inner: Mutex::new(Inner {
                rec,
                queue: Vec::new(),
                paused: false,
                end: None,
                fired: Vec::new(),
                completed: Vec::new(),
                score_partial: 0.0,
            }),
            tx,
        });
        tokio::spawn(live.clone().run(divisor.max(1), period));
        Ok(live)
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    async fn run(self: Arc<Self>, divisor: u64, period: Duration) {
        let mut clock = tokio::time::interval(period);
        clock.set_missed_tick_behavior(MissedTickBehavior::Burst);
        loop {
            clock.tick().await;
            let (events, done) = self.step(divisor);
            for e in events {
                let _ = self.tx.send(e);
            }
            if done {
                tracing::debug!(session = %self.id, "engine stopped");
                return;
            }
        }
    }

    /// One engine tick. Returns the events to publish and whether the
    /// engine is done.
    fn step(&self, divisor: u64) -> (Vec<Event>, bool) {
        let mut g = self.lock();
        if g.end.is_some() {
            return (Vec::new(), true);
        }
        if g.paused {
            return (Vec::new(), false);
        }
        let inputs = std::mem::take(&mut g.queue);
        let report = match g.rec.tick(&inputs) {
            Ok(r) => r,
            Err(e) => {
                tracing::error!(session = %self.id, error = %e, "engine failed");
                return (vec![Event::Close(format!("engine failed: {e}"))], true);
            }
        };
        let mut out = Vec::new();
        for reason in report.rejected {
            out.push(text(&ServerMessage::Error {
                tick: Some(report.tick),
                message: reason,
            }));
        }
        g.fired.extend(report.fired);
        g.completed.extend(report.completed);
        g.score_partial = report.score_partial;
        let finished = g.rec.session().is_finished();
        if g.rec.session().tick_count() % divisor == 0 || finished {
            let fired = std::mem::take(&mut g.fired);
            let completed = std::mem::take(&mut g.completed);
            let frame = WireFrame::snapshot(g.rec.session(), fired, completed, g.score_partial);
            out.push(text(&ServerMessage::Frame(Box::new(frame))));
        }
        if finished {
            match end(&g.rec) {
                Ok(f) => {
                    out.push(text(&ServerMessage::Final(f.clone())));
                    g.end = Some(f);
                }
                Err(e) => out.push(Event::Close(format!("engine failed: {e}"))),
            }
            return (out, true);
        }
        (out, false)
    }

    /// Applies a client command. `Err` is the reply for the sender only.
    pub fn command(&self, cmd: ClientCommand) -> Result<(), String> {
        let mut g = self.lock();
        if g.end.is_some() {
            return Err("session has ended".into());
        }
        match cmd {
            ClientCommand::Input(i) => g.queue.push(i),
            ClientCommand::Control(Control::Pause) => g.paused = true,
            ClientCommand::Control(Control::Resume) => g.paused = false,
            ClientCommand::Control(Control::Abandon) => {
                // queued inputs never reached a tick, so they are dropped
                g.queue.clear();
                let f = end(&g.rec).map_err(|e| e.to_string())?;
                let _ = self.tx.send(text(&ServerMessage::Final(f.clone())));
                g.end = Some(f);
            }
        }
        Ok(())
    }

    /// A receiver for future events, plus the final message if the session
    /// already ended.
    pub fn subscribe(&self) -> (broadcast::Receiver<Event>, Option<FinalMessage>) {
        let g = self.lock();
        (self.tx.subscribe(), g.end.clone())
    }

    pub fn state(&self) -> SessionState {
        let g = self.lock();
        SessionState::of(
            &self.id,
            &self.scenario_id,
            g.rec.session(),
            g.paused,
            g.score_partial,
            g.end.as_ref().map(|f| f.report.clone()),
        )
    }

    pub fn replay_log(&self) -> Result<ReplayLog, SessionError> {
        self.lock().rec.log()
    }

    pub fn hash(&self) -> u64 {
        state_hash(self.lock().rec.session())
    }
}

fn end(rec: &Recorder) -> Result<FinalMessage, SessionError> {
    let log = rec.log()?;
    Ok(FinalMessage {
        tick: log.end_tick,
        hash: hex16(log.end_hash),
        report: log.report,
    })
}
