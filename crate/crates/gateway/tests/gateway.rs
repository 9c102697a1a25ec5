use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use interact_core::lang::parse;
use interact_core::replay::{hex16, read_trace, record, replay, RunLength, TraceRecord, Verdict};
use interact_core::session::{Session, UserInput};
use interact_core::Scenario;
use interact_gateway::client::{Client, ClientError, Incoming, Stream};
use interact_gateway::wire::{Control, FinalMessage, ServerMessage, WireFrame};
use interact_gateway::{spawn, Config, Server};

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn laser_cutter() -> Arc<Scenario> {
    let text = std::fs::read_to_string(scenario_dir().join("laser_cutter.itx")).unwrap();
    Arc::new(parse(&text).scenario.unwrap())
}

async fn server(dir: PathBuf, time_scale: f64) -> (Server, Client) {
    let config = Config {
        port: 0,
        scenario_dir: dir,
        time_scale,
        ..Config::default()
    };
    let s = spawn(config, "127.0.0.1").await.unwrap();
    let c = Client::new(format!("http://{}", s.addr));
    (s, c)
}

async fn next_message(stream: &mut Stream) -> ServerMessage {
    match tokio::time::timeout(Duration::from_secs(10), stream.next()).await {
        Ok(Some(Ok(Incoming::Message(m)))) => m,
        other => panic!("expected a message, got {other:?}"),
    }
}

async fn next_frame(stream: &mut Stream) -> WireFrame {
    loop {
        match next_message(stream).await {
            ServerMessage::Frame(f) => return *f,
            ServerMessage::Error { message, .. } => panic!("unexpected error: {message}"),
            ServerMessage::Final(f) => panic!("unexpected final at tick {}", f.tick),
        }
    }
}

async fn next_final(stream: &mut Stream) -> FinalMessage {
    loop {
        if let ServerMessage::Final(f) = next_message(stream).await {
            return f;
        }
    }
}

#[tokio::test]
async fn catalog_lists_the_corpus() {
    let (_s, c) = server(scenario_dir(), 1.0).await;
    let entries = c.scenarios().await.unwrap();
    assert!(entries.len() >= 10);
    assert!(entries.iter().all(|e| e.valid), "{entries:?}");
    let laser = entries.iter().find(|e| e.id == "laser_cutter").unwrap();
    assert!(laser.step_count >= 10);
    assert_eq!(laser.difficulties, ["novice", "default", "expert"]);
}

#[tokio::test]
async fn catalog_of_empty_and_broken_directories() {
    let dir = tempfile::tempdir().unwrap();
    let (_s, c) = server(dir.path().to_path_buf(), 1.0).await;
    assert!(c.scenarios().await.unwrap().is_empty());

    std::fs::write(dir.path().join("broken.itx"), "scenario \"b\" { part p { mass = ; } }").unwrap();
    let entries = c.scenarios().await.unwrap();
    assert_eq!(entries.len(), 1);
    assert!(!entries[0].valid);
    let first = entries[0].error.as_deref().unwrap();
    assert!(first.starts_with("ERROR E_"), "{first}");
    assert!(first.contains("broken.itx:1:"), "{first}");

    let (_s, c) = server(dir.path().join("missing"), 1.0).await;
    assert!(matches!(c.scenarios().await, Err(ClientError::Status { status: 500, .. })));
}

#[tokio::test]
async fn create_checks_scenario_and_difficulty() {
    let (_s, c) = server(scenario_dir(), 1.0).await;
    let a = c.create("laser_cutter", "default").await.unwrap();
    let b = c.create("laser_cutter", "default").await.unwrap();
    assert_ne!(a, b);

    match c.create("laser_cutter", "nightmare").await {
        Err(ClientError::Status { status: 404, body }) => {
            assert_eq!(body.available, ["novice", "default", "expert"]);
            assert!(body.error.contains("novice, default, expert"), "{}", body.error);
        }
        other => panic!("{other:?}"),
    }
    match c.create("no_such_machine", "default").await {
        Err(ClientError::Status { status: 404, body }) => assert!(body.available.contains(&"laser_cutter".to_string())),
        other => panic!("{other:?}"),
    }
    assert!(matches!(c.create("../etc/passwd", "default").await, Err(ClientError::Status { status: 404, .. })));
    assert!(matches!(c.state("nope").await, Err(ClientError::Status { status: 404, .. })));
}

#[tokio::test]
async fn about_twenty_frames_a_second() {
    let (_s, c) = server(scenario_dir(), 1.0).await;
    let id = c.create("laser_cutter", "default").await.unwrap();
    let mut stream = c.stream(&id).await.unwrap();
    let start = Instant::now();
    let mut ticks = Vec::new();
    while start.elapsed() < Duration::from_secs(1) {
        let left = Duration::from_secs(1).saturating_sub(start.elapsed());
        match tokio::time::timeout(left, stream.next()).await {
            Ok(Some(Ok(Incoming::Message(ServerMessage::Frame(f))))) => ticks.push(f.tick),
            Ok(other) => panic!("{other:?}"),
            Err(_) => break,
        }
    }
    assert!((15..=25).contains(&ticks.len()), "{} frames", ticks.len());
    assert!(ticks.windows(2).all(|w| w[1] - w[0] == 6), "{ticks:?}");
    assert!(ticks.iter().all(|t| t % 6 == 0));
}

#[tokio::test]
async fn hint_text_shows_up_in_the_next_frame() {
    let (_s, c) = server(scenario_dir(), 1.0).await;
    let id = c.create("laser_cutter", "default").await.unwrap();
    let mut stream = c.stream(&id).await.unwrap();
    let first = next_frame(&mut stream).await;
    assert_eq!(first.active.len(), 1);
    assert_eq!(first.active[0].id, "power_off");
    assert!(first.active[0].instruction.is_some());
    assert!(first.helpers[0].hint.is_none());

    stream.send(UserInput::hint("power_off")).await.unwrap();
    let f = next_frame(&mut stream).await;
    let hint = f.helpers.iter().find(|h| h.step == "power_off").and_then(|h| h.hint.clone());
    assert!(hint.is_some_and(|h| !h.is_empty()));
    assert_eq!(c.state(&id).await.unwrap().hints["power_off"], 1);
}

#[tokio::test]
async fn malformed_commands_get_an_error_and_the_stream_goes_on() {
    let (_s, c) = server(scenario_dir(), 1.0).await;
    let id = c.create("laser_cutter", "default").await.unwrap();
    let mut stream = c.stream(&id).await.unwrap();
    for bad in ["not json", r#"{"kind":"teleport"}"#, r#"{"kind":"grab"}"#, r#"{"part":"lens"}"#] {
        stream.send_raw(bad).await.unwrap();
        loop {
            match next_message(&mut stream).await {
                ServerMessage::Error { tick: None, .. } => break,
                ServerMessage::Frame(_) => continue,
                other => panic!("{other:?}"),
            }
        }
    }
    // engine rejections carry the tick they happened on
    stream.send(UserInput::grab("head")).await.unwrap();
    loop {
        match next_message(&mut stream).await {
            ServerMessage::Error { tick: Some(_), message } => {
                assert!(message.contains("head"), "{message}");
                break;
            }
            ServerMessage::Frame(_) => continue,
            other => panic!("{other:?}"),
        }
    }
    let a = next_frame(&mut stream).await.tick;
    let b = next_frame(&mut stream).await.tick;
    assert!(b > a);
}

#[tokio::test]
async fn abandon_ends_the_session_and_later_commands_are_refused() {
    let (_s, c) = server(scenario_dir(), 1.0).await;
    let id = c.create("laser_cutter", "default").await.unwrap();
    let mut stream = c.stream(&id).await.unwrap();
    next_frame(&mut stream).await;
    stream.send(Control::Abandon).await.unwrap();
    let f = next_final(&mut stream).await;
    assert!(f.report.abandoned);
    assert_eq!(f.report.total, 0.0);

    stream.send(UserInput::press("power_off")).await.unwrap();
    match next_message(&mut stream).await {
        ServerMessage::Error { message, .. } => assert!(message.contains("ended")),
        other => panic!("{other:?}"),
    }
    let state = c.state(&id).await.unwrap();
    assert!(state.ended);
    assert_eq!(state.tick, f.tick);
    assert_eq!(state.hash, f.hash);

    // a late subscriber gets the final message straight away
    let mut late = c.stream(&id).await.unwrap();
    assert_eq!(next_final(&mut late).await, f);
}

#[tokio::test]
async fn pause_stops_the_clock() {
    let (_s, c) = server(scenario_dir(), 1.0).await;
    let id = c.create("laser_cutter", "default").await.unwrap();
    let mut stream = c.stream(&id).await.unwrap();
    next_frame(&mut stream).await;
    stream.send(Control::Pause).await.unwrap();
    tokio::time::sleep(Duration::from_millis(100)).await;
    let t0 = c.state(&id).await.unwrap();
    assert!(t0.paused);
    tokio::time::sleep(Duration::from_millis(200)).await;
    assert_eq!(c.state(&id).await.unwrap().tick, t0.tick);
    stream.send(Control::Resume).await.unwrap();
    let f = next_frame(&mut stream).await;
    assert!(f.tick > t0.tick);
}

#[tokio::test]
async fn unknown_session_stream_is_closed_with_a_reason() {
    let (_s, c) = server(scenario_dir(), 1.0).await;
    let mut stream = c.stream("nope").await.unwrap();
    match stream.next().await {
        Some(Ok(Incoming::Closed { code, reason })) => {
            assert_eq!(code, 4404);
            assert!(reason.contains("nope"));
        }
        other => panic!("{other:?}"),
    }
}

#[tokio::test]
async fn commands_to_one_session_leave_another_alone() {
    let (_s, c) = server(scenario_dir(), 1.0).await;
    let a = c.create("laser_cutter", "default").await.unwrap();
    let b = c.create("laser_cutter", "default").await.unwrap();
    let mut sa = c.stream(&a).await.unwrap();
    let mut sb = c.stream(&b).await.unwrap();
    next_frame(&mut sb).await;
    sb.send(Control::Pause).await.unwrap();
    for input in [
        UserInput::press("power_off"),
        UserInput::hint("unmount_mirror"),
        UserInput::grab("mirror"),
        UserInput::set_flag("vacuum_in_place"),
    ] {
        sa.send(input).await.unwrap();
        next_frame(&mut sa).await;
    }
    let sa_state = c.state(&a).await.unwrap();
    assert_eq!(sa_state.steps[0].status.name(), "completed");

    let state = c.state(&b).await.unwrap();
    assert!(state.paused);
    let log = c.replay(&b).await.unwrap();
    assert!(log.records.is_empty());
    let idle = record(laser_cutter(), "default", &[], RunLength::Ticks(state.tick)).unwrap();
    assert_eq!(state.hash, hex16(idle.end_hash));
    assert_eq!(log.end_hash, idle.end_hash);
}

/// Input groups of a trace, each tagged with how many steps must be done
/// before it is sent and how long after the latest completion it came.
fn paced_groups(trace: &[TraceRecord]) -> Vec<(usize, u64, Vec<UserInput>)> {
    let mut session = Session::start(laser_cutter(), "default").unwrap();
    let mut groups: Vec<(usize, u64, Vec<UserInput>)> = Vec::new();
    let (mut done, mut last) = (0, 0);
    let mut next = 0;
    while next < trace.len() || !session.is_finished() {
        let now = session.tick_count();
        let mut batch = Vec::new();
        while next < trace.len() && trace[next].tick == now {
            batch.push(trace[next].input.clone());
            next += 1;
        }
        if !batch.is_empty() {
            groups.push((done, now - last, batch.clone()));
        }
        let report = session.tick(&batch).unwrap();
        if !report.completed.is_empty() {
            done += report.completed.len();
            last = session.tick_count();
        }
    }
    groups
}

/// Streams the scripted laser-cutter run, keeping each input group's delay
/// after the preceding step completion, and checks that the downloaded log
/// reproduces the streamed result offline.
#[tokio::test]
async fn streamed_run_equals_the_offline_run_of_its_log() {
    let trace = read_trace(
        &std::fs::read_to_string(scenario_dir().join("traces/laser_cutter_perfect.jsonl")).unwrap(),
    )
    .unwrap();
    let groups = paced_groups(&trace);
    let (_s, c) = server(scenario_dir(), 4.0).await;
    let id = c.create("laser_cutter", "default").await.unwrap();
    let mut stream = c.stream(&id).await.unwrap();

    let mut next = 0;
    let (mut done, mut last) = (0, 0);
    let mut seen_completion = false;
    let end = loop {
        match next_message(&mut stream).await {
            ServerMessage::Frame(f) => {
                if !f.completed.is_empty() {
                    done += f.completed.len();
                    last = f.tick;
                }
                if f.completed.iter().any(|s| s == "unmount_mirror") {
                    seen_completion = true;
                    assert!(f.score_partial > 0.0);
                }
                // one group per frame, so groups never share a tick
                if let Some((need, delay, inputs)) = groups.get(next) {
                    if done >= *need && f.tick >= last + delay {
                        for i in inputs {
                            stream.send(i.clone()).await.unwrap();
                        }
                        next += 1;
                    }
                }
            }
            ServerMessage::Final(end) => break end,
            ServerMessage::Error { message, .. } => panic!("{message}"),
        }
    };
    assert!(seen_completion);
    assert_eq!(next, groups.len());
    assert!(!end.report.abandoned);
    let log = c.replay(&id).await.unwrap();
    assert_eq!(log.records.len(), trace.len());
    assert_eq!(hex16(log.end_hash), end.hash);
    assert_eq!(log.report, end.report);
    assert_eq!(replay(&log, laser_cutter()).unwrap(), Verdict::Ok);

    let offline = record(laser_cutter(), "default", &log.records, RunLength::UntilFinished { max_ticks: 12_000 }).unwrap();
    assert_eq!(offline.end_tick, end.tick);
    assert_eq!(hex16(offline.end_hash), end.hash);
    assert_eq!(offline.report, end.report);
}
