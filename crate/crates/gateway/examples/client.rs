//! Starts a gateway in-process, opens a laser-cutter session, presses the
//! power switch, asks for a hint, then abandons and prints the final report.
//!
//! ```text
//! cargo run -p interact-gateway --example client
//! ```

use interact_core::session::UserInput;
use interact_gateway::client::{Client, Incoming};
use interact_gateway::wire::{Control, ServerMessage};
use interact_gateway::{spawn, Config};

#[tokio::main]
async fn main() {
    let config = Config {
        port: 0,
        ..Config::default()
    };
    let server = spawn(config, "127.0.0.1").await.expect("bind");
    let client = Client::new(format!("http://{}", server.addr));
    for e in client.scenarios().await.expect("catalog") {
        println!("{:<18} valid={} steps={}", e.id, e.valid, e.step_count);
    }

    let id = client.create("laser_cutter", "default").await.expect("session");
    println!("session {id}");
    let mut stream = client.stream(&id).await.expect("stream");
    let mut frames = 0;
    while let Some(msg) = stream.next().await {
        match msg.expect("message") {
            Incoming::Message(ServerMessage::Frame(f)) => {
                frames += 1;
                match frames {
                    1 => stream.send(UserInput::press("power_off")).await.unwrap(),
                    5 => stream.send(UserInput::hint("unmount_mirror")).await.unwrap(),
                    10 => stream.send(Control::Abandon).await.unwrap(),
                    _ => {}
                }
                if !f.fired.is_empty() || !f.completed.is_empty() {
                    println!("tick {:>4}: fired {:?} completed {:?}", f.tick, f.fired, f.completed);
                }
                if frames == 6 {
                    for h in f.helpers.iter().filter(|h| h.hint.is_some()) {
                        println!("tick {:>4}: hint for {}: {}", f.tick, h.step, h.hint.as_deref().unwrap());
                    }
                }
            }
            Incoming::Message(ServerMessage::Final(end)) => {
                println!("final at tick {} hash {}", end.tick, end.hash);
                for s in &end.report.steps {
                    println!("  {:<16} {:>5.1} hints {}", s.step, s.step_score, s.hints);
                }
                println!("total {:.1} abandoned {}", end.report.total, end.report.abandoned);
                break;
            }
            Incoming::Message(ServerMessage::Error { tick, message }) => println!("error at {tick:?}: {message}"),
            Incoming::Closed { code, reason } => {
                println!("closed {code}: {reason}");
                break;
            }
        }
    }
    let log = client.replay(&id).await.expect("replay log");
    println!("log: {} records, {} checkpoints", log.records.len(), log.checkpoints.len());
}
