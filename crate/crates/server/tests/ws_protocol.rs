use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};
use trailnet::command::Command;
use trailnet::model::{NodeSource, SimulationParams};
use trailnet::scenario::{Method, Runner, Scenario};
use trailnet_server::{decode_frame, serve, DecodedFrame, ServeOptions, SimHandle};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

fn scenario() -> Scenario {
    let params = SimulationParams {
        width: 40,
        height: 30,
        population_pct: 5.0,
        sensor_offset: 5.0,
        ..Default::default()
    };
    let mut sc = Scenario::new(params, vec![NodeSource::new(0, 10, 10, 2, 0.05)], Method::FreeRun);
    sc.seed = 3;
    sc.metrics_every = 2;
    sc
}

struct Harness {
    addr: std::net::SocketAddr,
    stop: tokio::sync::oneshot::Sender<()>,
    server: tokio::task::JoinHandle<std::io::Result<trailnet::command::CommandLog>>,
}

async fn start(options: ServeOptions) -> Harness {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = SimHandle::spawn(scenario(), options).unwrap();
    let (stop, rx) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(serve(listener, handle, async move {
        let _ = rx.await;
    }));
    Harness { addr, stop, server }
}

async fn connect(addr: std::net::SocketAddr) -> Client {
    tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

enum In {
    Frame(DecodedFrame),
    Json(serde_json::Value),
}

async fn next(ws: &mut Client) -> In {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(10), ws.next())
            .await
            .expect("server went quiet")
            .expect("stream ended")
            .unwrap();
        match msg {
            Message::Binary(b) => return In::Frame(decode_frame(&b).unwrap()),
            Message::Text(t) => return In::Json(serde_json::from_str(&t).unwrap()),
            _ => {}
        }
    }
}

/// Skip frames and metrics until a reply (ack or error) arrives.
async fn reply(ws: &mut Client) -> serde_json::Value {
    loop {
        if let In::Json(v) = next(ws).await {
            if v["type"] != "metrics" {
                return v;
            }
        }
    }
}

async fn send(ws: &mut Client, json: &str) {
    ws.send(Message::Text(json.into())).await.unwrap();
}

async fn get_state(addr: std::net::SocketAddr) -> serde_json::Value {
    let mut s = TcpStream::connect(addr).await.unwrap();
    s.write_all(b"GET /state HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut buf = String::new();
    s.read_to_string(&mut buf).await.unwrap();
    let (head, body) = buf.split_once("\r\n\r\n").unwrap();
    assert!(head.starts_with("HTTP/1.1 200"), "{head}");
    serde_json::from_str(body).unwrap()
}

#[tokio::test]
async fn pause_then_two_steps_gives_two_consecutive_frames() {
    let h = start(ServeOptions { frames_every: Some(1), ..Default::default() }).await;
    let mut ws = connect(h.addr).await;
    send(&mut ws, r#"{"type":"pause"}"#).await;
    let ack = reply(&mut ws).await;
    assert_eq!(ack["type"], "ack");
    let paused_at = ack["applied_at_step"].as_u64().unwrap();

    send(&mut ws, r#"{"type":"step","count":1}"#).await;
    send(&mut ws, r#"{"type":"step","count":1}"#).await;
    let mut frames = Vec::new();
    let mut acks = 0;
    while frames.len() < 2 || acks < 2 {
        match next(&mut ws).await {
            In::Frame(f) => frames.push(f.step),
            In::Json(v) if v["type"] == "ack" => acks += 1,
            In::Json(v) => assert_eq!(v["type"], "metrics"),
        }
    }
    assert_eq!(frames, vec![paused_at + 1, paused_at + 2]);

    // Nothing further while paused.
    let quiet = tokio::time::timeout(Duration::from_millis(300), ws.next()).await;
    assert!(quiet.is_err(), "unexpected message while paused");
    let state = get_state(h.addr).await;
    assert_eq!(state["step"], paused_at + 2);
    assert_eq!(state["paused"], true);
    h.stop.send(()).unwrap();
    h.server.await.unwrap().unwrap();
}

#[tokio::test]
async fn invalid_and_malformed_commands_get_error_replies() {
    let h = start(ServeOptions { start_paused: true, ..Default::default() }).await;
    let mut ws = connect(h.addr).await;
    // The current frame arrives on connect.
    match next(&mut ws).await {
        In::Frame(f) => assert_eq!((f.step, f.width, f.height, f.pixels.len()), (0, 40, 30, 1200)),
        In::Json(v) => panic!("expected a frame, got {v}"),
    }
    send(&mut ws, r#"{"type":"set_param","name":"SA","value":-5}"#).await;
    let err = reply(&mut ws).await;
    assert_eq!(err["type"], "error");
    assert!(err["reason"].as_str().unwrap().contains("SA"), "{err}");
    send(&mut ws, r#"{"type":"warp","factor":9}"#).await;
    assert_eq!(reply(&mut ws).await["type"], "error");
    send(&mut ws, "not json").await;
    assert_eq!(reply(&mut ws).await["type"], "error");

    let state = get_state(h.addr).await;
    assert_eq!(state["params"]["sensor_angle_deg"], 15.0);
    assert_eq!(state["step"], 0);
    h.stop.send(()).unwrap();
    let log = h.server.await.unwrap().unwrap();
    assert!(log.is_empty());
}

#[tokio::test]
async fn set_param_is_acked_and_logged_for_replay() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("commands.jsonl");
    let h = start(ServeOptions {
        start_paused: true,
        frames_every: Some(5),
        agent_overlay: true,
        command_log_path: Some(log_path.clone()),
        ..Default::default()
    })
    .await;
    let mut ws = connect(h.addr).await;
    send(&mut ws, r#"{"type":"step","count":7}"#).await;
    assert_eq!(reply(&mut ws).await["applied_at_step"], 0);
    send(&mut ws, r#"{"type":"set_param","name":"SA","value":15}"#).await;
    send(&mut ws, r#"{"type":"set_param","name":"SA","value":45}"#).await;
    let first = reply(&mut ws).await;
    let second = reply(&mut ws).await;
    assert_eq!(first["type"], "ack");
    assert_eq!(second["type"], "ack");
    let at = second["applied_at_step"].as_u64().unwrap();
    assert!(at >= first["applied_at_step"].as_u64().unwrap());
    send(&mut ws, r#"{"type":"add_node","x":30,"y":20,"weight":0.1}"#).await;
    let added = reply(&mut ws).await;
    assert_eq!(added["node_id"], 1);
    send(&mut ws, r#"{"type":"step","count":13}"#).await;
    reply(&mut ws).await;

    // Wait until all 20 steps have run, collecting the last frame.
    let mut last = None;
    while last.as_ref().map(|f: &DecodedFrame| f.step) != Some(20) {
        if let In::Frame(f) = next(&mut ws).await {
            assert_eq!(f.step % 5, 0);
            assert!(f.occupancy.is_some());
            last = Some(f);
        }
    }
    let state = get_state(h.addr).await;
    assert_eq!(state["params"]["sensor_angle_deg"], 45.0);
    assert_eq!(state["nodes"].as_array().unwrap().len(), 2);
    h.stop.send(()).unwrap();
    let log = h.server.await.unwrap().unwrap();
    assert_eq!(log.len(), 5);

    // The on-disk log replays to the same trail the client saw.
    let from_disk = trailnet::io::load_command_log(&log_path).unwrap();
    assert_eq!(from_disk, log);
    let replayed = Runner::replay(scenario(), &from_disk, 20).unwrap();
    let frame = last.unwrap();
    let expected = trailnet::io::quantise_trail(&replayed.state().trail, replayed.state().params.trail_display_cap).unwrap();
    assert_eq!(frame.pixels, expected);
    assert_eq!(frame.occupancy.unwrap(), replayed.state().occupancy());
}

#[tokio::test]
async fn two_clients_both_receive_frames() {
    let h = start(ServeOptions { start_paused: true, frames_every: Some(1), ..Default::default() }).await;
    let mut a = connect(h.addr).await;
    let mut b = connect(h.addr).await;
    for ws in [&mut a, &mut b] {
        assert!(matches!(next(ws).await, In::Frame(f) if f.step == 0));
    }
    let cmd = serde_json::to_string(&Command::Step { count: 1 }).unwrap();
    send(&mut a, &cmd).await;
    for ws in [&mut a, &mut b] {
        loop {
            if let In::Frame(f) = next(ws).await {
                assert_eq!(f.step, 1);
                break;
            }
        }
    }
    h.stop.send(()).unwrap();
    h.server.await.unwrap().unwrap();
}

#[test]
fn rejects_bad_options() {
    assert!(SimHandle::spawn(scenario(), ServeOptions { steps_per_second: 0.0, ..Default::default() }).is_err());
    assert!(SimHandle::spawn(scenario(), ServeOptions { frames_every: Some(0), ..Default::default() }).is_err());
}
