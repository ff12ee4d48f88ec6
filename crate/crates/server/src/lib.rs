//! Live steering service: runs one simulation, streams binary frames and
//! JSON metrics over a WebSocket at `/ws`, accepts JSON commands on the
//! same socket, and serves a bootstrap snapshot at `GET /state`.

pub mod protocol;
pub mod session;

use std::future::Future;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use tokio::net::TcpListener;
use trailnet::command::{Command, CommandLog};

pub use protocol::{decode_frame, encode_frame, DecodedFrame, ServerMessage};
pub use session::{Outbound, ServeOptions, SimClient, SimHandle, StateView, Subscriber};

/// Routes for a running simulation.
pub fn router(client: SimClient) -> Router {
    Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/state", get(state))
        .with_state(client)
}

async fn state(State(client): State<SimClient>) -> Response {
    match client.state().await {
        Some(view) => Json(view).into_response(),
        None => (StatusCode::SERVICE_UNAVAILABLE, "simulation stopped").into_response(),
    }
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(client): State<SimClient>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, client))
}

async fn connection(mut socket: WebSocket, client: SimClient) {
    let (sub, mut outbound) = Subscriber::new();
    if !client.subscribe(sub.clone()) {
        return;
    }
    loop {
        tokio::select! {
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => match serde_json::from_str::<Command>(&text) {
                    Ok(command) => {
                        if !client.command(command, sub.clone()) {
                            break;
                        }
                    }
                    Err(e) => {
                        let reply = ServerMessage::Error { reason: e.to_string() }.to_json();
                        if socket.send(Message::Text(reply.into())).await.is_err() {
                            break;
                        }
                    }
                },
                Some(Ok(Message::Binary(_))) => {
                    let reply = ServerMessage::Error { reason: "commands are JSON text messages".into() }.to_json();
                    if socket.send(Message::Text(reply.into())).await.is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => {}
            },
            out = outbound.recv() => {
                let sent = match out {
                    Some(Outbound::Frame(bytes)) => {
                        sub.frame_sent();
                        socket.send(Message::Binary(bytes.to_vec().into())).await
                    }
                    Some(Outbound::Text(text)) => socket.send(Message::Text(text.into())).await,
                    None => break,
                };
                if sent.is_err() {
                    break;
                }
            }
        }
    }
}

/// Serve until `shutdown` resolves, then stop the simulation and return
/// its command log.
pub async fn serve(
    listener: TcpListener,
    handle: SimHandle,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<CommandLog> {
    axum::serve(listener, router(handle.client()))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(tokio::task::spawn_blocking(move || handle.shutdown())
        .await
        .expect("shutdown task"))
}
