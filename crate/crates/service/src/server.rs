//! HTTP and WebSocket wiring.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::mpsc;

use crate::connection::{Connection, ConnectionConfig, Reply};
use crate::protocol::{ErrorCode, Health, ServerMessage, Version};
use crate::store::TemplateStore;

/// Frames a connection may have queued before it is closed for outrunning
/// the pipeline.
pub const DEFAULT_QUEUE_CAPACITY: usize = 4096;

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<TemplateStore>,
    pub config: Arc<ConnectionConfig>,
    pub queue_capacity: usize,
}

impl AppState {
    pub fn new(store: TemplateStore, config: ConnectionConfig) -> Self {
        Self {
            store: Arc::new(store),
            config: Arc::new(config),
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/stream", get(stream))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    let set = state.store.snapshot();
    Json(Health {
        v: Version,
        complete: set.is_complete(),
        trained: set.len(),
        missing: set.missing(),
    })
}

async fn stream(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| run(socket, state))
}

enum Inbound {
    Text(String),
    Binary,
}

async fn run(socket: WebSocket, state: AppState) {
    let (mut sink, mut source) = socket.split();
    let mut conn = match Connection::new(&state.config) {
        Ok(c) => c,
        Err(e) => {
            log::error!("cannot start connection: {e}");
            let msg = ServerMessage::error(ErrorCode::Internal, e.to_string());
            let _ = sink.send(Message::Text(msg.to_json().into())).await;
            let _ = sink.close().await;
            return;
        }
    };

    let (tx, mut rx) = mpsc::channel::<Inbound>(state.queue_capacity.max(1));
    let overflow = Arc::new(AtomicBool::new(false));
    let reader = {
        let overflow = overflow.clone();
        tokio::spawn(async move {
            while let Some(Ok(frame)) = source.next().await {
                let item = match frame {
                    Message::Text(t) => Inbound::Text(t.to_string()),
                    Message::Binary(_) => Inbound::Binary,
                    Message::Close(_) => break,
                    Message::Ping(_) | Message::Pong(_) => continue,
                };
                if tx.try_send(item).is_err() {
                    overflow.store(true, Ordering::SeqCst);
                    break;
                }
            }
        })
    };

    while let Some(item) = rx.recv().await {
        if overflow.load(Ordering::SeqCst) {
            break;
        }
        let reply = match item {
            Inbound::Text(text) => conn.handle_text(&text, &state.store),
            Inbound::Binary => Reply {
                messages: vec![ServerMessage::error(
                    ErrorCode::Malformed,
                    "binary frames are not supported",
                )],
                close: true,
            },
        };
        if send_all(&mut sink, &reply.messages).await.is_err() {
            reader.abort();
            return;
        }
        if reply.close {
            break;
        }
    }

    if overflow.load(Ordering::SeqCst) {
        log::warn!("closing a connection that outran processing");
        let msg = ServerMessage::error(
            ErrorCode::Rate,
            format!("more than {} frames queued", state.queue_capacity),
        );
        let _ = send_all(&mut sink, &[msg]).await;
    }
    // A client that leaves mid-session gets no prediction for it: its
    // buffered samples are dropped with the connection.
    reader.abort();
    let _ = sink.close().await;
}

async fn send_all<S>(sink: &mut S, messages: &[ServerMessage]) -> Result<(), S::Error>
where
    S: SinkExt<Message> + Unpin,
{
    for m in messages {
        sink.send(Message::Text(m.to_json().into())).await?;
    }
    Ok(())
}
