//! Live air-writing sessions over a WebSocket.
//!
//! Each connection owns a private pipeline fed by pad strokes or raw sensor
//! samples; only the template set is shared. See [`protocol`] for the
//! message schema.

pub mod connection;
pub mod protocol;
pub mod server;
pub mod store;

pub use connection::{Connection, ConnectionConfig, Reply};
pub use protocol::{ClientMessage, ErrorCode, Health, Pen, ServerMessage, PROTOCOL_VERSION};
pub use server::{router, serve, AppState};
pub use store::TemplateStore;
