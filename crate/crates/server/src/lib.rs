//! Interactive session server for swarmsafe.
//!
//! A [`Session`] owns one simulation and applies client messages between
//! ticks. [`net::start`] runs it in real time on a dedicated thread and
//! streams snapshots to every TCP client at a fixed rate. The wire format is
//! described in `docs/protocol.md`.

pub mod net;
pub mod protocol;
pub mod session;

pub use net::{start, Client, ServerHandle, ServerOptions};
pub use protocol::{Message, PROTOCOL_VERSION};
pub use session::Session;
