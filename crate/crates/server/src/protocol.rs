//! Wire messages. Each frame is a 4-byte big-endian length followed by one
//! UTF-8 JSON object with a `type` tag and a protocol version `v`.

use bytes::Bytes;
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSnapshot {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CursorSnapshot {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSnapshot {
    pub gamma: f64,
    pub d_s: f64,
    pub kappa: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Running,
    Paused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Message {
    Hello {
        v: u32,
        role: String,
    },
    State {
        v: u32,
        t: f64,
        tick: u64,
        status: RunState,
        robots: Vec<RobotSnapshot>,
        density_refs: Vec<CursorSnapshot>,
        params: ParamSnapshot,
        score: f64,
        clients: usize,
    },
    /// Sent at the broadcast rate instead of `state` while paused.
    Heartbeat {
        v: u32,
        t: f64,
        status: RunState,
    },
    CursorAdd {
        v: u32,
        id: u32,
        x: f64,
        y: f64,
        w: f64,
    },
    CursorUpdate {
        v: u32,
        id: u32,
        x: f64,
        y: f64,
    },
    CursorRemove {
        v: u32,
        id: u32,
    },
    SetParam {
        v: u32,
        name: String,
        value: f64,
    },
    Pause {
        v: u32,
    },
    Resume {
        v: u32,
    },
    Error {
        v: u32,
        reason: String,
    },
}

impl Message {
    pub fn version(&self) -> u32 {
        match self {
            Message::Hello { v, .. }
            | Message::State { v, .. }
            | Message::Heartbeat { v, .. }
            | Message::CursorAdd { v, .. }
            | Message::CursorUpdate { v, .. }
            | Message::CursorRemove { v, .. }
            | Message::SetParam { v, .. }
            | Message::Pause { v }
            | Message::Resume { v }
            | Message::Error { v, .. } => *v,
        }
    }

    pub fn error(reason: impl Into<String>) -> Self {
        Message::Error { v: PROTOCOL_VERSION, reason: reason.into() }
    }

    pub fn encode(&self) -> Bytes {
        Bytes::from(serde_json::to_vec(self).expect("message serializes"))
    }

    /// Parse one frame payload. The error string is suitable for an `error` reply.
    pub fn decode(payload: &[u8]) -> Result<Self, String> {
        let msg: Message = serde_json::from_slice(payload).map_err(|e| format!("malformed message: {e}"))?;
        if msg.version() != PROTOCOL_VERSION {
            return Err(format!("unsupported protocol version {} (expected {PROTOCOL_VERSION})", msg.version()));
        }
        Ok(msg)
    }
}
