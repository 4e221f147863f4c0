//! Wire messages for `/v1/stream`. One JSON object per text frame, tagged by
//! `kind` and carrying `"v": 1`.
//!
//! A session ends only when the input goes quiet for the hold time, so pad
//! clients keep sending pen-up points while hovering and raw clients keep
//! sending still samples. Whatever is open when the socket closes is
//! discarded.

use airdraw_core::{Letter, Prediction, Ranked, SensorSample};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

pub const PROTOCOL_VERSION: u32 = 1;

/// The `"v"` field. Any value other than [`PROTOCOL_VERSION`] fails to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Version;

impl Serialize for Version {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(PROTOCOL_VERSION)
    }
}

impl<'de> Deserialize<'de> for Version {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u32::deserialize(d)?;
        if v == PROTOCOL_VERSION {
            Ok(Version)
        } else {
            Err(de::Error::custom(format!(
                "unsupported protocol version {v}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pen {
    Down,
    Up,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    /// A pad pointer sample. `x`, `y` are in `[0, 1]` with y pointing down,
    /// as browsers report it. `t_ms` is the pointer event time. Pen-up
    /// samples keep arriving while the pointer hovers; they are the dwell
    /// markers that let a session time out.
    StrokePoint {
        v: Version,
        x: f64,
        y: f64,
        t_ms: f64,
        pen: Pen,
    },
    /// A sensor sample in the trace file layout.
    RawSample {
        v: Version,
        #[serde(flatten)]
        sample: SensorSample<f64>,
    },
    /// The next session becomes the template for `letter`.
    BeginTemplate { v: Version, letter: Letter },
    /// Updates per-connection settings; omitted fields keep their value.
    SetConfig {
        v: Version,
        #[serde(default)]
        letter_size_in: Option<f64>,
        #[serde(default)]
        arm_theta_deg: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServerMessage {
    SessionStart {
        v: Version,
        index: usize,
        t_us: u64,
    },
    SessionEnd {
        v: Version,
        index: usize,
        start_us: u64,
        end_us: u64,
        samples: usize,
    },
    Prediction {
        v: Version,
        index: usize,
        letter: Letter,
        ranked: Vec<Ranked<f64>>,
    },
    TemplateSaved {
        v: Version,
        letter: Letter,
        trained: usize,
        missing: Vec<Letter>,
    },
    Error {
        v: Version,
        code: ErrorCode,
        message: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        missing: Vec<Letter>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Unparseable frame or out-of-range field. Closes the connection.
    Malformed,
    /// Timestamps went backwards. Closes the connection.
    BadTimestamp,
    /// Classification requested before every template exists.
    NotTrained,
    /// A session could not be classified or saved.
    Session,
    /// The client outran processing. Closes the connection.
    Rate,
    /// The server could not persist or process something on its side.
    Internal,
}

impl ErrorCode {
    /// Whether the server closes the connection after sending this error.
    pub fn is_fatal(self) -> bool {
        matches!(self, Self::Malformed | Self::BadTimestamp | Self::Rate)
    }
}

impl ServerMessage {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Self::Error {
            v: Version,
            code,
            message: message.into(),
            missing: Vec::new(),
        }
    }

    pub fn prediction(index: usize, p: Prediction<f64>) -> Self {
        Self::Prediction {
            v: Version,
            index,
            letter: p.letter,
            ranked: p.ranked,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

/// Body of `GET /v1/health`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub v: Version,
    pub complete: bool,
    pub trained: usize,
    pub missing: Vec<Letter>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stroke_point_layout() {
        let m: ClientMessage = serde_json::from_str(
            r#"{"v":1,"kind":"stroke_point","x":0.25,"y":0.5,"t_ms":16.5,"pen":"down"}"#,
        )
        .unwrap();
        assert_eq!(
            m,
            ClientMessage::StrokePoint {
                v: Version,
                x: 0.25,
                y: 0.5,
                t_ms: 16.5,
                pen: Pen::Down
            }
        );
    }

    #[test]
    fn raw_sample_uses_trace_fields() {
        let m: ClientMessage = serde_json::from_str(
            r#"{"v":1,"kind":"raw_sample","t_us":10,"la":[1,2,3],"g":[0,-9.8,0]}"#,
        )
        .unwrap();
        let ClientMessage::RawSample { sample, .. } = m else {
            panic!("wrong kind");
        };
        assert_eq!(sample.t, 10);
        assert_eq!(sample.linear_accel.z, 3.0);
    }

    #[test]
    fn rejects_version_and_unknown_fields() {
        assert!(serde_json::from_str::<ClientMessage>(
            r#"{"v":2,"kind":"begin_template","letter":"a"}"#
        )
        .is_err());
        assert!(
            serde_json::from_str::<ClientMessage>(r#"{"kind":"begin_template","letter":"a"}"#)
                .is_err()
        );
        assert!(serde_json::from_str::<ClientMessage>(
            r#"{"v":1,"kind":"begin_template","letter":"ab"}"#
        )
        .is_err());
        assert!(
            serde_json::from_str::<ClientMessage>(r#"{"v":1,"kind":"set_config","size":3}"#)
                .is_err()
        );
        assert!(serde_json::from_str::<ClientMessage>(r#"{"v":1,"kind":"teleport"}"#).is_err());
    }

    #[test]
    fn server_messages_carry_version() {
        let json = ServerMessage::error(ErrorCode::Rate, "slow down").to_json();
        assert_eq!(
            json,
            r#"{"kind":"error","v":1,"code":"rate","message":"slow down"}"#
        );
        let back: ServerMessage = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ServerMessage::error(ErrorCode::Rate, "slow down"));
    }
}
