//! Per-connection pipeline state. Pure and synchronous, so the socket layer
//! only moves frames and tests can drive it directly.

use airdraw_core::pipeline::{MobileStage, PipelineConfig, SessionUpload, WearEvent, WearStage};
use airdraw_core::synth::{PointerEvent, PointerIntegrator, INCH};
use airdraw_core::{Error, Letter, SensorSample};

use crate::protocol::{ClientMessage, ErrorCode, Pen, ServerMessage, Version};
use crate::store::TemplateStore;

/// Pen lifts longer than this move the virtual hand's origin instead of
/// drawing a transit.
pub const DEFAULT_REBASE_MS: f64 = 400.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionConfig {
    pub pipeline: PipelineConfig,
    /// Edge of the virtual letter box the pad maps onto, inches.
    pub letter_size_in: f64,
    /// Arm elevation used for the synthetic gravity of pad strokes, degrees.
    pub arm_theta_deg: f64,
    pub rebase_ms: f64,
}

impl Default for ConnectionConfig {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            letter_size_in: 12.0,
            arm_theta_deg: 0.0,
            rebase_ms: DEFAULT_REBASE_MS,
        }
    }
}

/// Messages to send back, and whether to close afterwards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reply {
    pub messages: Vec<ServerMessage>,
    pub close: bool,
}

impl Reply {
    fn fatal(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            messages: vec![ServerMessage::error(code, message)],
            close: true,
        }
    }
}

#[derive(Debug)]
pub struct Connection {
    wear: WearStage<f64>,
    mobile: MobileStage,
    pointer: PointerIntegrator<f64>,
    template: Option<Letter>,
    closed: bool,
}

impl Connection {
    pub fn new(cfg: &ConnectionConfig) -> airdraw_core::Result<Self> {
        validate_size(cfg.letter_size_in).map_err(Error::Config)?;
        validate_theta(cfg.arm_theta_deg).map_err(Error::Config)?;
        Ok(Self {
            wear: WearStage::new(&cfg.pipeline)?,
            mobile: MobileStage::new(&cfg.pipeline),
            pointer: PointerIntegrator::new(
                cfg.letter_size_in * INCH,
                cfg.arm_theta_deg.to_radians(),
                cfg.rebase_ms,
            ),
            template: None,
            closed: false,
        })
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Parses and handles one text frame.
    pub fn handle_text(&mut self, text: &str, store: &TemplateStore) -> Reply {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg, store),
            Err(e) => {
                self.closed = true;
                Reply::fatal(ErrorCode::Malformed, e.to_string())
            }
        }
    }

    pub fn handle(&mut self, msg: ClientMessage, store: &TemplateStore) -> Reply {
        if self.closed {
            return Reply {
                messages: Vec::new(),
                close: true,
            };
        }
        let reply = match msg {
            ClientMessage::StrokePoint {
                x, y, t_ms, pen, ..
            } => self.stroke_point(x, y, t_ms, pen, store),
            ClientMessage::RawSample { sample, .. } => {
                let mut out = Vec::new();
                match self.feed(sample, store, &mut out) {
                    Ok(()) => Reply {
                        messages: out,
                        close: false,
                    },
                    Err(e) => fail(out, e),
                }
            }
            ClientMessage::BeginTemplate { letter, .. } => {
                let snapshot = store.snapshot();
                if snapshot.alphabet().contains(&letter) {
                    self.template = Some(letter);
                    Reply::default()
                } else {
                    Reply::fatal(
                        ErrorCode::Malformed,
                        format!("letter {letter} is not in the alphabet"),
                    )
                }
            }
            ClientMessage::SetConfig {
                letter_size_in,
                arm_theta_deg,
                ..
            } => self.set_config(letter_size_in, arm_theta_deg),
        };
        if reply.close {
            self.closed = true;
        }
        reply
    }

    /// End of input: flushes buffered pad samples and closes an open session.
    pub fn finish(&mut self, store: &TemplateStore) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        if self.closed {
            return out;
        }
        for s in self.pointer.flush() {
            if let Err(e) = self.feed(s, store, &mut out) {
                out.push(error_message(&e));
                break;
            }
        }
        if let Some(WearEvent::Completed(upload)) = self.wear.finish() {
            self.complete(upload, store, &mut out);
        }
        self.closed = true;
        out
    }

    fn stroke_point(
        &mut self,
        x: f64,
        y: f64,
        t_ms: f64,
        pen: Pen,
        store: &TemplateStore,
    ) -> Reply {
        let in_unit = |c: f64| (0.0..=1.0).contains(&c);
        if !(in_unit(x) && in_unit(y)) {
            return Reply::fatal(
                ErrorCode::Malformed,
                format!("pad position ({x}, {y}) outside [0, 1]²"),
            );
        }
        if !(t_ms.is_finite() && t_ms >= 0.0) {
            return Reply::fatal(ErrorCode::Malformed, format!("invalid t_ms {t_ms}"));
        }
        let ev = PointerEvent {
            t_us: (t_ms * 1000.0).round() as u64,
            x,
            // Pads put y down; the letter box has y up.
            y: 1.0 - y,
            pen_down: pen == Pen::Down,
        };
        let mut out = Vec::new();
        let samples = match self.pointer.push(ev) {
            Ok(s) => s,
            Err(e) => return fail(out, e),
        };
        for s in samples {
            if let Err(e) = self.feed(s, store, &mut out) {
                return fail(out, e);
            }
        }
        Reply {
            messages: out,
            close: false,
        }
    }

    fn set_config(&mut self, letter_size_in: Option<f64>, arm_theta_deg: Option<f64>) -> Reply {
        if let Some(size) = letter_size_in {
            if let Err(msg) = validate_size(size) {
                return Reply::fatal(ErrorCode::Malformed, msg);
            }
        }
        if let Some(deg) = arm_theta_deg {
            if let Err(msg) = validate_theta(deg) {
                return Reply::fatal(ErrorCode::Malformed, msg);
            }
        }
        if let Some(size) = letter_size_in {
            self.pointer.set_letter_size(size * INCH);
        }
        if let Some(deg) = arm_theta_deg {
            self.pointer.set_theta(deg.to_radians());
        }
        Reply::default()
    }

    fn feed(
        &mut self,
        sample: SensorSample<f64>,
        store: &TemplateStore,
        out: &mut Vec<ServerMessage>,
    ) -> Result<(), Error> {
        match self.wear.push(sample)? {
            None => {}
            Some(WearEvent::Started { index, t_us }) => out.push(ServerMessage::SessionStart {
                v: Version,
                index,
                t_us,
            }),
            Some(WearEvent::Completed(upload)) => self.complete(upload, store, out),
        }
        Ok(())
    }

    fn complete(
        &mut self,
        upload: SessionUpload<f64>,
        store: &TemplateStore,
        out: &mut Vec<ServerMessage>,
    ) {
        let index = upload.index;
        out.push(ServerMessage::SessionEnd {
            v: Version,
            index,
            start_us: upload.start_us,
            end_us: upload.end_us,
            samples: upload.packets.len(),
        });
        let result = match self.template.take() {
            Some(letter) => self
                .mobile
                .matrix(&upload)
                .and_then(|m| store.commit(letter, m))
                .map(|set| ServerMessage::TemplateSaved {
                    v: Version,
                    letter,
                    trained: set.len(),
                    missing: set.missing(),
                }),
            None => self
                .mobile
                .classify(&store.snapshot(), &upload)
                .map(|p| ServerMessage::prediction(index, p)),
        };
        out.push(result.unwrap_or_else(|e| error_message(&e)));
    }
}

fn fail(mut out: Vec<ServerMessage>, e: Error) -> Reply {
    out.push(error_message(&e));
    Reply {
        messages: out,
        close: true,
    }
}

fn error_message(e: &Error) -> ServerMessage {
    let code = match e {
        Error::NotTrained { missing } => {
            return ServerMessage::Error {
                v: Version,
                code: ErrorCode::NotTrained,
                message: e.to_string(),
                missing: missing.clone(),
            }
        }
        Error::NonMonotonic { .. } => ErrorCode::BadTimestamp,
        Error::NonFinite(_) => ErrorCode::Malformed,
        Error::Io(_) | Error::Json(_) => ErrorCode::Internal,
        _ => ErrorCode::Session,
    };
    ServerMessage::error(code, e.to_string())
}

fn validate_size(inches: f64) -> Result<(), String> {
    if inches.is_finite() && inches > 0.0 && inches <= 120.0 {
        Ok(())
    } else {
        Err(format!("letter_size_in must be in (0, 120], got {inches}"))
    }
}

fn validate_theta(deg: f64) -> Result<(), String> {
    if deg.is_finite() && (-90.0..=90.0).contains(&deg) {
        Ok(())
    } else {
        Err(format!("arm_theta_deg must be in [-90, 90], got {deg}"))
    }
}
