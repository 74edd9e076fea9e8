//! JSON messages exchanged with streaming clients.
//!
//! Client to server: `init` once, then `frame` messages carrying base64
//! 8-bit grayscale pixels in row-major order. Server to client: a `center`
//! for each frame with motion, an `event` whenever the gesture gate fires,
//! and `error` for anything the session could not process.

use std::sync::Arc;

use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::classify::Verdict;
use crate::sensing::Frame;

use super::{CenterRecord, Extractor, GestureModel, RecognitionEvent, Recognizer, REJECT_LABEL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Init { width: usize, height: usize },
    Frame { seq: u64, pixels: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMessage {
    /// `x`, `y` are normalized to `[0, 1]`; `r` is in blocks.
    Center {
        seq: u64,
        x: f64,
        y: f64,
        r: usize,
        score: f64,
    },
    /// `label` is `"reject"` for rejected gestures; `mahalanobis` is the
    /// squared distance compared against the chi-squared threshold.
    Event {
        frame: u64,
        label: String,
        mahalanobis: f64,
        window: [usize; 2],
        embedding: Vec<f64>,
    },
    Error { message: String },
}

impl ServerMessage {
    pub fn center(c: &CenterRecord) -> Self {
        ServerMessage::Center {
            seq: c.frame as u64,
            x: c.x,
            y: c.y,
            r: c.r,
            score: c.score,
        }
    }

    pub fn event(e: &RecognitionEvent) -> Self {
        let label = match &e.verdict {
            Verdict::Accept { label, .. } => label.clone(),
            Verdict::Reject { .. } => REJECT_LABEL.to_string(),
        };
        ServerMessage::Event {
            frame: e.frame as u64,
            label,
            mahalanobis: e.mahalanobis2,
            window: [e.window.0, e.window.1],
            embedding: e.embedding.clone(),
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error {
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("message serializes")
    }
}

pub fn encode_pixels(frame: &Frame) -> String {
    base64::engine::general_purpose::STANDARD.encode(frame.pixels())
}

/// One client's recognition state, independent of the transport.
#[derive(Debug)]
pub struct Session {
    model: Arc<GestureModel>,
    extractor: Arc<Extractor>,
    recognizer: Option<Recognizer>,
}

impl Session {
    pub fn new(model: Arc<GestureModel>, extractor: Arc<Extractor>) -> Self {
        Self {
            model,
            extractor,
            recognizer: None,
        }
    }

    /// Handles one text message and returns the replies, in order.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error(format!("malformed message: {e}"))],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Init { width, height } => {
                let cfg = &self.model.config;
                if (width, height) != (cfg.width, cfg.height) {
                    self.recognizer = None;
                    return vec![ServerMessage::error(format!(
                        "frame size {width}x{height} does not match the model's {}x{}",
                        cfg.width, cfg.height
                    ))];
                }
                self.recognizer = Some(Recognizer::with_extractor(
                    self.model.clone(),
                    self.extractor.clone(),
                ));
                Vec::new()
            }
            ClientMessage::Frame { seq, pixels } => {
                let Some(rec) = self.recognizer.as_mut() else {
                    return vec![ServerMessage::error("frame received before a valid init")];
                };
                let bytes = match base64::engine::general_purpose::STANDARD.decode(pixels) {
                    Ok(b) => b,
                    Err(e) => return vec![ServerMessage::error(format!("frame {seq}: bad base64: {e}"))],
                };
                let cfg = &self.model.config;
                let frame = match Frame::new(cfg.width, cfg.height, bytes) {
                    Ok(f) => f,
                    Err(e) => return vec![ServerMessage::error(format!("frame {seq}: {e}"))],
                };
                match rec.push_indexed(seq as usize, frame) {
                    Ok(step) => step
                        .center
                        .iter()
                        .map(ServerMessage::center)
                        .chain(step.event.iter().map(ServerMessage::event))
                        .collect(),
                    Err(e) => vec![ServerMessage::error(format!("frame {seq}: {e}"))],
                }
            }
        }
    }
}
