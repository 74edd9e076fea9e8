use std::collections::VecDeque;
use std::sync::Arc;

use crate::classify::Verdict;
use crate::error::{Error, Result};
use crate::sensing::Frame;
use crate::tseries::Point;

use super::{CenterRecord, Extractor, GestureModel};

/// One classification of the FIFO contents.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionEvent {
    /// Index of the frame on which the event fired.
    pub frame: usize,
    pub verdict: Verdict,
    /// Squared Mahalanobis distance to the most likely class.
    pub mahalanobis2: f64,
    /// Inclusive matched window, as indices into the buffer snapshot.
    pub window: (usize, usize),
    /// Frame indices of the first and last matched centers.
    pub frames: (usize, usize),
    pub embedding: Vec<f64>,
    /// Number of centers in the buffer when the event fired.
    pub buffer_len: usize,
}

impl RecognitionEvent {
    pub fn label(&self) -> Option<&str> {
        self.verdict.label()
    }
}

/// What a single frame produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Step {
    pub center: Option<CenterRecord>,
    pub event: Option<RecognitionEvent>,
}

/// Streaming recognizer: FIFO of motion centers plus the gesture-end gate.
///
/// A gesture ends after at least `gate_min_active` active frames followed by
/// `gate_quiet` still frames. Shorter bursts are discarded once the quiet run
/// completes.
#[derive(Debug)]
pub struct Recognizer {
    model: Arc<GestureModel>,
    extractor: Arc<Extractor>,
    fifo: VecDeque<(usize, Point)>,
    active: usize,
    quiet: usize,
    prev: Option<Frame>,
    next_index: usize,
}

impl Recognizer {
    pub fn new(model: Arc<GestureModel>) -> Result<Self> {
        let extractor = Arc::new(Extractor::new(&model.config)?);
        Ok(Self::with_extractor(model, extractor))
    }

    /// Shares a prebuilt extractor, which must come from the model's config.
    pub fn with_extractor(model: Arc<GestureModel>, extractor: Arc<Extractor>) -> Self {
        Self {
            model,
            extractor,
            fifo: VecDeque::new(),
            active: 0,
            quiet: 0,
            prev: None,
            next_index: 0,
        }
    }

    pub fn model(&self) -> &GestureModel {
        &self.model
    }

    pub fn buffer_len(&self) -> usize {
        self.fifo.len()
    }

    pub fn buffer(&self) -> impl Iterator<Item = &Point> {
        self.fifo.iter().map(|(_, p)| p)
    }

    /// Pushes the next frame, numbered one past the previous.
    pub fn push(&mut self, frame: Frame) -> Result<Step> {
        let index = self.next_index;
        self.push_indexed(index, frame)
    }

    /// Pushes a frame with a caller-supplied index.
    pub fn push_indexed(&mut self, index: usize, frame: Frame) -> Result<Step> {
        self.extractor.check_frame(&frame)?;
        self.next_index = index + 1;
        let Some(prev) = self.prev.replace(frame) else {
            return Ok(Step::default());
        };
        let found = self
            .extractor
            .center(&prev, self.prev.as_ref().expect("just stored"))?;
        let cfg = &self.model.config;
        match found {
            Some(c) => {
                let rec = self.extractor.record(index, &c);
                if self.fifo.len() == cfg.fifo_len {
                    self.fifo.pop_front();
                }
                self.fifo.push_back((index, rec.point()));
                self.active += 1;
                self.quiet = 0;
                let event = if cfg.classify_every_frame {
                    Some(self.fire(index)?)
                } else {
                    None
                };
                Ok(Step {
                    center: Some(rec),
                    event,
                })
            }
            None => {
                if self.active == 0 {
                    return Ok(Step::default());
                }
                self.quiet += 1;
                if self.quiet < cfg.gate_quiet {
                    return Ok(Step::default());
                }
                let event = if self.active >= cfg.gate_min_active && !cfg.classify_every_frame {
                    Some(self.fire(index)?)
                } else {
                    None
                };
                self.end_gesture();
                Ok(Step { center: None, event })
            }
        }
    }

    /// Ends the stream; a gesture still in progress is classified if it is
    /// long enough.
    pub fn finish(&mut self) -> Result<Option<RecognitionEvent>> {
        let cfg = &self.model.config;
        let event = if self.active >= cfg.gate_min_active && !cfg.classify_every_frame {
            Some(self.fire(self.next_index.saturating_sub(1))?)
        } else {
            None
        };
        self.end_gesture();
        self.prev = None;
        Ok(event)
    }

    fn end_gesture(&mut self) {
        let short = self.active < self.model.config.gate_min_active;
        if self.model.config.clear_after_event || short {
            self.fifo.clear();
        }
        self.active = 0;
        self.quiet = 0;
    }

    fn fire(&self, frame: usize) -> Result<RecognitionEvent> {
        let (indices, points): (Vec<usize>, Vec<Point>) = self.fifo.iter().copied().unzip();
        let c = self.model.classify_seq(&points, true)?;
        Ok(RecognitionEvent {
            frame,
            mahalanobis2: c.verdict.mahalanobis2(),
            verdict: c.verdict,
            window: c.window,
            frames: (indices[c.window.0], indices[c.window.1]),
            embedding: c.embedding,
            buffer_len: points.len(),
        })
    }
}

/// Everything an offline stream produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamOutput {
    pub centers: Vec<CenterRecord>,
    pub events: Vec<RecognitionEvent>,
}

/// Runs a recognizer over a frame source until it is exhausted.
///
/// A source error stops the stream and is reported as [`Error::Stream`].
pub fn run_stream<I>(source: I, model: Arc<GestureModel>) -> Result<StreamOutput>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    let mut rec = Recognizer::new(model)?;
    let mut out = StreamOutput::default();
    for frame in source {
        let frame = frame.map_err(|e| Error::Stream(e.to_string()))?;
        let step = rec.push(frame)?;
        out.centers.extend(step.center);
        out.events.extend(step.event);
    }
    out.events.extend(rec.finish()?);
    Ok(out)
}
