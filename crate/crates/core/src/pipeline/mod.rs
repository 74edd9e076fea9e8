//! Training, streaming recognition, evaluation, persistence and the
//! WebSocket service.

mod config;
mod dataset;
mod eval;
mod extract;
mod model;
mod serve;
mod stream;
mod sweep;
mod wire;

pub use config::{PipelineConfig, Tau};
pub use dataset::{
    extract_synthetic, write_synthetic, LabeledDataset, LabeledSample, Manifest, ManifestEntry,
    SampleSource,
};
pub use eval::{evaluate, ClassRate, FalseDetection, Report};
pub use extract::{
    extract_sequence, load_centers, parse_centers, records_to_seq, save_centers, write_centers,
    CenterRecord, Extractor,
};
pub use model::{
    load_model, save_model, train, Classification, GestureModel, FORMAT_VERSION, REJECT_LABEL,
};
pub use serve::Server;
pub use stream::{run_stream, RecognitionEvent, Recognizer, Step, StreamOutput};
pub use sweep::{sweep_csv, sweep_m, SweepRow, SweepScenario};
pub use wire::{encode_pixels, ClientMessage, ServerMessage, Session};
