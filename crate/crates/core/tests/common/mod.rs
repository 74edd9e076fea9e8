#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use cs_gesture::pipeline::{extract_synthetic, train, Extractor, GestureModel, PipelineConfig};
use cs_gesture::sensing::Frame;
use cs_gesture::synth::{gen_dataset, gen_trajectory, render, DatasetSpec, GestureClass, GestureSpec, Split};

/// A model trained on a small synthetic dataset, shared by every test in the
/// binary.
pub fn model() -> Arc<GestureModel> {
    static MODEL: OnceLock<Arc<GestureModel>> = OnceLock::new();
    MODEL
        .get_or_init(|| {
            let cfg = PipelineConfig {
                pca_dim: 3,
                ..Default::default()
            };
            let spec = DatasetSpec {
                train_per_class: 15,
                test_per_class: 0,
                unspecified: 0,
                seed: 11,
                ..Default::default()
            };
            let samples = gen_dataset(&spec).unwrap();
            let seqs = extract_synthetic(&samples, &Extractor::new(&cfg).unwrap(), spec.intensity).unwrap();
            let data: Vec<_> = samples
                .iter()
                .zip(seqs)
                .filter(|(s, _)| s.split == Split::Train)
                .map(|(s, q)| (s.label().to_string(), q))
                .collect();
            Arc::new(train(&data, &cfg).unwrap())
        })
        .clone()
}

/// Frames of one gesture with still frames before and after it.
pub fn gesture_frames(class: GestureClass, seed: u64, lead: usize, tail: usize) -> Vec<Frame> {
    let truth = gen_trajectory(&GestureSpec::new(class, 38, 0.5, 2.0, seed).unwrap());
    let frames = render(&truth, 200).unwrap();
    let first = frames[0].clone();
    let last = frames[frames.len() - 1].clone();
    std::iter::repeat_n(first, lead)
        .chain(frames)
        .chain(std::iter::repeat_n(last, tail))
        .collect()
}
