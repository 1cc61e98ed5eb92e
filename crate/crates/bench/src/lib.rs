//! Benchmark harness for hologram quality assessment: dataset manifests,
//! synthetic holograms and distortions, the four evaluation tracks and
//! their reports.

pub mod demo;
pub mod error;
pub mod manifest;
pub mod report;
pub mod synth;
pub mod track;

pub use demo::{generate_demo, DemoSpec};
pub use error::{BenchError, Result};
pub use manifest::DatasetManifest;
pub use report::emit_report;
pub use synth::{synth_distort, synth_hologram, Distortion, PointSource};
pub use track::{run_track, EvalReport, Track, TrackConfig};
