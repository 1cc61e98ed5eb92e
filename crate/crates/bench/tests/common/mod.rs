#![allow(dead_code)]

use std::path::Path;

use holoqa::metrics::{MetricId, MetricSpec};
use holoqa::stats::{load_mos, MosRecord};
use holoqa_bench::synth::Distortion;
use holoqa_bench::{generate_demo, DatasetManifest, DemoSpec};

pub fn dataset(dir: &Path, spec: &DemoSpec) -> (DatasetManifest, Vec<MosRecord>) {
    let (manifest, mos) = generate_demo(dir, spec).unwrap();
    (DatasetManifest::load(manifest).unwrap(), load_mos(&mos).unwrap())
}

/// A quick dataset: small holograms, three requantization levels.
pub fn small_spec(holograms: usize) -> DemoSpec {
    DemoSpec {
        holograms,
        size: 64,
        points: 25,
        levels: [6, 5, 4].map(Distortion::Requantize).to_vec(),
        ..DemoSpec::default()
    }
}

/// Metrics valid on the 48x48 views of `small_spec`.
pub fn small_metrics(complex: bool) -> Vec<MetricSpec> {
    let mut specs: Vec<MetricSpec> =
        [MetricId::Mse, MetricId::Psnr, MetricId::Ssim, MetricId::Uqi, MetricId::Gmsd, MetricId::Ssrm]
            .into_iter()
            .map(MetricSpec::real)
            .collect();
    if complex {
        specs.push(MetricSpec::complex(MetricId::Mse).unwrap());
        specs.push(MetricSpec::complex(MetricId::Ssrmt).unwrap());
    }
    specs
}

/// Equality that treats two NaNs as equal.
pub fn same(a: f64, b: f64, tol: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
