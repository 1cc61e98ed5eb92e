use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use holoqa::denoise::{wiener_denoise, NoiseVariance, WienerParams};
use holoqa::field::{
    dequantize_components, quantize_components, read_meta, store_field, store_field_with, ApertureLabel, ApertureSpec,
    Form, QuantizedField, StoredField, WaveField,
};
use holoqa::metrics::{score_hologram, score_real, MetricError, MetricParams, MetricSpec};
use holoqa::stats::load_mos;
use holoqa::transform::{clip_and_quantize_view, fourier_to_fresnel, fresnel_to_fourier, reconstruct_view, ViewImage};
use holoqa_bench::report::format_f64;
use holoqa_bench::track::parse_metrics;
use holoqa_bench::{emit_report, generate_demo, run_track, BenchError, DatasetManifest, DemoSpec, Track, TrackConfig};
use log::info;

#[derive(Parser)]
#[command(name = "holoqa", version, about = "Quality assessment benchmark for digital holograms")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Dataset manifest (JSON).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// MOS table (CSV).
    #[arg(long, global = true)]
    mos: Option<PathBuf>,
    /// Evaluation track: qa1, qa2, qa3, qa4 or all.
    #[arg(long, global = true, default_value = "all")]
    track: String,
    /// Comma-separated metric ids (e.g. ssim,mse_C) or `all`.
    #[arg(long, global = true, default_value = "all")]
    metrics: String,
    /// Output directory or file prefix.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fourier-to-Fresnel upsampling factor.
    #[arg(long, global = true, default_value_t = 2)]
    upsample_m: usize,
    /// Percentile of the reference amplitude mapped to white.
    #[arg(long, global = true, default_value_t = 99.9)]
    clip_percentile: f64,
    /// Side of the square Wiener window.
    #[arg(long, global = true, default_value_t = 5)]
    wiener_window: usize,
    /// Wiener noise variance: `auto` or a number.
    #[arg(long, global = true, default_value = "auto")]
    wiener_noise: String,
    /// Write local quality maps of the rendered tracks.
    #[arg(long, global = true)]
    emit_maps: bool,
    /// Seed of the synthetic generators.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ViewArg {
    Full,
    Center,
    RightCorner,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic demo dataset into --out.
    Synth {
        #[arg(long, default_value_t = 4)]
        holograms: usize,
        #[arg(long, default_value_t = 256)]
        size: usize,
    },
    /// Convert a stored hologram between Fourier and Fresnel form.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Render the amplitude view of a Fourier hologram as an 8-bit image.
    Reconstruct {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        view: ViewArg,
        /// Side of the square aperture; defaults to 3/4 of the hologram.
        #[arg(long)]
        aperture_size: Option<usize>,
        /// Focal offset relative to the nominal plane, meters.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        focal_distance: f64,
    },
    /// Apply the adaptive Wiener filter to a rendered view.
    Denoise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score one reference/distorted pair (views or holograms) with one metric.
    Score {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        distorted: PathBuf,
    },
    /// Run evaluation tracks over a manifest and MOS table.
    Bench,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Config(_) | BenchError::Metric(MetricError::UnknownMetric(_)) => Failure::Usage(e.to_string()),
            e => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::UnknownMetric(_) | MetricError::UnsupportedMode(_) => Failure::Usage(e.to_string()),
            e => Failure::Runtime(e.to_string()),
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Runtime(e.to_string())
            }
        }
    )*};
}
runtime_from!(
    holoqa::field::FieldError,
    holoqa::transform::TransformError,
    holoqa::denoise::DenoiseError,
    holoqa::stats::StatsError
);

type CliResult = std::result::Result<(), Failure>;

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> std::result::Result<&'a Path, Failure> {
    value.as_deref().ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
}

fn wiener_params(g: &Global) -> std::result::Result<WienerParams, Failure> {
    let noise = if g.wiener_noise == "auto" {
        NoiseVariance::Auto
    } else {
        let v = g
            .wiener_noise
            .parse()
            .map_err(|_| Failure::Usage(format!("--wiener-noise must be `auto` or a number, got {:?}", g.wiener_noise)))?;
        NoiseVariance::Fixed(v)
    };
    let params = WienerParams::square(g.wiener_window, noise);
    params.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(params)
}

fn load_any(prefix: &Path) -> std::result::Result<WaveField, Failure> {
    Ok(match StoredField::load(prefix)? {
        StoredField::Float(f) => f,
        StoredField::Quantized(q) => dequantize_components(&q),
    })
}

fn load_quantized(prefix: &Path) -> std::result::Result<QuantizedField, Failure> {
    Ok(match StoredField::load(prefix)? {
        StoredField::Float(f) => quantize_components(&f)?,
        StoredField::Quantized(q) => q,
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

fn synth(g: &Global, holograms: usize, size: usize) -> CliResult {
    let out = required(&g.out, "out")?;
    let spec = DemoSpec {
        holograms,
        size,
        seed: g.seed,
        ..DemoSpec::default()
    };
    let (manifest, mos) = generate_demo(out, &spec)?;
    println!("{}\n{}", manifest.display(), mos.display());
    Ok(())
}

fn convert(g: &Global, input: &Path, output: &Path) -> CliResult {
    let field = load_any(input)?;
    match field.form() {
        Form::Fourier => {
            let (fresnel, plan) = fourier_to_fresnel(&field, g.upsample_m)?;
            store_field_with(&fresnel, output, Some(plan))?;
        }
        Form::Fresnel => {
            let plan = read_meta(input)?
                .conversion
                .ok_or_else(|| Failure::Runtime(format!("{}: no conversion record to invert", input.display())))?;
            store_field(&fresnel_to_fourier(&field, &plan)?, output)?;
        }
    }
    Ok(())
}

fn reconstruct(g: &Global, input: &Path, output: &Path, view: ViewArg, size: Option<usize>, focal: f64) -> CliResult {
    let field = load_any(input)?;
    let (rows, cols) = field.dim();
    let side = size.unwrap_or(rows.min(cols) * 3 / 4);
    let ap = match view {
        ViewArg::Full => ApertureSpec::full(rows, cols),
        ViewArg::Center => ApertureSpec::resolve(ApertureLabel::Center, rows, cols, side, side)?,
        ViewArg::RightCorner => ApertureSpec::resolve(ApertureLabel::RightCorner, rows, cols, side, side)?,
    };
    let amplitude = reconstruct_view(&field, &ap, focal)?;
    let views = clip_and_quantize_view(&amplitude, &amplitude, g.clip_percentile)?;
    ViewImage {
        pixels: views.reference,
        clip_bound: views.clip_bound,
        aperture: ap,
        focal_distance: focal,
        source_id: input.display().to_string(),
    }
    .save(output)?;
    Ok(())
}

fn denoise(g: &Global, input: &Path, output: &Path) -> CliResult {
    let mut view = ViewImage::load(input)?;
    let image = view.pixels.mapv(f64::from);
    let params = wiener_params(g)?.resolved_on(&image)?;
    view.pixels = wiener_denoise(&image, &params)?.mapv(|v| v.round().clamp(0.0, 255.0) as u8);
    view.save(output)?;
    Ok(())
}

fn score(g: &Global, reference: &Path, distorted: &Path) -> CliResult {
    let specs: Vec<MetricSpec> = if g.metrics == "all" {
        vec![]
    } else {
        g.metrics.split(',').map(str::parse).collect::<std::result::Result<_, _>>()?
    };
    let [spec] = specs[..] else {
        return Err(Failure::Usage("score needs exactly one metric id in --metrics".into()));
    };
    let params = MetricParams::default();
    let value = if with_suffix(reference, ".pgm").exists() {
        if spec.complex {
            return Err(Failure::Usage(format!("{spec} needs complex fields, got rendered views")));
        }
        let r = ViewImage::load(reference)?.pixels.mapv(f64::from);
        let d = ViewImage::load(distorted)?.pixels.mapv(f64::from);
        score_real(spec.id, &r, &d, &params, false)?.value
    } else {
        score_hologram(spec, &load_quantized(reference)?, &load_quantized(distorted)?, &params)?.value
    };
    println!("{spec} {}", format_f64(value));
    Ok(())
}

fn bench(g: &Global) -> CliResult {
    let manifest_path = required(&g.manifest, "manifest")?;
    let mos_path = required(&g.mos, "mos")?;
    let out = required(&g.out, "out")?;
    let tracks = if g.track == "all" {
        Track::ALL.to_vec()
    } else {
        vec![g.track.parse::<Track>()?]
    };
    let wiener = wiener_params(g)?;
    // Validate every configuration before touching the data.
    let configs = tracks
        .into_iter()
        .map(|track| {
            let config = TrackConfig {
                metrics: parse_metrics(&g.metrics, track)?,
                upsample_m: g.upsample_m,
                clip_percentile: g.clip_percentile,
                wiener,
                emit_maps: g.emit_maps,
                out: Some(out.to_path_buf()),
                ..TrackConfig::new(track)
            };
            config.validate()?;
            Ok(config)
        })
        .collect::<std::result::Result<Vec<_>, BenchError>>()?;
    let manifest = DatasetManifest::load(manifest_path)?;
    let mos = load_mos(mos_path)?;
    for config in configs {
        let track = config.track;
        info!("running {track} with {} metrics", config.metrics.len());
        let report = run_track(&manifest, &mos, &config)?;
        for f in &report.failures {
            log::warn!("{track}: {f}");
        }
        for path in emit_report(&report, out)? {
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Synth { holograms, size } => synth(g, *holograms, *size),
        Command::Convert { input, output } => convert(g, input, output),
        Command::Reconstruct {
            input,
            output,
            view,
            aperture_size,
            focal_distance,
        } => reconstruct(g, input, output, *view, *aperture_size, *focal_distance),
        Command::Denoise { input, output } => denoise(g, input, output),
        Command::Score { reference, distorted } => score(g, reference, distorted),
        Command::Bench => bench(g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
