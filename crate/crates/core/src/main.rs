use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use image::Rgb;

use rotalign::patchgen::{HsvChannel, Interpolation, RotationSpec, SegmentConfig, Threshold, TileConfig};
use rotalign::protocol::AngleGrid;
use rotalign::report::{self, OutputFormats, PatchesConfig, RunConfig, SynthConfig, SynthModel};
use rotalign::{Metric, TTestVariant};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

/// Rotation-invariance analysis for image embedding models.
#[derive(Parser, Debug)]
#[command(name = "rotalign", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract foreground patches from an RGB PNG.
    Patches(PatchesArgs),
    /// Write seeded synthetic embedding files and a manifest.
    Synth(SynthArgs),
    /// Compare every rotated embedding set with its control.
    Sweep(SweepArgs),
    /// Augmented vs non-augmented t-test over an aggregates CSV.
    Ttest(TtestArgs),
    /// Render a heatmap SVG from an alignment CSV.
    Heatmap(HeatmapArgs),
}

fn parse_grid(s: &str) -> Result<AngleGrid, String> {
    s.parse().map_err(|e: rotalign::Error| e.to_string())
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_formats(s: &str) -> Result<OutputFormats, String> {
    s.parse().map_err(|e: rotalign::Error| e.to_string())
}

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    if s == "otsu" {
        return Ok(Threshold::Otsu);
    }
    s.parse::<u8>()
        .map(Threshold::Fixed)
        .map_err(|_| format!("expected \"otsu\" or a level in 0..=255, got {s:?}"))
}

fn parse_rgb(s: &str) -> Result<Rgb<u8>, String> {
    let parts: Vec<u8> = s
        .split(',')
        .map(|p| p.trim().parse::<u8>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected r,g,b with values in 0..=255, got {s:?}"))?;
    match parts.as_slice() {
        [r, g, b] => Ok(Rgb([*r, *g, *b])),
        _ => Err(format!("expected three components, got {s:?}")),
    }
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum ChannelArg {
    Saturation,
    Value,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum InterpolationArg {
    Nearest,
    Bilinear,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Student,
    Welch,
}

impl From<VariantArg> for TTestVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Student => TTestVariant::Student,
            VariantArg::Welch => TTestVariant::Welch,
        }
    }
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum MetricArg {
    Mknn,
    Cosine,
    Both,
}

impl MetricArg {
    fn metrics(self) -> Vec<Metric> {
        match self {
            MetricArg::Mknn => vec![Metric::Mknn],
            MetricArg::Cosine => vec![Metric::Cosine],
            MetricArg::Both => vec![Metric::Mknn, Metric::Cosine],
        }
    }
}

#[derive(Args, Debug)]
struct PatchesArgs {
    /// Source RGB image (PNG).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u32).range(1..))]
    patch_size: u32,
    #[arg(long, default_value_t = 0.75, value_parser = parse_fraction)]
    min_foreground: f64,
    /// How many of the largest regions to tile.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    regions: u64,
    /// `otsu` or a fixed level 0..=255.
    #[arg(long, default_value = "otsu", value_parser = parse_threshold)]
    threshold: Threshold,
    #[arg(long, value_enum, default_value_t = ChannelArg::Saturation)]
    channel: ChannelArg,
    /// Rounds of 3x3 open and close; 0 disables.
    #[arg(long, default_value_t = 1)]
    morphology: usize,
    /// Also write rotated copies at these angles, as start:end:step.
    #[arg(long, value_parser = parse_grid)]
    angles: Option<AngleGrid>,
    #[arg(long, value_enum, default_value_t = InterpolationArg::Bilinear)]
    interpolation: InterpolationArg,
    /// Fill for exposed corners, as r,g,b.
    #[arg(long, default_value = "255,255,255", value_parser = parse_rgb)]
    fill: Rgb<u8>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 128)]
    d: usize,
    /// Comma-separated name:sigma[:augmented] specs.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "invariant:0.05:true,sensitive:1.0:false"
    )]
    models: Vec<SynthModel>,
    #[arg(long, default_value = "0:360:15", value_parser = parse_grid)]
    angles: AngleGrid,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value = "0:360:15", value_parser = parse_grid)]
    angles: AngleGrid,
    #[arg(long, value_enum, default_value_t = VariantArg::Student)]
    ttest: VariantArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv,json,svg", value_parser = parse_formats)]
    formats: OutputFormats,
    /// Decimal places in CSV and JSON tables.
    #[arg(long, default_value_t = 4)]
    precision: usize,
}

#[derive(Args, Debug)]
struct TtestArgs {
    /// `aggregates.csv` written by `sweep`.
    #[arg(long)]
    aggregates: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Both)]
    metric: MetricArg,
    #[arg(long, value_enum, default_value_t = VariantArg::Student)]
    ttest: VariantArg,
    /// Also write the JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HeatmapArgs {
    /// `alignment.csv` written by `sweep`.
    #[arg(long)]
    alignment: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Mknn)]
    metric: MetricArg,
    /// Shown in the title only.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Output SVG path (or directory when `--metric both`).
    #[arg(long)]
    out: PathBuf,
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("ROTALIGN_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("ROTALIGN_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(command: Command) -> rotalign::Result<u8> {
    match command {
        Command::Patches(a) => {
            let segment = SegmentConfig {
                channel: match a.channel {
                    ChannelArg::Saturation => HsvChannel::Saturation,
                    ChannelArg::Value => HsvChannel::Value,
                },
                threshold: a.threshold,
                morphology_iterations: a.morphology,
            };
            let interpolation = match a.interpolation {
                InterpolationArg::Nearest => Interpolation::Nearest,
                InterpolationArg::Bilinear => Interpolation::Bilinear,
            };
            let rotations = match &a.angles {
                Some(grid) => grid
                    .angles()
                    .iter()
                    .map(|&angle| {
                        RotationSpec::new(angle).map(|s| s.with_interpolation(interpolation).with_fill(a.fill))
                    })
                    .collect::<rotalign::Result<_>>()?,
                None => Vec::new(),
            };
            let config = PatchesConfig {
                segment,
                tiles: TileConfig {
                    patch_size: a.patch_size,
                    min_foreground: a.min_foreground,
                },
                regions: a.regions as usize,
                rotations,
                ..PatchesConfig::new(a.input, a.out)
            };
            let index = report::cmd_patches(&config)?;
            println!(
                "{} patches written to {}",
                index.patches.len(),
                config.out_dir.display()
            );
            Ok(0)
        }
        Command::Synth(a) => {
            let path = report::cmd_synth(&SynthConfig {
                out_dir: a.out,
                n: a.n,
                dim: a.d,
                models: a.models,
                grid: a.angles,
                seed: a.seed,
            })?;
            println!("{}", path.display());
            Ok(0)
        }
        Command::Sweep(a) => {
            let config = RunConfig {
                k: a.k as usize,
                grid: a.angles,
                variant: a.ttest.into(),
                formats: a.formats,
                precision: a.precision,
                ..RunConfig::new(a.manifest, a.out)
            };
            let out = report::cmd_sweep(&config)?;
            for agg in &out.table.aggregates {
                println!(
                    "{:<24} augmented={:<5} mean_mknn={:.4} mean_cosine={:.4}",
                    agg.model, agg.rotation_augmented, agg.mean_mknn, agg.mean_cosine
                );
            }
            for t in &out.ttests {
                match (t.t, t.p) {
                    (Some(tv), Some(p)) => println!("t-test {}: t = {tv:.4}, p = {p:.3e}", t.metric),
                    _ => println!("t-test {}: skipped ({})", t.metric, t.error.as_deref().unwrap_or("")),
                }
            }
            Ok(0)
        }
        Command::Ttest(a) => {
            let reports = report::cmd_ttest(&a.aggregates, &a.metric.metrics(), a.ttest.into())?;
            let mut text = serde_json::to_string_pretty(&reports)?;
            text.push('\n');
            if let Some(out) = &a.out {
                std::fs::write(out, &text).map_err(|e| rotalign::Error::Io {
                    path: out.clone(),
                    source: e,
                })?;
            }
            print!("{text}");
            let failed = reports.iter().filter_map(|r| r.error.as_deref()).collect::<Vec<_>>();
            for e in &failed {
                eprintln!("error: {e}");
            }
            Ok(if failed.is_empty() { 0 } else { EXIT_DATA })
        }
        Command::Heatmap(a) => {
            match a.metric {
                MetricArg::Both => {
                    std::fs::create_dir_all(&a.out).map_err(|e| rotalign::Error::Io {
                        path: a.out.clone(),
                        source: e,
                    })?;
                    for m in [Metric::Mknn, Metric::Cosine] {
                        let p = a.out.join(format!("heatmap_{m}.svg"));
                        report::cmd_heatmap(&a.alignment, m, a.k, &p)?;
                    }
                }
                single => report::cmd_heatmap(&a.alignment, single.metrics()[0], a.k, &a.out)?,
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
