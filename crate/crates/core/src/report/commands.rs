use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::patchgen::{
    extract_patches, largest_regions, load_rgb, segment_foreground, write_patch_set, PatchIndex, RotationSpec,
    SegmentConfig, TileConfig, DEFAULT_REGION_COUNT,
};
use crate::protocol::{run_sweep, AlignmentTable, AngleGrid};
use crate::stats::{partition_by_flag, partition_groups, ttest_report, TTestReport, TTestVariant};
use crate::store::{perturb, synthesize_control, write_embeddings, EmbeddingMeta, ManifestEntry, ModelManifest};

use super::{
    read_aggregates_csv, read_alignment_csv, render_heatmap, table_from_rows, write_aggregates_csv,
    write_alignment_csv, write_alignment_json, write_ttest_json, OutputFormats, AGGREGATES_CSV, ALIGNMENT_CSV,
    ALIGNMENT_JSON, DEFAULT_PRECISION, TTEST_JSON,
};

/// Settings for `sweep`.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub k: usize,
    pub grid: AngleGrid,
    pub variant: TTestVariant,
    pub out_dir: PathBuf,
    pub formats: OutputFormats,
    /// Decimal places in the CSV and JSON tables.
    pub precision: usize,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            manifest: manifest.into(),
            k: crate::DEFAULT_K,
            grid: AngleGrid::default(),
            variant: TTestVariant::Student,
            out_dir: out_dir.into(),
            formats: OutputFormats::default(),
            precision: DEFAULT_PRECISION,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutputs {
    pub table: AlignmentTable,
    pub ttests: Vec<TTestReport>,
    pub files: Vec<PathBuf>,
}

/// Loads the manifest, runs the sweep, and writes every requested output.
pub fn cmd_sweep(config: &RunConfig) -> Result<SweepOutputs> {
    if config.k < 1 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let manifest = ModelManifest::load(&config.manifest)?;
    let table = run_sweep(&manifest, &config.grid, config.k)?;

    let mut ttests = Vec::with_capacity(2);
    for metric in [Metric::Mknn, Metric::Cosine] {
        let split = partition_groups(&manifest, &table.aggregates, metric)?;
        let report = ttest_report(&split, metric, config.variant);
        if let Some(e) = &report.error {
            log::warn!("{metric} t-test skipped: {e}");
        }
        ttests.push(report);
    }

    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut files = vec![out.join(ALIGNMENT_CSV), out.join(AGGREGATES_CSV), out.join(TTEST_JSON)];
    write_alignment_csv(&table, &files[0], config.precision)?;
    write_aggregates_csv(&table.aggregates, &files[1], config.precision)?;
    write_ttest_json(&ttests, &files[2])?;
    if config.formats.json {
        let p = out.join(ALIGNMENT_JSON);
        write_alignment_json(&table, &p, config.precision)?;
        files.push(p);
    }
    if config.formats.svg {
        for metric in [Metric::Mknn, Metric::Cosine] {
            let p = out.join(format!("heatmap_{metric}.svg"));
            render_heatmap(&table, metric, &p)?;
            files.push(p);
        }
    }
    Ok(SweepOutputs { table, ttests, files })
}

/// t-tests on a previously written `aggregates.csv`, grouped by its
/// `rotation_augmented` column.
pub fn cmd_ttest(aggregates_csv: &Path, metrics: &[Metric], variant: TTestVariant) -> Result<Vec<TTestReport>> {
    let aggregates = read_aggregates_csv(aggregates_csv)?;
    Ok(metrics
        .iter()
        .map(|&m| ttest_report(&partition_by_flag(&aggregates, m), m, variant))
        .collect())
}

/// Renders one heatmap from a previously written `alignment.csv`.
pub fn cmd_heatmap(alignment_csv: &Path, metric: Metric, k: usize, out: &Path) -> Result<()> {
    let table = table_from_rows(k, read_alignment_csv(alignment_csv)?);
    render_heatmap(&table, metric, out)
}

/// One synthetic model: every rotated set is the control plus
/// `Normal(0, sigma^2)` noise.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthModel {
    pub name: String,
    pub sigma: f64,
    pub rotation_augmented: bool,
}

impl std::str::FromStr for SynthModel {
    type Err = Error;

    /// `name:sigma[:augmented]`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Domain(format!("expected name:sigma[:true|false], got {s:?}"));
        let (name, sigma, aug) = match parts.as_slice() {
            [n, s] => (*n, *s, "false"),
            [n, s, a] => (*n, *s, *a),
            _ => return Err(bad()),
        };
        if name.is_empty() {
            return Err(bad());
        }
        Ok(SynthModel {
            name: name.to_string(),
            sigma: sigma.parse().map_err(|_| bad())?,
            rotation_augmented: aug.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub out_dir: PathBuf,
    pub n: usize,
    pub dim: usize,
    pub models: Vec<SynthModel>,
    pub grid: AngleGrid,
    pub seed: u64,
}

fn angle_seed(seed: u64, angle: u32) -> u64 {
    seed ^ (u64::from(angle) + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Writes one `EMB1` file per (model, angle) plus `manifest.json`.
///
/// All models share the control set and, per angle, the same noise draw;
/// models differ only in how far that draw is scaled.
pub fn cmd_synth(config: &SynthConfig) -> Result<PathBuf> {
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let control = synthesize_control(config.n, config.dim, config.seed)?;
    let mut entries = Vec::with_capacity(config.models.len());
    for model in &config.models {
        let mut paths = BTreeMap::new();
        for &angle in config.grid.angles() {
            let set = if angle == 0 {
                control.clone()
            } else {
                perturb(&control, model.sigma, angle_seed(config.seed, angle))?
            };
            let set = set.with_meta(EmbeddingMeta::new(&model.name, angle).augmented(model.rotation_augmented))?;
            let file = format!("{}_angle{angle}.emb", model.name);
            write_embeddings(&set, out.join(&file))?;
            paths.insert(angle, PathBuf::from(file));
        }
        entries.push(ManifestEntry {
            model_name: model.name.clone(),
            rotation_augmented: model.rotation_augmented,
            embedding_paths: paths,
        });
    }
    let manifest = ModelManifest { entries };
    manifest.check_structure()?;
    let path = out.join("manifest.json");
    manifest.save(&path)?;
    Ok(path)
}

/// Settings for `patches`.
#[derive(Clone, Debug)]
pub struct PatchesConfig {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub segment: SegmentConfig,
    pub tiles: TileConfig,
    pub regions: usize,
    /// Extra rotated copies to write next to each patch.
    pub rotations: Vec<RotationSpec>,
}

impl PatchesConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        PatchesConfig {
            input: input.into(),
            out_dir: out_dir.into(),
            segment: SegmentConfig::default(),
            tiles: TileConfig::default(),
            regions: DEFAULT_REGION_COUNT,
            rotations: Vec::new(),
        }
    }
}

/// Segments, selects regions, tiles, and writes PNGs plus `index.json`.
pub fn cmd_patches(config: &PatchesConfig) -> Result<PatchIndex> {
    config.tiles.validate()?;
    if config.regions < 1 {
        return Err(Error::Domain("region count must be at least 1".into()));
    }
    let image = load_rgb(&config.input)?;
    let mask = segment_foreground(&image, &config.segment)?;
    let boxes = largest_regions(&mask, config.regions);
    let patches = extract_patches(&image, &mask, &boxes, &config.tiles)?;
    let source = config
        .input
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    write_patch_set(
        &patches,
        &config.out_dir,
        &source,
        config.tiles.min_foreground,
        &config.rotations,
    )
}
