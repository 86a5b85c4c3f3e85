//! `bmrisk` command-line front end.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bmrisk::classifier::{decision_scores, fit, TrainedModel};
use bmrisk::cohort::{
    label_samples, synth_cohort, CohortManifest, FeatureSetSpec, MetastasisRecord, SynthConfig,
};
use bmrisk::evaluation::{auc, kaplan_meier, km_csv, km_svg, log_rank, roc_svg, Confusion, SurvivalCurve};
use bmrisk::pipeline::{
    build_dataset, extract_images, run, write_bundle, Dataset, FileStore, ImageTable, PipelineConfig,
};
use bmrisk::selection::{mrmr_select, CorrelationReport, SelectionResult};
use bmrisk::{Error, ErrorKind, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

/// Default output directory when neither `--out` nor the config sets one.
const OUTPUT_ENV: &str = "BMRISK_OUTPUT_DIR";
/// Per-image feature table kept in the output directory for resuming.
const IMAGE_CACHE: &str = "image_features.csv";

#[derive(Parser)]
#[command(name = "bmrisk", version, about = "Radiomics risk classification for longitudinal lesion cohorts")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML pipeline config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cohort manifest (overrides the config).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config and $BMRISK_OUTPUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Wavelet bank: haar, coif1 or none.
    #[arg(long)]
    wavelet: Option<String>,
    /// Texture discretization bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// MR intensity normalization: z-score, white-stripe or none.
    #[arg(long)]
    normalization: Option<String>,
    /// Days after a follow-up image within which progression means HRM.
    #[arg(long)]
    horizon_days: Option<i64>,
    /// Classifier cost C.
    #[arg(long)]
    c: Option<f64>,
    /// Positive-class cost multiplier s.
    #[arg(long)]
    sensitivity_weight: Option<f64>,
    /// Decision threshold on the score.
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
}

impl Common {
    /// Apply the command-line overrides to a loaded config.
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        if let Some(w) = &self.wavelet {
            cfg.extraction.features.wavelet = match w.as_str() {
                "none" => None,
                other => Some(other.parse()?),
            };
        }
        if let Some(b) = self.bins {
            cfg.extraction.features.bin_count = b;
        }
        if let Some(n) = &self.normalization {
            cfg.extraction.mr_normalization = serde_json::from_value(serde_json::Value::String(n.clone()))
                .map_err(|_| Error::config(format!("unknown normalization {n:?}")))?;
        }
        if let Some(h) = self.horizon_days {
            cfg.horizon_days = h;
        }
        if let Some(c) = self.c {
            cfg.classifier.c = c;
        }
        if let Some(s) = self.sensitivity_weight {
            cfg.classifier.sensitivity_weight = s;
        }
        if let Some(t) = self.threshold {
            cfg.classifier.threshold = t;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract features: one row per labeled sample for a feature set, plus
    /// the per-image table used to resume and a JSON sidecar.
    Extract {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        set: u8,
        /// Recompute rows even when their fingerprint is unchanged.
        #[arg(long)]
        force: bool,
    },
    /// MRMR selection on all labeled samples of a feature set.
    Select {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        set: u8,
    },
    /// Fit the classifier on all labeled samples of a feature set.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        set: u8,
    },
    /// Score a cohort with a trained model.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Kaplan-Meier curves (and log-rank for two groups) from a CSV with
    /// `time_days` and `event` columns.
    Km {
        #[arg(long)]
        input: PathBuf,
        /// Column splitting the rows into groups.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: label, extract, cross-validate and report.
    Run {
        #[command(flatten)]
        common: Common,
        /// Feature sets: `7`, `1,3,7` or `1..7`.
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        repeats: Option<usize>,
        /// Run MRMR once on all samples instead of per training split.
        #[arg(long)]
        global_selection: bool,
        /// Also report the AUC of pooled held-out scores.
        #[arg(long)]
        pooled_auc: bool,
    },
    /// Write a synthetic cohort (manifest and RAWJSON images).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 150)]
        lesions: usize,
        #[arg(long, default_value_t = 1.0)]
        effect: f64,
        #[arg(long, default_value_t = 0.05)]
        prevalence: f64,
        #[arg(long, default_value_t = 20)]
        grid: usize,
        /// Omit planning CT images.
        #[arg(long)]
        no_ct: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numerical => 4,
    }
}

fn parse_sets(s: &str) -> Result<Vec<u8>> {
    let bad = || Error::config(format!("invalid feature set list {s:?}"));
    let sets: Vec<u8> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u8, u8) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if sets.is_empty() || sets.iter().any(|v| !(1..=7).contains(v)) {
        return Err(bad());
    }
    Ok(sets)
}

struct Resolved {
    cfg: PipelineConfig,
    out: PathBuf,
}

fn resolve(common: &Common, seed_required: bool) -> Result<Resolved> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
            let mut cfg: PipelineConfig =
                toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
            if cfg.manifest.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.manifest = dir.join(&cfg.manifest);
                }
            }
            cfg
        }
        None => {
            let manifest = common
                .manifest
                .clone()
                .ok_or_else(|| Error::config("either --config or --manifest is required"))?;
            let seed = match (common.seed, seed_required) {
                (Some(s), _) => s,
                (None, false) => 0,
                (None, true) => return Err(Error::config("--seed is required (no wall-clock seeding)")),
            };
            PipelineConfig::new(manifest, seed)
        }
    };
    if let Some(m) = &common.manifest {
        cfg.manifest = m.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    common.apply(&mut cfg)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bmrisk-out"));
    if !cfg.manifest.exists() {
        return Err(Error::config(format!("manifest {} does not exist", cfg.manifest.display())));
    }
    cfg.validate()?;
    Ok(Resolved { cfg, out })
}

fn load_records(cfg: &PipelineConfig) -> Result<Vec<MetastasisRecord>> {
    Ok(CohortManifest::load(&cfg.manifest)?.records())
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn load_cached_table(path: &Path) -> Option<ImageTable> {
    let text = std::fs::read_to_string(path).ok()?;
    match ImageTable::from_csv(&text) {
        Ok(t) => Some(t),
        Err(e) => {
            log::warn!("ignoring unreadable feature cache {}: {e}", path.display());
            None
        }
    }
}

#[derive(Serialize)]
struct ExtractSidecar<'a> {
    config: &'a PipelineConfig,
    feature_set: FeatureSetSpec,
    n_images: usize,
    n_samples: usize,
    n_columns: usize,
    skipped_lesions: &'a [String],
    failures: &'a BTreeMap<String, String>,
}

fn sample_csv(cfg: &PipelineConfig, ds: &Dataset) -> String {
    let mut csv = format!("# config: {}\nsample,label", cfg.to_json_line());
    for n in ds.matrix.names() {
        csv.push(',');
        csv.push_str(n);
    }
    csv.push('\n');
    let cols: Vec<usize> = (0..ds.matrix.n_features()).collect();
    for i in 0..ds.labels.len() {
        csv.push_str(&ds.sample_ids[i]);
        csv.push_str(if ds.labels[i] { ",HRM" } else { ",LRM" });
        for v in ds.matrix.row(i, &cols) {
            csv.push_str(&format!(",{v:?}"));
        }
        csv.push('\n');
    }
    csv
}

fn cmd_extract(common: &Common, set: u8, force: bool) -> Result<u8> {
    let Resolved { cfg, out } = resolve(common, false)?;
    let spec = FeatureSetSpec::table(set)?;
    let records = load_records(&cfg)?;
    let cache = out.join(IMAGE_CACHE);
    let previous = if force { None } else { load_cached_table(&cache) };
    let store = FileStore::for_manifest(&cfg.manifest);
    let table = extract_images(&records, &store, &cfg.extraction, previous.as_ref(), force);
    log::info!(
        "{} images: {} reused, {} failed",
        table.rows.len() + table.failures.len(),
        table.reused,
        table.failures.len()
    );
    write(&cache, &table.to_csv(&cfg.to_json_line())?)?;
    let failures: BTreeMap<String, String> =
        table.failures.iter().map(|(r, m)| (r.image.clone(), m.clone())).collect();
    let labeling = label_samples(&records, cfg.horizon_days)?;
    // lesions with failed images cannot be assembled; keep the rest
    let failed: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            std::iter::once(&r.planning_mr)
                .chain(r.planning_ct.iter())
                .chain(r.followups.iter().map(|f| &f.image))
                .any(|i| table.failures.contains_key(i))
        })
        .map(|(i, _)| i)
        .collect();
    let mut usable = labeling.clone();
    usable.samples.retain(|s| !failed.contains(&s.record));
    usable.excluded.retain(|s| !failed.contains(&s.record));
    let ds = build_dataset(&records, &usable, &table, &spec).map_err(|e| e.at_stage("assemble"))?;
    write(&out.join("features.csv"), &sample_csv(&cfg, &ds))?;
    let sidecar = ExtractSidecar {
        config: &cfg,
        feature_set: spec,
        n_images: table.rows.len(),
        n_samples: ds.labels.len(),
        n_columns: ds.matrix.n_features(),
        skipped_lesions: &ds.skipped_lesions,
        failures: &failures,
    };
    write(&out.join("features.json"), &to_json(&sidecar))?;
    Ok(if failures.is_empty() { 0 } else { 3 })
}

/// Labeled dataset for one set, extracting (with the cache in `out`) as needed.
fn dataset_for(cfg: &PipelineConfig, out: &Path, set: u8) -> Result<Dataset> {
    let spec = FeatureSetSpec::table(set)?;
    let records = load_records(cfg)?;
    let labeling = label_samples(&records, cfg.horizon_days)?;
    let table = if set > 1 {
        let csv_path = out.join(IMAGE_CACHE);
        let previous = load_cached_table(&csv_path);
        let store = FileStore::for_manifest(&cfg.manifest);
        let table = extract_images(&records, &store, &cfg.extraction, previous.as_ref(), false);
        if let Some((r, msg)) = table.failures.iter().next() {
            return Err(Error::data(format!("{}: {msg}", r.image)).at_stage("extract"));
        }
        write(&csv_path, &table.to_csv(&cfg.to_json_line())?)?;
        table
    } else {
        ImageTable::default()
    };
    build_dataset(&records, &labeling, &table, &spec).map_err(|e| e.at_stage("assemble"))
}

fn label_targets(ds: &Dataset) -> Vec<f64> {
    ds.labels.iter().map(|&l| f64::from(u8::from(l))).collect()
}

fn select_all(cfg: &PipelineConfig, ds: &Dataset) -> Result<SelectionResult> {
    let k = (ds.labels.len() / cfg.selection.samples_per_feature.max(1)).max(1);
    mrmr_select(&ds.matrix, &label_targets(ds), k).map_err(|e| e.at_stage("select"))
}

#[derive(Serialize)]
struct SelectionFile<'a> {
    config: &'a PipelineConfig,
    feature_set: FeatureSetSpec,
    n_samples: usize,
    selection: &'a SelectionResult,
}

fn cmd_select(common: &Common, set: u8) -> Result<u8> {
    let Resolved { cfg, out } = resolve(common, true)?;
    let ds = dataset_for(&cfg, &out, set)?;
    let sel = select_all(&cfg, &ds)?;
    let file = SelectionFile {
        config: &cfg,
        feature_set: ds.spec,
        n_samples: ds.labels.len(),
        selection: &sel,
    };
    write(&out.join(format!("selection_set{set}.json")), &to_json(&file))?;
    let report = CorrelationReport::compute(&ds.matrix, &label_targets(&ds))?;
    let mut csv = format!("# config: {}\nfeature,r,degenerate\n", cfg.to_json_line());
    for e in &report.entries {
        csv.push_str(&format!("{},{:?},{}\n", e.name, e.r, e.degenerate));
    }
    write(&out.join(format!("correlations_set{set}.csv")), &csv)?;
    Ok(0)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    config: PipelineConfig,
    feature_set: FeatureSetSpec,
    selection: SelectionResult,
    model: TrainedModel<f64>,
}

fn cmd_train(common: &Common, set: u8) -> Result<u8> {
    let Resolved { cfg, out } = resolve(common, true)?;
    let ds = dataset_for(&cfg, &out, set)?;
    let selection = select_all(&cfg, &ds)?;
    let x = ds.matrix.select_columns(&selection.selected)?;
    let model = fit(&x, &ds.labels, &cfg.svm()).map_err(|e| e.at_stage("train"))?;
    let file = ModelFile {
        config: cfg,
        feature_set: ds.spec,
        selection,
        model,
    };
    write(&out.join(format!("model_set{set}.json")), &to_json(&file))?;
    Ok(0)
}

#[derive(Serialize)]
struct Metrics<'a> {
    config: &'a PipelineConfig,
    feature_set: FeatureSetSpec,
    n_samples: usize,
    auc: Option<f64>,
    confusion: Confusion,
}

fn cmd_evaluate(common: &Common, model_path: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(model_path).map_err(|e| Error::io(model_path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::json(model_path, e))?;
    let mut common = common.clone();
    if common.config.is_none() && common.manifest.is_none() {
        common.manifest = Some(file.config.manifest.clone());
    }
    if common.seed.is_none() {
        common.seed = Some(file.config.seed);
    }
    let Resolved { cfg, out } = resolve(&common, true)?;
    let ds = dataset_for(&cfg, &out, file.feature_set.id)?;
    let scores = decision_scores(&file.model, &ds.matrix)?;
    let predicted: Vec<bool> = scores.iter().map(|&s| s >= file.model.threshold).collect();
    let mut csv = format!("# config: {}\nsample,label,score,predicted\n", cfg.to_json_line());
    for i in 0..scores.len() {
        csv.push_str(&format!(
            "{},{},{:?},{}\n",
            ds.sample_ids[i],
            if ds.labels[i] { "HRM" } else { "LRM" },
            scores[i],
            if predicted[i] { "HRM" } else { "LRM" }
        ));
    }
    write(&out.join("scores.csv"), &csv)?;
    let roc = auc(&scores, &ds.labels).ok();
    if let Some(r) = &roc {
        write(&out.join("roc.svg"), &roc_svg("ROC", r))?;
    }
    let metrics = Metrics {
        config: &cfg,
        feature_set: file.feature_set,
        n_samples: scores.len(),
        auc: roc.map(|r| r.auc),
        confusion: Confusion::from_predictions(&predicted, &ds.labels),
    };
    write(&out.join("metrics.json"), &to_json(&metrics))?;
    Ok(0)
}

#[derive(Serialize)]
struct KmSummary {
    input: String,
    groups: BTreeMap<String, Option<f64>>,
    log_rank: Option<bmrisk::evaluation::LogRank>,
}

fn parse_event(s: &str) -> Result<bool> {
    match s.trim() {
        "1" | "true" | "TRUE" | "True" => Ok(true),
        "0" | "false" | "FALSE" | "False" => Ok(false),
        other => Err(Error::data(format!("event must be 0/1 or true/false, got {other:?}"))),
    }
}

fn cmd_km(input: &Path, group: Option<&str>, out: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    let headers = rd.headers().map_err(Error::from)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::data(format!("missing column {name}")))
    };
    let (ti, ei) = (col("time_days")?, col("event")?);
    let gi = group.map(col).transpose()?;
    let mut data: BTreeMap<String, (Vec<f64>, Vec<bool>)> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec.map_err(Error::from)?;
        let t: f64 = rec[ti].trim().parse().map_err(|_| Error::data(format!("bad time {:?}", &rec[ti])))?;
        let g = gi.map_or_else(|| "all".to_string(), |i| rec[i].to_string());
        let entry = data.entry(g).or_default();
        entry.0.push(t);
        entry.1.push(parse_event(&rec[ei])?);
    }
    let curves: Vec<(String, SurvivalCurve<f64>)> = data
        .iter()
        .map(|(g, (t, e))| Ok((g.clone(), kaplan_meier(t, e)?)))
        .collect::<Result<_>>()?;
    let refs: Vec<(&str, &SurvivalCurve<f64>)> = curves.iter().map(|(g, c)| (g.as_str(), c)).collect();
    let header = format!("# input: {}\n", input.display());
    write(&out.join("km.csv"), &(header + &km_csv(&refs)))?;
    write(&out.join("km.svg"), &km_svg("Kaplan-Meier", &refs))?;
    let groups: Vec<&(Vec<f64>, Vec<bool>)> = data.values().collect();
    let lr = if groups.len() == 2 {
        log_rank(&groups[0].0, &groups[0].1, &groups[1].0, &groups[1].1).ok()
    } else {
        None
    };
    let summary = KmSummary {
        input: input.display().to_string(),
        groups: curves
            .iter()
            .map(|(g, c)| (g.clone(), c.median.map(|d| d / bmrisk::evaluation::DAYS_PER_MONTH)))
            .collect(),
        log_rank: lr,
    };
    write(&out.join("km.json"), &to_json(&summary))?;
    Ok(0)
}

fn samples_csv(cfg: &PipelineConfig, records: &[MetastasisRecord]) -> Result<String> {
    let l = label_samples(records, cfg.horizon_days)?;
    let mut csv = format!("# config: {}\nsample,status,time_days,event\n", cfg.to_json_line());
    for s in &l.samples {
        let status = match s.label {
            bmrisk::cohort::RiskLabel::Hrm => "HRM",
            bmrisk::cohort::RiskLabel::Lrm => "LRM",
        };
        csv.push_str(&format!(
            "{}@{},{status},{},{}\n",
            s.lesion_id,
            s.imaging_date,
            s.days_to_event_or_censor,
            u8::from(!s.censored)
        ));
    }
    for e in &l.excluded {
        let r = &records[e.record];
        csv.push_str(&format!(
            "{}@{},excluded,{},0\n",
            e.lesion_id, r.followups[e.followup].date, e.days_to_censor
        ));
    }
    Ok(csv)
}

fn cmd_run(
    common: &Common,
    sets: Option<&str>,
    repeats: Option<usize>,
    global_selection: bool,
    pooled_auc: bool,
) -> Result<u8> {
    let Resolved { mut cfg, out } = resolve(common, true)?;
    if let Some(s) = sets {
        cfg.feature_sets = parse_sets(s)?;
    }
    if let Some(r) = repeats {
        cfg.cv.repeats = r;
    }
    if global_selection {
        cfg.selection.mode = bmrisk::evaluation::SelectionMode::Global;
    }
    cfg.cv.pooled_auc |= pooled_auc;
    cfg.validate()?;
    let records = load_records(&cfg)?;
    let csv_path = out.join(IMAGE_CACHE);
    let previous = load_cached_table(&csv_path);
    let store = FileStore::for_manifest(&cfg.manifest);
    let output = run(&cfg, &records, &store, previous.as_ref())?;
    if !output.table.rows.is_empty() {
        write(&csv_path, &output.table.to_csv(&cfg.to_json_line())?)?;
    }
    write(&out.join("samples.csv"), &samples_csv(&cfg, &records)?)?;
    write_bundle(&out, &cfg, &output.results)?;
    for r in &output.results {
        log::info!("set {}: mean AUC {:.3} +/- {:.3}", r.spec.id, r.cv.mean_auc, r.cv.std_auc);
    }
    Ok(0)
}

fn cmd_synth(out: &Path, cfg: SynthConfig) -> Result<u8> {
    let cohort = synth_cohort(&cfg)?;
    cohort.write_to(out)?;
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Extract { common, set, force } => cmd_extract(&common, set, force),
        Command::Select { common, set } => cmd_select(&common, set),
        Command::Train { common, set } => cmd_train(&common, set),
        Command::Evaluate { common, model } => cmd_evaluate(&common, &model),
        Command::Km { input, group, out } => {
            let out = out
                .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("bmrisk-out"));
            cmd_km(&input, group.as_deref(), &out)
        }
        Command::Run {
            common,
            set,
            repeats,
            global_selection,
            pooled_auc,
        } => cmd_run(&common, set.as_deref(), repeats, global_selection, pooled_auc),
        Command::Synth {
            out,
            seed,
            lesions,
            effect,
            prevalence,
            grid,
            no_ct,
        } => cmd_synth(
            &out,
            SynthConfig {
                seed,
                n_lesions: lesions,
                effect,
                prevalence,
                grid,
                with_ct: !no_ct,
            },
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
