//! `lidkit`: eyelid-angle blink analysis pipeline.
//!
//! Stages are composable through files: `ingest` and `ela` consume landmark
//! streams, `blinks` segments an ELA CSV, `features` derives the per-blink
//! record, `drowsy` fits/applies the epoch classifier, `synth` generates
//! ground-truth data and `eval` scores the pipeline against it.
//!
//! Exit codes: 0 on success, 1 on any validation or I/O error, 2 when a
//! check requested with `--assert` fails. All randomness flows from the
//! explicit `--seed` (default 7); reruns with identical inputs and seed
//! produce byte-identical outputs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lidkit::blink::{DEFAULT_PERIOD, DEFAULT_WINDOW_SPAN};
use lidkit::drowsiness::{
    cross_validate, fit, predict, DrowsinessModel, EpochFeatureVector,
};
use lidkit::eval::{
    detection_accuracy, ela_error_sweep, ear_ela_variance, feature_index, framerate_bias_report,
    FrameWindow,
};
use lidkit::features::{BlinkFeatures, DEFAULT_PERCLOS_THRESHOLD};
use lidkit::io;
use lidkit::landmarks::{
    detection_ratio, frame_to_jsonl, normalize_frame_with, parse_landmark_stream,
    EyelidIndexConfig, RawLandmarkFrame, StreamFormat, DEFAULT_Z_SCALE,
};
use lidkit::pipeline::{
    analyze_samples, build_grid, ela_samples_from_frames, epoch_vectors, features_on_grid,
    smooth_grid, AnalysisOptions, ElaOptions, EpochMode, MAX_GAP_SECONDS,
};
use lidkit::synth::{
    export_animation_curve, generate_ela_signal, generate_landmark_sequence, plan_signal,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "lidkit", version, about = "Eyelid-angle blink analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a landmark stream; print a summary.
    Ingest(IngestArgs),
    /// Compute the per-frame eyelid-angle series from a landmark stream.
    Ela(ElaArgs),
    /// Detect blinks on an ELA series.
    Blinks(BlinksArgs),
    /// Compute per-blink features from detected blinks and the ELA series.
    Features(FeaturesArgs),
    /// Drowsiness classification on aggregated epochs.
    #[command(subcommand)]
    Drowsy(DrowsyCommand),
    /// Generate synthetic ground-truth data.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Score the pipeline against ground truth.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for StreamFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => StreamFormat::Jsonl,
            FormatArg::Csv => StreamFormat::Csv,
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Landmark stream file.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    /// Eyelid index config (TOML); defaults by landmark count.
    #[arg(long)]
    eyelid_config: Option<PathBuf>,
    /// Depth rescaling factor.
    #[arg(long, default_value_t = DEFAULT_Z_SCALE)]
    z_scale: f64,
    /// Write the normalized stream back out as JSONL.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ElaArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    #[arg(long)]
    eyelid_config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_Z_SCALE)]
    z_scale: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BlinksArgs {
    /// ELA CSV produced by `lidkit ela` or `lidkit synth signal`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Frame rate; inferred from timestamps when omitted.
    #[arg(long)]
    fps: Option<f64>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Trailing analysis window, seconds.
    #[arg(long, default_value_t = DEFAULT_WINDOW_SPAN)]
    window_span: f64,
    /// Scheduling period, seconds.
    #[arg(long, default_value_t = DEFAULT_PERIOD)]
    period: f64,
    /// Longest detection gap bridged by interpolation, seconds.
    #[arg(long, default_value_t = MAX_GAP_SECONDS)]
    max_gap: f64,
    /// Override the smoothing kernel width (samples).
    #[arg(long)]
    smooth_sigma_override: Option<f64>,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    blinks: PathBuf,
    #[arg(long)]
    ela: PathBuf,
    #[arg(long)]
    fps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PERCLOS_THRESHOLD)]
    perclos_threshold: f64,
    #[arg(long, default_value_t = MAX_GAP_SECONDS)]
    max_gap: f64,
    #[arg(long)]
    smooth_sigma_override: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EpochModeArg {
    /// One epoch per blink over its trailing span.
    Blink,
    /// One epoch per period over the trailing span.
    Sliding,
}

#[derive(Subcommand)]
enum DrowsyCommand {
    /// Fit the standardize -> PCA -> kNN model on labeled recordings.
    Fit(DrowsyFitArgs),
    /// Predict per-epoch labels for one recording.
    Predict(DrowsyPredictArgs),
    /// Subject-grouped cross-validation.
    Cv(DrowsyCvArgs),
}

#[derive(Args)]
struct DrowsyEpochArgs {
    #[arg(long, value_enum, default_value = "blink")]
    epoch_mode: EpochModeArg,
    /// Trailing aggregation span, seconds.
    #[arg(long, default_value_t = 60.0)]
    span: f64,
    /// Sliding-mode period, seconds.
    #[arg(long, default_value_t = 60.0)]
    period: f64,
}

#[derive(Args)]
struct DrowsyFitArgs {
    /// Per-recording features CSV (repeatable).
    #[arg(long = "features", required = true)]
    features: Vec<PathBuf>,
    /// Label manifest: `file,label[,subject]` rows.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    epochs: DrowsyEpochArgs,
    /// Collapse low_vigilant into drowsy.
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct DrowsyPredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "features")]
    features: PathBuf,
    #[command(flatten)]
    epochs: DrowsyEpochArgs,
    /// Prediction CSV (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DrowsyCvArgs {
    #[arg(long = "features", required = true)]
    features: Vec<PathBuf>,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[command(flatten)]
    epochs: DrowsyEpochArgs,
    #[arg(long)]
    binary: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Generate a state-conditioned ELA signal.
    Signal(SynthSignalArgs),
    /// Generate a landmark stream from a scenario.
    Landmarks(SynthLandmarksArgs),
    /// Export the generated signal as an animation curve.
    Curve(SynthCurveArgs),
}

#[derive(Args)]
struct SynthCommonArgs {
    /// Scenario TOML (state, duration, fps, noise, pose, distributions).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the scenario file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SynthSignalArgs {
    #[command(flatten)]
    common: SynthCommonArgs,
    /// Output ELA CSV.
    #[arg(long)]
    out: PathBuf,
    /// Ground truth (JSON) output.
    #[arg(long)]
    truth_out: Option<PathBuf>,
    /// Blink annotations (JSONL) output.
    #[arg(long)]
    annotations_out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthLandmarksArgs {
    #[command(flatten)]
    common: SynthCommonArgs,
    #[arg(long)]
    out: PathBuf,
    /// Ground truth (JSON) output.
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthCurveArgs {
    #[command(flatten)]
    common: SynthCommonArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Detection accuracy of blink windows against annotations.
    Da(EvalDaArgs),
    /// Reconstruction-error sweep over set angles and poses.
    Sweep(EvalSweepArgs),
    /// ELA-vs-EAR variance on a constant-angle pose sweep.
    Variance(EvalVarianceArgs),
    /// Mean feature values across frame rates.
    Fps(EvalFpsArgs),
}

#[derive(Args)]
struct EvalDaArgs {
    /// Detected blinks (JSONL).
    #[arg(long)]
    detected: PathBuf,
    /// Ground-truth annotations (JSONL of start_frame/end_frame/label).
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail (exit 2) when DA falls below --min-da.
    #[arg(long)]
    assert: bool,
    #[arg(long, default_value_t = 0.0)]
    min_da: f64,
}

#[derive(Args)]
struct EvalSweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated set angles, degrees.
    #[arg(long, value_delimiter = ',', default_value = "0,10,20,30,40,50,60,70")]
    set_elas: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Fail (exit 2) when any per-angle MAE exceeds --max-mae.
    #[arg(long)]
    assert: bool,
    #[arg(long, default_value_t = 0.5)]
    max_mae: f64,
}

#[derive(Args)]
struct EvalVarianceArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 60.0)]
    set_ela: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail (exit 2) unless the ELA variance is below the EAR variance.
    #[arg(long)]
    assert: bool,
}

#[derive(Args)]
struct EvalFpsArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated frame rates.
    #[arg(long, value_delimiter = ',', default_value = "10,30,50")]
    fps_list: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Fail (exit 2) unless the mean closing duration at the highest rate
    /// is below the one at the lowest rate.
    #[arg(long)]
    assert: bool,
}

/// Error carrying exit code 2 for failed `--assert` checks.
#[derive(Debug)]
struct AssertFailed(String);

impl std::fmt::Display for AssertFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "assertion failed: {}", self.0)
    }
}

impl std::error::Error for AssertFailed {}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("lidkit: {e:#}");
            let code = if e.downcast_ref::<AssertFailed>().is_some() {
                2
            } else {
                1
            };
            std::process::exit(code);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Ela(args) => cmd_ela(args),
        Command::Blinks(args) => cmd_blinks(args),
        Command::Features(args) => cmd_features(args),
        Command::Drowsy(cmd) => match cmd {
            DrowsyCommand::Fit(args) => cmd_drowsy_fit(args),
            DrowsyCommand::Predict(args) => cmd_drowsy_predict(args),
            DrowsyCommand::Cv(args) => cmd_drowsy_cv(args),
        },
        Command::Synth(cmd) => match cmd {
            SynthCommand::Signal(args) => cmd_synth_signal(args),
            SynthCommand::Landmarks(args) => cmd_synth_landmarks(args),
            SynthCommand::Curve(args) => cmd_synth_curve(args),
        },
        Command::Eval(cmd) => match cmd {
            EvalCommand::Da(args) => cmd_eval_da(args),
            EvalCommand::Sweep(args) => cmd_eval_sweep(args),
            EvalCommand::Variance(args) => cmd_eval_variance(args),
            EvalCommand::Fps(args) => cmd_eval_fps(args),
        },
    }
}

fn open_reader(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn create_writer(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_frames(input: &Path, format: FormatArg) -> anyhow::Result<Vec<RawLandmarkFrame>> {
    Ok(parse_landmark_stream(open_reader(input)?, format.into())?)
}

/// Picks the eyelid config: an explicit file, or a default matched to the
/// stream's landmark count (478 = MediaPipe Face Mesh V2, 32 = the bundled
/// synthetic eye model).
fn resolve_eyelid_config(
    explicit: Option<&PathBuf>,
    frames: &[RawLandmarkFrame],
) -> anyhow::Result<EyelidIndexConfig> {
    if let Some(path) = explicit {
        return Ok(EyelidIndexConfig::from_path(path)?);
    }
    let count = frames
        .iter()
        .find(|f| f.detected)
        .map(|f| f.landmarks.len());
    match count {
        Some(478) => Ok(EyelidIndexConfig::mediapipe_face_mesh_v2()),
        Some(lidkit::synth::MODEL_LANDMARK_COUNT) => Ok(lidkit::synth::model_index_config()),
        Some(n) => bail!("no default eyelid config for {n}-landmark streams; pass --eyelid-config"),
        None => bail!("stream holds no detected frames"),
    }
}

fn cmd_ingest(args: IngestArgs) -> anyhow::Result<()> {
    let frames = load_frames(&args.input, args.format)?;
    if frames.is_empty() {
        bail!("stream is empty");
    }
    let cfg = resolve_eyelid_config(args.eyelid_config.as_ref(), &frames)?;
    let dr = detection_ratio(&frames)?;
    let detected = frames.iter().filter(|f| f.detected).count();
    let landmark_count = frames
        .iter()
        .find(|f| f.detected)
        .map(|f| f.landmarks.len())
        .unwrap_or(0);
    cfg.validate_for(landmark_count)?;
    let mean_fps = if frames.len() >= 2 {
        let span = frames.last().unwrap().timestamp - frames[0].timestamp;
        if span > 0.0 {
            (frames.len() - 1) as f64 / span
        } else {
            0.0
        }
    } else {
        0.0
    };
    if let Some(out) = &args.out {
        let mut w = create_writer(out)?;
        for frame in &frames {
            if frame.detected {
                let norm = normalize_frame_with(frame, args.z_scale)?;
                let mut normalized = frame.clone();
                normalized.landmarks = norm.landmarks;
                writeln!(w, "{}", frame_to_jsonl(&normalized))?;
            } else {
                writeln!(w, "{}", frame_to_jsonl(frame))?;
            }
        }
    }
    println!(
        "{}",
        serde_json::json!({
            "frames": frames.len(),
            "detected": detected,
            "detection_ratio": dr,
            "mean_fps": mean_fps,
            "landmark_count": landmark_count,
        })
    );
    Ok(())
}

fn cmd_ela(args: ElaArgs) -> anyhow::Result<()> {
    let frames = load_frames(&args.input, args.format)?;
    let cfg = resolve_eyelid_config(args.eyelid_config.as_ref(), &frames)?;
    let opts = ElaOptions {
        eyelid_config: cfg,
        z_scale: args.z_scale,
    };
    let (samples, skipped) = ela_samples_from_frames(&frames, &opts)?;
    if skipped > 0 {
        eprintln!("lidkit: {skipped} detected frames had no computable eye");
    }
    io::write_ela_csv(&samples, create_writer(&args.out)?)?;
    Ok(())
}

fn cmd_blinks(args: BlinksArgs) -> anyhow::Result<()> {
    let samples = io::read_ela_csv(open_reader(&args.input)?)?;
    let opts = AnalysisOptions {
        seed: args.seed,
        window_span: args.window_span,
        period: args.period,
        max_gap_s: args.max_gap,
        smooth_sigma_override: args.smooth_sigma_override,
        perclos_threshold: DEFAULT_PERCLOS_THRESHOLD,
    };
    let analysis = analyze_samples(&samples, args.fps, &opts)?;
    io::write_blinks_jsonl(&analysis.blinks, create_writer(&args.out)?)?;
    eprintln!(
        "lidkit: {} blinks across {} epochs",
        analysis.blinks.len(),
        analysis.epochs.len()
    );
    Ok(())
}

fn cmd_features(args: FeaturesArgs) -> anyhow::Result<()> {
    let samples = io::read_ela_csv(open_reader(&args.ela)?)?;
    let blinks = io::read_blinks_jsonl(open_reader(&args.blinks)?)?;
    let grid = build_grid(&samples, args.fps, args.max_gap)?;
    let smoothed = smooth_grid(&grid, args.smooth_sigma_override);
    let (features, dropped) = features_on_grid(&smoothed, &blinks, args.perclos_threshold);
    for (idx, why) in &dropped {
        eprintln!("lidkit: blink {idx} dropped: {why}");
    }
    let rows: Vec<BlinkFeatures> = features.into_iter().map(|(_, f)| f).collect();
    io::write_features_csv(&rows, create_writer(&args.out)?)?;
    Ok(())
}

fn epoch_mode(arg: EpochModeArg) -> EpochMode {
    match arg {
        EpochModeArg::Blink => EpochMode::PerBlink,
        EpochModeArg::Sliding => EpochMode::Sliding,
    }
}

/// Loads one recording's features and aggregates them into epoch vectors.
fn epochs_for_file(
    path: &Path,
    epochs: &DrowsyEpochArgs,
) -> anyhow::Result<Vec<EpochFeatureVector>> {
    let features = io::read_features_csv(open_reader(path)?)?;
    if features.is_empty() {
        bail!("{} holds no blinks", path.display());
    }
    let duration = features.iter().map(|f| f.t4).fold(0.0, f64::max);
    let vectors = epoch_vectors(
        &features,
        epoch_mode(epochs.epoch_mode),
        epochs.span,
        epochs.period,
        duration,
    );
    if vectors.is_empty() {
        bail!("{} produced no epochs", path.display());
    }
    Ok(vectors)
}

/// Looks up the label-manifest row for a feature file, matching the full
/// path first and the file name second.
fn label_for<'a>(
    path: &Path,
    labels: &'a [io::LabelRecord],
) -> anyhow::Result<&'a io::LabelRecord> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_default();
    labels
        .iter()
        .find(|l| l.file == path.to_string_lossy() || l.file == name)
        .ok_or_else(|| anyhow!("no label entry for {}", path.display()))
}

fn labeled_epochs(
    features: &[PathBuf],
    labels_path: &Path,
    epochs: &DrowsyEpochArgs,
    binary: bool,
) -> anyhow::Result<Vec<(String, Vec<EpochFeatureVector>)>> {
    let labels = io::read_labels_csv(open_reader(labels_path)?)?;
    let mut groups = Vec::new();
    for path in features {
        let record = label_for(path, &labels)?;
        let label = if binary {
            record.label.to_binary()
        } else {
            record.label
        };
        let mut vectors = epochs_for_file(path, epochs)?;
        for v in &mut vectors {
            v.label = Some(label);
        }
        let subject = record
            .subject
            .clone()
            .unwrap_or_else(|| path.to_string_lossy().to_string());
        groups.push((subject, vectors));
    }
    Ok(groups)
}

fn cmd_drowsy_fit(args: DrowsyFitArgs) -> anyhow::Result<()> {
    let groups = labeled_epochs(&args.features, &args.labels, &args.epochs, args.binary)?;
    let train: Vec<EpochFeatureVector> = groups.into_iter().flat_map(|(_, v)| v).collect();
    let model = fit(&train)?;
    model.save(&args.out)?;
    eprintln!(
        "lidkit: fitted on {} epochs, kept {} of {} dims",
        train.len(),
        model.kept_dims.len(),
        model.mean.len()
    );
    Ok(())
}

fn cmd_drowsy_predict(args: DrowsyPredictArgs) -> anyhow::Result<()> {
    let model = DrowsinessModel::load(&args.model)?;
    let vectors = epochs_for_file(&args.features, &args.epochs)?;
    let mut lines = String::from("epoch_end_time,blink_count,label\n");
    for v in &vectors {
        let label = predict(&model, v)?;
        lines.push_str(&format!(
            "{},{},{}\n",
            v.epoch_end_time,
            v.blink_count,
            label.as_str()
        ));
    }
    match &args.out {
        Some(path) => create_writer(path)?.write_all(lines.as_bytes())?,
        None => print!("{lines}"),
    }
    Ok(())
}

fn cmd_drowsy_cv(args: DrowsyCvArgs) -> anyhow::Result<()> {
    let groups = labeled_epochs(&args.features, &args.labels, &args.epochs, args.binary)?;
    let report = cross_validate(&groups, args.folds)?;
    let mut lines = String::from("fold,accuracy\n");
    for (i, acc) in report.fold_accuracy.iter().enumerate() {
        lines.push_str(&format!("{i},{acc}\n"));
    }
    lines.push_str(&format!("mean,{}\n", report.mean_accuracy));
    match &args.out {
        Some(path) => create_writer(path)?.write_all(lines.as_bytes())?,
        None => print!("{lines}"),
    }
    Ok(())
}

fn load_scenario(common: &SynthCommonArgs) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.scenario.seed = seed;
    }
    Ok(cfg)
}

fn cmd_synth_signal(args: SynthSignalArgs) -> anyhow::Result<()> {
    let cfg = load_scenario(&args.common)?;
    let params = cfg.params.for_state(cfg.state);
    let (series, truth) = generate_ela_signal(cfg.state, &cfg.scenario, params)?;
    let samples: Vec<lidkit::geometry::ElaSample> = series
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| lidkit::geometry::ElaSample {
            timestamp: series.time_of(i),
            ela_left: Some(v),
            ela_right: Some(v),
            ela_combined: v,
            yaw: 0.0,
        })
        .collect();
    io::write_ela_csv(&samples, create_writer(&args.out)?)?;
    if let Some(path) = &args.truth_out {
        serde_json::to_writer_pretty(create_writer(path)?, &truth)?;
    }
    if let Some(path) = &args.annotations_out {
        let annotations: Vec<io::AnnotationRecord> = truth
            .annotations
            .iter()
            .map(|a| io::AnnotationRecord {
                start_frame: a.start_frame,
                end_frame: a.end_frame,
                label: "blink".into(),
            })
            .collect();
        io::write_annotations_jsonl(&annotations, create_writer(path)?)?;
    }
    eprintln!(
        "lidkit: {} frames, {} blinks",
        series.len(),
        truth.annotations.len()
    );
    Ok(())
}

fn cmd_synth_landmarks(args: SynthLandmarksArgs) -> anyhow::Result<()> {
    let cfg = load_scenario(&args.common)?;
    let truth_ela: Vec<f64> = match cfg.scenario.set_ela_deg {
        Some(set) => vec![set; cfg.scenario.frame_count()],
        None => {
            let params = cfg.params.for_state(cfg.state);
            let (_, truth) = generate_ela_signal(cfg.state, &cfg.scenario, params)?;
            // Lid articulation is limited to [0, 90] degrees.
            truth.true_ela.iter().map(|v| v.clamp(0.0, 90.0)).collect()
        }
    };
    let (frames, truth) = generate_landmark_sequence(&truth_ela, &cfg.scenario)?;
    let mut w = create_writer(&args.out)?;
    for frame in &frames {
        writeln!(w, "{}", frame_to_jsonl(frame))?;
    }
    if let Some(path) = &args.truth_out {
        serde_json::to_writer_pretty(create_writer(path)?, &truth)?;
    }
    eprintln!("lidkit: {} landmark frames", frames.len());
    Ok(())
}

fn cmd_synth_curve(args: SynthCurveArgs) -> anyhow::Result<()> {
    let cfg = load_scenario(&args.common)?;
    let params = cfg.params.for_state(cfg.state);
    let (series, _) = generate_ela_signal(cfg.state, &cfg.scenario, params)?;
    export_animation_curve(&series, create_writer(&args.out)?)?;
    Ok(())
}

fn cmd_eval_da(args: EvalDaArgs) -> anyhow::Result<()> {
    let blinks = io::read_blinks_jsonl(open_reader(&args.detected)?)?;
    let detected: Vec<FrameWindow> = blinks
        .iter()
        .map(|b| FrameWindow::new(b.i_start, b.i_end))
        .collect();
    let annotations = io::read_annotations_jsonl(open_reader(&args.truth)?)?;
    let truth = io::annotation_windows(&annotations);
    let score = detection_accuracy(&detected, &truth)?;
    let csv = format!(
        "tp,fp,fn,labels_hit,da\n{},{},{},{},{}\n",
        score.tp, score.fp, score.fn_, score.labels_hit, score.da
    );
    match &args.out {
        Some(path) => create_writer(path)?.write_all(csv.as_bytes())?,
        None => print!("{csv}"),
    }
    if args.assert && score.da < args.min_da {
        return Err(AssertFailed(format!(
            "DA {:.1}% below required {:.1}%",
            score.da, args.min_da
        ))
        .into());
    }
    Ok(())
}

fn cmd_eval_sweep(args: EvalSweepArgs) -> anyhow::Result<()> {
    let cfg = ScenarioConfig::from_path(&args.config)?;
    let report = ela_error_sweep(&args.set_elas, &cfg.scenario)?;
    let mut w = create_writer(&args.out)?;
    writeln!(w, "set_ela_deg,pose_bin_deg,mae_deg,mse_deg2,samples")?;
    for c in &report.cells {
        writeln!(
            w,
            "{},{},{},{},{}",
            c.set_ela_deg, c.pose_bin_deg, c.mae_deg, c.mse_deg2, c.samples
        )?;
    }
    writeln!(w, "set_ela_deg,overall_mae_deg,overall_mse_deg2,,")?;
    for r in &report.rows {
        writeln!(w, "{},{},{},,", r.set_ela_deg, r.mae_deg, r.mse_deg2)?;
    }
    drop(w);
    if args.assert {
        for r in &report.rows {
            if r.mae_deg > args.max_mae {
                return Err(AssertFailed(format!(
                    "MAE {:.3} deg at set ELA {} exceeds {:.3}",
                    r.mae_deg, r.set_ela_deg, args.max_mae
                ))
                .into());
            }
        }
    }
    Ok(())
}

fn cmd_eval_variance(args: EvalVarianceArgs) -> anyhow::Result<()> {
    let cfg = ScenarioConfig::from_path(&args.config)?;
    let (var_ela, var_ear) = ear_ela_variance(&cfg.scenario, args.set_ela)?;
    let csv = format!("var_ela,var_ear\n{var_ela},{var_ear}\n");
    match &args.out {
        Some(path) => create_writer(path)?.write_all(csv.as_bytes())?,
        None => print!("{csv}"),
    }
    if args.assert && var_ela >= var_ear {
        return Err(AssertFailed(format!(
            "ELA variance {var_ela} not below EAR variance {var_ear}"
        ))
        .into());
    }
    Ok(())
}

fn cmd_eval_fps(args: EvalFpsArgs) -> anyhow::Result<()> {
    let cfg = ScenarioConfig::from_path(&args.config)?;
    let params = cfg.params.for_state(cfg.state);
    let plan = plan_signal(cfg.state, &cfg.scenario, params)?;
    let opts = AnalysisOptions {
        seed: args.seed,
        ..AnalysisOptions::default()
    };
    let rows = framerate_bias_report(&plan, &args.fps_list, &opts)?;
    let mut w = create_writer(&args.out)?;
    let names = lidkit::drowsiness::FEATURE_NAMES.join(",");
    writeln!(w, "fps,detected_blinks,{names}")?;
    for row in &rows {
        let values: Vec<String> = row.mean_features.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{},{},{}", row.fps, row.detected_blinks, values.join(","))?;
    }
    drop(w);
    if args.assert {
        let d1 = feature_index("closing_d1").expect("known feature");
        let lo = rows
            .iter()
            .min_by(|a, b| a.fps.partial_cmp(&b.fps).unwrap())
            .unwrap();
        let hi = rows
            .iter()
            .max_by(|a, b| a.fps.partial_cmp(&b.fps).unwrap())
            .unwrap();
        if hi.mean_features[d1] >= lo.mean_features[d1] {
            return Err(AssertFailed(format!(
                "closing duration did not decrease: {} s at {} fps vs {} s at {} fps",
                lo.mean_features[d1], lo.fps, hi.mean_features[d1], hi.fps
            ))
            .into());
        }
    }
    Ok(())
}
