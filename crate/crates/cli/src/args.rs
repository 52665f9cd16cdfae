use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "oiqa", version, about = "Omnidirectional image quality toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply lens-local distortions listed in a manifest.
    #[command(args_override_self = true)]
    Distort(DistortArgs),
    /// Render equatorial viewports of ERP images.
    #[command(args_override_self = true)]
    Viewports(ViewportArgs),
    /// Full-reference spherical metrics.
    #[command(args_override_self = true)]
    Metrics(MetricsArgs),
    /// Screen raters and compute mean opinion scores.
    #[command(args_override_self = true)]
    Mos(MosArgs),
    /// Spatial information and colorfulness per image.
    #[command(args_override_self = true)]
    Diversity(DiversityArgs),
    /// Score images with the viewport-attention model.
    #[command(name = "oiqand-forward", args_override_self = true)]
    OiqandForward(ForwardArgs),
    /// PLCC/SRCC/RMSE after logistic mapping, grouped by distortion kind.
    #[command(args_override_self = true)]
    Evaluate(EvaluateArgs),
    /// distort, viewports, oiqand-forward and evaluate in one run.
    #[command(args_override_self = true)]
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat `key = value` file; keys are flag names without dashes.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DistortionOpts {
    /// Blend width at sector boundaries, degrees.
    #[arg(long, default_value_t = oiqa_core::distortion::DEFAULT_FEATHER_DEG)]
    pub feather: f64,
    /// Noise sigma per level, comma separated.
    #[arg(long)]
    pub gn_sigma: Option<String>,
    /// Blur sigma per level in pixels at 1024 width.
    #[arg(long)]
    pub gb_sigma: Option<String>,
    /// Brightness gain per level.
    #[arg(long)]
    pub bd_gain: Option<String>,
    /// Stitching strength per level.
    #[arg(long)]
    pub st_strength: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ViewportOpts {
    /// Viewports per image.
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    /// Field of view, degrees.
    #[arg(long, default_value_t = 90.0)]
    pub fov: f64,
    /// Square viewport side in pixels.
    #[arg(long, default_value_t = 224)]
    pub size: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CamAxisArg {
    Row,
    Column,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UpsampleArg {
    Bilinear,
    Nearest,
}

#[derive(Debug, Clone, Args)]
pub struct ModelOpts {
    /// Weights container; freshly initialized from --seed when absent.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Seed for weight initialization and the feature backbone.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = CamAxisArg::Row)]
    pub cam_axis: CamAxisArg,
    #[arg(long, value_enum, default_value_t = UpsampleArg::Bilinear)]
    pub upsample: UpsampleArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FitArg {
    PerGroup,
    Global,
}

#[derive(Debug, Clone, Args)]
pub struct EvalOpts {
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    /// Fraction of each distortion kind held out for training; 0 scores everything.
    #[arg(long, default_value_t = 0.8)]
    pub train_frac: f64,
    #[arg(long, value_enum, default_value_t = FitArg::PerGroup)]
    pub fit: FitArg,
    /// Replacement for infinite scores.
    #[arg(long, default_value_t = oiqa_core::metrics::DEFAULT_PSNR_CAP)]
    pub cap: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DistortArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with src_path, kind, level, lenses, seed.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub distortion: DistortionOpts,
}

#[derive(Debug, Clone, Args)]
pub struct ViewportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Single ERP image.
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    pub erp: Option<PathBuf>,
    /// Echo manifest from `distort`; one sub-directory per image_id.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub viewport: ViewportOpts,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Echo manifest; each out_path is scored against its src_path.
    #[arg(long, conflicts_with = "distorted")]
    pub manifest: Option<PathBuf>,
    /// Reference image, or a directory holding the manifest's sources by file name.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    /// Distorted image, or an echo manifest (`.csv`).
    #[arg(long = "dist")]
    pub distorted: Option<PathBuf>,
    /// CSV output for manifest mode.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sphere sample count for s_psnr.
    #[arg(long, default_value_t = oiqa_core::metrics::DEFAULT_POINT_COUNT)]
    pub points: usize,
    /// Restrict to these metrics (repeatable).
    #[arg(long = "metric")]
    pub metrics: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScreenArg {
    PerSubject,
    PerImage,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MergeArg {
    Pool,
    Replace,
}

#[derive(Debug, Clone, Args)]
pub struct MosArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with subject_id, image_id, score.
    #[arg(long)]
    pub ratings: PathBuf,
    /// Second-stage ratings.
    #[arg(long)]
    pub stage2: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MergeArg::Pool)]
    pub merge: MergeArg,
    /// CSV with image_id, kind, level, lenses.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScreenArg::PerSubject)]
    pub screening: ScreenArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-subject screening counts.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Grouped MOS statistics.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DiversityArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory of PNG images.
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    pub images: Option<PathBuf>,
    /// Echo manifest; scores out_path of every row.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ForwardArgs {
    #[command(flatten)]
    pub common: Common,
    /// Single ERP image; q is printed.
    #[arg(long, conflicts_with_all = ["manifest", "viewports"])]
    pub erp: Option<PathBuf>,
    /// Echo manifest; predictions go to --out.
    #[arg(long, conflicts_with = "viewports")]
    pub manifest: Option<PathBuf>,
    /// Directory written by `viewports --erp`.
    #[arg(long)]
    pub viewports: Option<PathBuf>,
    /// Externally computed features (tensors f1..f4) instead of the built-in backbone.
    #[arg(long, conflicts_with = "manifest")]
    pub features: Option<PathBuf>,
    #[arg(long, requires = "manifest")]
    pub out: Option<PathBuf>,
    /// Per-stage tensor summaries as JSON.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Write the weights used.
    #[arg(long)]
    pub save_weights: Option<PathBuf>,
    #[command(flatten)]
    pub viewport: ViewportOpts,
    #[command(flatten)]
    pub model: ModelOpts,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with image_id and a score column.
    #[arg(long)]
    pub pred: PathBuf,
    /// Score column in --pred.
    #[arg(long, default_value = "score")]
    pub column: String,
    /// MOS CSV as written by `mos`.
    #[arg(long)]
    pub mos: PathBuf,
    /// Metadata overriding the MOS file's kind/level/lenses.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Report CSV (one row).
    #[arg(long)]
    pub out: PathBuf,
    /// Fitted parameters and per-group details as JSON.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Row label in the report.
    #[arg(long, default_value = "model")]
    pub method: String,
    #[command(flatten)]
    pub eval: EvalOpts,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: Common,
    /// Distortion manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// MOS per output image_id.
    #[arg(long)]
    pub mos: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub distortion: DistortionOpts,
    #[command(flatten)]
    pub viewport: ViewportOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    #[command(flatten)]
    pub eval: EvalOpts,
}
