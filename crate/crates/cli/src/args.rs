use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "gazekde", version, about = "Gaze-trace ROI labelling pipeline")]
pub struct Cli {
    /// JSON config file. Top-level keys are subcommand names, each holding
    /// flag values by their long name with `_` for `-`.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Print the effective settings of the subcommand as JSON and exit.
    #[arg(long, global = true)]
    pub show_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic scenes and gaze sessions.
    Simulate(SimulateArgs),
    /// Project a gaze session into slide coordinates.
    Ingest(IngestArgs),
    /// Density-estimate a session into an ROI mask.
    Kde(KdeArgs),
    /// Convert a mask into bounding-box labels.
    Boxes(BoxesArgs),
    /// Split slide labels into fixed-size tiles.
    Tile(TileArgs),
    /// Score detections against ground truth over overlap thresholds.
    Eval(EvalArgs),
    /// Mean mask IOU over a grid of kernel sizes and scaling factors.
    Sweep(SweepArgs),
    /// Time-per-label report from annotation timings.
    Timing(TimingArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Ingest(_) => "ingest",
            Command::Kde(_) => "kde",
            Command::Boxes(_) => "boxes",
            Command::Tile(_) => "tile",
            Command::Eval(_) => "eval",
            Command::Sweep(_) => "sweep",
            Command::Timing(_) => "timing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Scene geometry and ROI placement.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SceneFlags {
    /// ROIs per scene.
    #[arg(long, default_value_t = 5)]
    pub rois: usize,
    /// Smallest ROI semi-axis in slide px.
    #[arg(long, default_value_t = 200.0)]
    pub radius_min: f64,
    /// Largest ROI semi-axis in slide px.
    #[arg(long, default_value_t = 600.0)]
    pub radius_max: f64,
    #[arg(long, default_value_t = 40_000)]
    pub slide_width: u32,
    #[arg(long, default_value_t = 40_000)]
    pub slide_height: u32,
    /// Microns per pixel at level 0.
    #[arg(long, default_value_t = 0.4952)]
    pub mpp: f64,
    #[arg(long, default_value_t = 1920)]
    pub screen_width: u32,
    #[arg(long, default_value_t = 1080)]
    pub screen_height: u32,
    /// Slide px per grid cell.
    #[arg(long, default_value_t = 16)]
    pub downsample: u32,
}

/// Gaze behaviour of the simulated annotator.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GazeFlags {
    #[arg(long, default_value_t = 60.0)]
    pub sample_rate: f64,
    /// Shortest dwell on an ROI in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub dwell_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub dwell_max: f64,
    /// Gaze scatter std-dev as a fraction of the ROI radius.
    #[arg(long, default_value_t = 0.35)]
    pub jitter: f64,
    /// Samples on the line between consecutive fixations.
    #[arg(long, default_value_t = 5)]
    pub saccade_samples: usize,
    /// Off-ROI fixation bursts per session.
    #[arg(long, default_value_t = 2)]
    pub distractors: usize,
    #[arg(long, default_value_t = 0.5)]
    pub distractor_dwell: f64,
    /// Pan and zoom to each fixation, recording screen coordinates.
    #[arg(long)]
    pub pan_zoom: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Scene i is generated from seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of scenes.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub scene: SceneFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub gaze: GazeFlags,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    /// JSON-Lines gaze session (required).
    #[arg(long)]
    pub session: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KdeArgs {
    /// JSON-Lines gaze session (required).
    #[arg(long)]
    pub session: Option<PathBuf>,
    /// Kernel sizes in slide px; the masks of all sizes are merged.
    #[arg(long, value_delimiter = ',', default_value = "400")]
    pub sigma: Vec<f64>,
    /// Threshold scaling factor.
    #[arg(long, default_value_t = 5.0)]
    pub n: f64,
    #[arg(long, default_value_t = 16)]
    pub downsample: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoxesArgs {
    /// PGM mask with its `.json` grid sidecar (required).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Drop components whose box is smaller than this many slide px²
    /// [default: one grid cell].
    #[arg(long)]
    pub min_area: Option<i64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TileArgs {
    /// Slide label file, normalised to the slide size (required).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 40_000)]
    pub slide_width: u32,
    #[arg(long, default_value_t = 40_000)]
    pub slide_height: u32,
    #[arg(long, default_value_t = 4000)]
    pub tile_size: u32,
    #[arg(long, default_value_t = 0)]
    pub overlap: u32,
    /// Dataset curation: only emit tiles holding at least one label.
    #[arg(long)]
    pub only_with_labels: bool,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Ground-truth label file, or a directory of one `.txt` per image (required).
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Detection file or directory, laid out like `--gt`, with a confidence
    /// column (required).
    #[arg(long)]
    pub detections: Option<PathBuf>,
    #[arg(long, default_value_t = 4000)]
    pub image_width: u32,
    #[arg(long, default_value_t = 4000)]
    pub image_height: u32,
    /// Overlap thresholds: `start:stop:step` or a comma list.
    #[arg(long, default_value = "0.10:0.95:0.05")]
    pub ot: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Directory of `simulate` output. Without it, scenes are generated from
    /// `--seed` and the scene and gaze flags.
    #[arg(long)]
    pub scenes: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of generated scenes.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub scene: SceneFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub gaze: GazeFlags,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
    pub sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,7,9")]
    pub n: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TimingArgs {
    /// CSV with header `annotator,method,total_seconds,label_count` (required).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}
