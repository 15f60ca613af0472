use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fft_core::config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "fft", version, about = "Flow-and-fuse multi-object tracker")]
pub struct Cli {
    /// Log filter, e.g. `info` or `fft_core=debug`.
    #[arg(long, env = "FFT_LOG", default_value = "warn", global = true)]
    pub log: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track sequences and write MOT-format results.
    Track(TrackArgs),
    /// Evaluate results against ground truth.
    Eval(EvalArgs),
    /// Generate synthetic sequences.
    Synth(SynthArgs),
    /// Track and evaluate with lookback depths 1, 10, 20 and 30.
    AblateBt(AblateArgs),
    /// Draw tracked boxes into one PPM image per frame.
    Render(RenderArgs),
}

/// Which refiner scores proposals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefinerChoice {
    Identity,
    Overlap,
    /// Refined rows from a file, or from `<dir>/<sequence>.txt` when a directory.
    File(PathBuf),
}

impl FromStr for RefinerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(RefinerChoice::Identity),
            "overlap" => Ok(RefinerChoice::Overlap),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(RefinerChoice::File(PathBuf::from(p))),
                _ => Err(format!("expected identity, overlap or file:<path>, got {s:?}")),
            },
        }
    }
}

impl std::fmt::Display for RefinerChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RefinerChoice::Identity => write!(f, "identity"),
            RefinerChoice::Overlap => write!(f, "overlap"),
            RefinerChoice::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Tracker settings shared by `track` and `ablate-bt`.
#[derive(Debug, Clone, Args)]
pub struct TuningArgs {
    /// TOML file with any of the pipeline settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Refined proposals below this score are dropped (default 0.5).
    #[arg(long)]
    pub thresh_score: Option<f64>,
    /// IoU a detection needs to match a tracked target (default 0.5).
    #[arg(long)]
    pub thresh_iou: Option<f64>,
    /// Suppression threshold for both NMS levels (default 0.5).
    #[arg(long)]
    pub thresh_nms: Option<f64>,
    /// Deepest lookback; defaults by frame rate when seqinfo.ini is present, else 30.
    #[arg(long)]
    pub bt_frames: Option<usize>,
    /// identity, overlap or file:<path>.
    #[arg(long, default_value = "overlap")]
    pub refiner: RefinerChoice,
}

impl TuningArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            thresh_score: self.thresh_score,
            thresh_iou: self.thresh_iou,
            thresh_nms: self.thresh_nms,
            bt_frames: self.bt_frames,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrackArgs {
    /// Sequence directories (seqinfo.ini, det/det.txt and flow/ or synth.toml).
    #[arg(required = true)]
    pub sequences: Vec<PathBuf>,
    /// Detection file, overriding <seq>/det/det.txt. Single sequence only.
    #[arg(long)]
    pub det: Option<PathBuf>,
    /// Directory of .flo files, overriding <seq>/flow. Single sequence only.
    #[arg(long)]
    pub flow_dir: Option<PathBuf>,
    /// Output directory for <seq>.txt results and <seq>.log run logs.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Ground truth: a gt file, a sequence directory, or a directory of sequences.
    #[arg(long)]
    pub gt: PathBuf,
    /// Results: a results file or a directory of <seq>.txt files.
    #[arg(long)]
    pub results: PathBuf,
    /// Also write the table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub iou: f64,
    /// Ground-truth rows below this visibility are ignored.
    #[arg(long, default_value_t = 0.0)]
    pub min_visibility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Clean,
    Occlusion,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Built-in suite of five sequences.
    #[arg(long, conflicts_with = "spec")]
    pub suite: Option<Suite>,
    /// A single sequence described by a TOML spec.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Seed for the suite layout, or replacing the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write .flo files for depths 1..=N.
    #[arg(long, default_value_t = 0)]
    pub write_flow: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[arg(required = true)]
    pub sequences: Vec<PathBuf>,
    /// Write the table here; per-setting results go alongside in BT<n>/.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// Results file to draw.
    #[arg(long)]
    pub results: PathBuf,
    /// Sequence directory supplying the frame size and count.
    #[arg(long)]
    pub seq: Option<PathBuf>,
    #[arg(long, requires = "height")]
    pub width: Option<usize>,
    #[arg(long, requires = "width")]
    pub height: Option<usize>,
    /// Number of frames; defaults to the sequence length or the last result frame.
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}
