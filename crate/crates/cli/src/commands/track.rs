use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fft_core::config::Overrides;
use fft_core::flow::FlowSource;
use fft_core::io::{
    detections_by_frame, parse_detections, parse_refined, parse_seqinfo, write_results, FlowDir,
    SeqInfo, SequenceDir,
};
use fft_core::pipeline::{bt_frames_for_fps, run_with_stats, FrameStats, PipelineConfig};
use fft_core::synth::{SynthSpec, SyntheticFlow};
use fft_core::{FileRefiner, IdentityRefiner, OverlapRefiner, Refiner, ScaleMode, TrajectorySet};
use log::{info, warn};

use crate::args::{RefinerChoice, TrackArgs, TuningArgs};
use crate::error::{read_text, write_file, CliError};

/// A sequence directory with whatever descriptions it carries.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub dir: SequenceDir,
    pub info: Option<SeqInfo>,
    pub spec: Option<SynthSpec>,
}

impl Sequence {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        if !path.is_dir() {
            return Err(CliError::Usage(format!("{} is not a sequence directory", path.display())));
        }
        let dir = SequenceDir::new(path);
        let info = match dir.seqinfo() {
            p if p.is_file() => Some(
                parse_seqinfo(&read_text(&p)?).map_err(|source| CliError::Parse { path: p, source })?,
            ),
            _ => None,
        };
        let spec = match dir.synth_spec() {
            p if p.is_file() => Some(SynthSpec::from_toml(&read_text(&p)?)?),
            _ => None,
        };
        Ok(Self {
            name: dir.name(),
            dir,
            info,
            spec,
        })
    }

    pub fn frame_rate(&self) -> Option<f64> {
        self.info
            .as_ref()
            .map(|i| i.frame_rate)
            .or(self.spec.as_ref().map(|s| s.frame_rate))
    }

    pub fn frame_count(&self) -> Option<usize> {
        self.info
            .as_ref()
            .map(|i| i.seq_length)
            .or(self.spec.as_ref().map(|s| s.frames))
    }

    pub fn frame_size(&self) -> Option<(usize, usize)> {
        self.info
            .as_ref()
            .map(|i| (i.width, i.height))
            .or(self.spec.as_ref().map(|s| (s.width, s.height)))
    }
}

/// Command line over config file over frame-rate policy over defaults.
pub fn resolve_config(tuning: &TuningArgs, frame_rate: Option<f64>) -> Result<PipelineConfig, CliError> {
    let file = match &tuning.config {
        Some(p) => Overrides::from_toml(&read_text(p)?)?,
        None => Overrides::default(),
    };
    let mut base = PipelineConfig::default();
    if let Some(fps) = frame_rate {
        base.bt_frames = bt_frames_for_fps(fps);
    }
    Ok(tuning.overrides().over(file).apply(base)?)
}

#[derive(Debug, Clone)]
pub struct TrackOutcome {
    pub name: String,
    pub results: TrajectorySet,
    pub stats: Vec<FrameStats>,
    pub results_path: Option<PathBuf>,
}

struct Inputs<'a> {
    det: Option<&'a Path>,
    flow_dir: Option<&'a Path>,
}

fn build_refiner(
    choice: &RefinerChoice,
    seq: &Sequence,
    dets: &[Vec<fft_core::Detection>],
) -> Result<Box<dyn Refiner>, CliError> {
    Ok(match choice {
        RefinerChoice::Identity => Box::new(IdentityRefiner),
        RefinerChoice::Overlap => {
            let by_frame: BTreeMap<usize, _> = dets.iter().cloned().enumerate().collect();
            Box::new(OverlapRefiner::new(&by_frame))
        }
        RefinerChoice::File(p) => {
            let path = if p.is_dir() {
                p.join(format!("{}.txt", seq.name))
            } else {
                p.clone()
            };
            let rows = parse_refined(&read_text(&path)?)
                .map_err(|source| CliError::Parse { path, source })?;
            Box::new(FileRefiner::new(rows))
        }
    })
}

fn build_flow(seq: &Sequence, flow_dir: Option<&Path>) -> Result<(Box<dyn FlowSource>, String), CliError> {
    if let Some(d) = flow_dir {
        if !d.is_dir() {
            return Err(CliError::MissingFlow(format!(
                "{}: flow directory {} does not exist",
                seq.name,
                d.display()
            )));
        }
        return Ok((Box::new(FlowDir::new(d)), format!("dir:{}", d.display())));
    }
    let own = seq.dir.flow_dir();
    if own.is_dir() {
        return Ok((Box::new(FlowDir::new(&own)), "dir:flow".into()));
    }
    if let Some(spec) = &seq.spec {
        return Ok((Box::new(SyntheticFlow::new(spec)), "synthetic".into()));
    }
    Err(CliError::MissingFlow(format!(
        "{}: no flow/ directory, --flow-dir or synth.toml",
        seq.name
    )))
}

fn run_log(seq: &Sequence, cfg: &PipelineConfig, refiner: &RefinerChoice, flow: &str, stats: &[FrameStats], set: &TrajectorySet) -> String {
    let mut s = String::new();
    let scale = match cfg.motion.scale_mode {
        ScaleMode::None => "none",
        ScaleMode::AffineFit => "affine_fit",
    };
    let _ = writeln!(s, "sequence\t{}", seq.name);
    let _ = writeln!(s, "frames\t{}", stats.len());
    let _ = writeln!(s, "thresh_score\t{}", cfg.fuse.thresh_score);
    let _ = writeln!(s, "thresh_iou\t{}", cfg.fuse.thresh_iou);
    let _ = writeln!(s, "thresh_nms\t{}", cfg.fuse.thresh_nms);
    let _ = writeln!(s, "bt_frames\t{}", cfg.bt_frames);
    let _ = writeln!(s, "inner_margin_ratio\t{}", cfg.motion.inner_margin_ratio);
    let _ = writeln!(s, "min_pixels\t{}", cfg.motion.min_pixels);
    let _ = writeln!(s, "scale_mode\t{scale}");
    let _ = writeln!(s, "refiner\t{refiner}");
    let _ = writeln!(s, "flow\t{flow}");
    let _ = writeln!(s, "trajectories\t{}", set.len());
    let _ = writeln!(s, "frame\tdetections\ttracked\trevived\tminted\ttargets");
    for st in stats {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            st.frame + 1,
            st.detections,
            st.tracked,
            st.revived,
            st.minted,
            set.targets_at(st.frame).len()
        );
    }
    s
}

fn track_one(
    seq: &Sequence,
    tuning: &TuningArgs,
    bt_override: Option<usize>,
    inputs: &Inputs<'_>,
    out: Option<&Path>,
) -> Result<TrackOutcome, CliError> {
    let mut cfg = resolve_config(tuning, seq.frame_rate())?;
    if let Some(bt) = bt_override {
        cfg.bt_frames = bt;
    }

    let det_path = inputs.det.map(Path::to_path_buf).unwrap_or_else(|| seq.dir.detections());
    let map = parse_detections(&read_text(&det_path)?)
        .map_err(|source| CliError::Parse { path: det_path.clone(), source })?;
    let last = map.keys().next_back().map_or(0, |f| f + 1);
    let frames = seq.frame_count().unwrap_or(last);
    if last > frames {
        warn!("{}: detections past frame {frames} are ignored", seq.name);
    }
    let dets = detections_by_frame(&map, frames);

    let refiner = build_refiner(&tuning.refiner, seq, &dets)?;
    let (flows, flow_desc) = if frames > 1 {
        build_flow(seq, inputs.flow_dir)?
    } else {
        (Box::new(FlowDir::new(seq.dir.flow_dir())) as Box<dyn FlowSource>, "none".into())
    };

    let start = Instant::now();
    let (set, stats) = run_with_stats(&dets, flows.as_ref(), refiner.as_ref(), &cfg).map_err(|source| {
        CliError::Pipeline {
            sequence: seq.name.clone(),
            source,
        }
    })?;
    info!(
        "{}: {} frames, {} trajectories in {:.3}s",
        seq.name,
        frames,
        set.len(),
        start.elapsed().as_secs_f64()
    );

    let results_path = match out {
        Some(dir) => {
            let p = dir.join(format!("{}.txt", seq.name));
            write_file(&p, write_results(&set))?;
            let log = run_log(seq, &cfg, &tuning.refiner, &flow_desc, &stats, &set);
            write_file(&dir.join(format!("{}.log", seq.name)), log)?;
            Some(p)
        }
        None => None,
    };
    Ok(TrackOutcome {
        name: seq.name.clone(),
        results: set,
        stats,
        results_path,
    })
}

/// Tracks each sequence on its own thread; outcomes come back in input order.
pub(crate) fn track_sequences(
    seqs: &[Sequence],
    tuning: &TuningArgs,
    bt_override: Option<usize>,
    det: Option<&Path>,
    flow_dir: Option<&Path>,
    out: Option<&Path>,
) -> Result<Vec<TrackOutcome>, CliError> {
    let mut names: Vec<&str> = seqs.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Usage(format!("sequence name {} given twice", w[0])));
    }
    let inputs = Inputs { det, flow_dir };
    std::thread::scope(|scope| {
        let handles: Vec<_> = seqs
            .iter()
            .map(|seq| {
                let inputs = &inputs;
                scope.spawn(move || track_one(seq, tuning, bt_override, inputs, out))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("tracking thread panicked"))
            .collect()
    })
}

pub fn load_sequences(paths: &[PathBuf]) -> Result<Vec<Sequence>, CliError> {
    paths.iter().map(|p| Sequence::load(p)).collect()
}

pub fn cmd_track(args: &TrackArgs) -> Result<Vec<TrackOutcome>, CliError> {
    if args.sequences.len() > 1 && (args.det.is_some() || args.flow_dir.is_some()) {
        return Err(CliError::Usage("--det and --flow-dir take a single sequence".into()));
    }
    let seqs = load_sequences(&args.sequences)?;
    track_sequences(
        &seqs,
        &args.tuning,
        None,
        args.det.as_deref(),
        args.flow_dir.as_deref(),
        Some(&args.out),
    )
}
