//! MOTChallenge text formats, Middlebury flow files and sequence layout.
//!
//! Files are 1-based in frames and pixel coordinates; everything in memory is
//! 0-based. The conversion happens here and nowhere else.

mod flo;
mod flowdir;
mod mot;
mod seqinfo;

pub use flo::{read_flow, write_flow, FlowFileError, FLO_MAGIC};
pub use flowdir::{flow_file_name, FlowDir};
pub use mot::{
    detections_by_frame, format_coord, parse_detections, parse_ground_truth, parse_refined,
    parse_results, write_detections, write_ground_truth, write_results, GtFilter, ParseError,
};
pub use seqinfo::{parse_seqinfo, write_seqinfo, SeqInfo};

use std::path::{Path, PathBuf};

/// Standard file locations inside a sequence directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDir {
    pub root: PathBuf,
}

impl SequenceDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// Directory name, used as the sequence name.
    pub fn name(&self) -> String {
        self.root
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.root.display().to_string())
    }

    pub fn seqinfo(&self) -> PathBuf {
        self.root.join("seqinfo.ini")
    }

    pub fn detections(&self) -> PathBuf {
        self.root.join("det").join("det.txt")
    }

    pub fn ground_truth(&self) -> PathBuf {
        self.root.join("gt").join("gt.txt")
    }

    pub fn flow_dir(&self) -> PathBuf {
        self.root.join("flow")
    }

    pub fn synth_spec(&self) -> PathBuf {
        self.root.join("synth.toml")
    }

    pub fn path(&self) -> &Path {
        &self.root
    }
}
