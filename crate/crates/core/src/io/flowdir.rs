//! Precomputed flow files on disk.

use std::borrow::Cow;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use super::read_flow;
use crate::flow::{FlowField, FlowLoadError, FlowSource};

/// File name of the field from 0-based frame `to - depth` to `to`,
/// written with 1-based frame numbers: `<to>_<from>.flo`.
pub fn flow_file_name(to: usize, depth: usize) -> String {
    format!("{}_{}.flo", to + 1, to + 1 - depth)
}

/// Loads fields lazily from a directory laid out by [`flow_file_name`].
/// A missing file means the field is absent.
#[derive(Debug, Clone)]
pub struct FlowDir {
    dir: PathBuf,
}

impl FlowDir {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn file(&self, to: usize, depth: usize) -> PathBuf {
        self.dir.join(flow_file_name(to, depth))
    }
}

impl FlowSource for FlowDir {
    fn flow(&self, to: usize, depth: usize) -> Result<Option<Cow<'_, FlowField>>, FlowLoadError> {
        if depth == 0 || depth > to {
            return Ok(None);
        }
        let load_err = |e: Box<dyn std::error::Error + Send + Sync>| FlowLoadError {
            from: to - depth,
            to,
            source: e,
        };
        match std::fs::read(self.file(to, depth)) {
            Ok(bytes) => read_flow(&bytes)
                .map(|f| Some(Cow::Owned(f)))
                .map_err(|e| load_err(Box::new(e))),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(load_err(Box::new(e))),
        }
    }
}
