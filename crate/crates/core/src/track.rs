//! Detections, identified targets and the trajectory store.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geometry::BBox;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("trajectory id must be >= 1")]
    ZeroId,
    #[error("trajectory {id} already has an entry at frame {frame}")]
    DuplicateEntry { id: TrackId, frame: usize },
    #[error("unknown trajectory {0}")]
    UnknownId(TrackId),
}

/// Positive trajectory identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackId(u64);

impl TrackId {
    pub fn new(id: u64) -> Result<Self, TrackError> {
        if id == 0 {
            Err(TrackError::ZeroId)
        } else {
            Ok(Self(id))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn check_score(score: f64) -> Result<f64, TrackError> {
    if (0.0..=1.0).contains(&score) {
        Ok(score)
    } else {
        Err(TrackError::ScoreOutOfRange(score))
    }
}

/// A box with a confidence score and no identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub score: f64,
}

impl Detection {
    pub fn new(bbox: BBox, score: f64) -> Result<Self, TrackError> {
        Ok(Self {
            bbox,
            score: check_score(score)?,
        })
    }
}

/// A box carrying a trajectory identity at a given frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub bbox: BBox,
    pub id: TrackId,
    pub score: f64,
    pub frame: usize,
}

impl Target {
    pub fn new(bbox: BBox, id: TrackId, score: f64, frame: usize) -> Result<Self, TrackError> {
        Ok(Self {
            bbox,
            id,
            score: check_score(score)?,
            frame,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub bbox: BBox,
    pub score: f64,
}

/// Time-indexed boxes sharing one identity. Frames may have gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: TrackId,
    entries: BTreeMap<usize, Entry>,
}

impl Trajectory {
    pub fn new(id: TrackId) -> Self {
        Self {
            id,
            entries: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> TrackId {
        self.id
    }

    pub fn entries(&self) -> &BTreeMap<usize, Entry> {
        &self.entries
    }

    pub fn get(&self, frame: usize) -> Option<&Entry> {
        self.entries.get(&frame)
    }

    pub fn first_frame(&self) -> Option<usize> {
        self.entries.keys().next().copied()
    }

    pub fn last_frame(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn target_at(&self, frame: usize) -> Option<Target> {
        self.entries.get(&frame).map(|e| Target {
            bbox: e.bbox,
            id: self.id,
            score: e.score,
            frame,
        })
    }

    fn insert(&mut self, frame: usize, entry: Entry) -> Result<(), TrackError> {
        if self.entries.contains_key(&frame) {
            return Err(TrackError::DuplicateEntry { id: self.id, frame });
        }
        self.entries.insert(frame, entry);
        Ok(())
    }
}

/// All trajectories of a sequence, keyed by id, plus the next id to issue.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    tracks: BTreeMap<TrackId, Trajectory>,
    next_id: u64,
}

impl Default for TrajectorySet {
    fn default() -> Self {
        Self::new()
    }
}

impl TrajectorySet {
    pub fn new() -> Self {
        Self {
            tracks: BTreeMap::new(),
            next_id: 1,
        }
    }

    pub fn next_id(&self) -> TrackId {
        TrackId(self.next_id)
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn get(&self, id: TrackId) -> Option<&Trajectory> {
        self.tracks.get(&id)
    }

    /// Trajectories in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &Trajectory> {
        self.tracks.values()
    }

    /// Starts a new trajectory at `frame` under a freshly issued id.
    pub fn mint(&mut self, frame: usize, bbox: BBox, score: f64) -> Result<TrackId, TrackError> {
        check_score(score)?;
        let id = TrackId(self.next_id);
        self.next_id += 1;
        let mut traj = Trajectory::new(id);
        traj.insert(frame, Entry { bbox, score })?;
        self.tracks.insert(id, traj);
        Ok(id)
    }

    /// Appends to an existing trajectory.
    pub fn push(&mut self, target: &Target) -> Result<(), TrackError> {
        check_score(target.score)?;
        let traj = self
            .tracks
            .get_mut(&target.id)
            .ok_or(TrackError::UnknownId(target.id))?;
        traj.insert(
            target.frame,
            Entry {
                bbox: target.bbox,
                score: target.score,
            },
        )
    }

    /// Inserts an entry under an externally chosen id (ground truth, parsed
    /// results), creating the trajectory if needed and advancing `next_id`.
    pub fn insert(&mut self, target: &Target) -> Result<(), TrackError> {
        check_score(target.score)?;
        let id = target.id;
        self.next_id = self.next_id.max(id.0 + 1);
        self.tracks
            .entry(id)
            .or_insert_with(|| Trajectory::new(id))
            .insert(
                target.frame,
                Entry {
                    bbox: target.bbox,
                    score: target.score,
                },
            )
    }

    /// Targets present at `frame`, ascending by id.
    pub fn targets_at(&self, frame: usize) -> Vec<Target> {
        self.tracks
            .values()
            .filter_map(|t| t.target_at(frame))
            .collect()
    }

    /// Smallest and largest frame index over all entries.
    pub fn frame_range(&self) -> Option<(usize, usize)> {
        let lo = self.tracks.values().filter_map(Trajectory::first_frame).min()?;
        let hi = self.tracks.values().filter_map(Trajectory::last_frame).max()?;
        Some((lo, hi))
    }

    pub fn total_entries(&self) -> usize {
        self.tracks.values().map(Trajectory::len).sum()
    }
}
