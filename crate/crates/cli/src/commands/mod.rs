mod ablate;
mod eval;
mod render;
mod synth;
mod track;

pub use ablate::{cmd_ablate_bt, BT_GRID};
pub use eval::cmd_eval;
pub use render::cmd_render;
pub use synth::{cmd_synth, write_sequence};
pub use track::{cmd_track, resolve_config, Sequence, TrackOutcome};
