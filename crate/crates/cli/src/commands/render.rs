use fft_core::io::parse_results;
use fft_core::render::render_frame;

use super::track::Sequence;
use crate::args::RenderArgs;
use crate::error::{read_text, write_file, CliError};

/// Writes `<out>/000001.ppm` onward; returns the number of frames drawn.
pub fn cmd_render(args: &RenderArgs) -> Result<usize, CliError> {
    let set = parse_results(&read_text(&args.results)?).map_err(|source| CliError::Parse {
        path: args.results.clone(),
        source,
    })?;
    let seq = args.seq.as_deref().map(Sequence::load).transpose()?;
    let size = match (args.width, args.height) {
        (Some(w), Some(h)) => Some((w, h)),
        _ => seq.as_ref().and_then(Sequence::frame_size),
    };
    let Some((w, h)) = size else {
        return Err(CliError::Usage("frame size unknown: give --width/--height or --seq".into()));
    };
    let frames = args
        .frames
        .or(seq.as_ref().and_then(Sequence::frame_count))
        .unwrap_or_else(|| set.frame_range().map_or(0, |(_, hi)| hi + 1));
    for f in 0..frames {
        let canvas = render_frame(w, h, &set.targets_at(f));
        write_file(&args.out.join(format!("{:06}.ppm", f + 1)), canvas.to_ppm())?;
    }
    Ok(frames)
}
