use fft_core::io::GtFilter;
use fft_core::metrics::{format_table, EvalConfig, MotCounts, MotReport};

use super::eval::{load_gt, score};
use super::track::{load_sequences, track_sequences};
use crate::args::AblateArgs;
use crate::error::{write_file, CliError};

pub const BT_GRID: [usize; 4] = [1, 10, 20, 30];

/// One row per lookback depth, each aggregated over all sequences.
pub fn cmd_ablate_bt(args: &AblateArgs) -> Result<String, CliError> {
    let seqs = load_sequences(&args.sequences)?;
    let filter = GtFilter::default();
    let gts = seqs
        .iter()
        .map(|s| load_gt(&s.dir.ground_truth(), &filter))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for bt in BT_GRID {
        let out = args.out.as_ref().map(|o| o.join(format!("BT{bt}")));
        let tracked = track_sequences(&seqs, &args.tuning, Some(bt), None, None, out.as_deref())?;
        let mut total = MotCounts::default();
        for ((seq, gt), t) in seqs.iter().zip(&gts).zip(&tracked) {
            let cfg = EvalConfig {
                num_frames: seq.frame_count(),
                ..Default::default()
            };
            total = total + score(&seq.name, gt, &t.results, &cfg)?;
        }
        rows.push((format!("BT{bt}"), MotReport::from_counts(&total)));
    }
    let table = format_table(&rows);
    if let Some(o) = &args.out {
        write_file(&o.join("ablation.tsv"), &table)?;
    }
    Ok(table)
}
