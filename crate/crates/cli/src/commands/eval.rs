use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use fft_core::io::{parse_ground_truth, parse_results, parse_seqinfo, GtFilter, SequenceDir};
use fft_core::metrics::{evaluate, format_table, EvalConfig, MotCounts, MotReport};
use fft_core::TrajectorySet;

use crate::args::EvalArgs;
use crate::error::{read_text, write_file, CliError};

/// One sequence to score.
#[derive(Debug, Clone)]
struct Pair {
    name: String,
    gt: PathBuf,
    seqinfo: Option<PathBuf>,
    results: PathBuf,
}

fn txt_stems(dir: &Path) -> Result<BTreeSet<String>, CliError> {
    let mut out = BTreeSet::new();
    for e in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let p = e.map_err(|e| CliError::io(dir, e))?.path();
        if p.is_file() && p.extension().is_some_and(|x| x == "txt") {
            if let Some(s) = p.file_stem() {
                out.insert(s.to_string_lossy().into_owned());
            }
        }
    }
    Ok(out)
}

fn seqinfo_of(dir: &SequenceDir) -> Option<PathBuf> {
    Some(dir.seqinfo()).filter(|p| p.is_file())
}

fn pairs(gt: &Path, results: &Path) -> Result<Vec<Pair>, CliError> {
    let missing = |p: &Path| CliError::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"));
    if !gt.exists() {
        return Err(missing(gt));
    }
    if !results.exists() {
        return Err(missing(results));
    }

    if gt.is_file() {
        if !results.is_file() {
            return Err(CliError::Usage("a ground-truth file needs a results file".into()));
        }
        let name = results
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        return Ok(vec![Pair {
            name,
            gt: gt.to_path_buf(),
            seqinfo: None,
            results: results.to_path_buf(),
        }]);
    }

    let single = SequenceDir::new(gt);
    let seq_dirs: Vec<SequenceDir> = if single.ground_truth().is_file() {
        vec![single]
    } else {
        let mut v = Vec::new();
        for e in std::fs::read_dir(gt).map_err(|e| CliError::io(gt, e))? {
            let d = SequenceDir::new(e.map_err(|e| CliError::io(gt, e))?.path());
            if d.ground_truth().is_file() {
                v.push(d);
            }
        }
        v.sort_by_key(SequenceDir::name);
        v
    };
    if seq_dirs.is_empty() {
        return Err(CliError::Usage(format!("no gt/gt.txt found under {}", gt.display())));
    }

    if results.is_file() {
        if seq_dirs.len() != 1 {
            return Err(CliError::Usage("several sequences need a results directory".into()));
        }
        let d = &seq_dirs[0];
        return Ok(vec![Pair {
            name: d.name(),
            gt: d.ground_truth(),
            seqinfo: seqinfo_of(d),
            results: results.to_path_buf(),
        }]);
    }

    let have = txt_stems(results)?;
    let want: BTreeSet<String> = seq_dirs.iter().map(SequenceDir::name).collect();
    // a single sequence may be checked against a directory holding other results too
    let ok = if want.len() == 1 { want.is_subset(&have) } else { want == have };
    if !ok {
        let only_gt: Vec<&String> = want.difference(&have).collect();
        let only_res: Vec<&String> = have.difference(&want).collect();
        return Err(CliError::SequenceMismatch(format!(
            "ground truth only {only_gt:?}, results only {only_res:?}"
        )));
    }
    Ok(seq_dirs
        .iter()
        .map(|d| Pair {
            name: d.name(),
            gt: d.ground_truth(),
            seqinfo: seqinfo_of(d),
            results: results.join(format!("{}.txt", d.name())),
        })
        .collect())
}

pub(crate) fn load_gt(path: &Path, filter: &GtFilter) -> Result<TrajectorySet, CliError> {
    parse_ground_truth(&read_text(path)?, filter).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn score(
    name: &str,
    gt: &TrajectorySet,
    pred: &TrajectorySet,
    cfg: &EvalConfig,
) -> Result<MotCounts, CliError> {
    evaluate(gt, pred, cfg).map_err(|source| CliError::Metrics {
        sequence: name.to_string(),
        source,
    })
}

/// Table with one row per sequence, plus an `OVERALL` row when there are several.
pub(crate) fn table(rows: &[(String, MotCounts)]) -> String {
    let mut out: Vec<(String, MotReport)> = rows
        .iter()
        .map(|(n, c)| (n.clone(), MotReport::from_counts(c)))
        .collect();
    if rows.len() > 1 {
        let total: MotCounts = rows.iter().map(|r| r.1).sum();
        out.push(("OVERALL".into(), MotReport::from_counts(&total)));
    }
    format_table(&out)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<String, CliError> {
    if !(0.0..=1.0).contains(&args.iou) {
        return Err(CliError::Usage("--iou must be in [0, 1]".into()));
    }
    let filter = GtFilter {
        min_visibility: args.min_visibility,
        ..Default::default()
    };
    let mut rows = Vec::new();
    for p in pairs(&args.gt, &args.results)? {
        let gt = load_gt(&p.gt, &filter)?;
        let pred = parse_results(&read_text(&p.results)?).map_err(|source| CliError::Parse {
            path: p.results.clone(),
            source,
        })?;
        let num_frames = match &p.seqinfo {
            Some(path) => Some(
                parse_seqinfo(&read_text(path)?)
                    .map_err(|source| CliError::Parse { path: path.clone(), source })?
                    .seq_length,
            ),
            None => None,
        };
        let cfg = EvalConfig {
            iou_thresh: args.iou,
            num_frames,
        };
        rows.push((p.name.clone(), score(&p.name, &gt, &pred, &cfg)?));
    }
    let t = table(&rows);
    if let Some(out) = &args.out {
        write_file(out, &t)?;
    }
    Ok(t)
}
