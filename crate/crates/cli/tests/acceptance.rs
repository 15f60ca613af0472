//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use fft_cli::args::{Cli, Command};
use fft_cli::commands::{cmd_ablate_bt, cmd_eval, cmd_synth, cmd_track};
use fft_core::flow::{motion_regression_error, pool_motion};
use fft_core::io::{
    parse_detections, parse_ground_truth, parse_results, parse_seqinfo, read_flow, write_flow,
    write_results, GtFilter,
};
use fft_core::metrics::{evaluate, hungarian, EvalConfig, MotCounts, MotReport};
use fft_core::nms::nms;
use fft_core::synth::{jitter_with, JITTER_MAX_RATIO, JITTER_MIN_IOU};
use fft_core::{iou, BBox, FlowField, Motion, MotionEstimatorConfig, ScaleMode, Target, TrackId, TrajectorySet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const RUNTIME_LIMIT_S: f64 = 10.0;
const NMS_CASES: usize = 1000;
const NMS_MAX_BOXES: usize = 50;
const HUNGARIAN_CASES: usize = 500;
const HUNGARIAN_MAX_N: usize = 7;
const HUNGARIAN_TOL: f64 = 1e-9;
const POOL_TOL: f64 = 1e-6;
const REGRESSION_TOL: f64 = 1e-10;
const FUZZ_CASES: usize = 100;
const JITTER_CASES: usize = 10_000;
const BT_GRID: [usize; 4] = [1, 10, 20, 30];

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn(&Path) -> Verdict);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn command(args: &[&str]) -> Command {
    let mut full = vec!["fft"];
    full.extend(args);
    Cli::try_parse_from(full).expect("valid arguments").command
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn sequence_dirs(root: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    v.sort();
    v
}

fn synth(root: &Path, suite: &str) -> Vec<PathBuf> {
    let out = root.join(suite);
    let Command::Synth(a) = command(&["synth", "--suite", suite, "--out", p(&out)]) else { unreachable!() };
    cmd_synth(&a).expect("synth");
    sequence_dirs(&out)
}

/// Exact counts of every `<results>/<seq>.txt` against its sequence ground truth.
fn exact_counts(seqs: &[PathBuf], results: &Path) -> Vec<(String, MotCounts)> {
    seqs.iter()
        .map(|s| {
            let name = s.file_name().unwrap().to_string_lossy().into_owned();
            let gt = parse_ground_truth(&std::fs::read_to_string(s.join("gt/gt.txt")).unwrap(), &GtFilter::default())
                .unwrap();
            let info = parse_seqinfo(&std::fs::read_to_string(s.join("seqinfo.ini")).unwrap()).unwrap();
            let pred = parse_results(&std::fs::read_to_string(results.join(format!("{name}.txt"))).unwrap()).unwrap();
            let cfg = EvalConfig {
                num_frames: Some(info.seq_length),
                ..Default::default()
            };
            (name, evaluate(&gt, &pred, &cfg).unwrap())
        })
        .collect()
}

/// Runs the clean suite end to end under `root`; returns the results directory.
fn run_clean(root: &Path) -> Result<(PathBuf, f64), String> {
    let start = Instant::now();
    let seqs = synth(root, "clean");
    let res = root.join("clean-results");
    let mut args = vec!["track".to_string()];
    args.extend(seqs.iter().map(|s| p(s).to_string()));
    args.extend(["--out".into(), p(&res).into()]);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let Command::Track(t) = command(&args) else { unreachable!() };
    cmd_track(&t).map_err(|e| e.to_string())?;
    let Command::Eval(e) = command(&["eval", "--gt", p(&root.join("clean")), "--results", p(&res)]) else {
        unreachable!()
    };
    let table = cmd_eval(&e).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    check(table.lines().count() == 7, format!("unexpected table:\n{table}"))?;
    for (name, c) in exact_counts(&seqs, &res) {
        let r = MotReport::from_counts(&c);
        check(r.mota == 1.0 && r.idf1 == 1.0, format!("{name}: MOTA {} IDF1 {}", r.mota, r.idf1))?;
    }
    Ok((res, elapsed))
}

fn crit_end_to_end(root: &Path) -> Verdict {
    let (_, elapsed) = run_clean(root)?;
    check(elapsed < RUNTIME_LIMIT_S, format!("runtime {elapsed:.2}s >= {RUNTIME_LIMIT_S}s"))?;
    Ok(format!("5 clean sequences, MOTA = IDF1 = 1 exactly, {elapsed:.2}s"))
}

/// Pooled exact report and table row per lookback depth.
fn ablate(root: &Path, suite: &str) -> Result<Vec<(MotReport, String)>, String> {
    let seqs = synth(root, suite);
    let out = root.join(format!("{suite}-ablation"));
    let mut args = vec!["ablate-bt".to_string()];
    args.extend(seqs.iter().map(|s| p(s).to_string()));
    args.extend(["--out".into(), p(&out).into()]);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let Command::AblateBt(a) = command(&args) else { unreachable!() };
    let table = cmd_ablate_bt(&a).map_err(|e| e.to_string())?;
    let rows: Vec<&str> = table.lines().skip(1).collect();
    check(rows.len() == BT_GRID.len(), format!("unexpected table:\n{table}"))?;
    Ok(BT_GRID
        .iter()
        .zip(rows)
        .map(|(bt, row)| {
            let total: MotCounts = exact_counts(&seqs, &out.join(format!("BT{bt}"))).into_iter().map(|c| c.1).sum();
            (MotReport::from_counts(&total), row.split_once('\t').unwrap().1.to_string())
        })
        .collect())
}

fn crit_bt_trend(root: &Path) -> Verdict {
    let occ = ablate(root, "occlusion")?;
    let (s1, s10, s30) = (occ[0].0.idsw, occ[1].0.idsw, occ[3].0.idsw);
    let (f1, f30) = (occ[0].0.idf1, occ[3].0.idf1);
    check(s1 > s10, format!("IDSW(1) {s1} not above IDSW(10) {s10}"))?;
    check(s10 >= s30, format!("IDSW(10) {s10} below IDSW(30) {s30}"))?;
    check(f1 < f30, format!("IDF1(1) {f1} not below IDF1(30) {f30}"))?;
    let clean = ablate(root, "clean")?;
    check(
        clean.windows(2).all(|w| w[0] == w[1]),
        format!("clean rows differ: {:?}", clean.iter().map(|c| &c.1).collect::<Vec<_>>()),
    )?;
    Ok(format!(
        "IDSW {s1} > {s10} >= {s30}, IDF1 {f1:.4} < {f30:.4}, clean rows identical"
    ))
}

/// Survivors under the fixed-point rule: a box is kept iff no kept box ranked
/// above it overlaps it beyond `thresh`.
fn nms_reference(boxes: &[(BBox, f64)], thresh: f64) -> Vec<usize> {
    let n = boxes.len();
    let above = |j: usize, i: usize| boxes[j].1 > boxes[i].1 || (boxes[j].1 == boxes[i].1 && j < i);
    let mut memo: Vec<Option<bool>> = vec![None; n];
    fn kept(i: usize, b: &[(BBox, f64)], t: f64, memo: &mut [Option<bool>], above: &dyn Fn(usize, usize) -> bool) -> bool {
        if let Some(k) = memo[i] {
            return k;
        }
        let k = (0..b.len()).all(|j| !above(j, i) || iou(&b[i].0, &b[j].0) <= t || !kept(j, b, t, memo, above));
        memo[i] = Some(k);
        k
    }
    (0..n).filter(|&i| kept(i, boxes, thresh, &mut memo, &above)).collect()
}

fn crit_nms(_: &Path) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut kept_total = 0;
    for case in 0..NMS_CASES {
        let n = rng.random_range(0..=NMS_MAX_BOXES);
        let boxes: Vec<(BBox, f64)> = (0..n)
            .map(|_| {
                let b = BBox::new(
                    rng.random_range(0.0..200.0),
                    rng.random_range(0.0..200.0),
                    rng.random_range(1.0..80.0),
                    rng.random_range(1.0..80.0),
                )
                .unwrap();
                (b, rng.random::<f64>())
            })
            .collect();
        let thresh = [0.3, 0.5, 0.7][case % 3];
        let mut got = nms(&boxes, thresh);
        got.sort_unstable();
        let want = nms_reference(&boxes, thresh);
        check(got == want, format!("case {case}: {got:?} != {want:?}"))?;
        kept_total += got.len();
    }
    Ok(format!("{NMS_CASES} sets, {kept_total} survivors, exact set equality"))
}

fn permutation_min(cost: &[Vec<f64>]) -> f64 {
    fn go(i: usize, cost: &[Vec<f64>], used: &mut [bool]) -> f64 {
        if i == cost.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(cost[i][j] + go(i + 1, cost, used));
                used[j] = false;
            }
        }
        best
    }
    go(0, cost, &mut vec![false; cost.len()])
}

fn crit_hungarian(_: &Path) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for case in 0..HUNGARIAN_CASES {
        let n = rng.random_range(1..=HUNGARIAN_MAX_N);
        let integer = case % 2 == 0;
        let m: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if integer {
                            rng.random_range(0..10) as f64
                        } else {
                            rng.random_range(-100.0..100.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let a = hungarian(&m);
        check(a.pairs.len() == n, format!("case {case}: {} pairs for n = {n}", a.pairs.len()))?;
        let recomputed: f64 = a.pairs.iter().map(|&(i, j)| m[i][j]).sum();
        let diff = (a.cost - permutation_min(&m)).abs().max((recomputed - a.cost).abs());
        worst = worst.max(diff);
        check(diff <= HUNGARIAN_TOL, format!("case {case}: off by {diff:e}"))?;
    }
    Ok(format!("{HUNGARIAN_CASES} matrices, worst deviation {worst:e}"))
}

fn track(entries: &[(u64, usize, f64)]) -> TrajectorySet {
    let mut s = TrajectorySet::new();
    for &(id, f, x) in entries {
        let b = BBox::new(x, 0.0, 10.0, 10.0).unwrap();
        s.insert(&Target::new(b, TrackId::new(id).unwrap(), 1.0, f).unwrap()).unwrap();
    }
    s
}

fn report(gt: &TrajectorySet, pred: &TrajectorySet) -> MotReport {
    MotReport::from_counts(&evaluate(gt, pred, &EvalConfig::default()).unwrap())
}

fn crit_micro(_: &Path) -> Verdict {
    // two tracks over five frames; one miss and one spurious box
    let gt: Vec<_> = (0..5).flat_map(|f| [(1, f, 0.0), (2, f, 100.0)]).collect();
    let mut pred: Vec<_> = gt.iter().copied().filter(|&(id, f, _)| !(id == 2 && f == 4)).collect();
    pred.push((9, 2, 300.0));
    let r = report(&track(&gt), &track(&pred));
    check(r.mota == 0.8, format!("10-box case MOTA {}", r.mota))?;

    let gt: Vec<_> = (0..10).map(|f| (1, f, 0.0)).collect();
    let split: Vec<_> = (0..10).map(|f| (if f < 5 { 1 } else { 2 }, f, 0.0)).collect();
    let r = report(&track(&gt), &track(&split));
    check(r.idf1 == 0.5, format!("split case IDF1 {}", r.idf1))?;

    // a single switch from A to B partway through
    let gt: Vec<_> = (0..8).flat_map(|f| [(1, f, 0.0), (2, f, 50.0)]).collect();
    let switch: Vec<_> = (0..8)
        .flat_map(|f| [(if f < 4 { 10 } else { 11 }, f, 0.0), (12, f, 50.0)])
        .collect();
    let r = report(&track(&gt), &track(&switch));
    check(r.idsw == 1, format!("switch case IDSW {}", r.idsw))?;
    check(r.fp + r.fn_ == 0, "switch case has box errors")?;
    Ok("MOTA 0.8, IDF1 0.5, IDSW 1".into())
}

fn crit_pooling(_: &Path) -> Verdict {
    let boxes = [
        BBox::new(20.0, 30.0, 40.0, 20.0).unwrap(),
        BBox::new(5.0, 5.0, 16.0, 48.0).unwrap(),
        BBox::new(61.0, 12.5, 30.0, 30.0).unwrap(),
    ];
    let mut predicted = Vec::new();
    let mut truth = Vec::new();
    let mut worst: f64 = 0.0;
    for b in &boxes {
        let (cx, cy) = b.center();
        let uniform = FlowField::uniform(128, 96, 2.75, -1.25);
        let (sx, sy, tx, ty) = (0.125, -0.0625, 1.5, 0.5);
        let affine = FlowField::from_fn(128, 96, |x, y| (tx + sx * (x - cx), ty + sy * (y - cy)));
        let cases = [
            (&uniform, ScaleMode::None, Motion::translation(2.75, -1.25)),
            (&uniform, ScaleMode::AffineFit, Motion::translation(2.75, -1.25)),
            (&affine, ScaleMode::AffineFit, Motion::new(tx, ty, sx * b.w, sy * b.h)),
        ];
        for (flow, mode, want) in cases {
            let cfg = MotionEstimatorConfig {
                scale_mode: mode,
                ..Default::default()
            };
            let got = pool_motion(flow, b, &cfg).map_err(|e| e.to_string())?;
            let d = [got.dx - want.dx, got.dy - want.dy, got.dw - want.dw, got.dh - want.dh]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            worst = worst.max(d);
            check(d <= POOL_TOL, format!("{mode:?} on {b:?}: {got:?} vs {want:?}"))?;
            predicted.push(got);
            truth.push(want);
        }
    }
    let err = motion_regression_error(&predicted, &truth).map_err(|e| e.to_string())?;
    check(err <= REGRESSION_TOL, format!("regression error {err:e}"))?;
    Ok(format!("{} cases, worst component error {worst:e}, regression error {err:e}", predicted.len()))
}

fn random_field(rng: &mut ChaCha8Rng) -> FlowField {
    let (w, h) = (rng.random_range(1..40), rng.random_range(1..30));
    let u: Vec<f32> = (0..w * h).map(|_| f32::from_bits(rng.random::<u32>() & 0xBF7F_FFFF)).collect();
    let v: Vec<f32> = (0..w * h).map(|_| rng.random_range(-500.0f32..500.0)).collect();
    FlowField::new(w, h, u, v).unwrap()
}

fn random_results(rng: &mut ChaCha8Rng) -> TrajectorySet {
    let mut s = TrajectorySet::new();
    for id in 1..=rng.random_range(1..6u64) {
        for f in 0..rng.random_range(1..20usize) {
            let b = BBox::new(
                rng.random_range(-50.0..600.0),
                rng.random_range(-50.0..400.0),
                rng.random_range(1.0..200.0),
                rng.random_range(1.0..200.0),
            )
            .unwrap();
            s.insert(&Target::new(b, TrackId::new(id).unwrap(), rng.random_range(0.0..=1.0), f).unwrap())
                .unwrap();
        }
    }
    s
}

/// One malformed input of a kind chosen by `k`, and whether its parser rejected it.
fn fuzz_case(k: usize, rng: &mut ChaCha8Rng) -> (&'static str, bool) {
    let field = random_field(rng);
    let flo = write_flow(&field);
    let det_row = |rng: &mut ChaCha8Rng| {
        format!(
            "{},-1,{:.2},{:.2},{:.2},{:.2},{:.3}\n",
            rng.random_range(1..50),
            rng.random_range(0.0..500.0),
            rng.random_range(0.0..500.0),
            rng.random_range(1.0..90.0),
            rng.random_range(1.0..90.0),
            rng.random::<f64>()
        )
    };
    let good: String = (0..rng.random_range(3..10)).map(|_| det_row(rng)).collect();
    let lines: Vec<&str> = good.lines().collect();
    let bad_line = rng.random_range(0..lines.len());
    let with_line = |replacement: String| {
        let mut v: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        v[bad_line] = replacement;
        v.join("\n")
    };
    match k % 8 {
        0 => {
            let cut = rng.random_range(0..flo.len());
            ("truncated flo", read_flow(&flo[..cut]).is_err())
        }
        1 => {
            let mut b = flo.clone();
            let i = rng.random_range(0..4);
            b[i] ^= 1 << rng.random_range(0..8);
            ("flo magic", read_flow(&b).is_err())
        }
        2 => {
            let mut b = flo.clone();
            b.extend((0..rng.random_range(1..9)).map(|_| rng.random::<u8>()));
            ("flo trailing bytes", read_flow(&b).is_err())
        }
        3 => {
            let mut b = flo.clone();
            let w = -rng.random_range(1..1000i32);
            b[4..8].copy_from_slice(&w.to_le_bytes());
            ("flo width", read_flow(&b).is_err())
        }
        4 => {
            let cols: Vec<&str> = lines[bad_line].split(',').collect();
            let keep = rng.random_range(1..6);
            ("short detection row", parse_detections(&with_line(cols[..keep].join(","))).is_err())
        }
        5 => {
            let mut cols: Vec<String> = lines[bad_line].split(',').map(String::from).collect();
            let c = [0, 2, 3, 4, 5, 6][rng.random_range(0..6)];
            let junk: String = std::iter::once('q').chain((0..rng.random_range(0..4)).map(|_| rng.random_range(b'g'..=b'z') as char)).collect();
            cols[c] = junk;
            ("non-numeric detection field", parse_detections(&with_line(cols.join(","))).is_err())
        }
        6 => {
            let text = write_results(&random_results(rng));
            let mut v: Vec<String> = text.lines().map(String::from).collect();
            let i = rng.random_range(0..v.len());
            let mut cols: Vec<String> = v[i].split(',').map(String::from).collect();
            cols[rng.random_range(4..6)] = format!("-{}", rng.random_range(1..30));
            v[i] = cols.join(",");
            ("negative result size", parse_results(&v.join("\n")).is_err())
        }
        _ => {
            let text = "[Sequence]\nname=s\nimDir=img1\nframeRate=30\nseqLength=100\nimWidth=640\nimHeight=480\nimExt=.jpg\n";
            let key = ["frameRate", "seqLength", "imWidth", "imHeight"][rng.random_range(0..4)];
            let broken: String = text
                .lines()
                .map(|l| if l.starts_with(key) { format!("{key}=abc") } else { l.to_string() })
                .collect::<Vec<_>>()
                .join("\n");
            ("seqinfo value", parse_seqinfo(&broken).is_err())
        }
    }
}

fn crit_formats(_: &Path) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let f = random_field(&mut rng);
        let bytes = write_flow(&f);
        let back = read_flow(&bytes).map_err(|e| e.to_string())?;
        let bits = |x: &[f32]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        check(
            back.width() == f.width() && back.height() == f.height() && bits(back.u()) == bits(f.u()) && bits(back.v()) == bits(f.v()),
            "flo round trip differs",
        )?;
        check(write_flow(&back) == bytes, "flo rewrite differs")?;
    }

    for _ in 0..50 {
        let set = random_results(&mut rng);
        let text = write_results(&set);
        let back = parse_results(&text).map_err(|e| e.to_string())?;
        check(write_results(&back) == text, "results rewrite differs")?;
        check(back.len() == set.len(), "trajectory count changed")?;
        for (a, b) in set.iter().zip(back.iter()) {
            check(a.id() == b.id() && a.entries().len() == b.entries().len(), "ids or lengths changed")?;
            for ((fa, ea), (fb, eb)) in a.entries().iter().zip(b.entries()) {
                check(fa == fb, "frame changed")?;
                // x and y are 1-based in the file
                let pairs = [(ea.bbox.x, eb.bbox.x, 1.0), (ea.bbox.y, eb.bbox.y, 1.0), (ea.bbox.w, eb.bbox.w, 0.0), (ea.bbox.h, eb.bbox.h, 0.0)];
                for (x, y, off) in pairs {
                    let on_grid = ((y + off) * 100.0 - ((y + off) * 100.0).round()).abs() < 1e-6;
                    check((x - y).abs() <= 0.005 + 1e-9 && on_grid, format!("{x} read back as {y}"))?;
                }
            }
        }
    }

    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for k in 0..FUZZ_CASES {
        let outcome = catch_unwind(AssertUnwindSafe(|| fuzz_case(k, &mut rng)));
        let (kind, rejected) = outcome.map_err(|_| format!("fuzz case {k} panicked"))?;
        check(rejected, format!("fuzz case {k} ({kind}) was accepted"))?;
        *kinds.entry(kind).or_default() += 1;
    }
    Ok(format!(
        "flo bit-exact x50, results at 2 decimals x50, {FUZZ_CASES} malformed inputs over {} kinds rejected",
        kinds.len()
    ))
}

fn crit_jitter(_: &Path) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tol = 1e-12;
    let (mut min_iou, mut fallbacks) = (1.0f64, 0);
    for i in 0..JITTER_CASES {
        let b = BBox::new(
            rng.random_range(0.0..600.0),
            rng.random_range(0.0..400.0),
            rng.random_range(4.0..200.0),
            rng.random_range(4.0..200.0),
        )
        .unwrap();
        let out = jitter_with(&b, &mut rng);
        fallbacks += out.fell_back as usize;
        let o = iou(&b, &out.bbox);
        min_iou = min_iou.min(o);
        check(o > JITTER_MIN_IOU, format!("jitter {i}: IoU {o}"))?;
        let (cx, cy) = b.center();
        let (jx, jy) = out.bbox.center();
        let r = JITTER_MAX_RATIO;
        for (what, v) in [("width ratio", out.bbox.w / b.w - 1.0), ("height ratio", out.bbox.h / b.h - 1.0)] {
            check(v.abs() <= r + tol, format!("jitter {i}: {what} {}", v + 1.0))?;
        }
        for (what, v) in [("x shift", (jx - cx) / b.w), ("y shift", (jy - cy) / b.h)] {
            check(v.abs() <= r + tol, format!("jitter {i}: {what} {v}"))?;
        }
    }
    Ok(format!("{JITTER_CASES} jitters, min IoU {min_iou:.4}, {fallbacks} fallbacks"))
}

fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn crit_determinism(first: &Path) -> Verdict {
    let second = TempDir::new().map_err(|e| e.to_string())?;
    run_clean(second.path())?;
    ablate(second.path(), "occlusion")?;
    ablate(second.path(), "clean")?;
    let a = files_under(first);
    let b = files_under(second.path());
    check(a.len() == b.len(), format!("{} files vs {}", a.len(), b.len()))?;
    for (k, v) in &a {
        check(b.get(k) == Some(v), format!("{} differs", k.display()))?;
    }
    let results = a.keys().filter(|k| k.extension().is_some_and(|e| e == "txt")).count();
    Ok(format!("{} files identical, {results} of them .txt", a.len()))
}

fn main() {
    let work = TempDir::new().expect("temp dir");
    let criteria: [Criterion; 9] = [
        ("end-to-end clean suite", crit_end_to_end),
        ("lookback ablation trend", crit_bt_trend),
        ("nms oracle", crit_nms),
        ("hungarian optimality", crit_hungarian),
        ("metric micro-cases", crit_micro),
        ("flow pooling exactness", crit_pooling),
        ("format fidelity", crit_formats),
        ("jitter contract", crit_jitter),
        ("determinism", crit_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(|| f(work.path())))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
