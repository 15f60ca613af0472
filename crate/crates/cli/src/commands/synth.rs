use std::path::PathBuf;

use fft_core::io::{
    flow_file_name, write_detections, write_flow, write_ground_truth, write_seqinfo, SeqInfo,
    SequenceDir,
};
use fft_core::synth::{clean_suite, generate, occlusion_suite, SynthSpec};

use crate::args::{Suite, SynthArgs};
use crate::error::{read_text, write_file, CliError};

/// Writes one sequence directory in the on-disk MOT layout.
pub fn write_sequence(root: &std::path::Path, name: &str, spec: &SynthSpec, flow_depth: usize) -> Result<PathBuf, CliError> {
    let s = generate(spec)?;
    let dir = SequenceDir::new(root.join(name));
    let info = SeqInfo {
        name: name.to_string(),
        width: spec.width,
        height: spec.height,
        frame_rate: spec.frame_rate,
        seq_length: spec.frames,
    };
    write_file(&dir.seqinfo(), write_seqinfo(&info))?;
    write_file(&dir.detections(), write_detections(&s.detections))?;
    write_file(&dir.ground_truth(), write_ground_truth(&s.gt))?;
    write_file(&dir.synth_spec(), spec.to_toml())?;
    for t in 1..spec.frames {
        for d in 1..=flow_depth.min(t) {
            let p = dir.flow_dir().join(flow_file_name(t, d));
            write_file(&p, write_flow(&s.flow.field(t, d)))?;
        }
    }
    Ok(dir.root)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<Vec<PathBuf>, CliError> {
    let specs: Vec<(String, SynthSpec)> = match (&args.spec, args.suite) {
        (Some(path), _) => {
            let mut spec = SynthSpec::from_toml(&read_text(path)?)?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "synth".into());
            vec![(name, spec)]
        }
        (None, Some(Suite::Clean)) => clean_suite(args.seed.unwrap_or(1)),
        (None, Some(Suite::Occlusion)) => occlusion_suite(args.seed.unwrap_or(1)),
        (None, None) => return Err(CliError::Usage("give --suite or --spec".into())),
    };
    specs
        .iter()
        .map(|(name, spec)| write_sequence(&args.out, name, spec, args.write_flow))
        .collect()
}
