//! `seqinfo.ini` sequence descriptions.

use std::fmt::Write as _;

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub struct SeqInfo {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub frame_rate: f64,
    pub seq_length: usize,
}

/// Reads the `[Sequence]` section. Keys are case-insensitive; unknown keys
/// and other sections are ignored.
pub fn parse_seqinfo(text: &str) -> Result<SeqInfo, ParseError> {
    let mut in_seq = false;
    let (mut name, mut width, mut height, mut rate, mut len) = (None, None, None, None, None);
    let bad = |line: usize, reason: String| ParseError { line, reason };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with(';') || l.starts_with('#') {
            continue;
        }
        if l.starts_with('[') {
            in_seq = l.eq_ignore_ascii_case("[sequence]");
            continue;
        }
        if !in_seq {
            continue;
        }
        let Some((k, v)) = l.split_once('=') else {
            return Err(bad(line, format!("expected key=value, found {l:?}")));
        };
        let (k, v) = (k.trim().to_ascii_lowercase(), v.trim());
        let positive = |v: &str| -> Result<usize, ParseError> {
            match v.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(bad(line, format!("{k} must be a positive integer, found {v:?}"))),
            }
        };
        match k.as_str() {
            "name" => name = Some(v.to_string()),
            "imwidth" => width = Some(positive(v)?),
            "imheight" => height = Some(positive(v)?),
            "seqlength" => len = Some(positive(v)?),
            "framerate" => match v.parse::<f64>() {
                Ok(r) if r.is_finite() && r > 0.0 => rate = Some(r),
                _ => return Err(bad(line, format!("frameRate must be positive, found {v:?}"))),
            },
            _ => {}
        }
    }
    let end = text.lines().count().max(1);
    let missing = |key: &str| bad(end, format!("missing {key} in [Sequence]"));
    Ok(SeqInfo {
        name: name.ok_or_else(|| missing("name"))?,
        width: width.ok_or_else(|| missing("imWidth"))?,
        height: height.ok_or_else(|| missing("imHeight"))?,
        frame_rate: rate.ok_or_else(|| missing("frameRate"))?,
        seq_length: len.ok_or_else(|| missing("seqLength"))?,
    })
}

pub fn write_seqinfo(info: &SeqInfo) -> String {
    let mut s = String::from("[Sequence]\n");
    let _ = writeln!(s, "name={}", info.name);
    let _ = writeln!(s, "frameRate={}", info.frame_rate);
    let _ = writeln!(s, "seqLength={}", info.seq_length);
    let _ = writeln!(s, "imWidth={}", info.width);
    let _ = writeln!(s, "imHeight={}", info.height);
    s
}
