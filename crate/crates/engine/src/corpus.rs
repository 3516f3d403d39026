//! Corpus manifests and diarized transcript files.
//!
//! Manifest (CSV): `sample_id,transcript,audio,mmse,label`. Paths are
//! relative to the manifest's directory; `audio`, `mmse` and `label` may be
//! blank.
//!
//! Transcript (TSV): `speaker	t_start_ms	t_end_ms	text`, no quoting, so
//! text must not contain tabs or line breaks.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use cogspeech_core::{Label, Speaker, UtteranceRecord};

pub const MANIFEST_HEADER: [&str; 5] = ["sample_id", "transcript", "audio", "mmse", "label"];
pub const TRANSCRIPT_HEADER: [&str; 4] = ["speaker", "t_start_ms", "t_end_ms", "text"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub sample_id: String,
    /// Resolved against the manifest directory.
    pub transcript: PathBuf,
    pub audio: Option<PathBuf>,
    pub mmse: Option<u8>,
    pub label: Option<Label>,
}

fn blank(s: &str) -> Option<&str> {
    let s = s.trim();
    (!s.is_empty()).then_some(s)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening manifest {}", path.display()))?;
    let header = reader.headers()?.clone();
    ensure!(
        header.iter().eq(MANIFEST_HEADER),
        "{}: header must be `{}`",
        path.display(),
        MANIFEST_HEADER.join(",")
    );
    let mut rows = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.with_context(|| format!("{}:{line}", path.display()))?;
        let sample_id = rec[0].trim().to_string();
        ensure!(!sample_id.is_empty(), "{}:{line}: empty sample_id", path.display());
        ensure!(seen.insert(sample_id.clone()), "{}:{line}: duplicate sample_id {sample_id}", path.display());
        let transcript = blank(&rec[1])
            .map(|p| base.join(p))
            .with_context(|| format!("{}:{line}: empty transcript path", path.display()))?;
        let mmse = blank(&rec[3])
            .map(|m| -> Result<u8> {
                let v: u8 = m.parse().with_context(|| format!("{}:{line}: bad mmse {m:?}", path.display()))?;
                ensure!(v <= 30, "{}:{line}: mmse {v} outside 0..=30", path.display());
                Ok(v)
            })
            .transpose()?;
        let label = blank(&rec[4])
            .map(|l| Label::parse(l).with_context(|| format!("{}:{line}: bad label {l:?}", path.display())))
            .transpose()?;
        rows.push(ManifestRow { sample_id, transcript, audio: blank(&rec[2]).map(|p| base.join(p)), mmse, label });
    }
    Ok(rows)
}

/// Writes a manifest with paths made relative to its directory when
/// possible.
pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<()> {
    let base = path.parent().unwrap_or(Path::new("."));
    let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).to_string_lossy().into_owned();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MANIFEST_HEADER)?;
    for r in rows {
        w.write_record([
            r.sample_id.clone(),
            rel(&r.transcript),
            r.audio.as_deref().map(rel).unwrap_or_default(),
            r.mmse.map(|m| m.to_string()).unwrap_or_default(),
            r.label.map(|l| l.as_str().to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_transcript(text: &str, session_id: &str) -> Result<Vec<UtteranceRecord>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else { bail!("empty transcript") };
    ensure!(
        header.trim_end_matches('\r').split('\t').eq(TRANSCRIPT_HEADER),
        "transcript header must be `{}`",
        TRANSCRIPT_HEADER.join("\\t")
    );
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let cols: Vec<&str> = line.trim_end_matches('\r').splitn(4, '\t').collect();
        ensure!(cols.len() == 4, "line {line_no}: expected 4 tab-separated columns");
        let speaker = Speaker::parse(cols[0]).with_context(|| format!("line {line_no}: bad speaker {:?}", cols[0]))?;
        let start: i64 = cols[1].trim().parse().with_context(|| format!("line {line_no}: bad t_start_ms"))?;
        let end: i64 = cols[2].trim().parse().with_context(|| format!("line {line_no}: bad t_end_ms"))?;
        let u = UtteranceRecord::new(session_id, speaker, cols[3], start, end)
            .map_err(|e| anyhow::anyhow!("line {line_no}: {e}"))?;
        out.push(u);
    }
    Ok(out)
}

pub fn read_transcript(path: &Path, session_id: &str) -> Result<Vec<UtteranceRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_transcript(&text, session_id).with_context(|| path.display().to_string())
}

pub fn format_transcript(utterances: &[UtteranceRecord]) -> Result<String> {
    let mut s = TRANSCRIPT_HEADER.join("\t");
    s.push('\n');
    for u in utterances {
        ensure!(
            !u.text.contains(['\t', '\n', '\r']),
            "utterance text at {} ms contains a tab or line break",
            u.t_start_ms
        );
        s.push_str(&format!("{}\t{}\t{}\t{}\n", u.speaker, u.t_start_ms, u.t_end_ms, u.text));
    }
    Ok(s)
}

pub fn write_transcript(path: &Path, utterances: &[UtteranceRecord]) -> Result<()> {
    std::fs::write(path, format_transcript(utterances)?).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        let rows = vec![
            ManifestRow {
                sample_id: "a,1".into(),
                transcript: dir.path().join("t/a.tsv"),
                audio: Some(dir.path().join("w/a.wav")),
                mmse: Some(27),
                label: Some(Label::Control),
            },
            ManifestRow { sample_id: "b".into(), transcript: dir.path().join("b.tsv"), audio: None, mmse: None, label: None },
        ];
        write_manifest(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("sample_id,transcript,audio,mmse,label\n\"a,1\",t/a.tsv,w/a.wav,27,CONTROL\n"));
        assert_eq!(read_manifest(&path).unwrap(), rows);
    }

    #[test]
    fn manifest_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        for bad in [
            "id,transcript,audio,mmse,label\n",
            "sample_id,transcript,audio,mmse,label\na,t.tsv,,31,\n",
            "sample_id,transcript,audio,mmse,label\na,t.tsv,,,SICK\n",
            "sample_id,transcript,audio,mmse,label\na,,,,\n",
            "sample_id,transcript,audio,mmse,label\na,t.tsv,,,\na,u.tsv,,,\n",
        ] {
            std::fs::write(&path, bad).unwrap();
            assert!(read_manifest(&path).is_err(), "{bad}");
        }
    }

    #[test]
    fn transcript_round_trip() {
        let utts = vec![
            UtteranceRecord::new("s", Speaker::Agent, "How are you?", 0, 1200).unwrap(),
            UtteranceRecord::new("s", Speaker::Patient, "Fine, \"thanks\".", 1100, 2500).unwrap(),
        ];
        let text = format_transcript(&utts).unwrap();
        assert!(text.starts_with("speaker\tt_start_ms\tt_end_ms\ttext\nAGENT\t0\t1200\tHow are you?\n"));
        assert_eq!(parse_transcript(&text, "s").unwrap(), utts);
    }

    #[test]
    fn transcript_errors() {
        let h = "speaker\tt_start_ms\tt_end_ms\ttext\n";
        for bad in ["", "who\twhen\n", &format!("{h}ROBOT\t0\t1\thi\n"), &format!("{h}PATIENT\t5\t5\thi\n"), &format!("{h}PATIENT\tx\t5\thi\n"), &format!("{h}PATIENT\t0\t5\n")] {
            assert!(parse_transcript(bad, "s").is_err(), "{bad:?}");
        }
        let tabbed = UtteranceRecord::new("s", Speaker::Patient, "a\tb", 0, 5).unwrap();
        assert!(format_transcript(&[tabbed]).is_err());
    }
}
