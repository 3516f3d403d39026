//! `features.csv`: one row per scored sample, fixed column order, scores
//! with six decimals and blanks for absent values.

use std::io::Write;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use cogspeech_core::analysis::{ScoreRow, ScoreTable};
use cogspeech_core::types::severity_from_mmse;
use cogspeech_core::{BiomarkerKind, BiomarkerScoreSet, CutoffTable, SeverityLevel};

pub const FEATURES_HEADER: [&str; 10] = [
    "sample_id",
    "grammar",
    "pragmatics",
    "anomia",
    "turn_taking",
    "pronunciation",
    "prosody",
    "composite",
    "mmse",
    "severity",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub sample_id: String,
    pub scores: BiomarkerScoreSet,
    pub mmse: Option<u8>,
    pub severity: Option<SeverityLevel>,
}

impl FeatureRow {
    pub fn new(sample_id: impl Into<String>, scores: BiomarkerScoreSet, mmse: Option<u8>, cutoffs: &CutoffTable) -> Result<Self> {
        let severity = mmse.map(|m| severity_from_mmse(i64::from(m), cutoffs)).transpose()?;
        Ok(FeatureRow { sample_id: sample_id.into(), scores, mmse, severity })
    }
}

fn fixed(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn write_features<W: Write>(out: W, rows: &[FeatureRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(FEATURES_HEADER)?;
    for r in rows {
        let mut rec = vec![r.sample_id.clone()];
        rec.extend(BiomarkerKind::ALL.iter().map(|&k| fixed(r.scores.get(k))));
        rec.push(fixed(r.scores.composite));
        rec.push(r.mmse.map(|m| m.to_string()).unwrap_or_default());
        rec.push(r.severity.map(|s| s.as_str().to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_features_file(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let mut buf = Vec::new();
    write_features(&mut buf, rows)?;
    std::fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

fn score(s: &str, line: usize, col: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        return Ok(None);
    }
    let v: f64 = s.trim().parse().with_context(|| format!("line {line}: bad {col} {s:?}"))?;
    ensure!((0.0..=1.0).contains(&v), "line {line}: {col} {v} outside [0,1]");
    Ok(Some(v))
}

/// Reads rows back. The stored composite is kept as written rather than
/// recomputed from the rounded scores.
pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    ensure!(
        r.headers()?.iter().eq(FEATURES_HEADER),
        "{}: header must be `{}`",
        path.display(),
        FEATURES_HEADER.join(",")
    );
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.with_context(|| format!("{}:{line}", path.display()))?;
        let mut scores = BiomarkerScoreSet::new(0, [None; 6])?;
        let mut vals = [None; 6];
        for (j, k) in BiomarkerKind::ALL.iter().enumerate() {
            vals[j] = score(&rec[j + 1], line, k.name())?;
        }
        scores.grammar = vals[0];
        scores.pragmatics = vals[1];
        scores.anomia = vals[2];
        scores.turn_taking = vals[3];
        scores.pronunciation = vals[4];
        scores.prosody = vals[5];
        scores.composite = score(&rec[7], line, "composite")?;
        let mmse = match rec[8].trim() {
            "" => None,
            m => Some(m.parse::<u8>().ok().filter(|v| *v <= 30).with_context(|| format!("line {line}: bad mmse {m:?}"))?),
        };
        let severity = match rec[9].trim() {
            "" => None,
            s => Some(SeverityLevel::parse(s).with_context(|| format!("line {line}: bad severity {s:?}"))?),
        };
        rows.push(FeatureRow { sample_id: rec[0].to_string(), scores, mmse, severity });
    }
    Ok(rows)
}

pub fn to_score_table(rows: &[FeatureRow]) -> ScoreTable {
    ScoreTable::new(
        rows.iter()
            .map(|r| ScoreRow { sample_id: r.sample_id.clone(), scores: r.scores.clone(), mmse: r.mmse.map(i64::from) })
            .collect(),
    )
}
