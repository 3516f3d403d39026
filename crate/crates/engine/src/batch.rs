//! Corpus scoring: every manifest row through the batch scorer, in
//! parallel, with results in manifest order.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use cogspeech_core::analysis::ScoreTable;
use cogspeech_core::dsp::AudioBuffer;
use cogspeech_core::scoring::{BiomarkerResources, ScoringConfig, SessionScorer};
use cogspeech_core::{BiomarkerKind, BiomarkerScoreSet, CutoffTable, UtteranceRecord};

use crate::corpus::{read_transcript, ManifestRow};
use crate::features_csv::{to_score_table, write_features_file, FeatureRow};
use crate::wav::read_wav;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub sample_id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct CorpusScores {
    pub rows: Vec<FeatureRow>,
    pub skipped: Vec<Skipped>,
}

impl CorpusScores {
    pub fn table(&self) -> ScoreTable {
        to_score_table(&self.rows)
    }
}

fn wants_audio(cfg: &ScoringConfig) -> bool {
    BiomarkerKind::ALL.iter().any(|k| k.is_acoustic() && cfg.is_enabled(*k))
}

/// Transcript plus audio when an acoustic biomarker is enabled and the row
/// lists a recording.
pub fn load_sample(row: &ManifestRow, cfg: &ScoringConfig) -> Result<(Vec<UtteranceRecord>, Option<AudioBuffer>)> {
    let utts = read_transcript(&row.transcript, &row.sample_id)?;
    let audio = match &row.audio {
        Some(p) if wants_audio(cfg) => Some(read_wav(p)?),
        _ => None,
    };
    Ok((utts, audio))
}

pub fn score_sample(row: &ManifestRow, res: &BiomarkerResources, cfg: &ScoringConfig) -> Result<BiomarkerScoreSet> {
    let (utts, audio) = load_sample(row, cfg)?;
    let set = SessionScorer::score_recording(&row.sample_id, &utts, audio.as_ref(), res, cfg.clone())?;
    match set {
        Some(s) => Ok(s),
        None => Ok(BiomarkerScoreSet::new(0, [None; 6])?),
    }
}

/// Applies `f` to every item on all cores; results keep input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len());
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every item is mapped")).collect()
}

/// Scores every row. Failed rows are skipped with their reason; if every
/// row fails the whole run fails.
pub fn score_corpus(
    rows: &[ManifestRow],
    res: &BiomarkerResources,
    cfg: &ScoringConfig,
    cutoffs: &CutoffTable,
) -> Result<CorpusScores> {
    if rows.is_empty() {
        bail!("manifest has no samples");
    }
    let results = par_map(rows, |row| score_sample(row, res, cfg));

    let mut out = CorpusScores { rows: Vec::new(), skipped: Vec::new() };
    for (row, r) in rows.iter().zip(results) {
        match r {
            Ok(scores) => out.rows.push(FeatureRow::new(row.sample_id.clone(), scores, row.mmse, cutoffs)?),
            Err(e) => {
                let reason = format!("{e:#}");
                tracing::warn!(sample = %row.sample_id, %reason, "skipping sample");
                out.skipped.push(Skipped { sample_id: row.sample_id.clone(), reason });
            }
        }
    }
    if out.rows.is_empty() {
        bail!("all {} samples were skipped; first reason: {}", rows.len(), out.skipped[0].reason);
    }
    Ok(out)
}

/// Per-column `n,min,max,avg,std_dev,mmse_r`.
pub fn summary_csv(table: &ScoreTable) -> String {
    let mut s = String::from("column,n,min,max,avg,std_dev,mmse_r\n");
    for (col, sum) in table.summaries() {
        match sum {
            Some(c) => s.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{}\n",
                col.name(),
                c.n,
                c.min,
                c.max,
                c.avg,
                c.std_dev,
                c.mmse_r.map(|r| format!("{r:.6}")).unwrap_or_default()
            )),
            None => s.push_str(&format!("{},0,,,,,\n", col.name())),
        }
    }
    s
}

/// Writes `features.csv` and `summary.csv` into `dir`.
pub fn write_outputs(dir: &Path, scores: &CorpusScores) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_features_file(&dir.join("features.csv"), &scores.rows)?;
    let summary = dir.join("summary.csv");
    std::fs::write(&summary, summary_csv(&scores.table())).with_context(|| format!("writing {}", summary.display()))
}
