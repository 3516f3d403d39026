//! Corpus score tables, MMSE correlations and severity-group t-tests.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::{pearson_r, ttest_independent, TTestKind};
use crate::types::{severity_from_mmse, BiomarkerKind, BiomarkerScoreSet, CutoffTable, SeverityLevel};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// One column of a score table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreColumn {
    Biomarker(BiomarkerKind),
    Composite,
}

impl ScoreColumn {
    pub const ALL: [ScoreColumn; 7] = [
        ScoreColumn::Biomarker(BiomarkerKind::Grammar),
        ScoreColumn::Biomarker(BiomarkerKind::Pragmatics),
        ScoreColumn::Biomarker(BiomarkerKind::Anomia),
        ScoreColumn::Biomarker(BiomarkerKind::TurnTaking),
        ScoreColumn::Biomarker(BiomarkerKind::Pronunciation),
        ScoreColumn::Biomarker(BiomarkerKind::Prosody),
        ScoreColumn::Composite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScoreColumn::Biomarker(k) => k.name(),
            ScoreColumn::Composite => "composite",
        }
    }

    pub fn value(self, s: &BiomarkerScoreSet) -> Option<f64> {
        match self {
            ScoreColumn::Biomarker(k) => s.get(k),
            ScoreColumn::Composite => s.composite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub sample_id: String,
    pub scores: BiomarkerScoreSet,
    pub mmse: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub avg: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std_dev: f64,
    /// Pearson r against MMSE over rows carrying both, when defined.
    pub mmse_r: Option<f64>,
}

/// Per-sample scores. Summaries are always recomputed from the rows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn new(rows: Vec<ScoreRow>) -> Self {
        ScoreTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn values(&self, col: ScoreColumn) -> Vec<f64> {
        self.rows.iter().filter_map(|r| col.value(&r.scores)).collect()
    }

    pub fn summary(&self, col: ScoreColumn) -> Option<ColumnSummary> {
        let v = self.values(col);
        if v.is_empty() {
            return None;
        }
        let n = v.len();
        let avg = v.iter().sum::<f64>() / n as f64;
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let std_dev = if n > 1 { crate::stats::std_dev(&v) } else { 0.0 };
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .rows
            .iter()
            .filter_map(|r| Some((col.value(&r.scores)?, r.mmse? as f64)))
            .unzip();
        let mmse_r = pearson_r(&x, &y).ok();
        // Rounding can push the mean a hair outside [min, max].
        Some(ColumnSummary { n, min, max, avg: avg.clamp(min, max), std_dev, mmse_r })
    }

    pub fn summaries(&self) -> Vec<(ScoreColumn, Option<ColumnSummary>)> {
        ScoreColumn::ALL.iter().map(|&c| (c, self.summary(c))).collect()
    }
}

/// The five group comparisons reported for severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pairing {
    ModerateSevere,
    MildSevere,
    MildModerate,
    NoneSevere,
    ModSevVsMildNone,
}

impl Pairing {
    pub const ALL: [Pairing; 5] = [
        Pairing::ModerateSevere,
        Pairing::MildSevere,
        Pairing::MildModerate,
        Pairing::NoneSevere,
        Pairing::ModSevVsMildNone,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Pairing::ModerateSevere => "Moderate-Severe",
            Pairing::MildSevere => "Mild-Severe",
            Pairing::MildModerate => "Mild-Moderate",
            Pairing::NoneSevere => "None-Severe",
            Pairing::ModSevVsMildNone => "Mod/Sev vs Mild/None",
        }
    }

    pub fn groups(self) -> (&'static [SeverityLevel], &'static [SeverityLevel]) {
        use SeverityLevel::*;
        match self {
            Pairing::ModerateSevere => (&[Moderate], &[Severe]),
            Pairing::MildSevere => (&[Mild], &[Severe]),
            Pairing::MildModerate => (&[Mild], &[Moderate]),
            Pairing::NoneSevere => (&[None], &[Severe]),
            Pairing::ModSevVsMildNone => (&[Moderate, Severe], &[Mild, None]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PairingOutcome {
    Tested { t: f64, df: f64, p: f64, significant: bool, n_a: usize, n_b: usize },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingResult {
    pub pairing: Pairing,
    pub column: ScoreColumn,
    pub outcome: PairingOutcome,
}

impl PairingResult {
    pub fn is_significant(&self) -> bool {
        matches!(self.outcome, PairingOutcome::Tested { significant: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityReport {
    pub alpha: f64,
    pub kind: TTestKind,
    /// Per-level tables; levels with no samples are absent.
    pub groups: BTreeMap<SeverityLevel, ScoreTable>,
    pub pairings: Vec<PairingResult>,
    /// Rows without MMSE, excluded from grouping.
    pub unlabelled: usize,
}

impl SeverityReport {
    pub fn result(&self, pairing: Pairing, column: ScoreColumn) -> Option<&PairingResult> {
        self.pairings.iter().find(|r| r.pairing == pairing && r.column == column)
    }

    pub fn flagged(&self) -> usize {
        self.pairings.iter().filter(|r| r.is_significant()).count()
    }
}

/// Buckets rows by MMSE severity and t-tests the five pairings on every
/// column, flagging `p < alpha`.
pub fn severity_analysis(
    table: &ScoreTable,
    cutoffs: &CutoffTable,
    alpha: f64,
    kind: TTestKind,
) -> Result<SeverityReport> {
    let levels: Vec<Option<SeverityLevel>> = table
        .rows
        .iter()
        .map(|r| r.mmse.map(|m| severity_from_mmse(m, cutoffs)).transpose())
        .collect::<Result<_>>()?;
    let unlabelled = levels.iter().filter(|l| l.is_none()).count();
    let pick = |ls: &[SeverityLevel]| ScoreTable {
        rows: table
            .rows
            .iter()
            .zip(&levels)
            .filter(|(_, l)| l.is_some_and(|l| ls.contains(&l)))
            .map(|(r, _)| r.clone())
            .collect(),
    };
    let mut groups = BTreeMap::new();
    for level in SeverityLevel::ALL {
        let g = pick(&[level]);
        if !g.is_empty() {
            groups.insert(level, g);
        }
    }

    let mut pairings = Vec::new();
    for pairing in Pairing::ALL {
        let (a_levels, b_levels) = pairing.groups();
        let (ga, gb) = (pick(a_levels), pick(b_levels));
        for column in ScoreColumn::ALL {
            let (a, b) = (ga.values(column), gb.values(column));
            let outcome = if a.len() < 2 || b.len() < 2 {
                PairingOutcome::Skipped {
                    reason: alloc::format!("{} vs {} values, need at least 2 per group", a.len(), b.len()),
                }
            } else {
                match ttest_independent(&a, &b, kind) {
                    Ok(t) => PairingOutcome::Tested {
                        t: t.t,
                        df: t.df,
                        p: t.p,
                        significant: t.p < alpha,
                        n_a: a.len(),
                        n_b: b.len(),
                    },
                    Err(e) => PairingOutcome::Skipped { reason: alloc::format!("{e}") },
                }
            };
            pairings.push(PairingResult { pairing, column, outcome });
        }
    }
    Ok(SeverityReport { alpha, kind, groups, pairings, unlabelled })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: usize, composite_like: f64, mmse: Option<i64>) -> ScoreRow {
        let scores =
            BiomarkerScoreSet::new(0, [Some(composite_like), None, None, None, None, None]).unwrap();
        ScoreRow { sample_id: alloc::format!("s{id}"), scores, mmse }
    }

    #[test]
    fn summary_stats() {
        let t = ScoreTable::new(alloc::vec![row(0, 0.2, Some(30)), row(1, 0.4, Some(20)), row(2, 0.9, Some(5))]);
        let s = t.summary(ScoreColumn::Composite).unwrap();
        assert_eq!((s.n, s.min, s.max), (3, 0.2, 0.9));
        assert!((s.avg - 0.5).abs() < 1e-12);
        assert!(s.mmse_r.unwrap() < -0.9);
        assert_eq!(t.summary(ScoreColumn::Biomarker(BiomarkerKind::Prosody)), None);
        let two = ScoreTable::new(alloc::vec![row(0, 0.2, None), row(1, 0.4, None)]);
        let s = two.summary(ScoreColumn::Composite).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.mmse_r, None);
    }

    #[test]
    fn separated_groups_are_flagged() {
        let mut rows = Vec::new();
        let mut id = 0;
        for (mmse, centre) in [(27, 0.2), (20, 0.4), (13, 0.6), (5, 0.8)] {
            for k in 0..8 {
                rows.push(row(id, centre + 0.01 * (k as f64 - 3.5), Some(mmse)));
                id += 1;
            }
        }
        let r = severity_analysis(&ScoreTable::new(rows), &CutoffTable::default(), DEFAULT_ALPHA, TTestKind::Welch)
            .unwrap();
        assert_eq!(r.groups.len(), 4);
        for p in Pairing::ALL {
            assert!(r.result(p, ScoreColumn::Composite).unwrap().is_significant(), "{}", p.label());
        }
        assert!(matches!(
            r.result(Pairing::NoneSevere, ScoreColumn::Biomarker(BiomarkerKind::Prosody)).unwrap().outcome,
            PairingOutcome::Skipped { .. }
        ));
    }

    #[test]
    fn empty_group_skips_pairing() {
        let rows = alloc::vec![row(0, 0.1, Some(30)), row(1, 0.2, Some(29)), row(2, 0.3, None)];
        let r = severity_analysis(&ScoreTable::new(rows), &CutoffTable::default(), DEFAULT_ALPHA, TTestKind::Welch)
            .unwrap();
        assert_eq!(r.unlabelled, 1);
        assert_eq!(r.flagged(), 0);
        assert!(r.pairings.iter().all(|p| matches!(p.outcome, PairingOutcome::Skipped { .. })));
    }

    proptest::proptest! {
        #[test]
        fn min_avg_max(v in proptest::collection::vec(0.0f64..=1.0, 1..40)) {
            let rows = v.iter().enumerate().map(|(i, &x)| row(i, x, None)).collect();
            let s = ScoreTable::new(rows).summary(ScoreColumn::Composite).unwrap();
            proptest::prop_assert!(s.min <= s.avg && s.avg <= s.max);
        }
    }
}
