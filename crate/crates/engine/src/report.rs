//! Markdown reports over score tables, severity analyses and classifier
//! evaluations.

use std::fmt::Write as _;

use cogspeech_core::analysis::{ColumnSummary, Pairing, PairingOutcome, ScoreColumn, ScoreTable, SeverityReport};
use cogspeech_core::models::MetricsReport;
use cogspeech_core::stats::TTestKind;
use cogspeech_core::BiomarkerKind;

pub fn column_title(col: ScoreColumn) -> &'static str {
    match col {
        ScoreColumn::Biomarker(BiomarkerKind::Grammar) => "Grammar",
        ScoreColumn::Biomarker(BiomarkerKind::Pragmatics) => "Pragmatics",
        ScoreColumn::Biomarker(BiomarkerKind::Anomia) => "Anomia",
        ScoreColumn::Biomarker(BiomarkerKind::TurnTaking) => "Turn-taking",
        ScoreColumn::Biomarker(BiomarkerKind::Pronunciation) => "Pronunciation",
        ScoreColumn::Biomarker(BiomarkerKind::Prosody) => "Prosody",
        ScoreColumn::Composite => "Composite",
    }
}

/// Columns with at least one value; the composite is always kept.
fn present_columns(tables: &[&ScoreTable]) -> Vec<ScoreColumn> {
    ScoreColumn::ALL
        .into_iter()
        .filter(|&c| c == ScoreColumn::Composite || tables.iter().any(|t| !t.values(c).is_empty()))
        .collect()
}

fn header(out: &mut String, first: &str, cols: &[ScoreColumn]) {
    out.push_str("| ");
    out.push_str(first);
    for c in cols {
        let _ = write!(out, " | {}", column_title(*c));
    }
    out.push_str(" |\n|---");
    out.push_str(&"|---:".repeat(cols.len()));
    out.push_str("|\n");
}

fn row(out: &mut String, name: &str, cells: impl IntoIterator<Item = String>) {
    out.push_str("| ");
    out.push_str(name);
    for c in cells {
        out.push_str(" | ");
        out.push_str(&c);
    }
    out.push_str(" |\n");
}

fn f4(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".into(), |v| format!("{v:.4}"))
}

/// Min, max, mean, standard deviation and MMSE correlation, one column per
/// score.
pub fn summary_table(table: &ScoreTable) -> String {
    let cols = present_columns(&[table]);
    let sums: Vec<Option<ColumnSummary>> = cols.iter().map(|c| table.summary(*c)).collect();
    let mut out = String::new();
    header(&mut out, "", &cols);
    let stat = |f: fn(&ColumnSummary) -> Option<f64>| sums.iter().map(move |s| f4(s.as_ref().and_then(f)));
    row(&mut out, "Min", stat(|s| Some(s.min)));
    row(&mut out, "Max", stat(|s| Some(s.max)));
    row(&mut out, "Avg", stat(|s| Some(s.avg)));
    row(&mut out, "StdDev (avg)", stat(|s| Some(s.std_dev)));
    row(&mut out, "Correlation w/ MMSE", stat(|s| s.mmse_r));
    row(&mut out, "N", sums.iter().map(|s| s.map_or(0, |s| s.n).to_string()));
    out
}

/// Whether the composite correlates with MMSE at least as strongly as every
/// individual biomarker; `None` without MMSE correlations.
pub fn composite_dominates(table: &ScoreTable) -> Option<bool> {
    let comp = table.summary(ScoreColumn::Composite)?.mmse_r?.abs();
    let best = BiomarkerKind::ALL
        .iter()
        .filter_map(|k| table.summary(ScoreColumn::Biomarker(*k)).and_then(|s| s.mmse_r))
        .map(f64::abs)
        .fold(0.0, f64::max);
    Some(comp >= best)
}

fn ttest_name(kind: TTestKind) -> &'static str {
    match kind {
        TTestKind::Welch => "Welch",
        TTestKind::Pooled => "pooled-variance",
    }
}

/// Two-tailed p-values per pairing and column; `*` marks `p < alpha`.
pub fn pairing_table(report: &SeverityReport) -> String {
    let tables: Vec<&ScoreTable> = report.groups.values().collect();
    let cols = present_columns(&tables);
    let mut out = String::new();
    header(&mut out, "Pairing", &cols);
    for pairing in Pairing::ALL {
        let cells = cols.iter().map(|c| match report.result(pairing, *c).map(|r| &r.outcome) {
            Some(PairingOutcome::Tested { p, significant, .. }) => {
                format!("{p:.5}{}", if *significant { "*" } else { "" })
            }
            _ => "N/A".into(),
        });
        row(&mut out, pairing.label(), cells);
    }
    out
}

pub fn severity_markdown(report: &SeverityReport) -> String {
    let mut out = String::from("# Severity analysis\n\n");
    for (level, table) in &report.groups {
        let _ = write!(out, "## {} ({} samples)\n\n{}\n", level.as_str(), table.len(), summary_table(table));
    }
    let _ = write!(
        out,
        "## Pairwise t-tests\n\n{} t-test, two-tailed; * marks p < {}.\n\n{}\n",
        ttest_name(report.kind),
        report.alpha,
        pairing_table(report)
    );
    let _ = writeln!(out, "Flagged: {} of {} tests.", report.flagged(), report.pairings.len());
    if report.unlabelled > 0 {
        let _ = writeln!(out, "Excluded without MMSE: {}.", report.unlabelled);
    }
    out
}

/// Full corpus report: overall summary, then the severity analysis when
/// MMSE scores are available.
pub fn corpus_markdown(table: &ScoreTable, severity: Option<&SeverityReport>) -> String {
    let mut out = format!("# Biomarker summary\n\n{} samples.\n\n{}\n", table.len(), summary_table(table));
    match composite_dominates(table) {
        Some(true) => out.push_str("Composite |r| is at least every individual biomarker's |r|.\n\n"),
        Some(false) => out.push_str("Composite |r| is below at least one individual biomarker's |r|.\n\n"),
        None => {}
    }
    if let Some(s) = severity {
        out.push_str(&severity_markdown(s).replacen("# ", "## ", 1).replace("\n## ", "\n### "));
    }
    out
}

/// Side-by-side summaries of two corpora with the difference of means.
pub fn compare_markdown(a_name: &str, a: &ScoreTable, b_name: &str, b: &ScoreTable) -> String {
    let cols = present_columns(&[a, b]);
    let mut out = format!("# {a_name} vs {b_name}\n\n");
    header(&mut out, "", &cols);
    for (name, t) in [(a_name, a), (b_name, b)] {
        let sums: Vec<Option<ColumnSummary>> = cols.iter().map(|c| t.summary(*c)).collect();
        for (label, f) in [
            ("Min", (|s: &ColumnSummary| s.min) as fn(&ColumnSummary) -> f64),
            ("Max", |s| s.max),
            ("Avg", |s| s.avg),
            ("StdDev (avg)", |s| s.std_dev),
        ] {
            row(&mut out, &format!("{name} {label}"), sums.iter().map(|s| f4(s.as_ref().map(f))));
        }
    }
    row(
        &mut out,
        &format!("Avg difference ({b_name} - {a_name})"),
        cols.iter().map(|c| f4(a.summary(*c).zip(b.summary(*c)).map(|(x, y)| y.avg - x.avg))),
    );
    out
}

pub fn metrics_table(rows: &[(String, MetricsReport)]) -> String {
    let mut out = String::from("| Model | Accuracy | Precision | Recall | F1-Score |\n|---|---:|---:|---:|---:|\n");
    for (name, m) in rows {
        let _ = writeln!(out, "| {name} | {:.3} | {:.3} | {:.3} | {:.3} |", m.accuracy, m.precision, m.recall, m.f1);
    }
    out
}

pub fn coefficient_table(rows: &[(String, f64)]) -> String {
    let mut out = String::from("| Feature | Coefficient |\n|---|---:|\n");
    for (name, c) in rows {
        let _ = writeln!(out, "| {name} | {c:.4} |");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use cogspeech_core::analysis::{severity_analysis, ScoreRow};
    use cogspeech_core::{BiomarkerScoreSet, CutoffTable};

    fn table(rows: &[(f64, f64, i64)]) -> ScoreTable {
        ScoreTable::new(
            rows.iter()
                .enumerate()
                .map(|(i, &(g, a, m))| ScoreRow {
                    sample_id: format!("s{i}"),
                    scores: BiomarkerScoreSet::new(0, [Some(g), None, Some(a), None, None, None]).unwrap(),
                    mmse: Some(m),
                })
                .collect(),
        )
    }

    #[test]
    fn summary_layout() {
        let t = table(&[(0.2, 0.4, 28), (0.4, 0.6, 20), (0.6, 1.0, 10)]);
        let md = summary_table(&t);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[0], "|  | Grammar | Anomia | Composite |");
        assert_eq!(lines[2], "| Min | 0.2000 | 0.4000 | 0.3000 |");
        assert_eq!(lines[4], "| Avg | 0.4000 | 0.6667 | 0.5333 |");
        assert_eq!(lines[5], "| StdDev (avg) | 0.2000 | 0.3055 | 0.2517 |");
        assert!(lines[6].starts_with("| Correlation w/ MMSE | -0.99"));
        assert_eq!(lines[7], "| N | 3 | 3 | 3 |");
        assert_eq!(composite_dominates(&t), Some(true));
    }

    #[test]
    fn missing_mmse_shows_na() {
        let mut t = table(&[(0.2, 0.4, 28), (0.4, 0.6, 20)]);
        for r in &mut t.rows {
            r.mmse = None;
        }
        assert!(summary_table(&t).contains("| Correlation w/ MMSE | N/A | N/A | N/A |"));
        assert_eq!(composite_dominates(&t), None);
    }

    #[test]
    fn pairing_table_marks_significance() {
        let mut rows = Vec::new();
        for (mmse, base) in [(28, 0.1), (22, 0.3), (15, 0.6), (5, 0.9)] {
            for j in 0..4 {
                let v = base + 0.01 * j as f64;
                rows.push((v, v, mmse));
            }
        }
        let t = table(&rows);
        let rep = severity_analysis(&t, &CutoffTable::default(), 0.05, TTestKind::Welch).unwrap();
        let md = pairing_table(&rep);
        assert_eq!(md.lines().count(), 2 + 5);
        for line in md.lines().skip(2) {
            assert_eq!(line.matches('*').count(), 3, "{line}");
        }
        let full = corpus_markdown(&t, Some(&rep));
        assert!(full.contains("### NONE (4 samples)"));
        assert!(full.contains("Flagged: 15 of 35 tests."));
    }

    #[test]
    fn compare_and_model_tables() {
        let a = table(&[(0.2, 0.4, 28), (0.4, 0.6, 20)]);
        let b = table(&[(0.5, 0.4, 28), (0.7, 0.6, 20)]);
        let md = compare_markdown("A", &a, "B", &b);
        assert!(md.contains("| Avg difference (B - A) | 0.3000 | 0.0000 | 0.1500 |"));
        let m = MetricsReport { accuracy: 2.0 / 3.0, precision: 0.5, recall: 1.0, f1: 2.0 / 3.0, fold_count: 10, confusion: Default::default() };
        assert!(metrics_table(&[("RF".into(), m)]).contains("| RF | 0.667 | 0.500 | 1.000 | 0.667 |"));
        assert!(coefficient_table(&[("nouns".into(), 1.5)]).contains("| nouns | 1.5000 |"));
    }
}
