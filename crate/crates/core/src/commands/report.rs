use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{TrainSummary, SUMMARY_FILE};
use crate::error::{Error, Result};
use crate::lattice::LossKind;
use crate::metrics::{werd, werdr};

/// One training run; rates in percent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub run: String,
    pub loss: LossKind,
    pub corruption_type: String,
    pub corruption_pct: f64,
    pub dev_wer: Option<f64>,
    pub test_wer: Option<f64>,
    pub werd: Option<f64>,
    pub werdr: Option<f64>,
}

fn pct(x: Option<f64>) -> Option<f64> {
    x.map(|w| 100.0 * w)
}

/// Reads every `<runs>/<name>/summary.json` (in name order) and fills in
/// WERD against the clean RNN-T run and WERDR against the RNN-T run on the
/// same corruption. Returns the rows and any warnings.
pub fn build_report(runs: &Path) -> Result<(Vec<ReportRow>, Vec<String>)> {
    let mut dirs: Vec<_> = fs::read_dir(runs)
        .map_err(|e| Error::io(runs, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.join(SUMMARY_FILE).is_file())
        .collect();
    dirs.sort();

    let mut rows = Vec::with_capacity(dirs.len());
    for dir in &dirs {
        let path = dir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let s: TrainSummary = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.clone(),
            message: e.to_string(),
        })?;
        rows.push(ReportRow {
            run: dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            loss: s.loss,
            corruption_type: s.corruption.kind,
            corruption_pct: s.corruption.pct,
            dev_wer: pct(s.dev_wer),
            test_wer: pct(s.test_wer),
            werd: None,
            werdr: None,
        });
    }

    let mut warnings = Vec::new();
    let clean = rows
        .iter()
        .find(|r| r.loss == LossKind::Rnnt && r.corruption_type == "none")
        .and_then(|r| r.test_wer);
    let corrupted = |r: &ReportRow| r.corruption_type != "none";
    if clean.is_none() && rows.iter().any(corrupted) {
        warnings.push("no clean rnnt run with a test WER; WERD and WERDR left empty".to_string());
    }
    if let Some(clean) = clean {
        for r in rows.iter_mut().filter(|r| corrupted(r)) {
            r.werd = r.test_wer.map(|w| werd(w, clean));
        }
    }
    for i in 0..rows.len() {
        if rows[i].loss == LossKind::Rnnt || !corrupted(&rows[i]) {
            continue;
        }
        let Some(proposed) = rows[i].werd else { continue };
        let baseline = rows.iter().find(|b| {
            b.loss == LossKind::Rnnt
                && b.corruption_type == rows[i].corruption_type
                && b.corruption_pct == rows[i].corruption_pct
        });
        match baseline.and_then(|b| b.werd) {
            Some(base) => match werdr(base, proposed) {
                Ok(v) => rows[i].werdr = Some(100.0 * v),
                Err(e) => warnings.push(format!("{}: {e}", rows[i].run)),
            },
            None => warnings.push(format!(
                "{}: no rnnt baseline on {} {}%; WERDR left empty",
                rows[i].run, rows[i].corruption_type, rows[i].corruption_pct
            )),
        }
    }
    Ok((rows, warnings))
}

pub fn render_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record([
            "run",
            "loss",
            "corruption_type",
            "corruption_pct",
            "dev_wer",
            "test_wer",
            "werd",
            "werdr",
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_markdown(rows: &[ReportRow]) -> String {
    let cell = |x: Option<f64>, digits: usize| x.map_or(String::new(), |v| format!("{v:.digits$}"));
    let mut out = String::from(
        "| run | loss | corruption | % | dev WER | test WER | WERD | WERDR % |\n\
         |---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.run,
            r.loss,
            r.corruption_type,
            r.corruption_pct,
            cell(r.dev_wer, 2),
            cell(r.test_wer, 2),
            cell(r.werd, 2),
            cell(r.werdr, 1),
        ));
    }
    out
}
