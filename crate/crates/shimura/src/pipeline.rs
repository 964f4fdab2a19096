//! Per-record analysis (local, points, CM) and comparison with catalog expectations.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{Catalog, CatalogRecord, CmLabel, ExpectedN};
use crate::cm::{classify_points, ClassificationMode, CmReport, PointStatus};
use crate::curve::RatPoint;
use crate::points::{verdict, Certificate, SearchConfig, Verdict, VerdictStatus};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffRow {
    pub id: String,
    pub field: String,
    pub expected: String,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cm: Option<CmReport>,
    pub notes: Vec<String>,
    pub diff: Vec<DiffRow>,
}

fn diff(id: &str, field: &str, expected: impl ToString, found: impl ToString) -> DiffRow {
    DiffRow { id: id.into(), field: field.into(), expected: expected.to_string(), found: found.to_string() }
}

fn show_points(p: &[RatPoint]) -> String {
    let v: Vec<String> = p.iter().map(|q| q.to_string()).collect();
    format!("[{}]", v.join(", "))
}

/// Checks a CM report against the catalog labels.
pub fn cm_label_mismatches(labels: &[CmLabel], report: &CmReport) -> Vec<String> {
    let mut out = Vec::new();
    match report.mode {
        ClassificationMode::Fiber => {
            for l in labels {
                let Some(pc) = report.points.iter().find(|c| c.point.to_string() == l.point) else {
                    out.push(format!("{}: not classified", l.point));
                    continue;
                };
                let want: BTreeSet<i64> = l.delta_k.iter().copied().collect();
                let got: BTreeSet<i64> = pc.candidate_delta_k.iter().copied().collect();
                let ok = if l.cm { pc.status == PointStatus::Cm && want == got } else { pc.status == PointStatus::NonCm };
                if !ok {
                    out.push(format!("{}: expected cm={} {:?}, got {:?} {:?}", l.point, l.cm, want, pc.status, got));
                }
            }
        }
        ClassificationMode::CountsOnly => {
            let cm_labels: Vec<&CmLabel> = labels.iter().filter(|l| l.cm).collect();
            if cm_labels.iter().all(|l| l.delta_k.len() == 1) {
                let mut want: BTreeMap<i64, u64> = BTreeMap::new();
                for l in &cm_labels {
                    *want.entry(l.delta_k[0]).or_insert(0) += 1;
                }
                if want != report.field_multiset {
                    out.push(format!("field multiset: expected {:?}, got {:?}", want, report.field_multiset));
                }
            } else {
                for l in &cm_labels {
                    let Some(pc) = report.points.iter().find(|c| c.point.to_string() == l.point) else {
                        out.push(format!("{}: not classified", l.point));
                        continue;
                    };
                    let want: BTreeSet<i64> = l.delta_k.iter().copied().collect();
                    let got: BTreeSet<i64> = pc.candidate_delta_k.iter().copied().collect();
                    if pc.status != PointStatus::Cm || want != got {
                        out.push(format!("{}: expected {:?}, got {:?} {:?}", l.point, want, pc.status, got));
                    }
                }
            }
        }
    }
    out
}

/// CM classification of the points of a single-involution quotient.
pub fn cm_for_record(record: &CatalogRecord, points: &[RatPoint]) -> crate::Result<CmReport> {
    let m = record
        .single_involution()
        .ok_or_else(|| crate::Error::Unsupported("CM classification needs a quotient by one involution".into()))?;
    let map = match (&record.quotient_map, &record.model) {
        (Some(q), Some(t)) => Some((q, t)),
        _ => None,
    };
    classify_points(record.id.d, record.id.n, m, points, map)
}

/// local -> points -> CM -> diff for one record. Errors become notes.
pub fn run_pipeline(record: &CatalogRecord, cfg: &SearchConfig) -> Report {
    let id = record.key();
    let mut rep = Report { id: id.clone(), verdict: None, cm: None, notes: Vec::new(), diff: Vec::new() };
    let v = match verdict(record, cfg) {
        Ok(v) => v,
        Err(e) => {
            rep.notes.push(format!("verdict failed: {}", e));
            rep.diff.push(diff(&id, "verdict", "a verdict", e));
            return rep;
        }
    };
    if v.matches_expected == Some(false) {
        let expected = if record.expected.is_empty() {
            match record.data.expected_n {
                ExpectedN::Finite(n) => format!("{} points", n),
                ExpectedN::Infinite => "infinitely many".into(),
            }
        } else {
            show_points(&record.expected)
        };
        rep.diff.push(diff(&id, "points", expected, show_points(&v.points)));
    }
    if let Some(Certificate::Stoll(c)) = &v.certificate {
        if c.applicable && (c.bound as usize) < v.points.len() {
            rep.diff.push(diff(&id, "stoll_bound", format!(">= {}", v.points.len()), c.bound));
        }
    }
    if record.data.hasse_violation {
        let els = v.local.as_ref().is_some_and(|l| l.everywhere_locally_solvable);
        if !els || !v.points.is_empty() {
            rep.diff.push(diff(&id, "hasse_violation", "locally solvable, no points", show_points(&v.points)));
        }
    }
    let searched = matches!(
        v.status,
        VerdictStatus::CompleteCertified | VerdictStatus::CompleteMatchesCatalog | VerdictStatus::SearchOnly
    ) && record.model.is_some();
    if searched && !v.points.is_empty() && record.single_involution().is_some() {
        match cm_for_record(record, &v.points) {
            Ok(cm) => {
                for m in cm_label_mismatches(&record.data.cm_labels, &cm) {
                    rep.diff.push(diff(&id, "cm_labels", "catalog labels", m));
                }
                rep.cm = Some(cm);
            }
            Err(e) => rep.notes.push(format!("cm: not applicable ({})", e)),
        }
    }
    rep.verdict = Some(v);
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub records: usize,
    pub by_status: BTreeMap<String, usize>,
    pub diffs: Vec<DiffRow>,
    pub passed: bool,
}

/// Runs every record on a pool of `jobs` threads; reports stay in catalog order.
pub fn verify_all(catalog: &Catalog, cfg: &SearchConfig, jobs: Option<usize>) -> crate::Result<(Vec<Report>, VerifySummary)> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| crate::Error::Unsupported(e.to_string()))?;
    let reports: Vec<Report> = pool.install(|| catalog.records.par_iter().map(|r| run_pipeline(r, cfg)).collect());
    let mut by_status = BTreeMap::new();
    for r in &reports {
        let key = match &r.verdict {
            Some(v) => serde_json::to_value(v.status)?.as_str().unwrap_or("?").to_string(),
            None => "error".to_string(),
        };
        *by_status.entry(key).or_insert(0) += 1;
    }
    let diffs: Vec<DiffRow> = reports.iter().flat_map(|r| r.diff.clone()).collect();
    let summary = VerifySummary { records: reports.len(), by_status, passed: diffs.is_empty(), diffs };
    Ok((reports, summary))
}
