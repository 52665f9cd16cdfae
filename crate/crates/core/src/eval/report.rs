//! Split, per-group logistic mapping and the grouped PLCC/SRCC/RMSE report.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::correlation::{plcc, rmse, srcc};
use super::logistic::{fit_logistic, LogisticParams};
use crate::error::{Error, Result};
use crate::metrics::{clamp_infinite, DEFAULT_PSNR_CAP};
use crate::subjective::stats::mean;
use crate::subjective::MosTable;

/// Distortion groups in report order; `Overall` pools every evaluated image.
pub const REPORT_GROUPS: [&str; 5] = ["BD", "GB", "GN", "ST", "Overall"];
pub const REPORT_METRICS: [&str; 3] = ["PLCC", "SRCC", "RMSE"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FitScope {
    /// One logistic per reported group.
    #[default]
    PerGroup,
    /// One logistic on the whole evaluation set, applied to every group.
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    pub split_seed: u64,
    /// Fraction held out for training; `0` scores every image.
    pub train_frac: f64,
    pub fit_scope: FitScope,
    /// Replacement for infinite predictions (e.g. PSNR of identical pairs).
    pub score_cap: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            split_seed: 0,
            train_frac: 0.8,
            fit_scope: FitScope::PerGroup,
            score_cap: DEFAULT_PSNR_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupStatus {
    /// Logistic mapping fitted and all criteria defined.
    Fitted,
    /// Fewer than 5 points or constant predictions: affine (or constant)
    /// mapping; undefined correlations are reported as 0.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupResult {
    pub group: String,
    pub n: usize,
    pub plcc: f64,
    pub srcc: f64,
    pub rmse: f64,
    pub params: Option<LogisticParams>,
    pub converged: bool,
    pub status: GroupStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QualityReport {
    pub rows: Vec<GroupResult>,
    pub test_images: Vec<String>,
}

impl QualityReport {
    pub fn group(&self, name: &str) -> Option<&GroupResult> {
        self.rows.iter().find(|r| r.group == name)
    }

    /// `BD_PLCC, BD_SRCC, ..., Overall_RMSE`.
    pub fn header() -> Vec<String> {
        REPORT_GROUPS
            .iter()
            .flat_map(|g| REPORT_METRICS.iter().map(move |m| format!("{g}_{m}")))
            .collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().flat_map(|r| [r.plcc, r.srcc, r.rmse]).collect()
    }
}

/// Test-split ids, stratified by distortion kind. Every non-empty stratum
/// contributes at least one image.
pub fn stratified_split(mos: &MosTable, seed: u64, train_frac: f64) -> Result<Vec<String>> {
    if !(0.0..1.0).contains(&train_frac) {
        return Err(Error::Domain(format!("train fraction {train_frac} not in [0, 1)")));
    }
    let mut strata: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in &mos.records {
        let kind = r.meta.as_ref().map_or_else(|| "unknown".to_string(), |m| m.kind.clone());
        strata.entry(kind).or_default().push(r.image.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = Vec::new();
    for ids in strata.values_mut() {
        ids.sort();
        ids.shuffle(&mut rng);
        let n_test = ((ids.len() as f64 * (1.0 - train_frac)).round() as usize).clamp(1, ids.len());
        test.extend(ids.iter().take(n_test).cloned());
    }
    test.sort();
    Ok(test)
}

fn score_group(name: &str, pred: &[f64], target: &[f64], global: Option<LogisticParams>) -> GroupResult {
    let n = pred.len();
    let fitted = match global {
        Some(p) => Some((p, true)),
        None => fit_logistic(pred, target).ok().map(|f| (f.params, f.converged)),
    };
    if let Some((params, converged)) = fitted {
        let mapped = params.map(pred);
        if let (Ok(p), Ok(s), Ok(e)) = (plcc(&mapped, target), srcc(pred, target), rmse(&mapped, target)) {
            return GroupResult {
                group: name.into(),
                n,
                plcc: p,
                srcc: s,
                rmse: e,
                params: Some(params),
                converged,
                status: GroupStatus::Fitted,
            };
        }
    }
    // affine least squares, or the mean when predictions carry no signal
    let mapped: Vec<f64> = if n == 0 {
        Vec::new()
    } else {
        let (mp, mt) = (mean(pred), mean(target));
        let sxx: f64 = pred.iter().map(|p| (p - mp) * (p - mp)).sum();
        let sxy: f64 = pred.iter().zip(target).map(|(p, t)| (p - mp) * (t - mt)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        pred.iter().map(|p| mt + slope * (p - mp)).collect()
    };
    GroupResult {
        group: name.into(),
        n,
        plcc: plcc(&mapped, target).unwrap_or(0.0),
        srcc: srcc(pred, target).unwrap_or(0.0),
        rmse: rmse(&mapped, target).unwrap_or(0.0),
        params: None,
        converged: false,
        status: GroupStatus::Degenerate,
    }
}

/// Scores predictions against MOS on the seeded test split.
pub fn evaluate(pred: &BTreeMap<String, f64>, mos: &MosTable, opts: &EvalOptions) -> Result<QualityReport> {
    let test = stratified_split(mos, opts.split_seed, opts.train_frac)?;
    let missing: Vec<&str> = test.iter().filter(|id| !pred.contains_key(*id)).map(String::as_str).collect();
    if !missing.is_empty() {
        return Err(Error::Domain(format!("missing predictions for {}", missing.join(", "))));
    }
    let mut groups: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for id in &test {
        let rec = mos.get(id).expect("split ids come from the table");
        let q = clamp_infinite(pred[id], opts.score_cap);
        if let Some(kind) = rec.meta.as_ref().map(|m| m.kind.as_str()) {
            if let Some(g) = REPORT_GROUPS[..4].iter().find(|g| **g == kind) {
                let e = groups.entry(g).or_default();
                e.0.push(q);
                e.1.push(rec.mos);
            }
        }
        let e = groups.entry("Overall").or_default();
        e.0.push(q);
        e.1.push(rec.mos);
    }
    let global = match opts.fit_scope {
        FitScope::PerGroup => None,
        FitScope::Global => {
            let (p, t) = &groups["Overall"];
            fit_logistic(p, t).ok().map(|f| f.params)
        }
    };
    let empty = (Vec::new(), Vec::new());
    let rows = REPORT_GROUPS
        .iter()
        .map(|g| {
            let (p, t) = groups.get(g).unwrap_or(&empty);
            score_group(g, p, t, global)
        })
        .collect();
    Ok(QualityReport { rows, test_images: test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subjective::{ImageMeta, MosRecord};

    fn table(n: usize) -> MosTable {
        let kinds = ["BD", "GB", "GN", "ST"];
        MosTable {
            records: (0..n)
                .map(|i| MosRecord {
                    image: format!("img{i:04}"),
                    mos: 1.0 + 4.0 * ((i * 37) % 101) as f64 / 100.0,
                    n_raters: 10,
                    variance: 0.2,
                    meta: Some(ImageMeta {
                        kind: kinds[i % 4].into(),
                        level: 1 + (i % 3) as u8,
                        lenses: "0".into(),
                    }),
                })
                .collect(),
            excluded: vec![],
        }
    }

    #[test]
    fn split_is_stratified_and_seeded() {
        let t = table(100);
        let a = stratified_split(&t, 3, 0.8).unwrap();
        assert_eq!(a, stratified_split(&t, 3, 0.8).unwrap());
        assert_ne!(a, stratified_split(&t, 4, 0.8).unwrap());
        assert_eq!(a.len(), 20);
        assert_eq!(stratified_split(&t, 3, 0.0).unwrap().len(), 100);
        assert!(stratified_split(&t, 3, 1.0).is_err());
    }

    #[test]
    fn perfect_predictions() {
        let t = table(200);
        let pred = t.records.iter().map(|r| (r.image.clone(), r.mos)).collect();
        let rep = evaluate(&pred, &t, &EvalOptions::default()).unwrap();
        let labels: Vec<_> = rep.rows.iter().map(|r| r.group.as_str()).collect();
        assert_eq!(labels, REPORT_GROUPS);
        for r in &rep.rows {
            assert_eq!(r.status, GroupStatus::Fitted);
            assert!(r.plcc > 1.0 - 1e-9 && r.srcc == 1.0 && r.rmse < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn missing_prediction_is_an_error() {
        let t = table(20);
        let pred = BTreeMap::new();
        assert!(evaluate(&pred, &t, &EvalOptions::default()).is_err());
    }

    #[test]
    fn tiny_groups_degrade_to_finite_values() {
        let t = table(6);
        let pred = t.records.iter().map(|r| (r.image.clone(), r.mos * 2.0)).collect();
        let opts = EvalOptions { train_frac: 0.0, ..Default::default() };
        let rep = evaluate(&pred, &t, &opts).unwrap();
        assert!(rep.values().iter().all(|v| v.is_finite()));
        assert_eq!(rep.group("BD").unwrap().status, GroupStatus::Degenerate);
        assert_eq!(rep.group("Overall").unwrap().status, GroupStatus::Fitted);
    }

    #[test]
    fn infinite_scores_are_capped() {
        let t = table(40);
        let pred = t
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.image.clone(), if i == 0 { f64::INFINITY } else { r.mos }))
            .collect();
        let opts = EvalOptions { train_frac: 0.0, ..Default::default() };
        let rep = evaluate(&pred, &t, &opts).unwrap();
        assert!(rep.values().iter().all(|v| v.is_finite()));
    }
}
