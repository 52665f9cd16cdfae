use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use oiqa_core::eval::{evaluate, EvalOptions, FitScope, QualityReport};
use oiqa_core::io::{read_metadata, read_mos};
use oiqa_core::metrics::parse_score;
use oiqa_core::subjective::MosTable;
use serde_json::json;

use super::create_parent;
use crate::args::{EvalOpts, EvaluateArgs, FitArg};

/// `image_id -> value` from one column of a CSV; `inf` is accepted.
pub fn read_score_column(path: &Path, column: &str) -> Result<BTreeMap<String, f64>> {
    let origin = path.display();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{origin}: line 1: no `{name}` column"))
    };
    let (id_ix, col_ix) = (find("image_id")?, find(column)?);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            anyhow!("{origin}: line {line}: {e}")
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let (Some(id), Some(v)) = (rec.get(id_ix), rec.get(col_ix)) else {
            bail!("{origin}: line {line}: missing field");
        };
        let v = parse_score(v).map_err(|e| anyhow!("{origin}: line {line}: {e}"))?;
        if out.insert(id.to_string(), v).is_some() {
            bail!("{origin}: line {line}: duplicate image_id `{id}`");
        }
    }
    Ok(out)
}

pub fn eval_options(o: &EvalOpts) -> EvalOptions {
    EvalOptions {
        split_seed: o.split_seed,
        train_frac: o.train_frac,
        fit_scope: match o.fit {
            FitArg::PerGroup => FitScope::PerGroup,
            FitArg::Global => FitScope::Global,
        },
        score_cap: o.cap,
    }
}

/// One-row report CSV and, when `params` is given, the fitted mappings as JSON.
pub fn write_report(report: &QualityReport, method: &str, out: &Path, params: Option<&Path>, opts: &EvalOptions) -> Result<()> {
    create_parent(out)?;
    let mut w = csv::Writer::from_path(out)?;
    let mut header = vec!["method".to_string()];
    header.extend(QualityReport::header());
    w.write_record(&header)?;
    let mut rec = vec![method.to_string()];
    rec.extend(report.values().iter().map(f64::to_string));
    w.write_record(&rec)?;
    w.flush()?;

    if let Some(p) = params {
        let fit = match opts.fit_scope {
            FitScope::PerGroup => "per-group",
            FitScope::Global => "global",
        };
        let doc = json!({
            "method": method,
            "options": {
                "split_seed": opts.split_seed,
                "train_frac": opts.train_frac,
                "fit": fit,
                "cap": opts.score_cap,
            },
            "groups": report.rows,
            "test_images": report.test_images,
        });
        create_parent(p)?;
        std::fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    Ok(())
}

pub fn summary_line(report: &QualityReport) -> String {
    match report.group("Overall") {
        Some(g) => format!(
            "Overall PLCC={:.4} SRCC={:.4} RMSE={:.4} on {} test images",
            g.plcc,
            g.srcc,
            g.rmse,
            report.test_images.len()
        ),
        None => "no overall group".into(),
    }
}

pub fn evaluate_table(pred: &BTreeMap<String, f64>, mos: &MosTable, o: &EvalOpts) -> Result<(QualityReport, EvalOptions)> {
    let opts = eval_options(o);
    Ok((evaluate(pred, mos, &opts)?, opts))
}

pub fn run(a: &EvaluateArgs) -> Result<String> {
    let pred = read_score_column(&a.pred, &a.column)?;
    let mut mos = read_mos(&a.mos)?;
    if let Some(meta) = &a.meta {
        mos.attach_metadata(&read_metadata(meta)?);
    }
    let (report, opts) = evaluate_table(&pred, &mos, &a.eval)?;
    write_report(&report, &a.method, &a.out, a.params.as_deref(), &opts)?;
    Ok(format!("evaluate: {}", summary_line(&report)))
}
