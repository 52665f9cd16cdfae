use std::collections::BTreeMap;

use anyhow::Result;
use oiqa_core::io::read_mos;
use oiqa_core::subjective::ImageMeta;

use super::distort::{distort_manifest, ECHO_MANIFEST};
use super::evaluate::{evaluate_table, summary_line, write_report};
use super::forward::{forward_manifest, ModelSetup};
use super::read_score_column;
use crate::args::PipelineArgs;

pub fn run(a: &PipelineArgs) -> Result<String> {
    let distorted = a.out.join("distorted");
    let echo = distort_manifest(&a.manifest, &distorted, &a.distortion)?;

    let setup = ModelSetup::new(&a.viewport, &a.model)?;
    let predictions = a.out.join("predictions.csv");
    forward_manifest(
        &setup,
        &distorted.join(ECHO_MANIFEST),
        &predictions,
        &a.viewport,
        Some(&a.out.join("viewports")),
    )?;

    let mut mos = read_mos(&a.mos)?;
    let meta: BTreeMap<&str, ImageMeta> = echo
        .iter()
        .map(|r| {
            (
                r.image_id.as_str(),
                ImageMeta {
                    kind: r.kind.clone(),
                    level: r.level,
                    lenses: r.lenses.clone(),
                },
            )
        })
        .collect();
    for rec in &mut mos.records {
        if rec.meta.is_none() {
            rec.meta = meta.get(rec.image.as_str()).cloned();
        }
    }

    let pred = read_score_column(&predictions, "score")?;
    let (report, opts) = evaluate_table(&pred, &mos, &a.eval)?;
    write_report(
        &report,
        "OIQAND",
        &a.out.join("report.csv"),
        Some(&a.out.join("report.json")),
        &opts,
    )?;
    Ok(format!("pipeline: {} images; {}", echo.len(), summary_line(&report)))
}
