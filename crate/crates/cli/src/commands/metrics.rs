use std::path::Path;

use anyhow::{bail, Context, Result};
use oiqa_core::metrics::{format_score, MetricRegistry};
use oiqa_core::ErpImage;
use rayon::prelude::*;

use super::{create_parent, read_echo};
use crate::args::MetricsArgs;

fn selected(a: &MetricsArgs) -> Result<(MetricRegistry, Vec<&'static str>)> {
    if a.points == 0 {
        bail!("--points must be positive");
    }
    let registry = MetricRegistry::builtin(a.points);
    let names = if a.metrics.is_empty() {
        registry.names()
    } else {
        a.metrics
            .iter()
            .map(|n| registry.get(n).map(|m| m.name()))
            .collect::<oiqa_core::Result<_>>()?
    };
    Ok((registry, names))
}

fn load(p: &Path) -> Result<ErpImage> {
    ErpImage::load_png(p).with_context(|| p.display().to_string())
}

pub fn run(a: &MetricsArgs) -> Result<String> {
    let (registry, names) = selected(a)?;
    let score = |r: &ErpImage, d: &ErpImage| -> Result<Vec<f64>> {
        names.iter().map(|n| Ok(registry.get(n)?.score(r, d)?)).collect()
    };

    let is_csv = |p: &Path| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let manifest = match (&a.manifest, &a.reference, &a.distorted) {
        (Some(m), None, None) => m.clone(),
        (None, Some(_), Some(d)) if is_csv(d) => d.clone(),
        (None, Some(r), Some(d)) => {
            let values = score(&load(r)?, &load(d)?)?;
            let parts: Vec<String> = names.iter().zip(&values).map(|(n, v)| format!("{n}={}", format_score(*v))).collect();
            return Ok(format!("metrics: {}", parts.join(" ")));
        }
        _ => bail!("give --manifest, --ref IMAGE --dist IMAGE, or --ref DIR --dist MANIFEST"),
    };
    let Some(out) = &a.out else {
        bail!("manifest mode needs --out");
    };
    let mut entries = read_echo(&manifest)?;
    if let Some(dir) = a.reference.as_ref().filter(|r| r.is_dir()) {
        for e in &mut entries {
            let name = e.src.file_name().with_context(|| format!("{}: no file name", e.src.display()))?;
            e.src = dir.join(name);
        }
    }
    let rows: Vec<Vec<f64>> = entries
        .par_iter()
        .map(|e| score(&load(&e.src)?, &load(&e.out)?).with_context(|| e.row.image_id.clone()))
        .collect::<Result<_>>()?;

    create_parent(out)?;
    let mut w = csv::Writer::from_path(out)?;
    let mut header = vec!["image_id"];
    header.extend(&names);
    w.write_record(&header)?;
    for (e, values) in entries.iter().zip(&rows) {
        let mut rec = vec![e.row.image_id.clone()];
        rec.extend(values.iter().map(|v| format_score(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(format!("metrics: scored {} images with {} metrics into {}", entries.len(), names.len(), out.display()))
}
