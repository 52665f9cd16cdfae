use std::path::Path;

use anyhow::{bail, Context, Result};
use oiqa_core::distortion::{DistortionParams, DistortionSpec, Distorter, DistortionRegistry, LensSet};
use oiqa_core::io::{read_csv, write_csv, DistortRow, DistortedRow};
use oiqa_core::ErpImage;
use rayon::prelude::*;

use super::{create_dir, resolve};
use crate::args::{DistortArgs, DistortionOpts};

pub const ECHO_MANIFEST: &str = "manifest.csv";

fn levels(flag: &str, s: &Option<String>, default: [f64; 3]) -> Result<[f64; 3]> {
    let Some(s) = s else { return Ok(default) };
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("--{flag}: `{t}` is not a number")))
        .collect::<Result<_>>()?;
    match <[f64; 3]>::try_from(v) {
        Ok(a) if a.iter().all(|x| x.is_finite()) => Ok(a),
        _ => bail!("--{flag} takes three finite values, one per level"),
    }
}

fn params(opts: &DistortionOpts) -> Result<DistortionParams> {
    let d = DistortionParams::default();
    Ok(DistortionParams {
        gn_sigma: levels("gn-sigma", &opts.gn_sigma, d.gn_sigma)?,
        gb_sigma: levels("gb-sigma", &opts.gb_sigma, d.gb_sigma)?,
        bd_gain: levels("bd-gain", &opts.bd_gain, d.bd_gain)?,
        st_strength: levels("st-strength", &opts.st_strength, d.st_strength)?,
        ..d
    })
}

fn is_pristine(kind: &str) -> bool {
    kind.eq_ignore_ascii_case("none")
}

/// Renders every manifest row into `out` and writes the echo manifest there.
/// Returns the echo rows sorted by image id.
pub fn distort_manifest(manifest: &Path, out: &Path, opts: &DistortionOpts) -> Result<Vec<DistortedRow>> {
    let distorter = Distorter::new(DistortionRegistry::builtin(), params(opts)?);
    let rows: Vec<DistortRow> = read_csv(manifest)?;
    let mut ids: Vec<String> = rows.iter().map(DistortRow::output_id).collect();
    ids.sort();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        bail!("{}: two rows produce image_id `{}`", manifest.display(), w[0]);
    }
    create_dir(out)?;

    let mut echo: Vec<DistortedRow> = rows
        .par_iter()
        .enumerate()
        .map(|(k, row)| {
            let at = || format!("{}: row {}", manifest.display(), k + 2);
            let src_path = resolve(manifest, &row.src_path);
            let src = ErpImage::load_png(&src_path).with_context(|| format!("{}: {}", at(), src_path.display()))?;
            let img = if is_pristine(&row.kind) {
                src
            } else {
                let spec = DistortionSpec::new(row.kind.clone(), row.level, LensSet::parse(&row.lenses).with_context(at)?)
                    .with_context(at)?
                    .with_feather(opts.feather);
                distorter.apply(&src, &spec, row.seed).with_context(at)?
            };
            let id = row.output_id();
            let file = format!("{id}.png");
            img.raster().save_png(out.join(&file))?;
            let src_abs = std::fs::canonicalize(&src_path)?;
            Ok(DistortedRow {
                image_id: id,
                src_path: src_abs.display().to_string(),
                kind: if is_pristine(&row.kind) { "none".into() } else { row.kind.clone() },
                level: if is_pristine(&row.kind) { 0 } else { row.level },
                lenses: if is_pristine(&row.kind) { String::new() } else { row.lenses.clone() },
                seed: row.seed,
                out_path: file,
            })
        })
        .collect::<Result<_>>()?;
    echo.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    write_csv(&out.join(ECHO_MANIFEST), &echo)?;
    Ok(echo)
}

pub fn run(a: &DistortArgs) -> Result<String> {
    let rows = distort_manifest(&a.manifest, &a.out, &a.distortion)?;
    Ok(format!(
        "distort: wrote {} images and {} to {}",
        rows.len(),
        ECHO_MANIFEST,
        a.out.display()
    ))
}
