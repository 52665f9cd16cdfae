use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use oiqa_core::io::{write_csv, PredictionRow};
use oiqa_core::viewport::read_viewport_set;
use oiqa_core::{ErpImage, Raster};
use oiqand::{
    load_weights, save_weights, CamAxis, FeatureStack, ForwardOutput, ModelConfig, ModelWeights, Oiqand,
    RandomProjectionBackbone, Upsample,
};
use rayon::prelude::*;

use super::viewports::render_viewports;
use super::{create_parent, read_echo};
use crate::args::{CamAxisArg, ForwardArgs, ModelOpts, UpsampleArg, ViewportOpts};

/// Weights plus the feature backbone used to score viewport sets.
pub struct ModelSetup {
    pub weights: ModelWeights,
    pub backbone: RandomProjectionBackbone,
}

impl ModelSetup {
    /// Loads `--weights` or initializes from `--seed`. Loaded weights must match
    /// the viewport count and size; the CAM axis and upsampling mode follow the flags.
    pub fn new(vp: &ViewportOpts, model: &ModelOpts) -> Result<Self> {
        let mut weights = match &model.weights {
            Some(p) => {
                let w = load_weights(p).with_context(|| p.display().to_string())?;
                let c = &w.config;
                if (c.m, c.height, c.width) != (vp.m, vp.size, vp.size) {
                    bail!(
                        "{} expects m={} and {}x{} viewports, got m={} size={}",
                        p.display(),
                        c.m,
                        c.width,
                        c.height,
                        vp.m,
                        vp.size
                    );
                }
                w
            }
            None => ModelWeights::init(ModelConfig::with_viewports(vp.m, vp.size, vp.size), model.seed)?,
        };
        weights.config.cam_axis = match model.cam_axis {
            CamAxisArg::Row => CamAxis::Row,
            CamAxisArg::Column => CamAxis::Column,
        };
        weights.config.upsample = match model.upsample {
            UpsampleArg::Bilinear => Upsample::Bilinear,
            UpsampleArg::Nearest => Upsample::Nearest,
        };
        weights.config.validate()?;
        Ok(Self {
            weights,
            backbone: RandomProjectionBackbone::new(model.seed),
        })
    }

    pub fn score(&self, viewports: &[Raster]) -> Result<ForwardOutput> {
        Ok(Oiqand::new(&self.weights).forward(viewports, &self.backbone)?)
    }

    pub fn score_features(&self, fs: &FeatureStack) -> Result<ForwardOutput> {
        Ok(Oiqand::new(&self.weights).forward_features(fs)?)
    }
}

fn score_erp(setup: &ModelSetup, erp: &ErpImage, vp: &ViewportOpts, dir: Option<&Path>) -> Result<ForwardOutput> {
    let set = render_viewports(erp, vp, dir)?;
    let rasters: Vec<Raster> = set.into_iter().map(|v| v.image).collect();
    setup.score(&rasters)
}

/// Scores every image of an echo manifest and writes `image_id,score` rows.
/// When `viewport_dir` is given, each viewport set is also written under it.
pub fn forward_manifest(
    setup: &ModelSetup,
    manifest: &Path,
    out: &Path,
    vp: &ViewportOpts,
    viewport_dir: Option<&Path>,
) -> Result<Vec<(String, ForwardOutput)>> {
    let entries = read_echo(manifest)?;
    let results: Vec<(String, ForwardOutput)> = entries
        .par_iter()
        .map(|e| {
            let id = &e.row.image_id;
            let erp = ErpImage::load_png(&e.out).with_context(|| e.out.display().to_string())?;
            let dir = viewport_dir.map(|d| d.join(id));
            let o = score_erp(setup, &erp, vp, dir.as_deref()).with_context(|| id.clone())?;
            Ok((id.clone(), o))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<PredictionRow> = results
        .iter()
        .map(|(id, o)| PredictionRow {
            image_id: id.clone(),
            score: o.q.to_string(),
        })
        .collect();
    create_parent(out)?;
    write_csv(out, &rows)?;
    Ok(results)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    create_parent(path)?;
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| path.display().to_string())
}

pub fn run(a: &ForwardArgs) -> Result<String> {
    let setup = ModelSetup::new(&a.viewport, &a.model)?;
    if let Some(p) = &a.save_weights {
        create_parent(p)?;
        save_weights(p, &setup.weights)?;
    }

    if let Some(manifest) = &a.manifest {
        let Some(out) = &a.out else {
            bail!("--manifest needs --out");
        };
        let results = forward_manifest(&setup, manifest, out, &a.viewport, None)?;
        if let Some(d) = &a.dump {
            let traces: BTreeMap<&str, &ForwardOutput> = results.iter().map(|(id, o)| (id.as_str(), o)).collect();
            write_json(d, &traces)?;
        }
        return Ok(format!("oiqand-forward: scored {} images into {}", results.len(), out.display()));
    }

    let output = if let Some(f) = &a.features {
        setup.score_features(&FeatureStack::load(f).with_context(|| f.display().to_string())?)?
    } else if let Some(dir) = &a.viewports {
        let set = read_viewport_set(dir).with_context(|| dir.display().to_string())?;
        setup.score(&set.into_iter().map(|v| v.image).collect::<Vec<_>>())?
    } else if let Some(erp) = &a.erp {
        let img = ErpImage::load_png(erp).with_context(|| erp.display().to_string())?;
        score_erp(&setup, &img, &a.viewport, None)?
    } else {
        bail!("one of --erp, --viewports, --features or --manifest is required");
    };
    if let Some(d) = &a.dump {
        write_json(d, &output)?;
    }
    Ok(format!("oiqand-forward: q = {}", output.q))
}
