use std::path::Path;

use anyhow::{Context, Result};
use oiqa_core::viewport::{equatorial_viewport_set, write_viewport_set, Viewport, ViewportSpec};
use oiqa_core::ErpImage;
use rayon::prelude::*;

use super::read_echo;
use crate::args::{ViewportArgs, ViewportOpts};

pub fn viewport_spec(o: &ViewportOpts) -> ViewportSpec {
    ViewportSpec {
        fov: o.fov,
        out_width: o.size,
        out_height: o.size,
        ..ViewportSpec::default()
    }
}

/// The equatorial set of `erp`, written to `dir` when given.
pub fn render_viewports(erp: &ErpImage, o: &ViewportOpts, dir: Option<&Path>) -> Result<Vec<Viewport>> {
    let set = equatorial_viewport_set(erp, o.m, viewport_spec(o))?;
    if let Some(dir) = dir {
        write_viewport_set(dir, &set).with_context(|| format!("writing {}", dir.display()))?;
    }
    Ok(set)
}

pub fn run(a: &ViewportArgs) -> Result<String> {
    if let Some(erp) = &a.erp {
        let img = ErpImage::load_png(erp).with_context(|| erp.display().to_string())?;
        render_viewports(&img, &a.viewport, Some(&a.out))?;
        return Ok(format!("viewports: wrote {} viewports to {}", a.viewport.m, a.out.display()));
    }
    let manifest = a.manifest.as_ref().expect("clap requires --erp or --manifest");
    let entries = read_echo(manifest)?;
    entries.par_iter().try_for_each(|e| -> Result<()> {
        let img = ErpImage::load_png(&e.out).with_context(|| e.out.display().to_string())?;
        render_viewports(&img, &a.viewport, Some(&a.out.join(&e.row.image_id)))?;
        Ok(())
    })?;
    Ok(format!(
        "viewports: wrote {} x {} viewports to {}",
        entries.len(),
        a.viewport.m,
        a.out.display()
    ))
}
