use std::path::PathBuf;

use anyhow::{Context, Result};
use oiqa_core::io::image_id;
use oiqa_core::subjective::{colorfulness, spatial_information};
use oiqa_core::Raster;
use rayon::prelude::*;

use super::{create_parent, read_echo};
use crate::args::DiversityArgs;

pub fn run(a: &DiversityArgs) -> Result<String> {
    let mut items: Vec<(String, PathBuf)> = if let Some(dir) = &a.images {
        let mut v = Vec::new();
        for entry in std::fs::read_dir(dir).with_context(|| dir.display().to_string())? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
                v.push((image_id(&p), p));
            }
        }
        v
    } else {
        let manifest = a.manifest.as_ref().expect("clap requires --images or --manifest");
        read_echo(manifest)?.into_iter().map(|e| (e.row.image_id, e.out)).collect()
    };
    items.sort();

    let values: Vec<(f64, f64)> = items
        .par_iter()
        .map(|(_, p)| {
            let img = Raster::load_png(p).with_context(|| p.display().to_string())?;
            Ok((spatial_information(&img), colorfulness(&img)))
        })
        .collect::<Result<_>>()?;

    create_parent(&a.out)?;
    let mut w = csv::Writer::from_path(&a.out)?;
    w.write_record(["image_id", "si", "cf"])?;
    for ((id, _), (si, cf)) in items.iter().zip(&values) {
        w.write_record([id.clone(), si.to_string(), cf.to_string()])?;
    }
    w.flush()?;
    Ok(format!("diversity: {} images into {}", items.len(), a.out.display()))
}
