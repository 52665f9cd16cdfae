#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oiqa_core::Raster;

pub fn oiqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oiqa"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Smooth colour field plus fine texture so every distortion is visible.
pub fn write_erp(path: &Path, width: usize, phase: f64) {
    let h = width / 2;
    Raster::from_fn(width, h, |x, y| {
        let u = x as f64 / width as f64 * std::f64::consts::TAU;
        let v = y as f64 / h as f64 * std::f64::consts::PI;
        let tex = 0.08 * ((x * 7 + y * 13) % 11) as f64 / 11.0;
        [
            0.45 + 0.3 * (u + phase).sin() * v.sin() + tex,
            0.5 + 0.25 * (2.0 * u - phase).cos() + tex,
            0.4 + 0.2 * (3.0 * v + phase).sin(),
        ]
    })
    .unwrap()
    .save_png(path)
    .unwrap();
}

/// Pristine source, one GN level-1 copy and one ST level-3 copy.
pub fn toy_corpus(dir: &Path, width: usize) -> (PathBuf, PathBuf) {
    write_erp(&dir.join("scene.png"), width, 0.4);
    let manifest = dir.join("manifest.csv");
    std::fs::write(
        &manifest,
        "src_path,kind,level,lenses,seed\n\
         scene.png,none,0,,0\n\
         scene.png,GN,1,2,11\n\
         scene.png,ST,3,0-3,12\n",
    )
    .unwrap();
    let mos = dir.join("mos.csv");
    std::fs::write(
        &mos,
        "image_id,mos,n_raters,variance\n\
         scene,4.6,10,0.2\n\
         scene_GN1_L2_s11,3.1,10,0.5\n\
         scene_ST3_L0-3_s12,1.8,10,0.4\n",
    )
    .unwrap();
    (manifest, mos)
}

pub fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}
