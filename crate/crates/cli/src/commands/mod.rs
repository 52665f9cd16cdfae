//! Subcommand implementations. Each returns the one-line summary printed on success.

mod distort;
mod diversity;
mod evaluate;
mod forward;
mod metrics;
mod mos;
mod pipeline;
mod viewports;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use oiqa_core::io::{read_csv, DistortedRow};

use crate::args::Command;

pub use distort::distort_manifest;
pub use evaluate::{read_score_column, write_report};
pub use forward::{forward_manifest, ModelSetup};
pub use viewports::render_viewports;

pub fn dispatch(cmd: Command) -> Result<String> {
    match cmd {
        Command::Distort(a) => distort::run(&a),
        Command::Viewports(a) => viewports::run(&a),
        Command::Metrics(a) => metrics::run(&a),
        Command::Mos(a) => mos::run(&a),
        Command::Diversity(a) => diversity::run(&a),
        Command::OiqandForward(a) => forward::run(&a),
        Command::Evaluate(a) => evaluate::run(&a),
        Command::Pipeline(a) => pipeline::run(&a),
    }
}

/// Relative manifest paths are taken from the manifest's own directory.
pub fn resolve(manifest: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new("")).join(p)
    }
}

/// An echo manifest row with its paths resolved.
#[derive(Clone, Debug)]
pub struct EchoEntry {
    pub row: DistortedRow,
    pub src: PathBuf,
    pub out: PathBuf,
}

pub fn read_echo(path: &Path) -> Result<Vec<EchoEntry>> {
    let rows: Vec<DistortedRow> = read_csv(path)?;
    let mut out: Vec<EchoEntry> = rows
        .into_iter()
        .map(|row| EchoEntry {
            src: resolve(path, &row.src_path),
            out: resolve(path, &row.out_path),
            row,
        })
        .collect();
    out.sort_by(|a, b| a.row.image_id.cmp(&b.row.image_id));
    if let Some(w) = out.windows(2).find(|w| w[0].row.image_id == w[1].row.image_id) {
        bail!("{}: duplicate image_id `{}`", path.display(), w[0].row.image_id);
    }
    Ok(out)
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Creates the parent directory of an output file.
pub fn create_parent(file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}
