//! CSV schemas shared by the command-line tools.
//!
//! Every file carries a header row; `image_id` is the file stem of the image.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::parse_score;
use crate::subjective::{ImageMeta, MosRecord, MosTable, Rating};

/// Reads all records, reporting the offending line on failure.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for rec in reader.deserialize() {
        out.push(rec.map_err(|e| parse_error(path, &e))?);
    }
    Ok(out)
}

fn parse_error(path: &Path, e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    Error::Parse {
        path: path.display().to_string(),
        line,
        message,
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// File stem used as `image_id`.
pub fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Input row of the distortion manifest. Kind `none` copies the source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortRow {
    pub src_path: String,
    pub kind: String,
    pub level: u8,
    #[serde(default)]
    pub lenses: String,
    pub seed: u64,
    /// Optional explicit output id.
    #[serde(default)]
    pub image_id: Option<String>,
}

impl DistortRow {
    /// `image_id` if given, else `<stem>` for pristine rows and
    /// `<stem>_<KIND><level>_L<lenses>_s<seed>` otherwise.
    pub fn output_id(&self) -> String {
        if let Some(id) = self.image_id.as_ref().filter(|s| !s.is_empty()) {
            return id.clone();
        }
        let stem = image_id(Path::new(&self.src_path));
        if self.kind.eq_ignore_ascii_case("none") {
            stem
        } else {
            format!("{stem}_{}{}_L{}_s{}", self.kind, self.level, self.lenses, self.seed)
        }
    }
}

/// Echo manifest row written after distortion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortedRow {
    pub image_id: String,
    pub src_path: String,
    pub kind: String,
    pub level: u8,
    pub lenses: String,
    pub seed: u64,
    pub out_path: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingRow {
    pub subject_id: String,
    pub image_id: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaRow {
    pub image_id: String,
    pub kind: String,
    pub level: u8,
    #[serde(default)]
    pub lenses: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MosRow {
    pub image_id: String,
    pub mos: f64,
    pub n_raters: usize,
    pub variance: f64,
    #[serde(default)]
    pub kind: String,
    #[serde(default)]
    pub level: Option<u8>,
    #[serde(default)]
    pub lenses: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub image_id: String,
    /// Numeric text; `inf` allowed.
    pub score: String,
}

pub fn read_ratings(path: &Path) -> Result<Vec<Rating>> {
    let rows: Vec<RatingRow> = read_csv(path)?;
    Ok(rows
        .into_iter()
        .map(|r| Rating {
            subject: r.subject_id,
            image: r.image_id,
            score: r.score,
        })
        .collect())
}

pub fn read_metadata(path: &Path) -> Result<BTreeMap<String, ImageMeta>> {
    let rows: Vec<MetaRow> = read_csv(path)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            (
                r.image_id,
                ImageMeta {
                    kind: r.kind,
                    level: r.level,
                    lenses: r.lenses,
                },
            )
        })
        .collect())
}

pub fn mos_rows(t: &MosTable) -> Vec<MosRow> {
    t.records
        .iter()
        .map(|r| MosRow {
            image_id: r.image.clone(),
            mos: r.mos,
            n_raters: r.n_raters,
            variance: r.variance,
            kind: r.meta.as_ref().map(|m| m.kind.clone()).unwrap_or_default(),
            level: r.meta.as_ref().map(|m| m.level),
            lenses: r.meta.as_ref().map(|m| m.lenses.clone()).unwrap_or_default(),
        })
        .collect()
}

pub fn read_mos(path: &Path) -> Result<MosTable> {
    let rows: Vec<MosRow> = read_csv(path)?;
    let records = rows
        .into_iter()
        .map(|r| MosRecord {
            meta: (!r.kind.is_empty()).then(|| ImageMeta {
                kind: r.kind,
                level: r.level.unwrap_or(0),
                lenses: r.lenses,
            }),
            image: r.image_id,
            mos: r.mos,
            n_raters: r.n_raters,
            variance: r.variance,
        })
        .collect();
    Ok(MosTable {
        records,
        excluded: Vec::new(),
    })
}

pub fn read_predictions(path: &Path) -> Result<BTreeMap<String, f64>> {
    let rows: Vec<PredictionRow> = read_csv(path)?;
    rows.into_iter()
        .enumerate()
        .map(|(k, r)| {
            let v = parse_score(&r.score).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: k as u64 + 2,
                message: e.to_string(),
            })?;
            Ok((r.image_id, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        std::fs::write(&p, "subject_id,image_id,score\na,x,3\nb,x,three\n").unwrap();
        let err = read_ratings(&p).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn manifest_ids() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(&p, "src_path,kind,level,lenses,seed\nimgs/a.png,GN,2,0-3,7\nimgs/a.png,none,0,,0\n").unwrap();
        let rows: Vec<DistortRow> = read_csv(&p).unwrap();
        assert_eq!(rows[0].output_id(), "a_GN2_L0-3_s7");
        assert_eq!(rows[1].output_id(), "a");
        std::fs::write(&p, "src_path,kind,level,lenses,seed,image_id\nimgs/a.png,GN,2,0-3,7,custom\n").unwrap();
        let rows: Vec<DistortRow> = read_csv(&p).unwrap();
        assert_eq!(rows[0].output_id(), "custom");
    }

    #[test]
    fn predictions_accept_inf() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        std::fs::write(&p, "image_id,score\na,inf\nb,2.5\n").unwrap();
        let m = read_predictions(&p).unwrap();
        assert_eq!(m["a"], f64::INFINITY);
        assert_eq!(m["b"], 2.5);
        std::fs::write(&p, "image_id,score\na,1\nb,bad\n").unwrap();
        assert!(matches!(read_predictions(&p), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn mos_roundtrip_keeps_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("mos.csv");
        let t = MosTable {
            records: vec![
                MosRecord {
                    image: "a".into(),
                    mos: 3.5,
                    n_raters: 4,
                    variance: 0.25,
                    meta: Some(ImageMeta { kind: "GN".into(), level: 2, lenses: "0-3".into() }),
                },
                MosRecord { image: "b".into(), mos: 2.0, n_raters: 2, variance: 0.0, meta: None },
            ],
            excluded: vec![],
        };
        write_csv(&p, &mos_rows(&t)).unwrap();
        assert_eq!(read_mos(&p).unwrap(), t);
    }
}
