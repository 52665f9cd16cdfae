//! Subjective-score processing: rater screening, MOS, and content diversity.

mod diversity;
mod screening;
pub mod stats;
mod summary;

use std::collections::{BTreeMap, BTreeSet};

pub use diversity::{colorfulness, spatial_information};
pub use screening::{beta2, beta2_normality, screen_subjects, ScreeningMode, ScreeningOutcome, SubjectReport};
pub use summary::{mos_statistics, GroupSummary, HISTOGRAM_BINS};

use crate::error::{Error, Result};

pub const MIN_RATING: f64 = 1.0;
pub const MAX_RATING: f64 = 5.0;

/// One rating of one image by one subject.
#[derive(Clone, Debug, PartialEq)]
pub struct Rating {
    pub subject: String,
    pub image: String,
    pub score: f64,
}

/// Ratings indexed `[subject][image]`, with ids kept sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    subjects: Vec<String>,
    images: Vec<String>,
    scores: Vec<Vec<Option<f64>>>,
}

impl ScoreMatrix {
    /// Builds a matrix from raw ratings. A repeated (subject, image) pair keeps
    /// the last rating.
    pub fn from_ratings(ratings: &[Rating]) -> Result<Self> {
        let m = Self::build(ratings)?;
        for (i, id) in m.images.iter().enumerate() {
            if m.image_ratings(i).len() < 2 {
                return Err(Error::Invariant(format!("image `{id}` has fewer than 2 ratings")));
            }
        }
        Ok(m)
    }

    fn build(ratings: &[Rating]) -> Result<Self> {
        if let Some(r) = ratings.iter().find(|r| !(MIN_RATING..=MAX_RATING).contains(&r.score)) {
            return Err(Error::Domain(format!(
                "rating {} by `{}` for `{}` outside [1, 5]",
                r.score, r.subject, r.image
            )));
        }
        let subjects: Vec<String> = ratings.iter().map(|r| r.subject.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let images: Vec<String> = ratings.iter().map(|r| r.image.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let s_idx: BTreeMap<&str, usize> = subjects.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let i_idx: BTreeMap<&str, usize> = images.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut scores = vec![vec![None; images.len()]; subjects.len()];
        for r in ratings {
            scores[s_idx[r.subject.as_str()]][i_idx[r.image.as_str()]] = Some(r.score);
        }
        Ok(Self { subjects, images, scores })
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    pub fn images(&self) -> &[String] {
        &self.images
    }

    pub fn get(&self, subject: usize, image: usize) -> Option<f64> {
        self.scores[subject][image]
    }

    /// Available ratings of image `i`, in subject order.
    pub fn image_ratings(&self, i: usize) -> Vec<f64> {
        self.scores.iter().filter_map(|row| row[i]).collect()
    }

    pub fn ratings(&self) -> Vec<Rating> {
        let mut out = Vec::new();
        for (s, row) in self.scores.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                if let Some(score) = v {
                    out.push(Rating {
                        subject: self.subjects[s].clone(),
                        image: self.images[i].clone(),
                        score: *score,
                    });
                }
            }
        }
        out
    }

    /// Copy without the given subjects' rows.
    pub fn without_subjects(&self, drop: &BTreeSet<&str>) -> Self {
        let keep: Vec<usize> = (0..self.subjects.len())
            .filter(|&s| !drop.contains(self.subjects[s].as_str()))
            .collect();
        Self {
            subjects: keep.iter().map(|&s| self.subjects[s].clone()).collect(),
            images: self.images.clone(),
            scores: keep.iter().map(|&s| self.scores[s].clone()).collect(),
        }
    }

    pub(crate) fn clear(&mut self, subject: usize, image: usize) {
        self.scores[subject][image] = None;
    }
}

/// Distortion metadata of one image; pristine images use kind `none`, level 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageMeta {
    pub kind: String,
    pub level: u8,
    /// Lens indices as written in manifests, e.g. `0-3`; empty for pristine.
    pub lenses: String,
}

impl ImageMeta {
    pub fn pristine() -> Self {
        Self {
            kind: "none".into(),
            level: 0,
            lenses: String::new(),
        }
    }

    pub fn lens_count(&self) -> usize {
        self.lenses.split(['-', ';', ' ', '|']).filter(|t| !t.is_empty()).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MosRecord {
    pub image: String,
    pub mos: f64,
    pub n_raters: usize,
    /// Sample variance of the retained ratings.
    pub variance: f64,
    pub meta: Option<ImageMeta>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MosTable {
    pub records: Vec<MosRecord>,
    /// Images left without any retained rating.
    pub excluded: Vec<String>,
}

impl MosTable {
    pub fn attach_metadata(&mut self, meta: &BTreeMap<String, ImageMeta>) {
        for r in &mut self.records {
            r.meta = meta.get(&r.image).cloned();
        }
    }

    pub fn get(&self, image: &str) -> Option<&MosRecord> {
        self.records.iter().find(|r| r.image == image)
    }
}

/// Mean of the retained ratings of each image.
pub fn compute_mos(retained: &ScoreMatrix) -> MosTable {
    let mut table = MosTable::default();
    for (i, id) in retained.images().iter().enumerate() {
        let r = retained.image_ratings(i);
        if r.is_empty() {
            table.excluded.push(id.clone());
            continue;
        }
        table.records.push(MosRecord {
            image: id.clone(),
            mos: stats::mean(&r),
            n_raters: r.len(),
            variance: stats::sample_variance(&r),
            meta: None,
        });
    }
    table
}

/// How re-rated images combine their two stages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StageMerge {
    /// Keep stage-1 and stage-2 ratings together.
    #[default]
    Pool,
    /// Use stage-2 ratings only.
    Replace,
}

/// Two-stage protocol: images in the lowest quarter of stage-1 rating variance
/// keep their stage-1 ratings; the rest take stage-2 ratings per `merge`.
/// A subject rating the same image in both stages keeps the stage-2 rating.
pub fn merge_two_stages(stage1: &ScoreMatrix, stage2: &ScoreMatrix, merge: StageMerge) -> Result<ScoreMatrix> {
    let mut by_var: Vec<(f64, &str)> = stage1
        .images()
        .iter()
        .enumerate()
        .map(|(i, id)| (stats::sample_variance(&stage1.image_ratings(i)), id.as_str()))
        .collect();
    by_var.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    let stable: BTreeSet<&str> = by_var
        .iter()
        .take(by_var.len().div_ceil(4))
        .map(|(_, id)| *id)
        .collect();

    let mut ratings: Vec<Rating> = stage1
        .ratings()
        .into_iter()
        .filter(|r| stable.contains(r.image.as_str()) || merge == StageMerge::Pool)
        .collect();
    ratings.extend(stage2.ratings().into_iter().filter(|r| !stable.contains(r.image.as_str())));
    ScoreMatrix::build(&ratings)
}
