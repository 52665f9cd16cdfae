//! Rater screening with the kurtosis-based interval width.

use std::collections::BTreeSet;

use super::stats::{central_moment, mean, sample_variance};
use super::ScoreMatrix;
use crate::error::{Error, Result};

/// Kurtosis `m4 / m2^2` from population central moments; `None` at zero variance.
pub fn beta2(scores: &[f64]) -> Option<f64> {
    let m2 = central_moment(scores, 2);
    if m2 == 0.0 {
        return None;
    }
    Some(central_moment(scores, 4) / (m2 * m2))
}

/// Interval width factor: 2 when `2 <= beta2 <= 4` (normal enough), else `sqrt(20)`.
/// Unanimous ratings count as normal.
pub fn beta2_normality(scores: &[f64]) -> Result<f64> {
    if scores.len() < 2 {
        return Err(Error::Domain("normality test needs at least 2 ratings".into()));
    }
    Ok(match beta2(scores) {
        Some(b) if !(2.0..=4.0).contains(&b) => 20f64.sqrt(),
        _ => 2.0,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScreeningMode {
    /// Accumulate P/Q per subject over all images it rated and drop whole subjects.
    #[default]
    PerSubject,
    /// Apply the rule per image over its raters and drop only that image's
    /// out-of-interval ratings.
    PerImage,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubjectReport {
    pub subject: String,
    /// Ratings above the image's upper interval bound.
    pub p: usize,
    /// Ratings below the lower bound.
    pub q: usize,
    pub n_images: usize,
    pub rejected: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreeningOutcome {
    pub retained: ScoreMatrix,
    pub rejected: Vec<String>,
    pub report: Vec<SubjectReport>,
}

/// `(P + Q) / N > 0.05` and `|P - Q| / (P + Q) < 0.3`.
fn rejects(p: usize, q: usize, n: usize) -> bool {
    let pq = (p + q) as f64;
    p + q > 0 && pq / n as f64 > 0.05 && (p as f64 - q as f64).abs() / pq < 0.3
}

struct Interval {
    low: f64,
    high: f64,
}

fn image_interval(ratings: &[f64]) -> Option<Interval> {
    if ratings.len() < 2 {
        return None;
    }
    let mu = mean(ratings);
    let sigma = sample_variance(ratings).sqrt();
    let n = beta2_normality(ratings).ok()?;
    Some(Interval {
        low: mu - n * sigma,
        high: mu + n * sigma,
    })
}

pub fn screen_subjects(m: &ScoreMatrix, mode: ScreeningMode) -> ScreeningOutcome {
    let intervals: Vec<Option<Interval>> = (0..m.images().len()).map(|i| image_interval(&m.image_ratings(i))).collect();

    let mut report: Vec<SubjectReport> = m
        .subjects()
        .iter()
        .map(|s| SubjectReport {
            subject: s.clone(),
            p: 0,
            q: 0,
            n_images: 0,
            rejected: false,
        })
        .collect();
    for (s, rep) in report.iter_mut().enumerate() {
        for (i, iv) in intervals.iter().enumerate() {
            let Some(v) = m.get(s, i) else { continue };
            rep.n_images += 1;
            if let Some(iv) = iv {
                if v > iv.high {
                    rep.p += 1;
                } else if v < iv.low {
                    rep.q += 1;
                }
            }
        }
    }

    match mode {
        ScreeningMode::PerSubject => {
            for rep in &mut report {
                rep.rejected = rejects(rep.p, rep.q, rep.n_images);
            }
            let rejected: Vec<String> = report.iter().filter(|r| r.rejected).map(|r| r.subject.clone()).collect();
            let drop: BTreeSet<&str> = rejected.iter().map(String::as_str).collect();
            ScreeningOutcome {
                retained: m.without_subjects(&drop),
                rejected,
                report,
            }
        }
        ScreeningMode::PerImage => {
            let mut retained = m.clone();
            for (i, iv) in intervals.iter().enumerate() {
                let Some(iv) = iv else { continue };
                let rated: Vec<(usize, f64)> = (0..m.subjects().len()).filter_map(|s| m.get(s, i).map(|v| (s, v))).collect();
                let p = rated.iter().filter(|(_, v)| *v > iv.high).count();
                let q = rated.iter().filter(|(_, v)| *v < iv.low).count();
                if rejects(p, q, rated.len()) {
                    for (s, v) in rated {
                        if v > iv.high || v < iv.low {
                            retained.clear(s, i);
                        }
                    }
                }
            }
            ScreeningOutcome {
                retained,
                rejected: Vec::new(),
                report,
            }
        }
    }
}
