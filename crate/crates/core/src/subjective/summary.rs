//! MOS distributions grouped by distortion kind, level and lens count.

use std::collections::BTreeMap;

use super::stats::{mean, quantile_sorted};
use super::{MosTable, MAX_RATING, MIN_RATING};

pub const HISTOGRAM_BINS: usize = 8;

/// Five-number summary and histogram of one group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    /// `all`, `kind`, `level` or `lenses`.
    pub grouping: &'static str,
    pub group: String,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Counts over equal-width bins spanning `[1, 5]`.
    pub histogram: [usize; HISTOGRAM_BINS],
}

fn summarize(grouping: &'static str, group: String, mut v: Vec<f64>) -> GroupSummary {
    v.sort_by(f64::total_cmp);
    let mut histogram = [0; HISTOGRAM_BINS];
    let width = (MAX_RATING - MIN_RATING) / HISTOGRAM_BINS as f64;
    for x in &v {
        let b = (((x - MIN_RATING) / width) as usize).min(HISTOGRAM_BINS - 1);
        histogram[b] += 1;
    }
    GroupSummary {
        grouping,
        group,
        count: v.len(),
        mean: mean(&v),
        min: v[0],
        q1: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.5),
        q3: quantile_sorted(&v, 0.75),
        max: v[v.len() - 1],
        histogram,
    }
}

/// Groups that have no images produce no row. Images without metadata only
/// contribute to the `all` row.
pub fn mos_statistics(t: &MosTable) -> Vec<GroupSummary> {
    let mut out = Vec::new();
    if t.records.is_empty() {
        return out;
    }
    out.push(summarize("all", "all".into(), t.records.iter().map(|r| r.mos).collect()));
    let mut groups: BTreeMap<(&'static str, String), Vec<f64>> = BTreeMap::new();
    for r in &t.records {
        if let Some(m) = &r.meta {
            groups.entry(("kind", m.kind.clone())).or_default().push(r.mos);
            groups.entry(("level", m.level.to_string())).or_default().push(r.mos);
            groups.entry(("lenses", m.lens_count().to_string())).or_default().push(r.mos);
        }
    }
    let order = |g: &str| ["kind", "level", "lenses"].iter().position(|x| *x == g).unwrap_or(3);
    let mut keyed: Vec<_> = groups.into_iter().collect();
    keyed.sort_by(|a, b| order(a.0 .0).cmp(&order(b.0 .0)).then(a.0 .1.cmp(&b.0 .1)));
    out.extend(keyed.into_iter().map(|((g, k), v)| summarize(g, k, v)));
    out
}
