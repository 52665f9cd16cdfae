use anyhow::Result;
use oiqa_core::io::{mos_rows, read_metadata, read_ratings, write_csv};
use oiqa_core::subjective::{
    compute_mos, merge_two_stages, mos_statistics, screen_subjects, ScoreMatrix, ScreeningMode, StageMerge,
};

use super::create_parent;
use crate::args::{MergeArg, MosArgs, ScreenArg};

pub fn run(a: &MosArgs) -> Result<String> {
    let mut matrix = ScoreMatrix::from_ratings(&read_ratings(&a.ratings)?)?;
    if let Some(s2) = &a.stage2 {
        let stage2 = ScoreMatrix::from_ratings(&read_ratings(s2)?)?;
        let merge = match a.merge {
            MergeArg::Pool => StageMerge::Pool,
            MergeArg::Replace => StageMerge::Replace,
        };
        matrix = merge_two_stages(&matrix, &stage2, merge)?;
    }
    let n_subjects = matrix.subjects().len();
    let mode = match a.screening {
        ScreenArg::PerSubject => Some(ScreeningMode::PerSubject),
        ScreenArg::PerImage => Some(ScreeningMode::PerImage),
        ScreenArg::None => None,
    };
    let outcome = mode.map(|m| screen_subjects(&matrix, m));
    let retained = outcome.as_ref().map_or(&matrix, |o| &o.retained);

    let mut table = compute_mos(retained);
    if let Some(meta) = &a.meta {
        table.attach_metadata(&read_metadata(meta)?);
    }
    let mut rows = mos_rows(&table);
    rows.sort_by(|x, y| x.image_id.cmp(&y.image_id));
    create_parent(&a.out)?;
    write_csv(&a.out, &rows)?;

    if let (Some(path), Some(o)) = (&a.report, &outcome) {
        create_parent(path)?;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["subject_id", "p", "q", "n_images", "rejected"])?;
        for r in &o.report {
            w.write_record([
                r.subject.clone(),
                r.p.to_string(),
                r.q.to_string(),
                r.n_images.to_string(),
                r.rejected.to_string(),
            ])?;
        }
        w.flush()?;
    }
    if let Some(path) = &a.summary {
        create_parent(path)?;
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = ["grouping", "group", "count", "mean", "min", "q1", "median", "q3", "max"]
            .map(String::from)
            .to_vec();
        header.extend((0..oiqa_core::subjective::HISTOGRAM_BINS).map(|b| format!("hist_{b}")));
        w.write_record(&header)?;
        for g in mos_statistics(&table) {
            let mut rec = vec![g.grouping.to_string(), g.group.clone(), g.count.to_string()];
            rec.extend([g.mean, g.min, g.q1, g.median, g.q3, g.max].iter().map(f64::to_string));
            rec.extend(g.histogram.iter().map(usize::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }

    let rejected = outcome.as_ref().map_or(0, |o| o.rejected.len());
    Ok(format!(
        "mos: {} images ({} excluded), {rejected} of {n_subjects} subjects rejected",
        table.records.len(),
        table.excluded.len()
    ))
}
