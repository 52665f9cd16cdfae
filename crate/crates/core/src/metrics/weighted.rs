use std::f64::consts::PI;

use super::{psnr_from_mse, FullReferenceMetric};
use crate::error::Result;
use crate::image::{ensure_same_dims, ErpImage};

/// Per-row cosine-latitude weights of an equirectangular raster.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    rows: Vec<f64>,
}

impl WeightField {
    pub fn row(&self, j: usize) -> f64 {
        self.rows[j]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }
}

/// `w(j) = cos((j + 0.5 - height / 2) * pi / height)`.
pub fn ws_weights(height: usize) -> WeightField {
    let h = height as f64;
    WeightField {
        rows: (0..height).map(|j| ((j as f64 + 0.5 - h / 2.0) * PI / h).cos()).collect(),
    }
}

/// Weighted-to-spherically-uniform PSNR; channels share the row weight.
pub fn ws_psnr(reference: &ErpImage, distorted: &ErpImage) -> Result<f64> {
    ensure_same_dims(reference, distorted)?;
    let weights = ws_weights(reference.height());
    let row_len = reference.width() * 3;
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, (r, d)) in reference
        .data()
        .chunks_exact(row_len)
        .zip(distorted.data().chunks_exact(row_len))
        .enumerate()
    {
        let sq: f64 = r.iter().zip(d).map(|(a, b)| (a - b) * (a - b)).sum();
        num += weights.row(j) * sq;
        den += weights.row(j) * row_len as f64;
    }
    Ok(psnr_from_mse(num / den))
}

pub struct WsPsnr;

impl FullReferenceMetric for WsPsnr {
    fn name(&self) -> &'static str {
        "ws_psnr"
    }

    fn score(&self, reference: &ErpImage, distorted: &ErpImage) -> Result<f64> {
        ws_psnr(reference, distorted)
    }
}
