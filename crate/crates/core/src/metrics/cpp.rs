//! Craster parabolic (equal-area) reprojection and CPP-PSNR.

use std::f64::consts::PI;

use super::{psnr_from_mse, FullReferenceMetric};
use crate::error::Result;
use crate::geometry::{dir_to_erp, sample_bilinear, SphereDirection};
use crate::image::{ensure_same_dims, ErpImage};

/// Craster projection raster; samples of invalid pixels are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CppProjection {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
    pub valid: Vec<bool>,
}

impl CppProjection {
    pub fn valid_fraction(&self) -> f64 {
        self.valid.iter().filter(|v| **v).count() as f64 / self.valid.len() as f64
    }
}

/// Forward mapping `(lat, lon) -> (x, y)` in projection units.
pub fn craster_forward(lat: f64, lon: f64) -> (f64, f64) {
    let x = (3.0 / PI).sqrt() * lon * (2.0 * (2.0 * lat / 3.0).cos() - 1.0);
    let y = (3.0 * PI).sqrt() * (lat / 3.0).sin();
    (x, y)
}

/// Inverse mapping; `None` outside the parabolic footprint.
fn craster_inverse(x: f64, y: f64) -> Option<SphereDirection> {
    let s = y / (3.0 * PI).sqrt();
    if s.abs() > 0.5 {
        return None;
    }
    let lat = 3.0 * s.asin();
    let scale = (3.0 / PI).sqrt() * (2.0 * (2.0 * lat / 3.0).cos() - 1.0);
    if scale <= 0.0 {
        return None;
    }
    let lon = x / scale;
    if lon.abs() > PI {
        return None;
    }
    Some(SphereDirection::normalized(lat, lon))
}

/// Resamples `src` onto an `out_width x out_height` Craster raster whose bounding
/// box is `[-sqrt(3pi), sqrt(3pi)] x [-sqrt(3pi)/2, sqrt(3pi)/2]`.
pub fn cpp_project(src: &ErpImage, out_width: usize, out_height: usize) -> CppProjection {
    let x_max = (3.0 * PI).sqrt();
    let y_max = x_max / 2.0;
    let dims = src.dims();
    let mut data = vec![0.0; out_width * out_height * 3];
    let mut valid = vec![false; out_width * out_height];
    for j in 0..out_height {
        let y = (1.0 - 2.0 * (j as f64 + 0.5) / out_height as f64) * y_max;
        for i in 0..out_width {
            let x = (2.0 * (i as f64 + 0.5) / out_width as f64 - 1.0) * x_max;
            if let Some(dir) = craster_inverse(x, y) {
                let k = j * out_width + i;
                valid[k] = true;
                data[k * 3..k * 3 + 3].copy_from_slice(&sample_bilinear(src, dir_to_erp(dir, dims)));
            }
        }
    }
    CppProjection {
        width: out_width,
        height: out_height,
        data,
        valid,
    }
}

/// PSNR over valid pixels of both projections, at the source resolution.
pub fn cpp_psnr(reference: &ErpImage, distorted: &ErpImage) -> Result<f64> {
    ensure_same_dims(reference, distorted)?;
    let (w, h) = (reference.width(), reference.height());
    let r = cpp_project(reference, w, h);
    let d = cpp_project(distorted, w, h);
    let mut acc = 0.0;
    let mut count = 0usize;
    for (k, ok) in r.valid.iter().enumerate() {
        if *ok {
            for c in 0..3 {
                let e = r.data[k * 3 + c] - d.data[k * 3 + c];
                acc += e * e;
            }
            count += 3;
        }
    }
    Ok(psnr_from_mse(acc / count as f64))
}

pub struct CppPsnr;

impl FullReferenceMetric for CppPsnr {
    fn name(&self) -> &'static str {
        "cpp_psnr"
    }

    fn score(&self, reference: &ErpImage, distorted: &ErpImage) -> Result<f64> {
        cpp_psnr(reference, distorted)
    }
}
