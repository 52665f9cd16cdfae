//! SSIM on the Rec.601 luma plane aggregated with cosine-latitude weights.

use super::weighted::ws_weights;
use super::FullReferenceMetric;
use crate::error::Result;
use crate::image::{ensure_same_dims, ErpImage};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn window_1d() -> [f64; SSIM_WINDOW] {
    let r = (SSIM_WINDOW / 2) as f64;
    let mut k = [0.0; SSIM_WINDOW];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - r;
        *v = (-(d * d) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.map(|v| v / s)
}

/// Gaussian-window local mean; wraps horizontally, clamps vertically.
fn filter(plane: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as isize;
    let mut horiz = vec![0.0; plane.len()];
    for y in 0..h {
        for x in 0..w {
            horiz[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(t, kv)| kv * plane[y * w + (x as isize + t as isize - r).rem_euclid(w as isize) as usize])
                .sum();
        }
    }
    let mut out = vec![0.0; plane.len()];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(t, kv)| kv * horiz[(y as isize + t as isize - r).clamp(0, h as isize - 1) as usize * w + x])
                .sum();
        }
    }
    out
}

/// Per-pixel SSIM of the luma planes, row-major.
pub fn ssim_map(reference: &ErpImage, distorted: &ErpImage) -> Result<Vec<f64>> {
    ensure_same_dims(reference, distorted)?;
    let (w, h) = (reference.width(), reference.height());
    let a = reference.luma();
    let b = distorted.luma();
    let k = window_1d();
    let prod = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * y).collect::<Vec<_>>();
    let mu_a = filter(&a, w, h, &k);
    let mu_b = filter(&b, w, h, &k);
    let e_aa = filter(&prod(&a, &a), w, h, &k);
    let e_bb = filter(&prod(&b, &b), w, h, &k);
    let e_ab = filter(&prod(&a, &b), w, h, &k);
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    Ok((0..w * h)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .collect())
}

pub fn ws_ssim(reference: &ErpImage, distorted: &ErpImage) -> Result<f64> {
    let map = ssim_map(reference, distorted)?;
    let w = reference.width();
    let weights = ws_weights(reference.height());
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, row) in map.chunks_exact(w).enumerate() {
        num += weights.row(j) * row.iter().sum::<f64>();
        den += weights.row(j) * w as f64;
    }
    Ok((num / den).clamp(-1.0, 1.0))
}

pub struct WsSsim;

impl FullReferenceMetric for WsSsim {
    fn name(&self) -> &'static str {
        "ws_ssim"
    }

    fn score(&self, reference: &ErpImage, distorted: &ErpImage) -> Result<f64> {
        ws_ssim(reference, distorted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured() -> ErpImage {
        ErpImage::from_fn(32, 16, |x, y| {
            let v = if (x / 2 + y / 2) % 2 == 0 { 0.1 } else { 0.9 };
            [v, v * 0.8, 1.0 - v]
        })
        .unwrap()
    }

    #[test]
    fn identical_is_one() {
        let a = textured();
        assert_eq!(ws_ssim(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn inverted_image_is_strongly_negative() {
        let a = textured();
        let inv = ErpImage::from_fn(32, 16, |x, y| a.pixel(x, y).map(|v| 1.0 - v)).unwrap();
        let s = ws_ssim(&a, &inv).unwrap();
        assert!(s < -0.5, "{s}");
    }

    #[test]
    fn tiny_offset_on_constant_is_near_one() {
        let a = ErpImage::filled(32, 16, [0.5; 3]).unwrap();
        let b = ErpImage::filled(32, 16, [0.501; 3]).unwrap();
        let s = ws_ssim(&a, &b).unwrap();
        assert!((s - 1.0).abs() < 1e-3 && s < 1.0, "{s}");
    }
}
