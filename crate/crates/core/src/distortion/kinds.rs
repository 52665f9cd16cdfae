//! The four built-in non-uniform distortion kinds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mask::{lens_center_deg, wrap_deg, SECTOR_DEG};
use super::{Distortion, DistortionContext};
use crate::geometry::{dir_to_erp, pixel_center_dir, sample_bilinear, SphereDirection};
use crate::image::ErpImage;

/// Reference width the pixel-valued parameters are expressed at.
pub const WORKING_WIDTH: f64 = 1024.0;

/// Additive zero-mean Gaussian noise.
///
/// One standard-normal field is drawn per seed and scaled by the level's
/// sigma, so levels differ only in amplitude.
pub struct GaussianNoise;

impl Distortion for GaussianNoise {
    fn name(&self) -> &'static str {
        "GN"
    }

    fn render(&self, src: &ErpImage, ctx: &DistortionContext<'_>) -> Vec<f64> {
        let sigma = ctx.params.gn_sigma[ctx.level.index()];
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        src.data()
            .iter()
            .map(|v| {
                let z: f64 = StandardNormal.sample(&mut rng);
                v + sigma * z
            })
            .collect()
    }
}

/// Separable Gaussian blur, wrapping horizontally and clamping vertically.
pub struct GaussianBlur;

pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|k| k / total).collect()
}

pub(crate) fn blur(src: &ErpImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (src.width(), src.height());
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let data = src.data();
    let mut horiz = vec![0.0; data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (t, k) in kernel.iter().enumerate() {
                let sx = (x as isize + t as isize - radius).rem_euclid(w as isize) as usize;
                let i = (y * w + sx) * 3;
                for c in 0..3 {
                    acc[c] += k * data[i + c];
                }
            }
            let o = (y * w + x) * 3;
            horiz[o..o + 3].copy_from_slice(&acc);
        }
    }
    let mut out = vec![0.0; data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (t, k) in kernel.iter().enumerate() {
                let sy = (y as isize + t as isize - radius).clamp(0, h as isize - 1) as usize;
                let i = (sy * w + x) * 3;
                for c in 0..3 {
                    acc[c] += k * horiz[i + c];
                }
            }
            let o = (y * w + x) * 3;
            out[o..o + 3].copy_from_slice(&acc);
        }
    }
    out
}

impl Distortion for GaussianBlur {
    fn name(&self) -> &'static str {
        "GB"
    }

    fn render(&self, src: &ErpImage, ctx: &DistortionContext<'_>) -> Vec<f64> {
        let sigma = ctx.params.gb_sigma[ctx.level.index()] * src.width() as f64 / WORKING_WIDTH;
        blur(src, sigma)
    }
}

/// Gain applied to all three channels, which scales luma by the same factor.
pub struct BrightnessDiscontinuity;

impl Distortion for BrightnessDiscontinuity {
    fn name(&self) -> &'static str {
        "BD"
    }

    fn render(&self, src: &ErpImage, ctx: &DistortionContext<'_>) -> Vec<f64> {
        let gain = ctx.params.bd_gain[ctx.level.index()];
        src.data().iter().map(|v| v * gain).collect()
    }
}

/// Stitching artefacts: a radial barrel warp centered on each selected lens
/// sector plus a vertically displaced seam band just inside the sector edges.
pub struct StitchingDistortion;

impl Distortion for StitchingDistortion {
    fn name(&self) -> &'static str {
        "ST"
    }

    fn render(&self, src: &ErpImage, ctx: &DistortionContext<'_>) -> Vec<f64> {
        let p = ctx.params;
        let strength = p.st_strength[ctx.level.index()];
        let dims = src.dims();
        let scale = src.width() as f64 / WORKING_WIDTH;
        let deg_per_px = 360.0 / src.width() as f64;
        let band_deg = (p.st_band_px * scale).round().max(1.0) * deg_per_px;
        let seam_deg = p.st_seam_px * scale * strength * deg_per_px;
        let half = SECTOR_DEG / 2.0;
        let centers: Vec<f64> = ctx.lenses.indices().iter().map(|&k| lens_center_deg(k)).collect();

        let mut out = Vec::with_capacity(src.data().len());
        for y in 0..src.height() {
            for x in 0..src.width() {
                let d = pixel_center_dir(x, y, dims);
                let (lon, lat) = (d.lon.to_degrees(), d.lat.to_degrees());
                let (center, offset) = centers
                    .iter()
                    .map(|&c| (c, wrap_deg(lon, c)))
                    .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                    .expect("lens set is non-empty");
                let a = offset / half;
                let b = lat / 90.0;
                let shrink = 1.0 - p.st_warp * strength * (a * a + b * b);
                let mut src_lon = center + a * shrink * half;
                let mut src_lat = b * shrink * 90.0;
                let edge = half - offset.abs();
                if (0.0..band_deg).contains(&edge) {
                    src_lat += seam_deg * offset.signum();
                    src_lon = center + offset;
                }
                let dir = SphereDirection::normalized(src_lat.to_radians(), src_lon.to_radians());
                out.extend_from_slice(&sample_bilinear(src, dir_to_erp(dir, dims)));
            }
        }
        out
    }
}
