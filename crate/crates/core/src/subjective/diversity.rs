//! Content-diversity descriptors, reported in 8-bit units.

use super::stats::{mean, population_std};
use crate::image::Raster;

/// Standard deviation of the Sobel gradient magnitude of the luma plane over
/// interior pixels.
pub fn spatial_information(img: &Raster) -> f64 {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return 0.0;
    }
    let luma: Vec<f64> = img.luma().into_iter().map(|v| v * 255.0).collect();
    let at = |x: usize, y: usize| luma[y * w + x];
    let mut mags = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            mags.push(gx.hypot(gy));
        }
    }
    population_std(&mags)
}

/// Opponent-channel colorfulness: `sqrt(var_rg + var_yb) + 0.3 * sqrt(mean_rg^2 + mean_yb^2)`.
pub fn colorfulness(img: &Raster) -> f64 {
    let (rg, yb): (Vec<f64>, Vec<f64>) = img
        .data()
        .chunks_exact(3)
        .map(|p| {
            let (r, g, b) = (p[0] * 255.0, p[1] * 255.0, p[2] * 255.0);
            (r - g, 0.5 * (r + g) - b)
        })
        .unzip();
    let sd = population_std(&rg).hypot(population_std(&yb));
    let mu = mean(&rg).hypot(mean(&yb));
    sd + 0.3 * mu
}
