use std::f64::consts::PI;

use super::{psnr_from_mse, FullReferenceMetric};
use crate::error::Result;
use crate::geometry::{dir_to_erp, sample_bilinear, SphereDirection};
use crate::image::{ensure_same_dims, ErpImage};

pub const DEFAULT_POINT_COUNT: usize = 655_362;

/// Near-uniform directions on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePointSet {
    points: Vec<SphereDirection>,
}

impl SpherePointSet {
    /// Fibonacci lattice: equal-area latitude bands with golden-angle longitude steps.
    pub fn fibonacci(n: usize) -> Self {
        let golden = PI * (3.0 - 5f64.sqrt());
        let points = (0..n)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                SphereDirection::normalized(z.asin(), i as f64 * golden)
            })
            .collect();
        Self { points }
    }

    pub fn from_points(points: Vec<SphereDirection>) -> Self {
        Self { points }
    }

    /// Every point shifted by `dlon` radians of longitude.
    pub fn rotated(&self, dlon: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| SphereDirection::normalized(p.lat, p.lon + dlon))
                .collect(),
        }
    }

    pub fn points(&self) -> &[SphereDirection] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// PSNR over bilinear samples of both images at each sphere point.
pub fn s_psnr(reference: &ErpImage, distorted: &ErpImage, pts: &SpherePointSet) -> Result<f64> {
    ensure_same_dims(reference, distorted)?;
    let dims = reference.dims();
    let mut acc = 0.0;
    for &p in pts.points() {
        let at = dir_to_erp(p, dims);
        let r = sample_bilinear(reference, at);
        let d = sample_bilinear(distorted, at);
        acc += r.iter().zip(&d).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(psnr_from_mse(acc / (3 * pts.len()) as f64))
}

pub struct SPsnr {
    points: SpherePointSet,
}

impl SPsnr {
    pub fn new(points: SpherePointSet) -> Self {
        Self { points }
    }
}

impl Default for SPsnr {
    fn default() -> Self {
        Self::new(SpherePointSet::fibonacci(DEFAULT_POINT_COUNT))
    }
}

impl FullReferenceMetric for SPsnr {
    fn name(&self) -> &'static str {
        "s_psnr"
    }

    fn score(&self, reference: &ErpImage, distorted: &ErpImage) -> Result<f64> {
        s_psnr(reference, distorted, &self.points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_is_near_uniform() {
        let pts = SpherePointSet::fibonacci(2000);
        let v: Vec<[f64; 3]> = pts.points().iter().map(|p| p.to_unit_vector()).collect();
        let nn: Vec<f64> = v
            .iter()
            .enumerate()
            .map(|(i, a)| {
                v.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let mean = nn.iter().sum::<f64>() / nn.len() as f64;
        let sd = (nn.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / nn.len() as f64).sqrt();
        assert!(sd / mean < 0.2, "cv {}", sd / mean);
    }

    #[test]
    fn constant_offset_matches_closed_form() {
        let a = ErpImage::filled(64, 32, [0.3; 3]).unwrap();
        let b = ErpImage::filled(64, 32, [0.35; 3]).unwrap();
        for n in [100, 5000] {
            let v = s_psnr(&a, &b, &SpherePointSet::fibonacci(n)).unwrap();
            let expect = 10.0 * (1.0 / (0.05f64 * 0.05)).log10();
            assert!((v - expect).abs() < 1e-6, "{v} vs {expect}");
        }
        assert_eq!(s_psnr(&a, &a, &SpherePointSet::fibonacci(10)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn equator_corruption_costs_more_than_polar() {
        let (w, h) = (128, 64);
        let base = ErpImage::filled(w, h, [0.5; 3]).unwrap();
        let band = |rows: std::ops::Range<usize>| {
            ErpImage::from_fn(w, h, |_, y| if rows.contains(&y) { [0.9; 3] } else { [0.5; 3] }).unwrap()
        };
        let equator = band(h / 2 - 2..h / 2 + 2);
        let polar = band(0..4);
        let pts = SpherePointSet::fibonacci(50_000);
        let eq = s_psnr(&base, &equator, &pts).unwrap();
        let po = s_psnr(&base, &polar, &pts).unwrap();
        assert!(eq < po, "equator {eq} polar {po}");
    }
}
