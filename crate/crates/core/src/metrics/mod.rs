//! Full-reference spherical quality metrics.

mod cpp;
mod points;
mod ssim;
mod weighted;

use std::collections::BTreeMap;

pub use cpp::{cpp_project, cpp_psnr, craster_forward, CppProjection, CppPsnr};
pub use points::{s_psnr, SPsnr, SpherePointSet, DEFAULT_POINT_COUNT};
pub use ssim::{ssim_map, ws_ssim, WsSsim, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};
pub use weighted::{ws_psnr, ws_weights, WeightField, WsPsnr};

use crate::error::{Error, Result};
use crate::image::ErpImage;

/// Default cap applied to infinite PSNR values before statistics.
pub const DEFAULT_PSNR_CAP: f64 = 100.0;

/// PSNR in dB for a mean squared error over unit-range samples; `+inf` when
/// the error is exactly zero.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

/// Serializes a score, writing `+inf` as `inf`.
pub fn format_score(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

pub fn parse_score(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| Error::Domain(format!("bad score `{t}`"))),
    }
}

/// Replaces infinities with `cap` (keeping the sign).
pub fn clamp_infinite(v: f64, cap: f64) -> f64 {
    if v.is_infinite() {
        cap.copysign(v)
    } else {
        v
    }
}

/// A full-reference metric over equirectangular pairs.
pub trait FullReferenceMetric: Send + Sync {
    fn name(&self) -> &'static str;

    fn score(&self, reference: &ErpImage, distorted: &ErpImage) -> Result<f64>;
}

/// Metrics addressable by name, iterated in registration order.
pub struct MetricRegistry {
    metrics: Vec<Box<dyn FullReferenceMetric>>,
    by_name: BTreeMap<&'static str, usize>,
}

impl MetricRegistry {
    pub fn empty() -> Self {
        Self {
            metrics: Vec::new(),
            by_name: BTreeMap::new(),
        }
    }

    /// S-PSNR, WS-PSNR, CPP-PSNR and WS-SSIM; `points` sets the S-PSNR sample count.
    pub fn builtin(points: usize) -> Self {
        let mut r = Self::empty();
        r.register(Box::new(SPsnr::new(SpherePointSet::fibonacci(points))));
        r.register(Box::new(WsPsnr));
        r.register(Box::new(CppPsnr));
        r.register(Box::new(WsSsim));
        r
    }

    pub fn register(&mut self, metric: Box<dyn FullReferenceMetric>) {
        let name = metric.name();
        if let Some(&i) = self.by_name.get(name) {
            self.metrics[i] = metric;
        } else {
            self.by_name.insert(name, self.metrics.len());
            self.metrics.push(metric);
        }
    }

    pub fn get(&self, name: &str) -> Result<&dyn FullReferenceMetric> {
        self.by_name
            .get(name)
            .map(|&i| self.metrics[i].as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "metric",
                name: name.to_string(),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn FullReferenceMetric> {
        self.metrics.iter().map(|m| m.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.metrics.iter().map(|m| m.name()).collect()
    }

    /// All registered metrics on one pair, in registration order.
    pub fn score_all(&self, reference: &ErpImage, distorted: &ErpImage) -> Result<Vec<f64>> {
        self.iter().map(|m| m.score(reference, distorted)).collect()
    }
}
