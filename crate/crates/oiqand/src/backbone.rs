//! Multi-scale feature extraction behind a common interface.

use std::path::Path;

use oiqa_core::{Error, Raster, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{ModelConfig, STAGE_CHANNELS};
use crate::container::{read_container, write_container};
use crate::tensor::{matmul, Tensor};

/// Stage outputs `F1..F4`, each `M x h x w x C`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStack {
    pub stages: [Tensor; 4],
}

impl FeatureStack {
    pub fn validate(&self, config: &ModelConfig) -> Result<()> {
        for (s, t) in self.stages.iter().enumerate() {
            let (h, w) = config.stage_dims(s);
            t.expect_shape(&format!("stage {}", s + 1), &[config.m, h, w, STAGE_CHANNELS[s]])?;
            if !t.is_finite() {
                return Err(Error::Invariant(format!("stage {} has non-finite features", s + 1)));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let named: Vec<(String, Tensor)> = self
            .stages
            .iter()
            .enumerate()
            .map(|(s, t)| (format!("f{}", s + 1), t.clone()))
            .collect();
        write_container(path, serde_json::json!({ "kind": "features" }), &named)
    }

    /// Loads tensors `f1..f4` written by [`save`](Self::save) or an external tool.
    pub fn load(path: &Path) -> Result<Self> {
        let (_, mut map) = read_container(path)?;
        let mut take = |n: &str| map.remove(n).ok_or_else(|| Error::Invariant(format!("feature file lacks {n}")));
        Ok(Self {
            stages: [take("f1")?, take("f2")?, take("f3")?, take("f4")?],
        })
    }
}

pub trait Backbone: Send + Sync {
    fn name(&self) -> &str;
    fn extract(&self, viewports: &[Raster], config: &ModelConfig) -> Result<FeatureStack>;
}

/// Fixed random strided projections: 8x8 patches, then two 2x2 merges and a
/// pointwise stage, each followed by `tanh`.
#[derive(Clone, Debug)]
pub struct RandomProjectionBackbone {
    kernels: [Vec<f32>; 4],
}

const PATCH: usize = 8;
const STAGE_INPUTS: [usize; 4] = [PATCH * PATCH * 3, 4 * STAGE_CHANNELS[0], 4 * STAGE_CHANNELS[1], STAGE_CHANNELS[2]];

impl RandomProjectionBackbone {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6261_636b_626f_6e65);
        let kernels = std::array::from_fn(|s| {
            let fan_in = STAGE_INPUTS[s];
            let normal = Normal::new(0.0f32, 1.0 / (fan_in as f32).sqrt()).expect("positive std");
            (0..fan_in * STAGE_CHANNELS[s]).map(|_| normal.sample(&mut rng)).collect()
        });
        Self { kernels }
    }

    fn project(&self, s: usize, x: Vec<f32>) -> Vec<f32> {
        let rows = x.len() / STAGE_INPUTS[s];
        let mut y = matmul(&x, &self.kernels[s], rows, STAGE_INPUTS[s], STAGE_CHANNELS[s]);
        y.iter_mut().for_each(|v| *v = v.tanh());
        y
    }
}

/// Concatenates each 2x2 block of an `m x h x w x c` map into `m x h/2 x w/2 x 4c`.
fn merge_2x2(x: &[f32], m: usize, h: usize, w: usize, c: usize) -> Vec<f32> {
    let (ho, wo) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(x.len());
    for v in 0..m {
        for y in 0..ho {
            for xo in 0..wo {
                for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let i = ((v * h + 2 * y + dy) * w + 2 * xo + dx) * c;
                    out.extend_from_slice(&x[i..i + c]);
                }
            }
        }
    }
    out
}

impl Backbone for RandomProjectionBackbone {
    fn name(&self) -> &str {
        "random-projection"
    }

    fn extract(&self, viewports: &[Raster], config: &ModelConfig) -> Result<FeatureStack> {
        config.validate()?;
        if viewports.len() != config.m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} viewports, got {}",
                config.m,
                viewports.len()
            )));
        }
        let (h1, w1) = config.stage_dims(0);
        let mut patches = Vec::with_capacity(config.m * h1 * w1 * STAGE_INPUTS[0]);
        for vp in viewports {
            if (vp.width(), vp.height()) != (config.width, config.height) {
                return Err(Error::DimensionMismatch(format!(
                    "viewport is {}x{}, model expects {}x{}",
                    vp.width(),
                    vp.height(),
                    config.width,
                    config.height
                )));
            }
            for py in 0..h1 {
                for px in 0..w1 {
                    for dy in 0..PATCH {
                        for dx in 0..PATCH {
                            let p = vp.pixel(px * PATCH + dx, py * PATCH + dy);
                            patches.extend(p.iter().map(|v| *v as f32 - 0.5));
                        }
                    }
                }
            }
        }
        let m = config.m;
        let f1 = self.project(0, patches);
        let f2 = self.project(1, merge_2x2(&f1, m, h1, w1, STAGE_CHANNELS[0]));
        let f3 = self.project(2, merge_2x2(&f2, m, h1 / 2, w1 / 2, STAGE_CHANNELS[1]));
        let f4 = self.project(3, f3.clone());
        let shaped = |s: usize, d: Vec<f32>| {
            let (h, w) = config.stage_dims(s);
            Tensor::from_vec(&[m, h, w, STAGE_CHANNELS[s]], d)
        };
        Ok(FeatureStack {
            stages: [shaped(0, f1)?, shaped(1, f2)?, shaped(2, f3)?, shaped(3, f4)?],
        })
    }
}

/// Ignores the viewports and serves features computed elsewhere.
#[derive(Clone, Debug)]
pub struct PrecomputedFeatures {
    features: FeatureStack,
}

impl PrecomputedFeatures {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self {
            features: FeatureStack::load(path)?,
        })
    }
}

impl Backbone for PrecomputedFeatures {
    fn name(&self) -> &str {
        "precomputed"
    }

    fn extract(&self, _viewports: &[Raster], config: &ModelConfig) -> Result<FeatureStack> {
        self.features.validate(config)?;
        Ok(self.features.clone())
    }
}
