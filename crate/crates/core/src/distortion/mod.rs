//! Non-uniform distortion synthesis.
//!
//! A distortion kind renders a full-frame degraded copy of the source; the
//! result is blended through the lens mask so pixels outside the selected
//! sectors keep their original values bit for bit.

mod kinds;
mod mask;

use std::collections::BTreeMap;
use std::fmt;

pub use kinds::{BrightnessDiscontinuity, GaussianBlur, GaussianNoise, StitchingDistortion, WORKING_WIDTH};
pub use mask::{lens_center_deg, lens_mask, wrap_deg, LensMask, LensSet, LENS_COUNT, SECTOR_DEG};

use crate::error::{Error, Result};
use crate::image::{ErpImage, Raster};

/// Severity level 1..=3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(u8);

impl Level {
    pub fn new(level: u8) -> Result<Self> {
        if !(1..=3).contains(&level) {
            return Err(Error::Invariant(format!("level {level} not in 1..=3")));
        }
        Ok(Self(level))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub(crate) fn index(self) -> usize {
        usize::from(self.0 - 1)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const DEFAULT_FEATHER_DEG: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DistortionSpec {
    /// Registry name, e.g. `GN`.
    pub kind: String,
    pub level: Level,
    pub lenses: LensSet,
    /// Width in degrees of the cosine ramp at sector boundaries.
    pub feather: f64,
}

impl DistortionSpec {
    pub fn new(kind: impl Into<String>, level: u8, lenses: LensSet) -> Result<Self> {
        Ok(Self {
            kind: kind.into(),
            level: Level::new(level)?,
            lenses,
            feather: DEFAULT_FEATHER_DEG,
        })
    }

    pub fn with_feather(self, feather: f64) -> Self {
        Self { feather, ..self }
    }
}

/// Per-level strength parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionParams {
    /// Noise standard deviation, fraction of full scale.
    pub gn_sigma: [f64; 3],
    /// Blur sigma in pixels at [`WORKING_WIDTH`], scaled linearly with width.
    pub gb_sigma: [f64; 3],
    pub bd_gain: [f64; 3],
    pub st_strength: [f64; 3],
    /// Radial warp coefficient multiplying `strength * r^2`.
    pub st_warp: f64,
    /// Vertical seam displacement at full strength, pixels at working width.
    pub st_seam_px: f64,
    /// Seam band width, pixels at working width.
    pub st_band_px: f64,
}

impl Default for DistortionParams {
    fn default() -> Self {
        Self {
            gn_sigma: [0.02, 0.05, 0.10],
            gb_sigma: [2.0, 4.0, 8.0],
            bd_gain: [0.6, 1.45, 1.9],
            st_strength: [0.5, 0.75, 1.0],
            st_warp: 0.15,
            st_seam_px: 8.0,
            st_band_px: 3.0,
        }
    }
}

/// Everything a kind needs to render one image.
pub struct DistortionContext<'a> {
    pub level: Level,
    pub lenses: &'a LensSet,
    pub params: &'a DistortionParams,
    pub seed: u64,
}

/// A distortion kind. `render` returns unclamped full-frame samples in the
/// source's layout; masking and clamping are applied by the caller.
pub trait Distortion: Send + Sync {
    fn name(&self) -> &'static str;

    fn render(&self, src: &ErpImage, ctx: &DistortionContext<'_>) -> Vec<f64>;
}

/// Distortion kinds addressable by name.
pub struct DistortionRegistry {
    kinds: BTreeMap<&'static str, Box<dyn Distortion>>,
}

impl DistortionRegistry {
    pub fn empty() -> Self {
        Self { kinds: BTreeMap::new() }
    }

    /// GN, GB, BD and ST.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(GaussianNoise));
        r.register(Box::new(GaussianBlur));
        r.register(Box::new(BrightnessDiscontinuity));
        r.register(Box::new(StitchingDistortion));
        r
    }

    /// Adds a kind, replacing any previous one with the same name.
    pub fn register(&mut self, kind: Box<dyn Distortion>) {
        self.kinds.insert(kind.name(), kind);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Distortion> {
        self.kinds.get(name).map(|b| b.as_ref()).ok_or_else(|| Error::Unknown {
            kind: "distortion",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.kinds.keys().copied()
    }
}

impl Default for DistortionRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Applies registered distortions with a fixed parameter set.
#[derive(Default)]
pub struct Distorter {
    pub registry: DistortionRegistry,
    pub params: DistortionParams,
}

impl Distorter {
    pub fn new(registry: DistortionRegistry, params: DistortionParams) -> Self {
        Self { registry, params }
    }

    pub fn apply(&self, src: &ErpImage, spec: &DistortionSpec, seed: u64) -> Result<ErpImage> {
        let kind = self.registry.get(&spec.kind)?;
        let mask = lens_mask(src.dims(), &spec.lenses, spec.feather)?;
        let ctx = DistortionContext {
            level: spec.level,
            lenses: &spec.lenses,
            params: &self.params,
            seed,
        };
        let distorted = kind.render(src, &ctx);
        debug_assert_eq!(distorted.len(), src.data().len());
        Ok(blend(src, &distorted, &mask))
    }
}

/// `mask * distorted + (1 - mask) * src`, clamped to `[0, 1]`.
fn blend(src: &ErpImage, distorted: &[f64], mask: &LensMask) -> ErpImage {
    let w = src.width();
    let s = src.data();
    let mut out = s.to_vec();
    for (i, o) in out.iter_mut().enumerate() {
        let m = mask.weight((i / 3) % w, (i / 3) / w);
        if m > 0.0 {
            *o = m * distorted[i] + (1.0 - m) * s[i];
        }
    }
    let raster = Raster::from_clamped(w, src.height(), out);
    ErpImage::new(raster).expect("dimensions are unchanged")
}

/// Applies `spec` with the built-in kinds and default parameters.
pub fn apply_distortion(src: &ErpImage, spec: &DistortionSpec, seed: u64) -> Result<ErpImage> {
    Distorter::default().apply(src, spec, seed)
}
