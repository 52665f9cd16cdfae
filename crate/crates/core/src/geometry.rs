//! Mappings between equirectangular pixels, sphere directions and unit vectors.
//!
//! Continuous pixel coordinates place pixel `i` on `[i, i + 1)`, so its center
//! sits at `i + 0.5`. Longitude grows with `x`, latitude falls with `y`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::image::{ErpDims, Raster};

/// A direction on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereDirection {
    /// Radians in `[-pi/2, pi/2]`.
    pub lat: f64,
    /// Radians in `[-pi, pi)`.
    pub lon: f64,
}

impl SphereDirection {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&lat) || !(-PI..PI).contains(&lon) {
            return Err(Error::Domain(format!("direction (lat {lat}, lon {lon}) out of range")));
        }
        Ok(Self { lat, lon })
    }

    /// Wraps longitude into `[-pi, pi)` and clamps latitude.
    pub fn normalized(lat: f64, lon: f64) -> Self {
        let mut lon = (lon + PI).rem_euclid(TAU) - PI;
        if lon >= PI {
            lon -= TAU;
        }
        Self {
            lat: lat.clamp(-FRAC_PI_2, FRAC_PI_2),
            lon,
        }
    }

    /// Unit vector with `+z` at (0, 0), `+x` at lon = pi/2 and `+y` at the north pole.
    pub fn to_unit_vector(self) -> [f64; 3] {
        let (sl, cl) = self.lat.sin_cos();
        let (so, co) = self.lon.sin_cos();
        [cl * so, sl, cl * co]
    }

    /// Inverse of [`to_unit_vector`](Self::to_unit_vector); the input need not be normalized.
    /// At the poles longitude is taken as 0.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let horiz = v[0].hypot(v[2]);
        let lat = v[1].atan2(horiz);
        let lon = if horiz == 0.0 { 0.0 } else { v[0].atan2(v[2]) };
        Self::normalized(lat, lon)
    }
}

/// A continuous position on an equirectangular raster.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelCoord {
    pub x: f64,
    pub y: f64,
}

pub fn erp_to_dir(p: PixelCoord, dims: ErpDims) -> Result<SphereDirection> {
    let (w, h) = (dims.width as f64, dims.height as f64);
    if !(0.0..w).contains(&p.x) || !(0.0..h).contains(&p.y) {
        return Err(Error::Domain(format!(
            "pixel ({}, {}) outside {}x{}",
            p.x, p.y, dims.width, dims.height
        )));
    }
    Ok(SphereDirection {
        lat: FRAC_PI_2 - p.y / h * PI,
        lon: p.x / w * TAU - PI,
    })
}

/// Center of integer pixel `(x, y)` as a sphere direction.
pub fn pixel_center_dir(x: usize, y: usize, dims: ErpDims) -> SphereDirection {
    SphereDirection {
        lat: FRAC_PI_2 - (y as f64 + 0.5) / dims.height as f64 * PI,
        lon: (x as f64 + 0.5) / dims.width as f64 * TAU - PI,
    }
}

pub fn dir_to_erp(d: SphereDirection, dims: ErpDims) -> PixelCoord {
    let (w, h) = (dims.width as f64, dims.height as f64);
    let mut x = ((d.lon + PI) / TAU * w).rem_euclid(w);
    if x >= w {
        x = 0.0;
    }
    let y = ((FRAC_PI_2 - d.lat) / PI * h).clamp(0.0, h);
    PixelCoord { x, y }
}

/// Bilinear sample at a continuous coordinate with horizontal wrap and vertical clamp.
pub fn sample_bilinear(img: &Raster, p: PixelCoord) -> [f64; 3] {
    let (w, h) = (img.width(), img.height());
    let fx = p.x - 0.5;
    let fy = p.y - 0.5;
    let x0f = fx.floor();
    let y0f = fy.floor();
    let tx = fx - x0f;
    let ty = fy - y0f;
    let x0 = (x0f as isize).rem_euclid(w as isize) as usize;
    let x1 = (x0 + 1) % w;
    let clamp_row = |r: f64| (r.max(0.0) as usize).min(h - 1);
    let y0 = clamp_row(y0f);
    let y1 = clamp_row(y0f + 1.0);
    let data = img.data();
    let mut out = [0.0; 3];
    let (i00, i10, i01, i11) = (img.index(x0, y0), img.index(x1, y0), img.index(x0, y1), img.index(x1, y1));
    for (c, o) in out.iter_mut().enumerate() {
        let top = data[i00 + c] * (1.0 - tx) + data[i10 + c] * tx;
        let bottom = data[i01 + c] * (1.0 - tx) + data[i11 + c] * tx;
        *o = top * (1.0 - ty) + bottom * ty;
    }
    out
}

/// Rotation applying pitch (about +x, positive looks up) and then yaw (about +y).
#[derive(Clone, Copy, Debug)]
pub struct Orientation {
    yaw: (f64, f64),
    pitch: (f64, f64),
}

impl Orientation {
    pub fn new(center: SphereDirection) -> Self {
        Self {
            yaw: center.lon.sin_cos(),
            pitch: center.lat.sin_cos(),
        }
    }

    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let (sp, cp) = self.pitch;
        let (sy, cy) = self.yaw;
        let [x, y, z] = v;
        let (y1, z1) = (y * cp + z * sp, -y * sp + z * cp);
        [x * cy + z1 * sy, y1, -x * sy + z1 * cy]
    }
}
