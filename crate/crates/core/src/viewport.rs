//! Rectilinear viewport rendering and equatorial viewport sets.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dir_to_erp, sample_bilinear, Orientation, SphereDirection};
use crate::image::{ErpImage, Raster};

/// Camera pose and field of view of a viewport.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewportSpec {
    pub center: SphereDirection,
    /// Horizontal field of view in degrees.
    pub fov: f64,
    pub out_width: usize,
    pub out_height: usize,
}

impl Default for ViewportSpec {
    fn default() -> Self {
        Self {
            center: SphereDirection { lat: 0.0, lon: 0.0 },
            fov: 90.0,
            out_width: 224,
            out_height: 224,
        }
    }
}

impl ViewportSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fov > 0.0 && self.fov < 180.0) {
            return Err(Error::Domain(format!("fov {} not in (0, 180)", self.fov)));
        }
        if self.out_width < 2 || self.out_height < 2 {
            return Err(Error::Domain(format!(
                "viewport {}x{} smaller than 2x2",
                self.out_width, self.out_height
            )));
        }
        Ok(())
    }

    pub fn with_center(self, center: SphereDirection) -> Self {
        Self { center, ..self }
    }
}

#[derive(Clone, Debug)]
pub struct Viewport {
    pub spec: ViewportSpec,
    pub image: Raster,
}

/// Renders a pinhole view of `src`.
pub fn extract_viewport(src: &ErpImage, spec: ViewportSpec) -> Result<Viewport> {
    spec.validate()?;
    let (vw, vh) = (spec.out_width, spec.out_height);
    let focal = (vw as f64 / 2.0) / (spec.fov.to_radians() / 2.0).tan();
    let orient = Orientation::new(spec.center);
    let dims = src.dims();
    let mut data = Vec::with_capacity(vw * vh * 3);
    for j in 0..vh {
        let v = vh as f64 / 2.0 - (j as f64 + 0.5);
        for i in 0..vw {
            let u = (i as f64 + 0.5) - vw as f64 / 2.0;
            let ray = orient.rotate([u, v, focal]);
            let p = dir_to_erp(SphereDirection::from_vector(ray), dims);
            data.extend_from_slice(&sample_bilinear(src, p));
        }
    }
    Ok(Viewport {
        spec,
        image: Raster::from_clamped(vw, vh, data),
    })
}

/// `m` viewports on the equator at `lon = -pi + k * 2pi / m`.
pub fn equatorial_viewport_set(src: &ErpImage, m: usize, template: ViewportSpec) -> Result<Vec<Viewport>> {
    if m == 0 {
        return Err(Error::Domain("viewport count must be at least 1".into()));
    }
    (0..m)
        .map(|k| {
            let lon = -PI + k as f64 * (2.0 * PI / m as f64);
            extract_viewport(src, template.with_center(SphereDirection { lat: 0.0, lon }))
        })
        .collect()
}

/// One entry of the viewport sidecar; angles in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewportRecord {
    pub index: usize,
    pub lat: f64,
    pub lon: f64,
    pub fov: f64,
}

pub const SIDECAR_NAME: &str = "viewports.json";

/// Writes `viewport_XX.png` files plus a `viewports.json` sidecar into `dir`.
pub fn write_viewport_set(dir: &Path, viewports: &[Viewport]) -> Result<Vec<ViewportRecord>> {
    std::fs::create_dir_all(dir)?;
    let mut records = Vec::with_capacity(viewports.len());
    for (index, vp) in viewports.iter().enumerate() {
        vp.image.save_png(dir.join(format!("viewport_{index:02}.png")))?;
        records.push(ViewportRecord {
            index,
            lat: vp.spec.center.lat.to_degrees(),
            lon: vp.spec.center.lon.to_degrees(),
            fov: vp.spec.fov,
        });
    }
    std::fs::write(dir.join(SIDECAR_NAME), serde_json::to_string_pretty(&records)?)?;
    Ok(records)
}

/// Reads a directory written by [`write_viewport_set`].
pub fn read_viewport_set(dir: &Path) -> Result<Vec<Viewport>> {
    let records: Vec<ViewportRecord> = serde_json::from_str(&std::fs::read_to_string(dir.join(SIDECAR_NAME))?)?;
    records
        .iter()
        .map(|r| {
            let image = Raster::load_png(dir.join(format!("viewport_{:02}.png", r.index)))?;
            let spec = ViewportSpec {
                center: SphereDirection::normalized(r.lat.to_radians(), r.lon.to_radians()),
                fov: r.fov,
                out_width: image.width(),
                out_height: image.height(),
            };
            Ok(Viewport { spec, image })
        })
        .collect()
}
