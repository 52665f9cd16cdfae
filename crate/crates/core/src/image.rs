//! RGB rasters and the equirectangular image carrier.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};

/// Dense row-major RGB raster with samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    pub const CHANNELS: usize = 3;

    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty raster {width}x{height}")));
        }
        if data.len() != width * height * Self::CHANNELS {
            return Err(Error::InvalidImage(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height * Self::CHANNELS,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::InvalidImage(format!("sample {bad} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        let data = (0..width * height).flat_map(|_| rgb).collect();
        Self::new(width, height, data)
    }

    /// Builds a raster from a per-pixel function `(x, y) -> rgb`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Unchecked construction for kernels that clamp their own output.
    pub(crate) fn from_clamped(width: usize, height: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * 3);
        for v in &mut data {
            *v = v.clamp(0.0, 1.0);
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * 3
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = self.index(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Rec.601 luma plane.
    pub fn luma(&self) -> Vec<f64> {
        self.data
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
            .collect()
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path.as_ref())?.to_rgb8();
        let (w, h) = img.dimensions();
        let data = img.into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect();
        Self::new(w as usize, h as usize, data)
    }

    /// 8-bit RGB PNG with pinned encoder settings so reruns are byte-identical.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let bytes: Vec<u8> = self.data.iter().map(|v| (v * 255.0).round() as u8).collect();
        let file = BufWriter::new(File::create(path.as_ref())?);
        let encoder = PngEncoder::new_with_quality(file, CompressionType::Default, FilterType::Adaptive);
        encoder.write_image(&bytes, self.width as u32, self.height as u32, ExtendedColorType::Rgb8)?;
        Ok(())
    }
}

/// A 2:1 equirectangular omnidirectional image.
#[derive(Clone, Debug, PartialEq)]
pub struct ErpImage(Raster);

impl ErpImage {
    pub fn new(raster: Raster) -> Result<Self> {
        if raster.width != 2 * raster.height {
            return Err(Error::InvalidImage(format!(
                "equirectangular image must be 2:1, got {}x{}",
                raster.width, raster.height
            )));
        }
        Ok(Self(raster))
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [f64; 3]) -> Result<Self> {
        Self::new(Raster::from_fn(width, height, f)?)
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::new(Raster::filled(width, height, rgb)?)
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(Raster::load_png(path)?)
    }

    pub fn raster(&self) -> &Raster {
        &self.0
    }

    pub fn into_raster(self) -> Raster {
        self.0
    }

    pub fn dims(&self) -> ErpDims {
        ErpDims {
            width: self.0.width,
            height: self.0.height,
        }
    }

    /// Circular shift by `columns` pixels toward increasing longitude.
    pub fn rotate_columns(&self, columns: isize) -> Self {
        let (w, h) = (self.0.width, self.0.height);
        let shift = columns.rem_euclid(w as isize) as usize;
        let mut data = vec![0.0; self.0.data.len()];
        for y in 0..h {
            for x in 0..w {
                let src = self.0.index(x, y);
                let dst = self.0.index((x + shift) % w, y);
                data[dst..dst + 3].copy_from_slice(&self.0.data[src..src + 3]);
            }
        }
        Self(Raster { width: w, height: h, data })
    }
}

impl std::ops::Deref for ErpImage {
    type Target = Raster;

    fn deref(&self) -> &Raster {
        &self.0
    }
}

/// Width and height of an equirectangular raster.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ErpDims {
    pub width: usize,
    pub height: usize,
}

impl ErpDims {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if height == 0 || width != 2 * height {
            return Err(Error::InvalidImage(format!("equirectangular dims must be 2:1, got {width}x{height}")));
        }
        Ok(Self { width, height })
    }
}

/// Check two rasters share dimensions.
pub(crate) fn ensure_same_dims(a: &Raster, b: &Raster) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_2to1() {
        let r = Raster::filled(4, 4, [0.5; 3]).unwrap();
        assert!(ErpImage::new(r).is_err());
    }

    #[test]
    fn rejects_out_of_range_samples() {
        assert!(Raster::new(1, 1, vec![0.0, 1.5, 0.0]).is_err());
        assert!(Raster::new(1, 1, vec![0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn rotate_columns_wraps() {
        let img = ErpImage::from_fn(4, 2, |x, _| [x as f64 / 4.0, 0.0, 0.0]).unwrap();
        let r = img.rotate_columns(1);
        assert_eq!(r.pixel(1, 0)[0], 0.0);
        assert_eq!(r.pixel(0, 1)[0], 0.75);
        assert_eq!(img.rotate_columns(-3), r);
    }

    #[test]
    fn png_roundtrip_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let img = Raster::from_fn(8, 4, |x, y| [x as f64 / 7.0, y as f64 / 3.0, 0.5]).unwrap();
        let a = dir.path().join("a.png");
        let b = dir.path().join("b.png");
        img.save_png(&a).unwrap();
        Raster::load_png(&a).unwrap().save_png(&b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}
