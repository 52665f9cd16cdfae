//! Lens footprints approximated as feathered 60-degree longitudinal sectors
//! of a six-lens ring.

use crate::error::{Error, Result};
use crate::geometry::pixel_center_dir;
use crate::image::ErpDims;

pub const LENS_COUNT: usize = 6;
pub const SECTOR_DEG: f64 = 360.0 / LENS_COUNT as f64;

/// One or two lens indices in `0..6`, non-adjacent on the ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LensSet(Vec<usize>);

impl LensSet {
    pub fn new(mut lenses: Vec<usize>) -> Result<Self> {
        lenses.sort_unstable();
        lenses.dedup();
        match lenses.as_slice() {
            [a] if *a < LENS_COUNT => {}
            [a, b] if *b < LENS_COUNT => {
                let gap = b - a;
                if gap.min(LENS_COUNT - gap) < 2 {
                    return Err(Error::Invariant(format!("lenses {a} and {b} are adjacent")));
                }
            }
            _ => {
                return Err(Error::Invariant(format!(
                    "lens set must hold 1 or 2 indices below {LENS_COUNT}, got {lenses:?}"
                )))
            }
        }
        Ok(Self(lenses))
    }

    pub fn single(lens: usize) -> Result<Self> {
        Self::new(vec![lens])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `-`-joined indices, the manifest encoding.
    pub fn encode(&self) -> String {
        self.0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("-")
    }

    pub fn parse(s: &str) -> Result<Self> {
        let lenses = s
            .split(['-', ';', ' ', '|'])
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Domain(format!("bad lens index `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(lenses)
    }
}

/// Center longitude of lens `k`, degrees.
pub fn lens_center_deg(k: usize) -> f64 {
    -180.0 + SECTOR_DEG * k as f64 + SECTOR_DEG / 2.0
}

/// Signed difference `a - b` wrapped into `[-180, 180)` degrees.
pub fn wrap_deg(a: f64, b: f64) -> f64 {
    (a - b + 180.0).rem_euclid(360.0) - 180.0
}

/// Raised-cosine step from 0 to 1 over `[-feather/2, feather/2]`.
fn smooth_step(t: f64, feather: f64) -> f64 {
    let half = feather / 2.0;
    if t >= half {
        1.0
    } else if t < -half || feather <= 0.0 {
        0.0
    } else {
        0.5 - 0.5 * (std::f64::consts::PI * (t + half) / feather).cos()
    }
}

fn sector_weight(lon_deg: f64, k: usize, feather: f64) -> f64 {
    let left = -180.0 + SECTOR_DEG * k as f64;
    let right = left + SECTOR_DEG;
    smooth_step(wrap_deg(lon_deg, left), feather) * (1.0 - smooth_step(wrap_deg(lon_deg, right), feather))
}

/// Per-pixel blend weight in `[0, 1]`. Sectors are longitudinal, so the weight
/// is stored once per column.
#[derive(Clone, Debug, PartialEq)]
pub struct LensMask {
    dims: ErpDims,
    columns: Vec<f64>,
}

impl LensMask {
    #[inline]
    pub fn weight(&self, x: usize, _y: usize) -> f64 {
        self.columns[x]
    }

    pub fn column_weights(&self) -> &[f64] {
        &self.columns
    }

    pub fn dims(&self) -> ErpDims {
        self.dims
    }

    /// Fraction of pixels with non-zero weight.
    pub fn support_fraction(&self) -> f64 {
        self.columns.iter().filter(|w| **w > 0.0).count() as f64 / self.columns.len() as f64
    }
}

pub fn lens_mask(dims: ErpDims, lenses: &LensSet, feather_deg: f64) -> Result<LensMask> {
    if !(0.0..=SECTOR_DEG).contains(&feather_deg) {
        return Err(Error::Domain(format!("feather {feather_deg} not in [0, {SECTOR_DEG}] degrees")));
    }
    let columns = (0..dims.width)
        .map(|x| {
            let lon = pixel_center_dir(x, 0, dims).lon.to_degrees();
            lenses
                .indices()
                .iter()
                .map(|&k| sector_weight(lon, k, feather_deg))
                .sum::<f64>()
                .min(1.0)
        })
        .collect();
    Ok(LensMask { dims, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> ErpDims {
        ErpDims::new(1024, 512).unwrap()
    }

    #[test]
    fn lens_set_validation() {
        assert!(LensSet::new(vec![0, 3]).is_ok());
        assert!(LensSet::new(vec![1, 5]).is_ok());
        assert!(matches!(LensSet::new(vec![0, 1]), Err(Error::Invariant(_))));
        assert!(matches!(LensSet::new(vec![5, 0]), Err(Error::Invariant(_))));
        assert!(LensSet::new(vec![]).is_err());
        assert!(LensSet::new(vec![6]).is_err());
        assert!(LensSet::new(vec![0, 2, 4]).is_err());
        assert_eq!(LensSet::parse("4-1").unwrap().encode(), "1-4");
    }

    #[test]
    fn binary_mask_covers_one_sixth() {
        for k in 0..LENS_COUNT {
            let m = lens_mask(dims(), &LensSet::single(k).unwrap(), 0.0).unwrap();
            let cols = m.column_weights().iter().filter(|w| **w == 1.0).count();
            assert!(m.column_weights().iter().all(|w| *w == 0.0 || *w == 1.0));
            assert!((cols as f64 - 1024.0 / 6.0).abs() <= 1.0, "lens {k}: {cols}");
        }
    }

    #[test]
    fn single_masks_partition_unity() {
        for feather in [0.0, 5.0, 17.5, 60.0] {
            let masks: Vec<_> = (0..LENS_COUNT)
                .map(|k| lens_mask(dims(), &LensSet::single(k).unwrap(), feather).unwrap())
                .collect();
            for x in 0..1024 {
                let s: f64 = masks.iter().map(|m| m.weight(x, 0)).sum();
                assert!((s - 1.0).abs() < 1e-12, "feather {feather} column {x}: {s}");
            }
        }
    }

    #[test]
    fn opposite_lenses_are_half_a_turn_apart() {
        let m = lens_mask(dims(), &LensSet::new(vec![0, 3]).unwrap(), 10.0).unwrap();
        // circular centroid of each connected half
        let centroid = |near_first: bool| {
            let (mut s, mut c) = (0.0, 0.0);
            for x in 0..1024 {
                let lon = pixel_center_dir(x, 0, m.dims()).lon;
                if (wrap_deg(lon.to_degrees(), lens_center_deg(0)).abs() < 90.0) != near_first {
                    continue;
                }
                s += m.weight(x, 0) * lon.sin();
                c += m.weight(x, 0) * lon.cos();
            }
            s.atan2(c).to_degrees()
        };
        let a = centroid(true);
        let b = centroid(false);
        assert!((wrap_deg(b, a).abs() - 180.0).abs() < 0.5, "{a} {b}");
        assert!((a - lens_center_deg(0)).abs() < 0.5);
    }

    #[test]
    fn feather_out_of_range_rejected() {
        assert!(lens_mask(dims(), &LensSet::single(0).unwrap(), 61.0).is_err());
    }
}
