use std::f64::consts::PI;

use oiqa_core::geometry::{dir_to_erp, erp_to_dir, PixelCoord, SphereDirection};
use oiqa_core::viewport::{equatorial_viewport_set, extract_viewport, ViewportSpec};
use oiqa_core::{ErpDims, ErpImage};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn textured(w: usize, h: usize) -> ErpImage {
    ErpImage::from_fn(w, h, |x, y| {
        let u = x as f64 / w as f64 * 2.0 * PI;
        let v = y as f64 / h as f64 * PI;
        [
            0.5 + 0.4 * (3.0 * u).sin() * v.sin(),
            0.5 + 0.3 * (2.0 * u + v).cos(),
            0.5 + 0.2 * (5.0 * v).sin(),
        ]
    })
    .unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn random_pixels_round_trip() {
    let dims = ErpDims::new(2048, 1024).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p = PixelCoord {
            x: rng.random_range(0.0..2048.0),
            y: rng.random_range(1e-3..1024.0 - 1e-3),
        };
        let q = dir_to_erp(erp_to_dir(p, dims).unwrap(), dims);
        let dx = (p.x - q.x).abs().min(2048.0 - (p.x - q.x).abs());
        worst = worst.max(dx.max((p.y - q.y).abs()));
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn seam_wraps_below_width() {
    let dims = ErpDims::new(64, 32).unwrap();
    let p = dir_to_erp(SphereDirection { lat: 0.0, lon: PI - 1e-9 }, dims);
    assert!(p.x < 64.0 && p.x > 63.9);
    let q = dir_to_erp(SphereDirection { lat: 0.0, lon: 0.0 }, dims);
    assert_eq!((q.x, q.y), (32.0, 16.0));
    assert!(erp_to_dir(PixelCoord { x: 64.0, y: 1.0 }, dims).is_err());
}

#[test]
fn constant_image_gives_constant_viewport() {
    let src = ErpImage::filled(256, 128, [0.2, 0.4, 0.6]).unwrap();
    let spec = ViewportSpec { center: SphereDirection { lat: 0.7, lon: -2.0 }, out_width: 32, out_height: 24, ..Default::default() };
    let vp = extract_viewport(&src, spec).unwrap();
    for px in vp.image.data().chunks(3) {
        assert_eq!(px, [0.2, 0.4, 0.6]);
    }
}

#[test]
fn stripe_at_zero_longitude_crosses_center_column() {
    let w = 512;
    let src = ErpImage::from_fn(w, w / 2, |x, _| if x == w / 2 || x == w / 2 - 1 { [1.0; 3] } else { [0.0; 3] }).unwrap();
    let spec = ViewportSpec { out_width: 64, out_height: 64, ..Default::default() };
    let vp = extract_viewport(&src, spec).unwrap();
    let row = 32;
    let best = (0..64).max_by(|&a, &b| vp.image.pixel(a, row)[0].total_cmp(&vp.image.pixel(b, row)[0])).unwrap();
    assert!(best == 31 || best == 32, "{best}");
}

#[test]
fn mirrored_source_gives_mirrored_views() {
    let w = 256;
    let src = textured(w, w / 2);
    let mirrored = ErpImage::from_fn(w, w / 2, |x, y| src.pixel(w - 1 - x, y)).unwrap();
    let size = 40;
    for (lon, lon_m) in [(0.0, 0.0), (PI / 4.0, -PI / 4.0), (-PI, -PI)] {
        let spec = ViewportSpec { out_width: size, out_height: size, ..Default::default() };
        let a = extract_viewport(&src, spec.with_center(SphereDirection { lat: 0.0, lon })).unwrap();
        let b = extract_viewport(&mirrored, spec.with_center(SphereDirection { lat: 0.0, lon: lon_m })).unwrap();
        for y in 0..size {
            for x in 0..size {
                let d = max_abs_diff(&a.image.pixel(x, y), &b.image.pixel(size - 1 - x, y));
                assert!(d < 1e-5, "lon {lon}: {d}");
            }
        }
    }
}

#[test]
fn rotation_commutes_with_viewport_center() {
    let w = 360;
    let src = textured(w, w / 2);
    let shift = 45;
    let rotated = src.rotate_columns(shift);
    let dlon = shift as f64 / w as f64 * 2.0 * PI;
    let spec = ViewportSpec { out_width: 48, out_height: 48, ..Default::default() };
    for lon in [-2.5, -0.3, 0.0, 1.1, 2.9] {
        let center = SphereDirection::normalized(0.3, lon);
        let a = extract_viewport(&rotated, spec.with_center(SphereDirection::normalized(0.3, lon + dlon))).unwrap();
        let b = extract_viewport(&src, spec.with_center(center)).unwrap();
        let d = max_abs_diff(a.image.data(), b.image.data());
        assert!(d < 1e-5, "{lon}: {d}");
    }
}

#[test]
fn eight_views_shift_cyclically_under_45_degree_rotation() {
    let w = 256;
    let src = textured(w, w / 2);
    let rotated = src.rotate_columns((w / 8) as isize);
    let spec = ViewportSpec { out_width: 32, out_height: 32, ..Default::default() };
    let a = equatorial_viewport_set(&src, 8, spec).unwrap();
    let b = equatorial_viewport_set(&rotated, 8, spec).unwrap();
    for k in 0..8 {
        let d = max_abs_diff(b[(k + 1) % 8].image.data(), a[k].image.data());
        assert!(d < 1e-9, "{k}: {d}");
    }
    for (k, v) in a.iter().enumerate() {
        let expect = -180.0 + 45.0 * k as f64;
        assert!((v.spec.center.lon.to_degrees() - expect).abs() < 1e-9);
    }
    let one = equatorial_viewport_set(&src, 1, spec).unwrap();
    assert_eq!(one[0].spec.center.lon, -PI);
}

proptest! {
    #[test]
    fn viewport_is_intensity_linear(a in 0.0f64..=1.0, lat in -1.2f64..1.2, lon in -3.1f64..3.1) {
        let src = textured(128, 64);
        let scaled = ErpImage::from_fn(128, 64, |x, y| src.pixel(x, y).map(|v| a * v)).unwrap();
        let spec = ViewportSpec { center: SphereDirection { lat, lon }, out_width: 16, out_height: 16, ..Default::default() };
        let v = extract_viewport(&src, spec).unwrap();
        let s = extract_viewport(&scaled, spec).unwrap();
        let expect: Vec<f64> = v.image.data().iter().map(|x| a * x).collect();
        prop_assert!(max_abs_diff(s.image.data(), &expect) < 1e-6);
    }

    #[test]
    fn unit_vectors_have_unit_norm(lat in -PI / 2.0..=PI / 2.0, lon in -PI..PI) {
        let v = SphereDirection { lat, lon }.to_unit_vector();
        prop_assert!(((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs() < 1e-9);
    }
}
