use oiqa_core::distortion::{apply_distortion, lens_mask, DistortionSpec, LensSet, LENS_COUNT};
use oiqa_core::metrics::ws_psnr;
use oiqa_core::ErpImage;

fn scene(w: usize) -> ErpImage {
    ErpImage::from_fn(w, w / 2, |x, y| {
        let u = x as f64 / w as f64;
        let v = y as f64 / (w / 2) as f64;
        [
            0.3 + 0.3 * (12.0 * u).sin().abs() * v,
            0.2 + 0.5 * ((30.0 * v).sin() * 0.5 + 0.5) * u,
            0.4 + 0.2 * (40.0 * (u + v)).cos(),
        ]
    })
    .unwrap()
}

#[test]
fn outside_support_is_bit_identical() {
    let src = scene(256);
    for kind in ["GN", "GB", "BD", "ST"] {
        for lenses in [vec![1], vec![0, 3]] {
            let set = LensSet::new(lenses).unwrap();
            let spec = DistortionSpec::new(kind, 3, set.clone()).unwrap();
            let out = apply_distortion(&src, &spec, 5).unwrap();
            let mask = lens_mask(src.dims(), &set, spec.feather).unwrap();
            let mut changed = 0;
            for y in 0..128 {
                for x in 0..256 {
                    if mask.weight(x, y) == 0.0 {
                        assert_eq!(out.pixel(x, y), src.pixel(x, y), "{kind} at ({x},{y})");
                    } else if out.pixel(x, y) != src.pixel(x, y) {
                        changed += 1;
                    }
                }
            }
            assert!(changed > 0, "{kind} changed nothing");
        }
    }
}

#[test]
fn noise_levels_strictly_degrade() {
    let src = scene(512);
    let scores: Vec<f64> = (1..=3)
        .map(|l| {
            let spec = DistortionSpec::new("GN", l, LensSet::single(2).unwrap()).unwrap();
            ws_psnr(&src, &apply_distortion(&src, &spec, 17).unwrap()).unwrap()
        })
        .collect();
    assert!(scores[0] > scores[1] && scores[1] > scores[2], "{scores:?}");
}

#[test]
fn second_lens_never_helps() {
    let src = scene(512);
    for kind in ["GN", "GB", "BD", "ST"] {
        for level in 1..=3 {
            for (one, two) in [(0, vec![0, 2]), (1, vec![1, 4]), (5, vec![3, 5])] {
                let s1 = DistortionSpec::new(kind, level, LensSet::single(one).unwrap()).unwrap();
                let s2 = DistortionSpec::new(kind, level, LensSet::new(two).unwrap()).unwrap();
                let a = ws_psnr(&src, &apply_distortion(&src, &s1, 3).unwrap()).unwrap();
                let b = ws_psnr(&src, &apply_distortion(&src, &s2, 3).unwrap()).unwrap();
                assert!(b <= a, "{kind}{level}: two-lens {b} > one-lens {a}");
            }
        }
    }
}

#[test]
fn lens_masks_partition_unity() {
    let src = scene(256);
    for feather in [0.0, 10.0, 60.0] {
        let masks: Vec<_> = (0..LENS_COUNT)
            .map(|k| lens_mask(src.dims(), &LensSet::single(k).unwrap(), feather).unwrap())
            .collect();
        for x in 0..256 {
            let s: f64 = masks.iter().map(|m| m.weight(x, 0)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let src = scene(128);
    let spec = DistortionSpec::new("ST", 2, LensSet::new(vec![1, 3]).unwrap()).unwrap();
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    apply_distortion(&src, &spec, 9).unwrap().save_png(&a).unwrap();
    apply_distortion(&src, &spec, 9).unwrap().save_png(&b).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
