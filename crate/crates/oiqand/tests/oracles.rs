//! Model operations against direct double-precision transcriptions of the
//! defining formulas on tiny instances.

use oiqand::attention::{acac, attention_matrix, vac, vv_attention};
use oiqand::fusion::{channel_unify, dap_guidance, fuse, mff, upsample};
use oiqand::weights::{AttentionWeights, Linear};
use oiqand::{CamAxis, Tensor, Upsample};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rnd(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::from_fn(shape, |_| rng.random_range(-1.0f32..1.0))
}

fn rnd_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f32> {
    (0..n).map(|_| rng.random_range(-1.0f32..1.0)).collect()
}

fn at(t: &Tensor, idx: &[usize]) -> f64 {
    let mut k = 0;
    for (i, d) in idx.iter().zip(t.shape()) {
        k = k * d + i;
    }
    t.data()[k] as f64
}

fn close(a: &[f32], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((*x as f64 - y).abs() < tol, "{x} vs {y}");
    }
}

const M: usize = 2;
const C: usize = 4;
const S: usize = 2;

#[test]
fn vac_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = rnd(&[M, S, S, C], &mut rng);
    let fc = Linear::new(C, 1, rnd_vec(C, &mut rng), vec![0.3]).unwrap();
    let omega = 0.7f32;
    let out = vac(&psi, &fc, omega).unwrap();

    let score: Vec<f64> = (0..M)
        .map(|i| {
            let mut s = fc.b[0] as f64;
            for c in 0..C {
                let mut g = 0.0;
                for y in 0..S {
                    for x in 0..S {
                        g += at(&psi, &[i, y, x, c]);
                    }
                }
                s += fc.w[c] as f64 * g / (S * S) as f64;
            }
            s
        })
        .collect();
    let mut vam = vec![0.0; M * M];
    for i in 0..M {
        let den: f64 = (0..M).map(|m| (score[i] * score[m]).exp()).sum();
        for j in 0..M {
            vam[i * M + j] = (score[i] * score[j]).exp() / den;
        }
    }
    close(out.vam.data(), &vam, 1e-6);
    let mut v = vec![];
    for i in 0..M {
        for y in 0..S {
            for x in 0..S {
                for c in 0..C {
                    let mix: f64 = (0..M).map(|m| vam[i * M + m] * at(&psi, &[m, y, x, c])).sum();
                    v.push(mix * omega as f64 + at(&psi, &[i, y, x, c]));
                }
            }
        }
    }
    close(out.v_hat.data(), &v, 1e-6);
}

fn acac_oracle(v: &Tensor, gate: &[f32], column: bool) -> (Vec<f64>, Vec<f64>) {
    let mut pooled = [0.0; M * C];
    for m in 0..M {
        for c in 0..C {
            for y in 0..S {
                for x in 0..S {
                    pooled[m * C + c] += at(v, &[m, y, x, c]) / (S * S) as f64;
                }
            }
        }
    }
    let logit = |i: usize, j: usize| (0..M).map(|m| pooled[m * C + i] * pooled[m * C + j]).sum::<f64>();
    let mut cam = vec![0.0; C * C];
    for i in 0..C {
        for j in 0..C {
            let den: f64 = if column {
                (0..C).map(|c| logit(c, j).exp()).sum()
            } else {
                (0..C).map(|c| logit(i, c).exp()).sum()
            };
            cam[i * C + j] = logit(i, j).exp() / den;
        }
    }
    let mut f = vec![];
    for m in 0..M {
        for y in 0..S {
            for x in 0..S {
                for i in 0..C {
                    let mix: f64 = (0..C).map(|c| cam[i * C + c] * gate[i * C + c] as f64 * at(v, &[m, y, x, c])).sum();
                    f.push(mix + at(v, &[m, y, x, i]));
                }
            }
        }
    }
    (cam, f)
}

#[test]
fn acac_matches_formula_on_both_axes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let v = rnd(&[M, S, S, C], &mut rng);
    let gate = rnd_vec(C * C, &mut rng);
    for (axis, column) in [(CamAxis::Row, false), (CamAxis::Column, true)] {
        let out = acac(&v, &gate, axis).unwrap();
        let (cam, f) = acac_oracle(&v, &gate, column);
        close(out.cam.data(), &cam, 1e-6);
        close(out.f_cam.data(), &f, 1e-6);
    }
}

fn vv_oracle(f: &Tensor, w: &AttentionWeights) -> Vec<f64> {
    let (l, c) = (f.shape()[0], f.shape()[1]);
    let d = c / w.heads;
    let proj = |m: &[f32], i: usize, col: usize| (0..c).map(|k| at(f, &[i, k]) * m[k * c + col] as f64).sum::<f64>();
    let mut concat = vec![0.0; l * c];
    for h in 0..w.heads {
        for i in 0..l {
            let logits: Vec<f64> = (0..l)
                .map(|j| (0..d).map(|t| proj(&w.wq, i, h * d + t) * proj(&w.wk, j, h * d + t)).sum::<f64>() / (d as f64).sqrt())
                .collect();
            let den: f64 = logits.iter().map(|z| z.exp()).sum();
            for t in 0..d {
                concat[i * c + h * d + t] = (0..l).map(|j| logits[j].exp() / den * proj(&w.wv, j, h * d + t)).sum();
            }
        }
    }
    (0..l * c)
        .map(|k| {
            let (i, o) = (k / c, k % c);
            (0..c).map(|t| concat[i * c + t] * w.wo[t * c + o] as f64).sum()
        })
        .collect()
}

#[test]
fn vv_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (l, heads) in [(M * S * S, 2), (3, 1), (3, 4)] {
        let f = rnd(&[l, C], &mut rng);
        let w = AttentionWeights {
            heads,
            wq: rnd_vec(C * C, &mut rng),
            wk: rnd_vec(C * C, &mut rng),
            wv: rnd_vec(C * C, &mut rng),
            wo: rnd_vec(C * C, &mut rng),
        };
        let out = vv_attention(&f, &w).unwrap();
        close(out.features.data(), &vv_oracle(&f, &w), 1e-6);
        assert!(out.row_sum_error < 1e-6);
        for h in 0..heads {
            let a = attention_matrix(&f, &w, h).unwrap();
            for row in a.data().chunks(l) {
                assert!((row.iter().map(|v| *v as f64).sum::<f64>() - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn unify_is_per_pixel_matmul() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let widths = [3, 5, 2, 4];
    let stages: [Tensor; 4] = std::array::from_fn(|s| rnd(&[M, S, S, widths[s]], &mut rng));
    let lins: [Linear; 4] = std::array::from_fn(|s| Linear::new(widths[s], C, rnd_vec(widths[s] * C, &mut rng), rnd_vec(C, &mut rng)).unwrap());
    let out = channel_unify(&stages, &lins).unwrap();
    for s in 0..4 {
        let mut want = vec![];
        for m in 0..M {
            for y in 0..S {
                for x in 0..S {
                    for o in 0..C {
                        want.push(
                            lins[s].b[o] as f64
                                + (0..widths[s]).map(|k| at(&stages[s], &[m, y, x, k]) * lins[s].w[k * C + o] as f64).sum::<f64>(),
                        );
                    }
                }
            }
        }
        close(out[s].data(), &want, 1e-6);
    }
    let eye = Linear::new(C, C, (0..C * C).map(|i| if i % (C + 1) == 0 { 1.0 } else { 0.0 }).collect(), vec![0.0; C]).unwrap();
    let same = rnd(&[M, S, S, C], &mut rng);
    let u = channel_unify(&[same.clone(), same.clone(), same.clone(), same.clone()], &[eye.clone(), eye.clone(), eye.clone(), eye]).unwrap();
    assert_eq!(u[0], same);
    let z = channel_unify(&stages, &std::array::from_fn(|s| Linear::zeros(widths[s], C))).unwrap();
    assert!(z.iter().all(|t| t.data().iter().all(|v| *v == 0.0)));
}

fn pyramid(rng: &mut ChaCha8Rng) -> [Tensor; 4] {
    [rnd(&[M, 4, 4, C], rng), rnd(&[M, 2, 2, C], rng), rnd(&[M, 1, 1, C], rng), rnd(&[M, 1, 1, C], rng)]
}

#[test]
fn mff_leaves_channels_alone() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = pyramid(&mut rng);
    let n = 16 + 4 + 1 + 1;
    let lin = Linear::new(n, 16, rnd_vec(n * 16, &mut rng), rnd_vec(16, &mut rng)).unwrap();
    let perm = [2usize, 0, 3, 1];
    let permute = |t: &Tensor| {
        let data: Vec<f32> = t.data().chunks(C).flat_map(|px| perm.map(|p| px[p])).collect();
        Tensor::from_vec(t.shape(), data).unwrap()
    };
    let a = mff(&u, &lin).unwrap();
    let b = mff(&u.clone().map(|t| permute(&t)), &lin).unwrap();
    assert_eq!(a.shape(), &[M, 16, C]);
    assert_eq!(b, permute(&a));
    let zeros = mff(&u.clone().map(|t| Tensor::zeros(t.shape())), &lin).unwrap();
    for (k, v) in zeros.data().iter().enumerate() {
        assert_eq!(*v, lin.b[(k / C) % 16]);
    }
}

#[test]
fn constant_stages_give_constant_guidance() {
    let u = [[M, 4, 4, C], [M, 2, 2, C], [M, 1, 1, C], [M, 1, 1, C]].map(|s| Tensor::from_fn(&s, |i| 0.25 + (i % C) as f32));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let lin = Linear::new(4 * C, C, rnd_vec(16 * C, &mut rng), rnd_vec(C, &mut rng)).unwrap();
    for mode in [Upsample::Bilinear, Upsample::Nearest] {
        let psi = dap_guidance(&u, &lin, mode).unwrap();
        assert_eq!(psi.shape(), &[M, 4, 4, C]);
        for px in psi.data().chunks(C) {
            close(px, &psi.data()[..C].iter().map(|v| *v as f64).collect::<Vec<_>>(), 1e-6);
        }
    }
    let up = upsample(&u[1], 4, 4, Upsample::Bilinear).unwrap();
    assert_eq!(up.shape(), &[M, 4, 4, C]);
}

#[test]
fn fuse_with_left_identity_returns_mff_branch() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = rnd(&[M, S * S, C], &mut rng);
    let f = Tensor::zeros(&[M, S, S, C]);
    let w: Vec<f32> = (0..2 * C * C).map(|k| if k < C * C && k % (C + 1) == 0 { 1.0 } else { 0.0 }).collect();
    let lin = Linear::new(2 * C, C, w, vec![0.0; C]).unwrap();
    assert_eq!(fuse(&x, &f, &lin).unwrap(), x);
    let g = rnd(&[M, S, S, C], &mut rng);
    let lin = Linear::new(2 * C, C, rnd_vec(2 * C * C, &mut rng), rnd_vec(C, &mut rng)).unwrap();
    let out = fuse(&x, &g, &lin).unwrap();
    let mut want = vec![];
    for m in 0..M {
        for t in 0..S * S {
            for o in 0..C {
                let mut s = lin.b[o] as f64;
                for k in 0..C {
                    s += at(&x, &[m, t, k]) * lin.w[k * C + o] as f64;
                    s += at(&g, &[m, t / S, t % S, k]) * lin.w[(C + k) * C + o] as f64;
                }
                want.push(s);
            }
        }
    }
    close(out.data(), &want, 1e-6);
    assert!(fuse(&rnd(&[M, 3, C], &mut rng), &g, &lin).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn vac_is_permutation_equivariant(seed in 0u64..10_000, omega in -2.0f32..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 5;
        let psi = rnd(&[m, 3, 2, 6], &mut rng);
        let fc = Linear::new(6, 1, rnd_vec(6, &mut rng).iter().map(|v| v * 3.0).collect(), vec![0.2]).unwrap();
        let mut sigma: Vec<usize> = (0..m).collect();
        sigma.shuffle(&mut rng);
        let per = psi.len() / m;
        let permuted = Tensor::from_vec(psi.shape(), sigma.iter().flat_map(|&s| psi.data()[s * per..(s + 1) * per].to_vec()).collect()).unwrap();
        let a = vac(&psi, &fc, omega).unwrap();
        let b = vac(&permuted, &fc, omega).unwrap();
        for k in 0..m {
            for l in 0..m {
                prop_assert!((b.vam.data()[k * m + l] - a.vam.data()[sigma[k] * m + sigma[l]]).abs() < 1e-6);
            }
            let (x, y) = (&b.v_hat.data()[k * per..(k + 1) * per], &a.v_hat.data()[sigma[k] * per..(sigma[k] + 1) * per]);
            for (p, q) in x.iter().zip(y) {
                prop_assert!((p - q).abs() < 1e-6);
            }
        }
    }
}
