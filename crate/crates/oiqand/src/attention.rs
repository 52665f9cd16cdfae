//! Viewport attention, adaptive channel attention and the multi-head token
//! aggregation.

use oiqa_core::{Error, Result};

use crate::config::CamAxis;
use crate::tensor::{axpy, dot, matmul, simplex_error, softmax, transpose, Tensor};
use crate::weights::{AttentionWeights, Linear};

fn dims4(x: &Tensor) -> Result<[usize; 4]> {
    x.shape()
        .try_into()
        .map_err(|_| Error::DimensionMismatch(format!("expected M x h x w x C, got {:?}", x.shape())))
}

/// Spatial mean per viewport: `M x C`.
pub fn global_average_pool(x: &Tensor) -> Result<Vec<f32>> {
    let [m, h, w, c] = dims4(x)?;
    let px = h * w;
    let mut out = vec![0.0f32; m * c];
    for v in 0..m {
        let acc = &mut out[v * c..(v + 1) * c];
        for p in x.data()[v * px * c..(v + 1) * px * c].chunks_exact(c) {
            axpy(1.0, p, acc);
        }
        acc.iter_mut().for_each(|a| *a /= px as f32);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct VacOutput {
    /// `M x M`, rows sum to 1.
    pub vam: Tensor,
    pub v_hat: Tensor,
}

/// Each viewport is scored by `FC(GAP)`; the outer product of scores,
/// row-normalized, mixes whole viewports: `V = omega * VAM * Psi + Psi`.
pub fn vac(psi: &Tensor, fc: &Linear, omega: f32) -> Result<VacOutput> {
    let [m, _, _, c] = dims4(psi)?;
    if fc.in_dim != c || fc.out_dim != 1 {
        return Err(Error::DimensionMismatch(format!("viewport scorer is {}->{}", fc.in_dim, fc.out_dim)));
    }
    let scores = fc.forward_rows(&global_average_pool(psi)?);
    let mut vam = vec![0.0f32; m * m];
    for (i, row) in vam.chunks_exact_mut(m).enumerate() {
        for (j, r) in row.iter_mut().enumerate() {
            *r = scores[i] * scores[j];
        }
        softmax(row);
    }
    let per = psi.len() / m;
    let mixed = matmul(&vam, psi.data(), m, m, per);
    let v_hat: Vec<f32> = mixed.iter().zip(psi.data()).map(|(a, p)| a * omega + p).collect();
    Ok(VacOutput {
        vam: Tensor::from_vec(&[m, m], vam)?,
        v_hat: Tensor::from_vec(psi.shape(), v_hat)?,
    })
}

#[derive(Clone, Debug)]
pub struct AcacOutput {
    /// `C x C`.
    pub cam: Tensor,
    pub f_cam: Tensor,
}

/// Channel attention from the Gram matrix of pooled channels, gated elementwise
/// by `gate` and applied to every pixel: `F = V (CAM . W)^T + V`.
pub fn acac(v_hat: &Tensor, gate: &[f32], axis: CamAxis) -> Result<AcacOutput> {
    let [m, _, _, c] = dims4(v_hat)?;
    if gate.len() != c * c {
        return Err(Error::DimensionMismatch(format!("channel gate has {} entries for {c} channels", gate.len())));
    }
    let pooled = global_average_pool(v_hat)?;
    let pooled_t = transpose(&pooled, m, c);
    let mut cam = matmul(&pooled_t, &pooled, c, m, c);
    match axis {
        CamAxis::Row => cam.chunks_exact_mut(c).for_each(softmax),
        CamAxis::Column => {
            let mut t = transpose(&cam, c, c);
            t.chunks_exact_mut(c).for_each(softmax);
            cam = transpose(&t, c, c);
        }
    }
    let gated: Vec<f32> = cam.iter().zip(gate).map(|(a, w)| a * w).collect();
    let gated_t = transpose(&gated, c, c);
    let rows = v_hat.len() / c;
    let mixed = matmul(v_hat.data(), &gated_t, rows, c, c);
    let f: Vec<f32> = mixed.iter().zip(v_hat.data()).map(|(a, v)| a + v).collect();
    Ok(AcacOutput {
        cam: Tensor::from_vec(&[c, c], cam)?,
        f_cam: Tensor::from_vec(v_hat.shape(), f)?,
    })
}

/// Columns `h*d .. (h+1)*d` of an `rows x c` matrix, contiguous.
fn head_slice(x: &[f32], c: usize, h: usize, d: usize) -> Vec<f32> {
    x.chunks_exact(c).flat_map(|r| r[h * d..(h + 1) * d].iter().copied()).collect()
}

#[derive(Clone, Debug)]
pub struct VvOutput {
    /// `L x C`.
    pub features: Tensor,
    /// Largest `|sum_j A_ij - 1|` over all heads and rows.
    pub row_sum_error: f32,
}

fn check_attention(f: &Tensor, w: &AttentionWeights) -> Result<(usize, usize, usize)> {
    let [l, c]: [usize; 2] = f
        .shape()
        .try_into()
        .map_err(|_| Error::DimensionMismatch(format!("expected L x C tokens, got {:?}", f.shape())))?;
    if w.heads == 0 || c % w.heads != 0 || [&w.wq, &w.wk, &w.wv, &w.wo].iter().any(|m| m.len() != c * c) {
        return Err(Error::DimensionMismatch(format!("attention weights do not fit {c} channels")));
    }
    Ok((l, c, c / w.heads))
}

/// Multi-head scaled dot-product self-attention; rows are streamed so the
/// `L x L` matrix is never stored.
pub fn vv_attention(f: &Tensor, w: &AttentionWeights) -> Result<VvOutput> {
    let (l, c, d) = check_attention(f, w)?;
    let q = matmul(f.data(), &w.wq, l, c, c);
    let k = matmul(f.data(), &w.wk, l, c, c);
    let v = matmul(f.data(), &w.wv, l, c, c);
    let scale = 1.0 / (d as f32).sqrt();
    let mut concat = vec![0.0f32; l * c];
    let mut worst = 0.0f32;
    let mut scores = vec![0.0f32; l];
    for h in 0..w.heads {
        let (qh, kh, vh) = (head_slice(&q, c, h, d), head_slice(&k, c, h, d), head_slice(&v, c, h, d));
        let mut out = vec![0.0f32; d];
        for i in 0..l {
            let qi = &qh[i * d..(i + 1) * d];
            for (j, s) in scores.iter_mut().enumerate() {
                *s = dot(qi, &kh[j * d..(j + 1) * d]) * scale;
            }
            softmax(&mut scores);
            worst = worst.max(simplex_error(&scores));
            out.fill(0.0);
            for (j, &p) in scores.iter().enumerate() {
                axpy(p, &vh[j * d..(j + 1) * d], &mut out);
            }
            concat[i * c + h * d..i * c + (h + 1) * d].copy_from_slice(&out);
        }
    }
    Ok(VvOutput {
        features: Tensor::from_vec(&[l, c], matmul(&concat, &w.wo, l, c, c))?,
        row_sum_error: worst,
    })
}

/// Full attention matrix of one head, `L x L`; for inspection on small inputs.
pub fn attention_matrix(f: &Tensor, w: &AttentionWeights, head: usize) -> Result<Tensor> {
    let (l, c, d) = check_attention(f, w)?;
    if head >= w.heads {
        return Err(Error::Domain(format!("head {head} of {}", w.heads)));
    }
    let q = head_slice(&matmul(f.data(), &w.wq, l, c, c), c, head, d);
    let k = head_slice(&matmul(f.data(), &w.wk, l, c, c), c, head, d);
    let scale = 1.0 / (d as f32).sqrt();
    let mut a = vec![0.0f32; l * l];
    for (i, row) in a.chunks_exact_mut(l).enumerate() {
        for (j, s) in row.iter_mut().enumerate() {
            *s = dot(&q[i * d..(i + 1) * d], &k[j * d..(j + 1) * d]) * scale;
        }
        softmax(row);
    }
    Tensor::from_vec(&[l, l], a)
}
