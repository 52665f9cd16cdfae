//! Channel unification, multi-scale token fusion and the guidance map.

use oiqa_core::{Error, Result};

use crate::config::Upsample;
use crate::tensor::{axpy, Tensor};
use crate::weights::Linear;

/// Per-pixel linear map on the channel axis of an `M x h x w x C` tensor.
pub fn pointwise(x: &Tensor, lin: &Linear) -> Result<Tensor> {
    let shape = x.shape();
    let c = *shape.last().unwrap_or(&0);
    if c != lin.in_dim {
        return Err(Error::DimensionMismatch(format!(
            "{c} channels into a {}->{} map",
            lin.in_dim, lin.out_dim
        )));
    }
    let mut out_shape = shape.to_vec();
    *out_shape.last_mut().expect("non-empty shape") = lin.out_dim;
    Tensor::from_vec(&out_shape, lin.forward_rows(x.data()))
}

/// Maps every stage to the common channel count.
pub fn channel_unify(stages: &[Tensor; 4], unify: &[Linear; 4]) -> Result<[Tensor; 4]> {
    Ok([
        pointwise(&stages[0], &unify[0])?,
        pointwise(&stages[1], &unify[1])?,
        pointwise(&stages[2], &unify[2])?,
        pointwise(&stages[3], &unify[3])?,
    ])
}

fn check_unified(u: &[Tensor; 4]) -> Result<(usize, usize)> {
    let (m, c) = (u[0].shape()[0], u[0].shape()[3]);
    for t in u {
        if t.shape().len() != 4 || t.shape()[0] != m || t.shape()[3] != c {
            return Err(Error::DimensionMismatch(format!(
                "stage shapes {:?} and {:?} disagree",
                u[0].shape(),
                t.shape()
            )));
        }
    }
    Ok((m, c))
}

/// Flattens and concatenates the stages along the token axis: `M x N x C`.
pub fn concat_tokens(u: &[Tensor; 4]) -> Result<Tensor> {
    let (m, c) = check_unified(u)?;
    let per: Vec<usize> = u.iter().map(|t| t.len() / (m * c)).collect();
    let n: usize = per.iter().sum();
    let mut data = Vec::with_capacity(m * n * c);
    for v in 0..m {
        for (t, &p) in u.iter().zip(&per) {
            data.extend_from_slice(&t.data()[v * p * c..(v + 1) * p * c]);
        }
    }
    Tensor::from_vec(&[m, n, c], data)
}

/// Shared linear over the token axis: `M x N x C -> M x N' x C`, bias per output token.
pub fn token_mix(x: &Tensor, lin: &Linear) -> Result<Tensor> {
    let [m, n, c] = x.shape().try_into().map_err(|_| Error::DimensionMismatch("token tensor must be 3-d".into()))?;
    if n != lin.in_dim {
        return Err(Error::DimensionMismatch(format!("{n} tokens into a {}-token map", lin.in_dim)));
    }
    let n_out = lin.out_dim;
    let mut out = vec![0.0f32; m * n_out * c];
    for v in 0..m {
        let src = &x.data()[v * n * c..(v + 1) * n * c];
        let dst = &mut out[v * n_out * c..(v + 1) * n_out * c];
        for (t, row) in dst.chunks_exact_mut(c).enumerate() {
            row.fill(lin.b[t]);
        }
        for (s, token) in src.chunks_exact(c).enumerate() {
            let wrow = &lin.w[s * n_out..(s + 1) * n_out];
            for (t, &wv) in wrow.iter().enumerate() {
                if wv != 0.0 {
                    axpy(wv, token, &mut dst[t * c..(t + 1) * c]);
                }
            }
        }
    }
    Tensor::from_vec(&[m, n_out, c], out)
}

/// Multi-scale fusion: `M x HW/64 x C`.
pub fn mff(u: &[Tensor; 4], lin: &Linear) -> Result<Tensor> {
    token_mix(&concat_tokens(u)?, lin)
}

/// Resizes an `M x h x w x C` map. Bilinear uses half-pixel centers with edge clamping.
pub fn upsample(x: &Tensor, out_h: usize, out_w: usize, mode: Upsample) -> Result<Tensor> {
    let [m, h, w, c] = x.shape().try_into().map_err(|_| Error::DimensionMismatch("map must be 4-d".into()))?;
    let taps = |out: usize, inp: usize| -> Vec<(usize, usize, f32)> {
        let scale = inp as f64 / out as f64;
        (0..out)
            .map(|o| match mode {
                Upsample::Nearest => {
                    let i = ((o as f64 * scale).floor() as usize).min(inp - 1);
                    (i, i, 0.0)
                }
                Upsample::Bilinear => {
                    let s = ((o as f64 + 0.5) * scale - 0.5).max(0.0);
                    let i0 = (s.floor() as usize).min(inp - 1);
                    let i1 = (i0 + 1).min(inp - 1);
                    (i0, i1, (s - i0 as f64) as f32)
                }
            })
            .collect()
    };
    let ty = taps(out_h, h);
    let tx = taps(out_w, w);
    let src = x.data();
    let mut out = Vec::with_capacity(m * out_h * out_w * c);
    let at = |v: usize, y: usize, xx: usize| &src[((v * h + y) * w + xx) * c..((v * h + y) * w + xx + 1) * c];
    for v in 0..m {
        for &(y0, y1, fy) in &ty {
            for &(x0, x1, fx) in &tx {
                let (a, b, cc, d) = (at(v, y0, x0), at(v, y0, x1), at(v, y1, x0), at(v, y1, x1));
                for k in 0..c {
                    let top = a[k] * (1.0 - fx) + b[k] * fx;
                    let bottom = cc[k] * (1.0 - fx) + d[k] * fx;
                    out.push(top * (1.0 - fy) + bottom * fy);
                }
            }
        }
    }
    Tensor::from_vec(&[m, out_h, out_w, c], out)
}

/// Concatenates maps of equal `M x h x w` along channels.
pub fn concat_channels(parts: &[&Tensor]) -> Result<Tensor> {
    let lead = &parts[0].shape()[..parts[0].shape().len() - 1];
    let pixels: usize = lead.iter().product();
    let mut widths = Vec::with_capacity(parts.len());
    for p in parts {
        let (l, c) = p.shape().split_at(p.shape().len() - 1);
        if l != lead {
            return Err(Error::DimensionMismatch(format!("cannot concat {:?} with {:?}", parts[0].shape(), p.shape())));
        }
        widths.push(c[0]);
    }
    let total: usize = widths.iter().sum();
    let mut data = Vec::with_capacity(pixels * total);
    for px in 0..pixels {
        for (p, &cw) in parts.iter().zip(&widths) {
            data.extend_from_slice(&p.data()[px * cw..(px + 1) * cw]);
        }
    }
    let mut shape = lead.to_vec();
    shape.push(total);
    Tensor::from_vec(&shape, data)
}

/// Guidance map: coarse stages resized to the finest grid, stacked with it
/// (4C channels) and reduced back to C.
pub fn dap_guidance(u: &[Tensor; 4], lin: &Linear, mode: Upsample) -> Result<Tensor> {
    check_unified(u)?;
    let (h, w) = (u[0].shape()[1], u[0].shape()[2]);
    let up: Vec<Tensor> = u[1..].iter().map(|t| upsample(t, h, w, mode)).collect::<Result<_>>()?;
    let stacked = concat_channels(&[&u[0], &up[0], &up[1], &up[2]])?;
    pointwise(&stacked, lin)
}

/// `Upsilon = W [X_mff, flatten(F_CAM)]` over channels.
pub fn fuse(x_mff: &Tensor, f_cam: &Tensor, lin: &Linear) -> Result<Tensor> {
    let s = f_cam.shape();
    if s.len() != 4 {
        return Err(Error::DimensionMismatch("attention map must be 4-d".into()));
    }
    let x_dap = f_cam.clone().reshape(&[s[0], s[1] * s[2], s[3]])?;
    if x_mff.shape() != x_dap.shape() {
        return Err(Error::DimensionMismatch(format!(
            "fused token grids differ: {:?} vs {:?}",
            x_mff.shape(),
            x_dap.shape()
        )));
    }
    pointwise(&concat_channels(&[x_mff, &x_dap])?, lin)
}
