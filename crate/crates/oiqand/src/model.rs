//! End-to-end forward pass.

use oiqa_core::{Error, Raster, Result};
use serde::Serialize;

use crate::attention::{acac, vac, vv_attention};
use crate::backbone::{Backbone, FeatureStack};
use crate::fusion::{channel_unify, concat_tokens, dap_guidance, fuse, token_mix};
use crate::head::{predict_quality, token_scores};
use crate::tensor::{simplex_error, Tensor, TensorSummary};
use crate::weights::ModelWeights;

/// Everything a forward pass produces besides the score.
#[derive(Clone, Debug, Serialize)]
pub struct ForwardTrace {
    pub summaries: Vec<TensorSummary>,
    /// Largest deviation of any normalized attention axis from 1.
    pub softmax_error: f32,
}

impl ForwardTrace {
    pub fn shape_of(&self, name: &str) -> Option<&[usize]> {
        self.summaries.iter().find(|s| s.name == name).map(|s| s.shape.as_slice())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ForwardOutput {
    pub q: f32,
    pub trace: ForwardTrace,
}

pub struct Oiqand<'a> {
    pub weights: &'a ModelWeights,
}

fn axis_error(t: &Tensor, rows: bool) -> f32 {
    let n = t.shape()[0];
    let d = t.data();
    (0..n)
        .map(|i| {
            let line: Vec<f32> = (0..n).map(|j| if rows { d[i * n + j] } else { d[j * n + i] }).collect();
            simplex_error(&line)
        })
        .fold(0.0, f32::max)
}

impl<'a> Oiqand<'a> {
    pub fn new(weights: &'a ModelWeights) -> Self {
        Self { weights }
    }

    pub fn forward(&self, viewports: &[Raster], backbone: &dyn Backbone) -> Result<ForwardOutput> {
        let features = backbone.extract(viewports, &self.weights.config)?;
        self.forward_features(&features)
    }

    pub fn forward_features(&self, fs: &FeatureStack) -> Result<ForwardOutput> {
        let w = self.weights;
        let cfg = &w.config;
        fs.validate(cfg)?;
        let mut summaries = Vec::new();
        let mut note = |name: &str, t: &Tensor| summaries.push(t.summary(name));
        for (s, t) in fs.stages.iter().enumerate() {
            note(&format!("f{}", s + 1), t);
        }
        let u = channel_unify(&fs.stages, &w.unify)?;
        for (name, t) in ["theta", "phi", "lambda", "gamma"].iter().zip(&u) {
            note(name, t);
        }
        let x_mf = concat_tokens(&u)?;
        note("x_mf", &x_mf);
        let x_mff = token_mix(&x_mf, &w.mff)?;
        note("x_mff", &x_mff);
        let psi = dap_guidance(&u, &w.dap, cfg.upsample)?;
        note("psi", &psi);
        let v = vac(&psi, &w.vac_fc, w.omega)?;
        note("vam", &v.vam);
        note("v_hat", &v.v_hat);
        let a = acac(&v.v_hat, &w.acac_w, cfg.cam_axis)?;
        note("cam", &a.cam);
        note("f_cam", &a.f_cam);
        let upsilon = fuse(&x_mff, &a.f_cam, &w.fuse)?;
        note("upsilon", &upsilon);
        let tokens = upsilon.reshape(&[cfg.sequence_len(), cfg.channels])?;
        let vv = vv_attention(&tokens, &w.vv)?;
        note("vf", &vv.features);
        let o = token_scores(&vv.features, &w.head)?;
        note("o", &Tensor::from_vec(&[1, o.len()], o)?);
        let q = predict_quality(&vv.features, &w.head)?;
        if !q.is_finite() {
            return Err(Error::Invariant("non-finite quality score".into()));
        }
        let softmax_error = axis_error(&v.vam, true)
            .max(axis_error(&a.cam, matches!(cfg.cam_axis, crate::config::CamAxis::Row)))
            .max(vv.row_sum_error);
        Ok(ForwardOutput {
            q,
            trace: ForwardTrace { summaries, softmax_error },
        })
    }
}
