//! Learnable parameters and their seeded initialization.

use oiqa_core::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{ModelConfig, STAGE_CHANNELS};
use crate::tensor::{axpy, Tensor};

pub const INIT_STD: f32 = 0.02;

/// Affine map on row vectors: `y = x W + b`, `W` stored `in x out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f32>,
    pub b: Vec<f32>,
}

impl Linear {
    pub fn new(in_dim: usize, out_dim: usize, w: Vec<f32>, b: Vec<f32>) -> Result<Self> {
        if w.len() != in_dim * out_dim || b.len() != out_dim {
            return Err(Error::DimensionMismatch(format!(
                "linear {in_dim}->{out_dim} given {} weights and {} biases",
                w.len(),
                b.len()
            )));
        }
        Ok(Self { in_dim, out_dim, w, b })
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            w: vec![0.0; in_dim * out_dim],
            b: vec![0.0; out_dim],
        }
    }

    fn gaussian(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            in_dim,
            out_dim,
            w: gaussian_vec(in_dim * out_dim, rng),
            b: vec![0.0; out_dim],
        }
    }

    /// Applies the map to each row of `x` (`rows x in_dim`).
    pub fn forward_rows(&self, x: &[f32]) -> Vec<f32> {
        let rows = x.len() / self.in_dim;
        let mut out = Vec::with_capacity(rows * self.out_dim);
        for r in x.chunks_exact(self.in_dim) {
            let mut o = self.b.clone();
            for (p, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    axpy(v, &self.w[p * self.out_dim..(p + 1) * self.out_dim], &mut o);
                }
            }
            out.extend_from_slice(&o);
        }
        out
    }
}

fn gaussian_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let normal = Normal::new(0.0f32, INIT_STD).expect("positive std");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Multi-head attention projections; head `i` owns columns `i*d_k .. (i+1)*d_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionWeights {
    pub heads: usize,
    pub wq: Vec<f32>,
    pub wk: Vec<f32>,
    pub wv: Vec<f32>,
    pub wo: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeadWeights {
    pub fc1: Linear,
    pub fc2: Linear,
    /// Collapses the token axis to a scalar.
    pub last: Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelWeights {
    pub config: ModelConfig,
    pub unify: [Linear; 4],
    /// Token-axis projection `all_tokens -> fine_tokens`.
    pub mff: Linear,
    pub dap: Linear,
    pub vac_fc: Linear,
    pub omega: f32,
    /// Elementwise gate on the channel attention matrix.
    pub acac_w: Vec<f32>,
    pub fuse: Linear,
    pub vv: AttentionWeights,
    pub head: HeadWeights,
}

impl ModelWeights {
    /// Gaussian(0, 0.02) matrices, zero biases, zero residual scale.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = config.channels;
        let unify = STAGE_CHANNELS.map(|cs| Linear::gaussian(cs, c, &mut rng));
        let mff = Linear::gaussian(config.all_tokens(), config.fine_tokens(), &mut rng);
        let dap = Linear::gaussian(4 * c, c, &mut rng);
        let vac_fc = Linear::gaussian(c, 1, &mut rng);
        let acac_w = gaussian_vec(c * c, &mut rng);
        let fuse = Linear::gaussian(2 * c, c, &mut rng);
        let vv = AttentionWeights {
            heads: config.heads,
            wq: gaussian_vec(c * c, &mut rng),
            wk: gaussian_vec(c * c, &mut rng),
            wv: gaussian_vec(c * c, &mut rng),
            wo: gaussian_vec(c * c, &mut rng),
        };
        let head = HeadWeights {
            fc1: Linear::gaussian(c, config.mlp_hidden, &mut rng),
            fc2: Linear::gaussian(config.mlp_hidden, 1, &mut rng),
            last: Linear::gaussian(config.sequence_len(), 1, &mut rng),
        };
        Ok(Self {
            config,
            unify,
            mff,
            dap,
            vac_fc,
            omega: 0.0,
            acac_w,
            fuse,
            vv,
            head,
        })
    }

    /// Named tensors in a fixed order.
    pub fn named_tensors(&self) -> Vec<(String, Tensor)> {
        let c = self.config.channels;
        let mut out = Vec::new();
        let mut lin = |name: &str, l: &Linear| {
            out.push((format!("{name}.weight"), t(&[l.in_dim, l.out_dim], &l.w)));
            out.push((format!("{name}.bias"), t(&[l.out_dim], &l.b)));
        };
        for (s, l) in self.unify.iter().enumerate() {
            lin(&format!("unify{}", s + 1), l);
        }
        lin("mff", &self.mff);
        lin("dap", &self.dap);
        lin("vac.fc", &self.vac_fc);
        lin("fuse", &self.fuse);
        lin("head.fc1", &self.head.fc1);
        lin("head.fc2", &self.head.fc2);
        lin("head.last", &self.head.last);
        out.push(("vac.omega".into(), t(&[1], &[self.omega])));
        out.push(("acac.w".into(), t(&[c, c], &self.acac_w)));
        for (name, m) in [
            ("vv.wq", &self.vv.wq),
            ("vv.wk", &self.vv.wk),
            ("vv.wv", &self.vv.wv),
            ("vv.wo", &self.vv.wo),
        ] {
            out.push((name.into(), t(&[c, c], m)));
        }
        out
    }

    /// Inverse of [`named_tensors`](Self::named_tensors); every tensor must be present
    /// with the shape implied by `config`.
    pub fn from_named(config: ModelConfig, mut tensors: std::collections::BTreeMap<String, Tensor>) -> Result<Self> {
        let template = Self::shape_template(config)?;
        let mut take = |name: &str| -> Result<Vec<f32>> {
            let expect = template
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, s)| s.clone())
                .expect("template covers every name");
            let t = tensors
                .remove(name)
                .ok_or_else(|| Error::Invariant(format!("weights missing tensor {name}")))?;
            t.expect_shape(name, &expect)?;
            Ok(t.into_data())
        };
        let mut lin = |name: &str, i: usize, o: usize| -> Result<Linear> {
            let w = take(&format!("{name}.weight"))?;
            let b = take(&format!("{name}.bias"))?;
            Linear::new(i, o, w, b)
        };
        let c = config.channels;
        let unify = [
            lin("unify1", STAGE_CHANNELS[0], c)?,
            lin("unify2", STAGE_CHANNELS[1], c)?,
            lin("unify3", STAGE_CHANNELS[2], c)?,
            lin("unify4", STAGE_CHANNELS[3], c)?,
        ];
        let mff = lin("mff", config.all_tokens(), config.fine_tokens())?;
        let dap = lin("dap", 4 * c, c)?;
        let vac_fc = lin("vac.fc", c, 1)?;
        let fuse = lin("fuse", 2 * c, c)?;
        let head = HeadWeights {
            fc1: lin("head.fc1", c, config.mlp_hidden)?,
            fc2: lin("head.fc2", config.mlp_hidden, 1)?,
            last: lin("head.last", config.sequence_len(), 1)?,
        };
        let omega = take("vac.omega")?[0];
        let acac_w = take("acac.w")?;
        let vv = AttentionWeights {
            heads: config.heads,
            wq: take("vv.wq")?,
            wk: take("vv.wk")?,
            wv: take("vv.wv")?,
            wo: take("vv.wo")?,
        };
        if let Some(extra) = tensors.keys().next() {
            return Err(Error::Invariant(format!("unexpected tensor {extra} in weights")));
        }
        let w = Self {
            config,
            unify,
            mff,
            dap,
            vac_fc,
            omega,
            acac_w,
            fuse,
            vv,
            head,
        };
        if !w.is_finite() {
            return Err(Error::Invariant("non-finite weight".into()));
        }
        Ok(w)
    }

    fn shape_template(config: ModelConfig) -> Result<Vec<(String, Vec<usize>)>> {
        config.validate()?;
        let mut z = Self::init(config, 0)?;
        z.omega = 0.0;
        Ok(z.named_tensors().into_iter().map(|(n, t)| (n, t.shape().to_vec())).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.named_tensors().iter().all(|(_, t)| t.is_finite())
    }
}

fn t(shape: &[usize], data: &[f32]) -> Tensor {
    Tensor::from_vec(shape, data.to_vec()).expect("shape matches data")
}
