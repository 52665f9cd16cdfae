//! Quality regression head and training loss.

use oiqa_core::{Error, Result};

use crate::tensor::Tensor;
use crate::weights::HeadWeights;

/// Exact GELU, `x * Phi(x)`.
pub fn gelu(x: f32) -> f32 {
    0.5 * x * (1.0 + libm::erff(x / std::f32::consts::SQRT_2))
}

/// Per-token scores `o` (`L`), computed by the two-layer MLP.
pub fn token_scores(vf: &Tensor, head: &HeadWeights) -> Result<Vec<f32>> {
    let c = head.fc1.in_dim;
    if vf.shape().len() != 2 || vf.shape()[1] != c {
        return Err(Error::DimensionMismatch(format!("head expects L x {c}, got {:?}", vf.shape())));
    }
    let mut hidden = head.fc1.forward_rows(vf.data());
    hidden.iter_mut().for_each(|v| *v = gelu(*v));
    Ok(head.fc2.forward_rows(&hidden))
}

/// Scalar quality `q`: the token scores collapsed by the final linear.
pub fn predict_quality(vf: &Tensor, head: &HeadWeights) -> Result<f32> {
    let o = token_scores(vf, head)?;
    if o.len() != head.last.in_dim {
        return Err(Error::DimensionMismatch(format!(
            "{} tokens, final layer expects {}",
            o.len(),
            head.last.in_dim
        )));
    }
    Ok(head.last.forward_rows(&o)[0])
}

/// Mean squared error between predictions and targets.
pub fn l2_loss(predicted: &[f64], target: &[f64]) -> Result<f64> {
    if predicted.len() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions vs {} targets",
            predicted.len(),
            target.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Domain("loss of an empty batch".into()));
    }
    Ok(predicted.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / predicted.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Linear;

    #[test]
    fn gelu_reference_points() {
        assert_eq!(gelu(0.0), 0.0);
        assert!((gelu(1.0) - 0.841_344_7).abs() < 1e-6);
        assert!((gelu(-1.0) + 0.158_655_3).abs() < 1e-6);
    }

    #[test]
    fn zero_features_give_composed_biases() {
        let head = HeadWeights {
            fc1: Linear::new(2, 2, vec![1.0, 2.0, 3.0, 4.0], vec![0.5, -0.5]).unwrap(),
            fc2: Linear::new(2, 1, vec![2.0, 1.0], vec![0.25]).unwrap(),
            last: Linear::new(3, 1, vec![1.0, -2.0, 0.5], vec![0.1]).unwrap(),
        };
        let q = predict_quality(&Tensor::zeros(&[3, 2]), &head).unwrap();
        let o = 2.0 * gelu(0.5) + gelu(-0.5) + 0.25;
        assert!((q - (o * (1.0 - 2.0 + 0.5) + 0.1)).abs() < 1e-6);
    }

    #[test]
    fn final_weight_scales_linearly() {
        let mut head = HeadWeights {
            fc1: Linear::new(2, 2, vec![0.1, -0.3, 0.7, 0.2], vec![0.0, 0.1]).unwrap(),
            fc2: Linear::new(2, 1, vec![1.5, -0.5], vec![0.2]).unwrap(),
            last: Linear::new(2, 1, vec![0.4, 0.9], vec![0.3]).unwrap(),
        };
        let vf = Tensor::from_vec(&[2, 2], vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let q1 = predict_quality(&vf, &head).unwrap();
        head.last.w.iter_mut().for_each(|w| *w *= 2.0);
        let q2 = predict_quality(&vf, &head).unwrap();
        assert!((q2 - 0.3 - 2.0 * (q1 - 0.3)).abs() < 1e-6);
    }

    #[test]
    fn loss_cases() {
        assert_eq!(l2_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(l2_loss(&[1.0], &[3.0]).unwrap(), 4.0);
        assert!(l2_loss(&[], &[]).is_err());
        assert!(l2_loss(&[1.0], &[1.0, 2.0]).is_err());
    }
}
