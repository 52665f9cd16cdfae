use oiqa_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Channel widths of the four backbone stages.
pub const STAGE_CHANNELS: [usize; 4] = [256, 512, 1024, 1024];
/// Spatial stride of each stage relative to the viewport.
pub const STAGE_STRIDES: [usize; 4] = [8, 16, 32, 32];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Upsample {
    Nearest,
    #[default]
    Bilinear,
}

/// Which axis of the channel attention matrix is normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CamAxis {
    /// Each row `i` sums to 1 over `j`.
    #[default]
    Row,
    /// Each column `j` sums to 1 over `i`.
    Column,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Viewports per image.
    pub m: usize,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub heads: usize,
    pub mlp_hidden: usize,
    pub upsample: Upsample,
    pub cam_axis: CamAxis,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            m: 8,
            height: 224,
            width: 224,
            channels: 128,
            heads: 4,
            mlp_hidden: 64,
            upsample: Upsample::Bilinear,
            cam_axis: CamAxis::Row,
        }
    }
}

impl ModelConfig {
    pub fn with_viewports(m: usize, height: usize, width: usize) -> Self {
        Self { m, height, width, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Domain("at least one viewport required".into()));
        }
        if self.height == 0 || self.width == 0 || !self.height.is_multiple_of(32) || !self.width.is_multiple_of(32) {
            return Err(Error::Domain(format!(
                "viewport {}x{} must be a positive multiple of 32",
                self.width, self.height
            )));
        }
        if self.heads == 0 || !self.channels.is_multiple_of(self.heads) {
            return Err(Error::Domain(format!("{} channels do not split into {} heads", self.channels, self.heads)));
        }
        if self.mlp_hidden == 0 {
            return Err(Error::Domain("head hidden width must be positive".into()));
        }
        Ok(())
    }

    /// `(h, w)` of stage `s` (0-based).
    pub fn stage_dims(&self, s: usize) -> (usize, usize) {
        (self.height / STAGE_STRIDES[s], self.width / STAGE_STRIDES[s])
    }

    /// Tokens per viewport at the finest stage, `HW/64`.
    pub fn fine_tokens(&self) -> usize {
        let (h, w) = self.stage_dims(0);
        h * w
    }

    /// Tokens per viewport across all stages before fusion.
    pub fn all_tokens(&self) -> usize {
        (0..4).map(|s| {
            let (h, w) = self.stage_dims(s);
            h * w
        })
        .sum()
    }

    /// Rows entering the viewport aggregation, `M * HW / 64`.
    pub fn sequence_len(&self) -> usize {
        self.m * self.fine_tokens()
    }

    pub fn head_dim(&self) -> usize {
        self.channels / self.heads
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_arithmetic() {
        let c = ModelConfig::default();
        assert_eq!(c.fine_tokens(), 784);
        assert_eq!(c.all_tokens(), 784 + 196 + 49 + 49);
        assert_eq!(c.sequence_len(), 6272);
        assert_eq!(c.head_dim(), 32);
    }

    #[test]
    fn rejects_unaligned_viewports() {
        assert!(ModelConfig::with_viewports(2, 16, 16).validate().is_err());
        assert!(ModelConfig::with_viewports(2, 32, 64).validate().is_ok());
        assert!(ModelConfig::with_viewports(0, 32, 32).validate().is_err());
    }
}
